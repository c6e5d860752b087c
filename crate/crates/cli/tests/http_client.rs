mod common;

use common::{chat_reply, MockServer};
use instinct_cli::{HttpCompletionClient, HttpConfig};
use instinct_core::decision::{CompletionClient, LlmError};
use serde_json::Value;

fn client(server: &MockServer, key: Option<&str>) -> HttpCompletionClient {
    HttpCompletionClient::new(HttpConfig {
        endpoint: server.url.clone(),
        api_key: key.map(str::to_owned),
        model: "test-model".into(),
    })
}

#[test]
fn sends_a_chat_request_and_returns_the_reply() {
    let server = MockServer::start(vec![(200, chat_reply("[{\"kind\":\"STOP\"}]"))]);
    let reply = client(&server, Some("sekret")).complete("sys", "usr").unwrap();
    assert_eq!(reply, "[{\"kind\":\"STOP\"}]");

    let seen = server.requests();
    assert_eq!(seen.len(), 1);
    assert!(seen[0].request_line.starts_with("POST /v1/chat/completions"), "{}", seen[0].request_line);
    assert_eq!(seen[0].authorization.as_deref(), Some("Bearer sekret"));
    let body: Value = serde_json::from_str(&seen[0].body).unwrap();
    assert_eq!(body["model"], "test-model");
    assert_eq!(body["temperature"], 0);
    assert_eq!(body["messages"][0]["role"], "system");
    assert_eq!(body["messages"][0]["content"], "sys");
    assert_eq!(body["messages"][1]["role"], "user");
    assert_eq!(body["messages"][1]["content"], "usr");
}

#[test]
fn no_key_means_no_authorization_header() {
    let server = MockServer::start(vec![(200, chat_reply("ok"))]);
    client(&server, None).complete("s", "u").unwrap();
    assert_eq!(server.requests()[0].authorization, None);
}

#[test]
fn server_error_is_retried_once() {
    let server = MockServer::start(vec![(503, "{}".into()), (200, chat_reply("second"))]);
    assert_eq!(client(&server, None).complete("s", "u").unwrap(), "second");
    assert_eq!(server.requests().len(), 2);
}

#[test]
fn persistent_server_error_is_a_transport_error() {
    let server = MockServer::start(vec![(500, "{}".into())]);
    let err = client(&server, None).complete("s", "u").unwrap_err();
    assert!(matches!(&err, LlmError::Transport(m) if m.contains("500")), "{err:?}");
    assert_eq!(server.requests().len(), 2);
}

#[test]
fn client_error_is_not_retried() {
    let server = MockServer::start(vec![(401, "{}".into()), (200, chat_reply("never"))]);
    let err = client(&server, None).complete("s", "u").unwrap_err();
    assert!(matches!(&err, LlmError::Transport(m) if m.contains("401")), "{err:?}");
    assert_eq!(server.requests().len(), 1);
}

#[test]
fn response_without_content_is_malformed() {
    let server = MockServer::start(vec![(200, "{\"choices\": []}".into())]);
    let err = client(&server, None).complete("s", "u").unwrap_err();
    assert!(matches!(err, LlmError::Malformed(_)), "{err:?}");
}

#[test]
fn unreachable_endpoint_is_a_transport_error() {
    let port = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let mut c = HttpCompletionClient::new(HttpConfig {
        endpoint: format!("http://127.0.0.1:{port}/v1/chat/completions"),
        api_key: None,
        model: "m".into(),
    });
    assert!(matches!(c.complete("s", "u"), Err(LlmError::Transport(_))));
}
