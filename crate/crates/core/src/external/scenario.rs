use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};
use thiserror::Error;

use crate::bus::ChannelConfig;
use crate::decision::Goal;
use crate::params::Params;
use crate::sim::{clearance, Pose2D, WorldModel};
use crate::Tick;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: at `{field}`: {message}")]
    Parse { path: PathBuf, field: String, message: String },
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BackendKind {
    /// No decision layer at all.
    None,
    #[default]
    Rule,
    Hallucinate,
    Llm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentConfig {
    pub backend: BackendKind,
    /// Backend wrapped by HALLUCINATE.
    pub inner: BackendKind,
    pub hallucination_prob: f64,
    /// Tick at which the agent is terminated for good.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kill_tick: Option<Tick>,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self { backend: BackendKind::Rule, inner: BackendKind::Rule, hallucination_prob: 0.0, kill_tick: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelsConfig {
    pub sensor: ChannelConfig,
    pub command: ChannelConfig,
    pub feedback: ChannelConfig,
    pub data: ChannelConfig,
    pub tasks: ChannelConfig,
}

impl Default for ChannelsConfig {
    fn default() -> Self {
        Self {
            sensor: ChannelConfig::with_latency(0),
            command: ChannelConfig::with_latency(2),
            feedback: ChannelConfig::with_latency(2),
            data: ChannelConfig::with_latency(2),
            tasks: ChannelConfig::with_latency(0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSpec {
    /// Defaults to the task's 1-based position in the list.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<u64>,
    #[serde(default)]
    pub issue_tick: Tick,
    pub goal: Goal,
}

fn default_ticks() -> Tick {
    6000
}

/// Everything needed to reproduce a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_ticks")]
    pub ticks: Tick,
    #[serde(default)]
    pub params: Params,
    pub world: WorldModel,
    #[serde(default)]
    pub start: Pose2D,
    #[serde(default)]
    pub tasks: Vec<TaskSpec>,
    #[serde(default)]
    pub agent: AgentConfig,
    #[serde(default)]
    pub channels: ChannelsConfig,
}

impl Scenario {
    /// A scenario with default settings and no tasks.
    pub fn new(world: WorldModel, start: Pose2D) -> Self {
        Self {
            seed: 0,
            ticks: default_ticks(),
            params: Params::default(),
            world,
            start,
            tasks: Vec::new(),
            agent: AgentConfig::default(),
            channels: ChannelsConfig::default(),
        }
    }

    /// Parses JSON text. Errors name the offending field path.
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let scenario: Scenario = serde_path_to_error::deserialize(de).map_err(|e| ScenarioError::Parse {
            path: PathBuf::from("<inline>"),
            field: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn task_id(&self, index: usize) -> u64 {
        self.tasks[index].id.unwrap_or(index as u64 + 1)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let invalid = |m: String| Err(ScenarioError::Invalid(m));
        self.params.validate().map_err(ScenarioError::Invalid)?;
        self.world.validate().map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        let p = self.start.xy();
        if !(p.is_finite() && self.start.theta.is_finite()) {
            return invalid("start: non-finite pose".into());
        }
        if !self.world.bounds.contains(p) {
            return invalid("start: outside world.bounds".into());
        }
        if clearance(&self.world, p) < self.params.robot_radius {
            return invalid("start: robot body overlaps an obstacle".into());
        }
        for (i, t) in self.tasks.iter().enumerate() {
            t.goal.validate().map_err(|e| ScenarioError::Invalid(format!("tasks[{i}].goal: {e}")))?;
        }
        let mut ids: Vec<u64> = (0..self.tasks.len()).map(|i| self.task_id(i)).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return invalid("tasks: duplicate task id".into());
        }
        let a = &self.agent;
        if !(0.0..=1.0).contains(&a.hallucination_prob) {
            return invalid(format!("agent.hallucination_prob: {} outside [0, 1]", a.hallucination_prob));
        }
        if a.backend == BackendKind::Hallucinate && matches!(a.inner, BackendKind::Hallucinate | BackendKind::None) {
            return invalid("agent.inner: HALLUCINATE must wrap RULE or LLM".into());
        }
        let ch = &self.channels;
        for (name, c) in
            [("sensor", ch.sensor), ("command", ch.command), ("feedback", ch.feedback), ("data", ch.data), ("tasks", ch.tasks)]
        {
            if !(0.0..=1.0).contains(&c.drop_probability) {
                return invalid(format!("channels.{name}.drop_probability: {} outside [0, 1]", c.drop_probability));
            }
        }
        Ok(())
    }
}

/// Reads, parses and validates a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io { path: path.to_path_buf(), source })?;
    Scenario::from_json(&text).map_err(|e| match e {
        ScenarioError::Parse { field, message, .. } => ScenarioError::Parse { path: path.to_path_buf(), field, message },
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "world": {"bounds": {"min": {"x": -5, "y": -5}, "max": {"x": 5, "y": 5}}},
        "tasks": [{"goal": {"type": "GOTO", "x": 3, "y": 2}}]
    }"#;

    #[test]
    fn minimal_gets_defaults() {
        let s = Scenario::from_json(MINIMAL).unwrap();
        assert_eq!(s.params, Params::default());
        assert_eq!(s.channels, ChannelsConfig::default());
        assert_eq!(s.agent.backend, BackendKind::Rule);
        assert_eq!(s.task_id(0), 1);
        assert_eq!(s.ticks, 6000);
    }

    #[test]
    fn unknown_key_is_named() {
        let text = MINIMAL.replacen("\"tasks\"", "\"params\": {\"robo_speed\": 2}, \"tasks\"", 1);
        let err = Scenario::from_json(&text).unwrap_err().to_string();
        assert!(err.contains("robo_speed"), "{err}");
        assert!(err.contains("params"), "{err}");
    }

    #[test]
    fn round_trip() {
        let mut s = Scenario::from_json(MINIMAL).unwrap();
        s.agent.kill_tick = Some(500);
        s.channels.command.drop_probability = 0.1;
        let again = Scenario::from_json(&s.to_json()).unwrap();
        assert_eq!(s, again);
    }

    #[test]
    fn invariant_violations_name_the_field() {
        let text = MINIMAL.replacen("\"tasks\"", "\"agent\": {\"hallucination_prob\": 1.5}, \"tasks\"", 1);
        let err = Scenario::from_json(&text).unwrap_err().to_string();
        assert!(err.contains("agent.hallucination_prob"), "{err}");
        let text = MINIMAL.replacen("\"tasks\"", "\"start\": {\"x\": 9, \"y\": 0}, \"tasks\"", 1);
        assert!(Scenario::from_json(&text).unwrap_err().to_string().contains("start"));
    }

    #[test]
    fn missing_world_is_rejected() {
        let err = Scenario::from_json(r#"{"tasks": []}"#).unwrap_err().to_string();
        assert!(err.contains("world"), "{err}");
    }
}
