use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use thiserror::Error;

use super::metrics::RunMetrics;
use crate::trace::TraceEvent;

#[derive(Debug, Error)]
#[error("{path}: {source}")]
pub struct OutputError {
    pub path: PathBuf,
    #[source]
    pub source: std::io::Error,
}

fn with_path(path: &Path) -> impl Fn(std::io::Error) -> OutputError + '_ {
    move |source| OutputError { path: path.to_path_buf(), source }
}

/// One JSON object per line, in trace order.
pub fn write_trace(events: &[TraceEvent], path: impl AsRef<Path>) -> Result<(), OutputError> {
    let path = path.as_ref();
    let mut w = BufWriter::new(File::create(path).map_err(with_path(path))?);
    for e in events {
        serde_json::to_writer(&mut w, e).map_err(|e| with_path(path)(e.into()))?;
        w.write_all(b"\n").map_err(with_path(path))?;
    }
    w.flush().map_err(with_path(path))
}

pub fn write_metrics(metrics: &RunMetrics, path: impl AsRef<Path>) -> Result<(), OutputError> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(metrics).expect("metrics serialize");
    text.push('\n');
    std::fs::write(path, text).map_err(with_path(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::{EventBody, Layer, Trace};

    #[test]
    fn one_line_per_event() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.jsonl");
        let mut t = Trace::new();
        t.push(0, Layer::External, EventBody::AgentKilled {});
        t.push(1, Layer::External, EventBody::RunEnd { outstanding: vec![] });
        write_trace(t.events(), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 2);
        write_trace(&[], &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "");
    }

    #[test]
    fn io_errors_carry_the_path() {
        let err = write_metrics(&RunMetrics::default(), "/nonexistent-dir/m.json").unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/m.json"));
    }
}
