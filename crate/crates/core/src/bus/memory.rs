use serde::{Deserialize, Serialize};
use std::ops::RangeInclusive;
use thiserror::Error;

use crate::instinct::{CommandId, SafetyVerdict};
use crate::Tick;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Origin {
    Instinct,
    Decision,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum MemoryPayload {
    Refusal { command_id: CommandId, low_id: u64, verdict: SafetyVerdict },
    SafeModeEntered { reason: String },
    SafeModeExited,
    TaskCompleted { task_id: u64 },
    TaskBlocked { task_id: u64, reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemoryRecord {
    pub tick: Tick,
    pub origin: Origin,
    pub payload: MemoryPayload,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MemoryError {
    #[error("memory record at tick {got} appended after tick {last}")]
    OutOfOrder { last: Tick, got: Tick },
}

/// Append-only event log, ordered by tick.
#[derive(Clone, Debug, Default)]
pub struct MemoryStore {
    records: Vec<MemoryRecord>,
}

impl MemoryStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, record: MemoryRecord) -> Result<(), MemoryError> {
        if let Some(last) = self.records.last() {
            if record.tick < last.tick {
                return Err(MemoryError::OutOfOrder { last: last.tick, got: record.tick });
            }
        }
        self.records.push(record);
        Ok(())
    }

    pub fn query(&self, ticks: RangeInclusive<Tick>) -> &[MemoryRecord] {
        let lo = self.records.partition_point(|r| r.tick < *ticks.start());
        let hi = self.records.partition_point(|r| r.tick <= *ticks.end());
        if lo >= hi {
            &[]
        } else {
            &self.records[lo..hi]
        }
    }

    pub fn records(&self) -> &[MemoryRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}
