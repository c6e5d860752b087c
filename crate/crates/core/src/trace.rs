//! Append-only per-tick event record. One run's trace plus its scenario is
//! enough to reconstruct the run; metrics are derived from it.

use serde::{Deserialize, Serialize};

use crate::bus::{Link, MemoryRecord, SendOutcome};
use crate::decision::{Goal, TaskState};
use crate::instinct::{
    CommandId, Feedback, HighCommand, HighCommandKind, LowCommand, SafetyVerdict, SurvivalAction,
    UnsafeReason,
};
use crate::sim::{Mode, Pose2D};
use crate::Tick;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Layer {
    External,
    Decision,
    Instinct,
    Device,
    Bus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum EventBody {
    // External layer / harness.
    TaskIssued { task_id: u64, goal: Goal },
    AgentKilled {},
    RunEnd { outstanding: Vec<CommandId> },

    // Decision layer.
    TaskReceived { task_id: u64 },
    Reflection { blocked_sectors: Vec<usize>, consecutive_failures: u32 },
    PlannerError { task_id: u64, error: String },
    Hallucinated { original: HighCommandKind, replacement: HighCommandKind },
    CommandSent { command: HighCommand },
    CommandTimeout { command_id: CommandId },
    TaskUpdate { task_id: u64, state: TaskState, attempts: u32 },

    // Instinct layer, survival phase.
    Status {
        safe: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        reason: Option<UnsafeReason>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        front_min: Option<f64>,
        mode: Mode,
    },
    SafeModeEnter { reason: UnsafeReason, cancelled: Vec<CommandId> },
    SafeModeExit {},
    Survival { action: SurvivalAction },
    SurvivalApproved { low: LowCommand, verdict: SafetyVerdict },
    SurvivalRefused { low: LowCommand, verdict: SafetyVerdict },

    // Instinct layer, command handling phase.
    CommandReceived { command: HighCommand },
    CommandRejected { command_id: CommandId, reason: String },
    Converted {
        command_id: CommandId,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        low: Option<LowCommand>,
        done: bool,
    },
    Approved { low: LowCommand, verdict: SafetyVerdict },
    Refused { low: LowCommand, verdict: SafetyVerdict },

    // Either layer, phase-neutral.
    Feedback { feedback: Feedback },
    Memory { record: MemoryRecord },

    // Device layer.
    State { pose: Pose2D, v_left: f64, v_right: f64, load: f64, body_clearance: f64, collided: bool },
    Execute { low: LowCommand },

    // Bus.
    Sent { channel: String, msg_id: u64 },
    Dropped { channel: String, msg_id: u64 },
    Delivered { channel: String, msg_id: u64 },
}

impl EventBody {
    /// Instinct events belonging to the survival half of the loop.
    pub fn is_survival_phase(&self) -> bool {
        matches!(
            self,
            EventBody::Status { .. }
                | EventBody::SafeModeEnter { .. }
                | EventBody::SafeModeExit {}
                | EventBody::Survival { .. }
                | EventBody::SurvivalApproved { .. }
                | EventBody::SurvivalRefused { .. }
        )
    }

    /// Instinct events belonging to high-level command handling.
    pub fn is_command_phase(&self) -> bool {
        matches!(
            self,
            EventBody::CommandReceived { .. }
                | EventBody::CommandRejected { .. }
                | EventBody::Converted { .. }
                | EventBody::Approved { .. }
                | EventBody::Refused { .. }
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub tick: Tick,
    pub seq: u64,
    pub layer: Layer,
    #[serde(flatten)]
    pub body: EventBody,
}

#[derive(Clone, Debug, Default)]
pub struct Trace {
    events: Vec<TraceEvent>,
    next_seq: u64,
}

impl Trace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, tick: Tick, layer: Layer, body: EventBody) {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.events.push(TraceEvent { tick, seq, layer, body });
    }

    pub fn events(&self) -> &[TraceEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn into_events(self) -> Vec<TraceEvent> {
        self.events
    }

    /// Transmits on `link` and records the send or drop.
    pub fn send<T>(&mut self, link: &mut dyn Link<T>, msg: T, now: Tick) -> SendOutcome {
        let outcome = link.transmit(msg, now);
        let channel = link.name().to_string();
        let body = match outcome {
            SendOutcome::Queued { id, .. } => EventBody::Sent { channel, msg_id: id },
            SendOutcome::Dropped { id } => EventBody::Dropped { channel, msg_id: id },
        };
        self.push(now, Layer::Bus, body);
        outcome
    }

    /// Polls `link` and records each delivery. Returns the payloads in order.
    pub fn receive<T>(&mut self, link: &mut dyn Link<T>, now: Tick) -> Vec<T> {
        let got = link.poll(now);
        let name = link.name().to_string();
        got.into_iter()
            .map(|env| {
                self.push(now, Layer::Bus, EventBody::Delivered { channel: name.clone(), msg_id: env.id });
                env.msg
            })
            .collect()
    }

    /// Merges traces recorded in separate execution contexts. Events are
    /// ordered by tick, then by layer, then by original order; sequence
    /// numbers are reassigned.
    pub fn merge(parts: Vec<Trace>) -> Trace {
        let mut all: Vec<(usize, TraceEvent)> =
            parts.into_iter().enumerate().flat_map(|(i, t)| t.events.into_iter().map(move |e| (i, e))).collect();
        all.sort_by_key(|(part, e)| (e.tick, *part, e.seq));
        let mut out = Trace::new();
        for (_, e) in all {
            out.push(e.tick, e.layer, e.body);
        }
        out
    }
}
