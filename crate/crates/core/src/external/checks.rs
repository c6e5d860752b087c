//! Trace invariants. Each check takes a whole trace and reports the first
//! violation it finds.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::instinct::{CommandId, FeedbackStatus, Parent};
use crate::trace::{EventBody, Layer, TraceEvent};
use crate::Tick;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub check: &'static str,
    pub tick: Tick,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} violated at tick {}: {}", self.check, self.tick, self.message)
    }
}

impl std::error::Error for Violation {}

type Check = Result<(), Violation>;

fn fail(check: &'static str, tick: Tick, message: impl Into<String>) -> Check {
    Err(Violation { check, tick, message: message.into() })
}

/// Events grouped by tick, in trace order.
fn by_tick(events: &[TraceEvent]) -> impl Iterator<Item = &[TraceEvent]> {
    events.chunk_by(|a, b| a.tick == b.tick)
}

fn is_command_delivery(body: &EventBody) -> bool {
    matches!(body, EventBody::Delivered { channel, .. } if channel == "command")
}

/// Per tick, the instinct loop runs in its fixed order: status first, then
/// survival work, then command handling; on an unsafe tick no command is
/// even polled. Also requires a status event on every simulated tick.
pub fn check_loop_order(events: &[TraceEvent]) -> Check {
    const NAME: &str = "loop-order";
    for group in by_tick(events) {
        let tick = group[0].tick;
        let simulated = group.iter().any(|e| matches!(e.body, EventBody::State { .. }));
        let instinct: Vec<&TraceEvent> = group.iter().filter(|e| e.layer == Layer::Instinct).collect();
        let statuses: Vec<bool> = instinct
            .iter()
            .filter_map(|e| match e.body {
                EventBody::Status { safe, .. } => Some(safe),
                _ => None,
            })
            .collect();
        if simulated && statuses.len() != 1 {
            return fail(NAME, tick, format!("{} status events on a simulated tick", statuses.len()));
        }
        if let Some(first) = instinct.iter().find(|e| e.body.is_survival_phase() || e.body.is_command_phase()) {
            if !matches!(first.body, EventBody::Status { .. }) {
                return fail(NAME, tick, "instinct work before the status check");
            }
        }
        let mut in_command_phase = false;
        for e in group {
            let command_event = (e.layer == Layer::Instinct && e.body.is_command_phase()) || is_command_delivery(&e.body);
            if command_event {
                if statuses.first() == Some(&false) {
                    return fail(NAME, tick, format!("command handling (seq {}) on an unsafe tick", e.seq));
                }
                in_command_phase = true;
            } else if in_command_phase && e.layer == Layer::Instinct && e.body.is_survival_phase() {
                return fail(NAME, tick, format!("survival event (seq {}) after command handling", e.seq));
            }
        }
    }
    Ok(())
}

/// Every device execution was approved by the instinct layer at or before
/// the same tick.
pub fn check_layer_attribution(events: &[TraceEvent]) -> Check {
    const NAME: &str = "layer-attribution";
    let mut approved = BTreeSet::new();
    for e in events {
        match &e.body {
            EventBody::Approved { low, .. } | EventBody::SurvivalApproved { low, .. } if e.layer == Layer::Instinct => {
                approved.insert(low.id);
            }
            EventBody::Execute { low } => {
                if e.layer != Layer::Device {
                    return fail(NAME, e.tick, format!("execution recorded at {:?}", e.layer));
                }
                if !approved.contains(&low.id) {
                    return fail(NAME, e.tick, format!("low command {} executed without approval", low.id));
                }
            }
            _ => {}
        }
    }
    Ok(())
}

/// A refused command never reaches the devices, and an agent-originated one
/// is answered with REFUSED feedback in the same tick.
pub fn check_refusals(events: &[TraceEvent]) -> Check {
    const NAME: &str = "refusal";
    let mut refused = BTreeSet::new();
    for group in by_tick(events) {
        for (i, e) in group.iter().enumerate() {
            match &e.body {
                EventBody::Refused { low, .. } | EventBody::SurvivalRefused { low, .. } => {
                    refused.insert(low.id);
                    if let Parent::High(id) = low.parent {
                        let answered = group[i..].iter().any(|f| {
                            matches!(&f.body, EventBody::Feedback { feedback }
                                if feedback.command_id == id && feedback.status == FeedbackStatus::Refused)
                        });
                        if !answered {
                            return fail(NAME, e.tick, format!("refusal of command {id} without REFUSED feedback"));
                        }
                    }
                }
                EventBody::Execute { low } if refused.contains(&low.id) => {
                    return fail(NAME, e.tick, format!("refused low command {} executed", low.id));
                }
                _ => {}
            }
        }
    }
    Ok(())
}

/// Every command the instinct layer received gets exactly one terminal
/// answer, unless it was still pending when the run ended.
pub fn check_terminal_feedback(events: &[TraceEvent]) -> Check {
    const NAME: &str = "terminal-feedback";
    let mut received: BTreeMap<CommandId, Tick> = BTreeMap::new();
    let mut terminal: BTreeMap<CommandId, u32> = BTreeMap::new();
    let mut outstanding = BTreeSet::new();
    let mut end = 0;
    for e in events {
        end = e.tick;
        match &e.body {
            EventBody::CommandReceived { command } => {
                received.insert(command.id, e.tick);
            }
            EventBody::Feedback { feedback } if e.layer == Layer::Instinct && feedback.status.is_terminal() => {
                if !received.contains_key(&feedback.command_id) {
                    return fail(NAME, e.tick, format!("terminal feedback for unknown command {}", feedback.command_id));
                }
                *terminal.entry(feedback.command_id).or_default() += 1;
            }
            EventBody::RunEnd { outstanding: o } => outstanding.extend(o.iter().copied()),
            _ => {}
        }
    }
    for (id, tick) in received {
        match terminal.get(&id).copied().unwrap_or(0) {
            0 if !outstanding.contains(&id) => {
                return fail(NAME, tick, format!("command {id} never answered (run ended at {end})"))
            }
            n if n > 1 => return fail(NAME, tick, format!("command {id} answered terminally {n} times")),
            _ => {}
        }
    }
    Ok(())
}

/// The agent never has two motion commands outstanding. A command stops
/// being outstanding once the instinct layer answers it terminally, the bus
/// drops it, or the agent gives up on it.
pub fn check_single_in_flight(events: &[TraceEvent]) -> Check {
    const NAME: &str = "single-in-flight";
    let mut open: BTreeSet<CommandId> = BTreeSet::new();
    let mut motion: BTreeSet<CommandId> = BTreeSet::new();
    let mut awaiting_send: Option<CommandId> = None;
    for e in events {
        match &e.body {
            EventBody::CommandSent { command } if e.layer == Layer::Decision => {
                if command.kind.is_motion() {
                    if let Some(other) = open.iter().find(|id| motion.contains(id)) {
                        return fail(NAME, e.tick, format!("command {} sent while {other} outstanding", command.id));
                    }
                    motion.insert(command.id);
                }
                open.insert(command.id);
                awaiting_send = Some(command.id);
            }
            EventBody::Dropped { channel, .. } if channel == "command" => {
                if let Some(id) = awaiting_send.take() {
                    open.remove(&id);
                }
            }
            EventBody::Sent { channel, .. } if channel == "command" => awaiting_send = None,
            EventBody::Feedback { feedback } if e.layer == Layer::Instinct && feedback.status.is_terminal() => {
                open.remove(&feedback.command_id);
            }
            EventBody::CommandTimeout { command_id } => {
                open.remove(command_id);
            }
            _ => {}
        }
    }
    Ok(())
}

/// Per channel, every delivery matches exactly one earlier send.
pub fn check_conservation(events: &[TraceEvent]) -> Check {
    const NAME: &str = "conservation";
    let mut sent: BTreeMap<&str, BTreeSet<u64>> = BTreeMap::new();
    let mut dropped: BTreeMap<&str, BTreeSet<u64>> = BTreeMap::new();
    let mut delivered: BTreeMap<&str, BTreeSet<u64>> = BTreeMap::new();
    for e in events {
        match &e.body {
            EventBody::Sent { channel, msg_id } => {
                if !sent.entry(channel).or_default().insert(*msg_id) {
                    return fail(NAME, e.tick, format!("{channel}: message {msg_id} sent twice"));
                }
            }
            EventBody::Dropped { channel, msg_id } => {
                dropped.entry(channel).or_default().insert(*msg_id);
            }
            EventBody::Delivered { channel, msg_id } => {
                if !sent.get(channel.as_str()).is_some_and(|s| s.contains(msg_id)) {
                    return fail(NAME, e.tick, format!("{channel}: message {msg_id} delivered but never queued"));
                }
                if !delivered.entry(channel).or_default().insert(*msg_id) {
                    return fail(NAME, e.tick, format!("{channel}: message {msg_id} delivered twice"));
                }
            }
            _ => {}
        }
    }
    for (channel, ids) in &dropped {
        if let Some(s) = sent.get(channel) {
            if let Some(id) = ids.intersection(s).next() {
                return fail(NAME, 0, format!("{channel}: message {id} both queued and dropped"));
            }
        }
    }
    Ok(())
}

/// Runs every check above.
pub fn check_all(events: &[TraceEvent]) -> Check {
    check_loop_order(events)?;
    check_layer_attribution(events)?;
    check_refusals(events)?;
    check_terminal_feedback(events)?;
    check_single_in_flight(events)?;
    check_conservation(events)
}
