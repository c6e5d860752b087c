use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, VecDeque};

use super::hallucinate::hallucinate_wrap;
use super::llm::LlmPlanner;
use super::map::FreeSpaceMap;
use super::planner::plan_rule;
use super::reflection::{self_reflection, ReflectionNote};
use super::task::{Goal, Task, TaskState};
use crate::bus::{Link, MemoryPayload, MemoryRecord, MemoryStore, Origin};
use crate::instinct::{CommandId, Feedback, FeedbackStatus, HighCommand, HighCommandKind, ScanSummary};
use crate::params::Params;
use crate::trace::{EventBody, Layer, Trace};
use crate::Tick;

/// A goal handed down from the external layer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskOrder {
    pub task_id: u64,
    pub goal: Goal,
}

/// The decision layer's view of the bus.
pub struct AgentPorts<'a> {
    pub tasks: &'a mut dyn Link<TaskOrder>,
    pub commands: &'a mut dyn Link<HighCommand>,
    pub feedback: &'a mut dyn Link<Feedback>,
    pub data: &'a mut dyn Link<ScanSummary>,
    pub trace: &'a mut Trace,
}

/// Which planner fills the planning and tool-use stages.
#[derive(Debug)]
pub enum PlannerBackend {
    Rule,
    /// Wraps another backend and swaps its commands for adversarial ones.
    Hallucinate { inner: Box<PlannerBackend>, probability: f64, rng: ChaCha8Rng },
    Llm(LlmPlanner),
}

#[derive(Clone, Debug)]
struct InFlight {
    id: CommandId,
    /// Last tick anything was heard about this command.
    last_heard: Tick,
}

pub struct Agent {
    params: Params,
    backend: PlannerBackend,
    tasks: Vec<Task>,
    notes: ReflectionNote,
    map: FreeSpaceMap,
    summary: Option<ScanSummary>,
    plan: VecDeque<HighCommandKind>,
    in_flight: Option<InFlight>,
    sent: BTreeMap<CommandId, HighCommandKind>,
    next_id: CommandId,
    memory: MemoryStore,
}

enum PlanOutcome {
    Commands(Vec<HighCommandKind>),
    Failed(String),
}

fn plan_with(
    backend: &mut PlannerBackend,
    task: &Task,
    notes: &ReflectionNote,
    map: &FreeSpaceMap,
    summary: &ScanSummary,
    params: &Params,
    now: Tick,
    trace: &mut Trace,
) -> PlanOutcome {
    match backend {
        PlannerBackend::Rule => PlanOutcome::Commands(plan_rule(task, notes, summary, map, params)),
        PlannerBackend::Llm(llm) => match llm.plan(task, notes, summary, params) {
            Ok(cmds) => PlanOutcome::Commands(cmds),
            Err(e) => PlanOutcome::Failed(e.to_string()),
        },
        PlannerBackend::Hallucinate { inner, probability, rng } => {
            match plan_with(inner, task, notes, map, summary, params, now, trace) {
                PlanOutcome::Commands(cmds) => {
                    let (out, swaps) = hallucinate_wrap(cmds, *probability, summary, params, rng);
                    for s in swaps {
                        trace.push(
                            now,
                            Layer::Decision,
                            EventBody::Hallucinated { original: s.original, replacement: s.replacement },
                        );
                    }
                    PlanOutcome::Commands(out)
                }
                failed => failed,
            }
        }
    }
}

impl Agent {
    pub fn new(params: Params, backend: PlannerBackend) -> Self {
        Self {
            params,
            backend,
            tasks: Vec::new(),
            notes: ReflectionNote::default(),
            map: FreeSpaceMap::new(),
            summary: None,
            plan: VecDeque::new(),
            in_flight: None,
            sent: BTreeMap::new(),
            next_id: 0,
            memory: MemoryStore::new(),
        }
    }

    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    pub fn notes(&self) -> &ReflectionNote {
        &self.notes
    }

    /// Free space learned from every summary seen so far.
    pub fn map(&self) -> &FreeSpaceMap {
        &self.map
    }

    pub fn memory(&self) -> &MemoryStore {
        &self.memory
    }

    /// Id of the command awaiting a terminal answer, if any.
    pub fn in_flight(&self) -> Option<CommandId> {
        self.in_flight.as_ref().map(|f| f.id)
    }

    /// Whether the agent loop should run on physics tick `now`.
    pub fn is_due(&self, now: Tick) -> bool {
        now % self.params.agent_period.max(1) == 0
    }

    fn remember(&mut self, now: Tick, payload: MemoryPayload, trace: &mut Trace) {
        let record = MemoryRecord { tick: now, origin: Origin::Decision, payload };
        self.memory.record(record.clone()).expect("decision memory out of order");
        trace.push(now, Layer::Decision, EventBody::Memory { record });
    }

    /// Index of the task being worked on: the oldest one not yet finished.
    fn current(&self) -> Option<usize> {
        self.tasks.iter().position(|t| !t.state.is_terminal())
    }

    fn finish(&mut self, idx: usize, to: TaskState, reason: &str, now: Tick, trace: &mut Trace) {
        if !self.tasks[idx].transition(to) {
            return;
        }
        let task_id = self.tasks[idx].id;
        let payload = match to {
            TaskState::Completed => MemoryPayload::TaskCompleted { task_id },
            _ => MemoryPayload::TaskBlocked { task_id, reason: reason.to_string() },
        };
        self.remember(now, payload, trace);
        self.plan.clear();
        self.notes = ReflectionNote::default();
    }

    /// Decides what a terminal answer about the in-flight command means for
    /// the task.
    fn settle(&mut self, fb: &Feedback, summary: &ScanSummary, now: Tick, trace: &mut Trace) {
        let Some(idx) = self.current() else { return };
        match fb.status {
            FeedbackStatus::Completed => {
                if !self.plan.is_empty() {
                    return;
                }
                let here = summary.pose_estimate.xy();
                let task = &mut self.tasks[idx];
                let arrived = task.current_target().map(|t| here.dist(t) <= self.params.goal_tolerance);
                match (&task.goal, arrived) {
                    (Goal::Hold, _) | (Goal::Goto { .. }, Some(true)) => {
                        self.finish(idx, TaskState::Completed, "", now, trace)
                    }
                    (Goal::Patrol { waypoints }, Some(true)) => {
                        task.progress += 1;
                        if task.progress >= waypoints.len() {
                            self.finish(idx, TaskState::Completed, "", now, trace);
                        }
                    }
                    _ => {}
                }
            }
            _ => {
                self.plan.clear();
                if self.notes.consecutive_failures >= self.params.failure_cap {
                    let reason = self.notes.last_refusal_reason.clone().unwrap_or_default();
                    self.finish(idx, TaskState::Blocked, &reason, now, trace);
                }
            }
        }
    }

    /// One pass of the agent loop: interaction, reflection, planning, tool
    /// use, task update.
    pub fn tick(&mut self, now: Tick, ports: &mut AgentPorts<'_>) {
        let before: Vec<(TaskState, u32)> = self.tasks.iter().map(|t| (t.state, t.attempts)).collect();

        // Interaction: new tasks, feedback, latest summary.
        for order in ports.trace.receive(ports.tasks, now) {
            ports.trace.push(now, Layer::Decision, EventBody::TaskReceived { task_id: order.task_id });
            self.tasks.push(Task::new(order.task_id, order.goal));
        }
        let feedback = ports.trace.receive(ports.feedback, now);
        if let Some(s) = ports.trace.receive(ports.data, now).pop() {
            self.summary = Some(s);
        }
        let Some(summary) = self.summary.clone() else { return };
        self.map.integrate(&summary, &self.params);

        // Self-reflection.
        self.notes = self_reflection(
            std::mem::take(&mut self.notes),
            &feedback,
            &summary,
            &self.sent,
            now,
            &self.params,
        );
        if !feedback.is_empty() {
            ports.trace.push(
                now,
                Layer::Decision,
                EventBody::Reflection {
                    blocked_sectors: self.notes.blocked_sectors(),
                    consecutive_failures: self.notes.consecutive_failures,
                },
            );
        }
        for fb in &feedback {
            let Some(flight) = self.in_flight.as_mut().filter(|f| f.id == fb.command_id) else { continue };
            flight.last_heard = now;
            if fb.status.is_terminal() {
                self.in_flight = None;
                self.settle(fb, &summary, now, ports.trace);
            }
        }
        if let Some(f) = &self.in_flight {
            if now.saturating_sub(f.last_heard) > self.params.command_timeout {
                ports.trace.push(now, Layer::Decision, EventBody::CommandTimeout { command_id: f.id });
                self.in_flight = None;
                self.plan.clear();
            }
        }

        // Planning.
        if let Some(idx) = self.current() {
            self.tasks[idx].transition(TaskState::Active);
            if self.in_flight.is_none() && self.plan.is_empty() {
                let outcome = plan_with(
                    &mut self.backend,
                    &self.tasks[idx],
                    &self.notes,
                    &self.map,
                    &summary,
                    &self.params,
                    now,
                    ports.trace,
                );
                match outcome {
                    PlanOutcome::Commands(cmds) if cmds.is_empty() => {}
                    PlanOutcome::Commands(cmds) => {
                        self.tasks[idx].attempts += 1;
                        self.plan.extend(cmds);
                    }
                    PlanOutcome::Failed(error) => {
                        self.tasks[idx].attempts += 1;
                        let task_id = self.tasks[idx].id;
                        ports.trace.push(now, Layer::Decision, EventBody::PlannerError { task_id, error });
                    }
                }
            }

            // Tool use: one command at a time.
            if self.in_flight.is_none() {
                if let Some(kind) = self.plan.pop_front() {
                    let id = self.next_id;
                    self.next_id += 1;
                    let command = HighCommand { id, kind: kind.clone(), issued_tick: now };
                    ports.trace.push(now, Layer::Decision, EventBody::CommandSent { command: command.clone() });
                    ports.trace.send(ports.commands, command, now);
                    self.sent.insert(id, kind);
                    self.in_flight = Some(InFlight { id, last_heard: now });
                }
            }
        }

        // Task update.
        for (i, t) in self.tasks.iter().enumerate() {
            if before.get(i) != Some(&(t.state, t.attempts)) {
                ports.trace.push(
                    now,
                    Layer::Decision,
                    EventBody::TaskUpdate { task_id: t.id, state: t.state, attempts: t.attempts },
                );
            }
        }
    }
}
