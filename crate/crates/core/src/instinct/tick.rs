use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::VecDeque;

use super::command::{
    Feedback, FeedbackStatus, HighCommand, LowCommand, LowCommandKind, Parent, SafetyVerdict,
    ScanSummary, VerdictReason,
};
use super::convert::convert;
use super::safety::{safety_check, ObstacleBelief};
use super::status::{front_min, DeviceStatus, StatusMonitor, UnsafeReason};
use super::summary::summarize;
use super::survival::perform_survival_tasks;
use crate::bus::{Link, MemoryPayload, MemoryRecord, MemoryStore, Origin};
use crate::params::Params;
use crate::sim::{Actuators, Mode, Rect, SensorFrame};
use crate::trace::{EventBody, Layer, Trace};
use crate::Tick;

/// Everything the instinct layer touches during a tick. Agent-facing links
/// are only ever polled or transmitted on, never waited on.
pub struct InstinctPorts<'a> {
    pub sensor: &'a mut dyn Link<SensorFrame>,
    pub commands: &'a mut dyn Link<HighCommand>,
    pub feedback: &'a mut dyn Link<Feedback>,
    pub data: &'a mut dyn Link<ScanSummary>,
    pub device: &'a mut dyn Actuators,
    pub trace: &'a mut Trace,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TickReport {
    pub status: DeviceStatus,
    pub executed: Vec<LowCommand>,
    pub refused: Vec<(LowCommand, SafetyVerdict)>,
    pub feedback: Vec<Feedback>,
}

#[derive(Clone, Debug)]
struct ActiveCommand {
    cmd: HighCommand,
    progress: usize,
}

/// Refusal feedback for a low-level command that failed its check; `None`
/// for survival-originated commands, which have no one to answer. The caller
/// must not forward `low` to the devices.
pub fn refuse(low: &LowCommand, verdict: SafetyVerdict, now: Tick) -> Option<Feedback> {
    debug_assert!(!verdict.safe);
    match low.parent {
        Parent::High(command_id) => Some(Feedback {
            command_id,
            status: FeedbackStatus::Refused,
            reason: verdict.reason.code().to_string(),
            tick: now,
            verdict: Some(verdict),
        }),
        Parent::Survival => None,
    }
}

pub struct Instinct {
    params: Params,
    geofence: Rect,
    monitor: StatusMonitor,
    mode: Mode,
    safe_streak: u64,
    frame: Option<SensorFrame>,
    belief: Option<ObstacleBelief>,
    queue: VecDeque<ActiveCommand>,
    rng: ChaCha8Rng,
    next_low_id: u64,
    memory: MemoryStore,
}

impl Instinct {
    /// `geofence` is the arena boundary known a priori; obstacles are only
    /// known through the lidar.
    pub fn new(params: Params, geofence: Rect, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(0x1257);
        Self {
            params,
            geofence,
            monitor: StatusMonitor::new(),
            mode: Mode::Normal,
            safe_streak: 0,
            frame: None,
            belief: None,
            queue: VecDeque::new(),
            rng,
            next_low_id: 0,
            memory: MemoryStore::new(),
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn memory(&self) -> &MemoryStore {
        &self.memory
    }

    pub fn belief(&self) -> Option<&ObstacleBelief> {
        self.belief.as_ref()
    }

    /// Ids of high-level commands received but not yet answered terminally.
    pub fn outstanding(&self) -> Vec<u64> {
        self.queue.iter().map(|a| a.cmd.id).collect()
    }

    fn low(&mut self, parent: Parent, kind: LowCommandKind) -> LowCommand {
        let id = self.next_low_id;
        self.next_low_id += 1;
        LowCommand { id, parent, kind }
    }

    fn remember(&mut self, now: Tick, payload: MemoryPayload, trace: &mut Trace) {
        let record = MemoryRecord { tick: now, origin: Origin::Instinct, payload };
        // Ticks only move forward, so ordering cannot fail here.
        self.memory.record(record.clone()).expect("instinct memory out of order");
        trace.push(now, Layer::Instinct, EventBody::Memory { record });
    }

    fn execute(&mut self, now: Tick, low: &LowCommand, device: &mut dyn Actuators, trace: &mut Trace) {
        device.execute(low);
        trace.push(now, Layer::Device, EventBody::Execute { low: *low });
    }

    /// Switches to SAFE mode: wheels zeroed, queued commands answered with
    /// SAFE_MODE. Calling it again while already safe changes nothing.
    pub fn enter_safe_mode(
        &mut self,
        now: Tick,
        reason: UnsafeReason,
        device: &mut dyn Actuators,
        trace: &mut Trace,
    ) -> Vec<Feedback> {
        let entering = self.mode == Mode::Normal;
        self.mode = Mode::Safe;
        self.safe_streak = 0;
        device.set_mode(Mode::Safe);
        if entering {
            let cancelled = self.outstanding();
            trace.push(now, Layer::Instinct, EventBody::SafeModeEnter { reason, cancelled });
            self.remember(now, MemoryPayload::SafeModeEntered { reason: format!("{reason:?}") }, trace);
        }
        if entering || device.motor().is_executing() {
            let stop = self.low(Parent::Survival, LowCommandKind::StopAll);
            let verdict = SafetyVerdict::ok_unbounded();
            trace.push(now, Layer::Instinct, EventBody::SurvivalApproved { low: stop, verdict });
            self.execute(now, &stop, device, trace);
        }
        self.queue
            .drain(..)
            .map(|a| Feedback {
                command_id: a.cmd.id,
                status: FeedbackStatus::SafeMode,
                reason: format!("SAFE_MODE:{reason:?}"),
                tick: now,
                verdict: None,
            })
            .collect()
    }

    /// Counts consecutive safe ticks in SAFE mode and returns to NORMAL once
    /// the hold period has elapsed.
    fn safe_mode_hold(&mut self, now: Tick, device: &mut dyn Actuators, trace: &mut Trace) {
        if self.mode != Mode::Safe {
            return;
        }
        if self.safe_streak >= self.params.safe_hold_ticks {
            self.mode = Mode::Normal;
            self.safe_streak = 0;
            device.set_mode(Mode::Normal);
            trace.push(now, Layer::Instinct, EventBody::SafeModeExit {});
            self.remember(now, MemoryPayload::SafeModeExited, trace);
        } else {
            self.safe_streak += 1;
        }
    }

    fn publish(&mut self, now: Tick, feedback: &[Feedback], ports: &mut InstinctPorts<'_>) {
        for fb in feedback {
            ports.trace.push(now, Layer::Instinct, EventBody::Feedback { feedback: fb.clone() });
            ports.trace.send(ports.feedback, fb.clone(), now);
        }
        if let Some(frame) = &self.frame {
            let mut summary = summarize(&frame.scan, &frame.state);
            summary.mode = self.mode;
            ports.trace.send(ports.data, summary, now);
        }
    }

    /// One pass of the instinct loop. Order is fixed: acquire, status check,
    /// safe mode or survival tasks, then command handling, then feedback and
    /// data out.
    pub fn tick(&mut self, now: Tick, ports: &mut InstinctPorts<'_>) -> TickReport {
        let params = self.params.clone();
        let mut report =
            TickReport { status: DeviceStatus::Safe, executed: vec![], refused: vec![], feedback: vec![] };

        // Acquire scan and state.
        if let Some(frame) = ports.trace.receive(ports.sensor, now).pop() {
            self.belief = Some(ObstacleBelief::from_scan(&frame.scan, frame.state.pose, params.robot_radius));
            self.frame = Some(frame);
        }

        // Device status.
        let status = match &self.frame {
            None => DeviceStatus::Unsafe(UnsafeReason::NoSensorData),
            Some(f) => self.monitor.check(&f.state, &f.scan, &params),
        };
        report.status = status;
        ports.trace.push(
            now,
            Layer::Instinct,
            EventBody::Status {
                safe: status.is_safe(),
                reason: match status {
                    DeviceStatus::Unsafe(r) => Some(r),
                    DeviceStatus::Safe => None,
                },
                front_min: self.frame.as_ref().map(|f| front_min(&f.scan)),
                mode: self.mode,
            },
        );

        if let DeviceStatus::Unsafe(reason) = status {
            report.feedback = self.enter_safe_mode(now, reason, ports.device, ports.trace);
            self.publish(now, &report.feedback, ports);
            return report;
        }
        let frame = self.frame.clone().expect("safe status implies a frame");
        let belief = self.belief.clone().expect("belief built with frame");

        // Survival-essential tasks.
        self.safe_mode_hold(now, ports.device, ports.trace);
        let idle = self.queue.is_empty() && self.mode == Mode::Normal;
        let survival = perform_survival_tasks(&frame.scan, ports.device.motor(), idle, &params, &mut self.rng);
        if !survival.is_noop() {
            ports.trace.push(now, Layer::Instinct, EventBody::Survival { action: survival });
        }
        if let Some(kind) = survival.command {
            let low = self.low(Parent::Survival, kind);
            let verdict = safety_check(&low, &frame.state, &belief, &self.geofence, now, &params);
            if verdict.safe {
                ports.trace.push(now, Layer::Instinct, EventBody::SurvivalApproved { low, verdict });
                self.execute(now, &low, ports.device, ports.trace);
                report.executed.push(low);
            } else {
                ports.trace.push(now, Layer::Instinct, EventBody::SurvivalRefused { low, verdict });
                report.refused.push((low, verdict));
            }
        }

        // High-level commands.
        for cmd in ports.trace.receive(ports.commands, now) {
            ports.trace.push(now, Layer::Instinct, EventBody::CommandReceived { command: cmd.clone() });
            let rejection = if self.mode == Mode::Safe {
                Some((FeedbackStatus::SafeMode, "SAFE_MODE".to_string(), None))
            } else if let Err(e) = cmd.kind.validate(&params) {
                let verdict = SafetyVerdict::rejected(VerdictReason::LimitExceeded);
                Some((FeedbackStatus::Refused, format!("MALFORMED: {e}"), Some(verdict)))
            } else {
                None
            };
            match rejection {
                Some((status, reason, verdict)) => {
                    ports.trace.push(
                        now,
                        Layer::Instinct,
                        EventBody::CommandRejected { command_id: cmd.id, reason: reason.clone() },
                    );
                    report.feedback.push(Feedback { command_id: cmd.id, status, reason, tick: now, verdict });
                }
                None => {
                    report.feedback.push(Feedback {
                        command_id: cmd.id,
                        status: FeedbackStatus::Accepted,
                        reason: "OK".into(),
                        tick: now,
                        verdict: None,
                    });
                    self.queue.push_back(ActiveCommand { cmd, progress: 0 });
                }
            }
        }
        if self.mode == Mode::Normal {
            self.handle_active(now, &frame, &belief, survival.speed_scale, &mut report, ports);
        }

        let feedback = report.feedback.clone();
        self.publish(now, &feedback, ports);
        report
    }

    fn handle_active(
        &mut self,
        now: Tick,
        frame: &SensorFrame,
        belief: &ObstacleBelief,
        speed_scale: f64,
        report: &mut TickReport,
        ports: &mut InstinctPorts<'_>,
    ) {
        let Some(active) = self.queue.front_mut() else { return };
        let conv = convert(&active.cmd.kind, active.progress, &frame.state, &self.params);
        active.progress = conv.progress;
        let command_id = active.cmd.id;
        let low = conv.next.map(|k| k.scaled(speed_scale)).map(|k| self.low(Parent::High(command_id), k));
        ports.trace.push(now, Layer::Instinct, EventBody::Converted { command_id, low, done: conv.done });

        let Some(low) = low else {
            self.queue.pop_front();
            report.feedback.push(Feedback {
                command_id,
                status: FeedbackStatus::Completed,
                reason: "DONE".into(),
                tick: now,
                verdict: None,
            });
            return;
        };
        let verdict = safety_check(&low, &frame.state, belief, &self.geofence, now, &self.params);
        if verdict.safe {
            ports.trace.push(now, Layer::Instinct, EventBody::Approved { low, verdict });
            self.execute(now, &low, ports.device, ports.trace);
            report.executed.push(low);
            let status = if conv.done { FeedbackStatus::Completed } else { FeedbackStatus::Executing };
            if conv.done {
                self.queue.pop_front();
            }
            report.feedback.push(Feedback {
                command_id,
                status,
                reason: if conv.done { "DONE".into() } else { "OK".into() },
                tick: now,
                verdict: None,
            });
        } else {
            ports.trace.push(now, Layer::Instinct, EventBody::Refused { low, verdict });
            self.queue.pop_front();
            report.refused.push((low, verdict));
            report.feedback.extend(refuse(&low, verdict, now));
            self.remember(now, MemoryPayload::Refusal { command_id, low_id: low.id, verdict }, ports.trace);
        }
    }
}
