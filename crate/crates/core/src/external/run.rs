use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use super::metrics::{metrics_from_trace, RunMetrics, TimingStats};
use super::scenario::{BackendKind, Scenario, ScenarioError};
use crate::bus::{Channel, SharedChannel};
use crate::decision::{Agent, AgentPorts, CompletionClient, LlmPlanner, PlannerBackend, TaskOrder};
use crate::instinct::{Feedback, HighCommand, Instinct, InstinctPorts, ScanSummary};
use crate::sim::{clearance, Device, RobotState, SensorFrame};
use crate::trace::{EventBody, Layer, Trace, TraceEvent};
use crate::Tick;

/// Stream id of the hallucination injector's generator.
const HALLUCINATION_STREAM: u64 = 0xBAD;

/// Wall-clock pacing for live mode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LiveConfig {
    /// Simulated seconds per wall-clock second.
    pub speedup: f64,
}

#[derive(Default)]
pub struct RunOptions {
    /// Run the decision layer in its own thread with wall-clock pacing.
    /// Not deterministic.
    pub live: Option<LiveConfig>,
    /// Completion endpoint for the LLM backend.
    pub llm: Option<Box<dyn CompletionClient>>,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub events: Vec<TraceEvent>,
    pub metrics: RunMetrics,
}

struct Links {
    sensor: SharedChannel<SensorFrame>,
    commands: SharedChannel<HighCommand>,
    feedback: SharedChannel<Feedback>,
    data: SharedChannel<ScanSummary>,
    tasks: SharedChannel<TaskOrder>,
}

impl Links {
    fn new(s: &Scenario) -> Self {
        let c = &s.channels;
        Self {
            sensor: SharedChannel::new(Channel::new("sensor", c.sensor, s.seed, 1)),
            commands: SharedChannel::new(Channel::new("command", c.command, s.seed, 2)),
            feedback: SharedChannel::new(Channel::new("feedback", c.feedback, s.seed, 3)),
            data: SharedChannel::new(Channel::new("data", c.data, s.seed, 4)),
            tasks: SharedChannel::new(Channel::new("tasks", c.tasks, s.seed, 5)),
        }
    }
}

/// The agent's half of the bus.
struct AgentSide {
    agent: Agent,
    tasks: SharedChannel<TaskOrder>,
    commands: SharedChannel<HighCommand>,
    feedback: SharedChannel<Feedback>,
    data: SharedChannel<ScanSummary>,
}

impl AgentSide {
    fn tick(&mut self, now: Tick, trace: &mut Trace) {
        let mut ports = AgentPorts {
            tasks: &mut self.tasks,
            commands: &mut self.commands,
            feedback: &mut self.feedback,
            data: &mut self.data,
            trace,
        };
        self.agent.tick(now, &mut ports);
    }

    /// True once every scenario task has reached the agent and finished.
    fn all_done(&self, expected: usize) -> bool {
        let tasks = self.agent.tasks();
        expected > 0 && tasks.len() == expected && tasks.iter().all(|t| t.state.is_terminal())
    }
}

/// External layer, devices and the instinct loop.
struct SimSide<'s> {
    scenario: &'s Scenario,
    device: Device,
    instinct: Instinct,
    links: Links,
    timings_us: Vec<f64>,
}

impl<'s> SimSide<'s> {
    fn new(scenario: &'s Scenario) -> Self {
        let p = &scenario.params;
        Self {
            scenario,
            device: Device::new(scenario.world.clone(), RobotState::at(scenario.start), p.clone(), scenario.seed),
            instinct: Instinct::new(p.clone(), scenario.world.bounds, scenario.seed),
            links: Links::new(scenario),
            timings_us: Vec::new(),
        }
    }

    /// Task injection, device step, sensing and one instinct tick.
    fn tick(&mut self, now: Tick, trace: &mut Trace) {
        let s = self.scenario;
        for (i, spec) in s.tasks.iter().enumerate().filter(|(_, t)| t.issue_tick == now) {
            let task_id = s.task_id(i);
            trace.push(now, Layer::External, EventBody::TaskIssued { task_id, goal: spec.goal.clone() });
            trace.send(&mut self.links.tasks, TaskOrder { task_id, goal: spec.goal.clone() }, now);
        }

        self.device.step();
        let st = *self.device.state();
        let body_clearance = clearance(&s.world, st.pose.xy()) - s.params.robot_radius;
        trace.push(
            now,
            Layer::Device,
            EventBody::State {
                pose: st.pose,
                v_left: st.v_left,
                v_right: st.v_right,
                load: st.load,
                body_clearance,
                collided: st.collided,
            },
        );
        let frame = self.device.sense(now);
        trace.send(&mut self.links.sensor, frame, now);

        let mut ports = InstinctPorts {
            sensor: &mut self.links.sensor,
            commands: &mut self.links.commands,
            feedback: &mut self.links.feedback,
            data: &mut self.links.data,
            device: &mut self.device,
            trace,
        };
        let started = Instant::now();
        self.instinct.tick(now, &mut ports);
        self.timings_us.push(started.elapsed().as_secs_f64() * 1e6);
    }

    fn finish(self, last: Option<Tick>, mut trace: Trace) -> RunOutput {
        if let Some(t) = last {
            trace.push(t, Layer::External, EventBody::RunEnd { outstanding: self.instinct.outstanding() });
        }
        let events = trace.into_events();
        let mut metrics = metrics_from_trace(&events);
        metrics.instinct_tick_time = TimingStats::from_samples(&self.timings_us);
        RunOutput { events, metrics }
    }
}

fn build_backend(
    kind: BackendKind,
    scenario: &Scenario,
    llm: &mut Option<Box<dyn CompletionClient>>,
) -> Result<Option<PlannerBackend>, ScenarioError> {
    Ok(match kind {
        BackendKind::None => None,
        BackendKind::Rule => Some(PlannerBackend::Rule),
        BackendKind::Llm => {
            let client = llm.take().ok_or_else(|| {
                ScenarioError::Invalid("agent.backend: LLM selected but no completion client configured".into())
            })?;
            Some(PlannerBackend::Llm(LlmPlanner::new(client)))
        }
        BackendKind::Hallucinate => {
            let inner = build_backend(scenario.agent.inner, scenario, llm)?
                .ok_or_else(|| ScenarioError::Invalid("agent.inner: nothing to wrap".into()))?;
            let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
            rng.set_stream(HALLUCINATION_STREAM);
            Some(PlannerBackend::Hallucinate {
                inner: Box::new(inner),
                probability: scenario.agent.hallucination_prob,
                rng,
            })
        }
    })
}

/// Runs a scenario to its tick limit, or until every task has finished.
/// In the default mode the result is a pure function of the scenario.
pub fn run_sim(scenario: &Scenario, mut options: RunOptions) -> Result<RunOutput, ScenarioError> {
    scenario.validate()?;
    let backend = build_backend(scenario.agent.backend, scenario, &mut options.llm)?;
    let sim = SimSide::new(scenario);
    let agent = backend.map(|b| AgentSide {
        agent: Agent::new(scenario.params.clone(), b),
        tasks: sim.links.tasks.clone(),
        commands: sim.links.commands.clone(),
        feedback: sim.links.feedback.clone(),
        data: sim.links.data.clone(),
    });
    Ok(match options.live {
        None => run_logical(sim, agent),
        Some(live) => run_live(sim, agent, live),
    })
}

fn run_logical(mut sim: SimSide<'_>, mut agent: Option<AgentSide>) -> RunOutput {
    let s = sim.scenario;
    let mut trace = Trace::new();
    let mut last = None;
    for now in 0..s.ticks {
        sim.tick(now, &mut trace);
        if s.agent.kill_tick == Some(now) && agent.take().is_some() {
            trace.push(now, Layer::External, EventBody::AgentKilled {});
        }
        if let Some(a) = agent.as_mut() {
            if a.agent.is_due(now) {
                a.tick(now, &mut trace);
            }
        }
        last = Some(now);
        if agent.as_ref().is_some_and(|a| a.all_done(s.tasks.len())) {
            break;
        }
    }
    sim.finish(last, trace)
}

fn run_live(mut sim: SimSide<'_>, agent: Option<AgentSide>, live: LiveConfig) -> RunOutput {
    let s = sim.scenario;
    let clock = Arc::new(AtomicU64::new(0));
    let published = Arc::new(AtomicBool::new(false));
    let stop = Arc::new(AtomicBool::new(false));
    let done = Arc::new(AtomicBool::new(false));
    let period = s.params.agent_period.max(1);
    let expected = s.tasks.len();

    let handle = agent.map(|mut a| {
        let (clock, published, stop, done) = (clock.clone(), published.clone(), stop.clone(), done.clone());
        thread::spawn(move || {
            let mut trace = Trace::new();
            let mut next_due = 0;
            while !stop.load(Ordering::Acquire) {
                let now = clock.load(Ordering::Acquire);
                if published.load(Ordering::Acquire) && now >= next_due {
                    a.tick(now, &mut trace);
                    next_due = (now / period + 1) * period;
                    if a.all_done(expected) {
                        done.store(true, Ordering::Release);
                    }
                } else {
                    thread::sleep(Duration::from_micros(200));
                }
            }
            trace
        })
    });

    let mut trace = Trace::new();
    let mut last = None;
    let started = Instant::now();
    let tick_wall = s.params.dt / live.speedup.max(1e-9);
    for now in 0..s.ticks {
        sim.tick(now, &mut trace);
        clock.store(now, Ordering::Release);
        published.store(true, Ordering::Release);
        if s.agent.kill_tick == Some(now) && !stop.swap(true, Ordering::AcqRel) && handle.is_some() {
            trace.push(now, Layer::External, EventBody::AgentKilled {});
        }
        last = Some(now);
        if done.load(Ordering::Acquire) {
            break;
        }
        let due = started + Duration::from_secs_f64(tick_wall * (now + 1) as f64);
        if let Some(wait) = due.checked_duration_since(Instant::now()) {
            thread::sleep(wait);
        }
    }
    stop.store(true, Ordering::Release);
    let mut parts = vec![trace];
    if let Some(h) = handle {
        parts.push(h.join().expect("agent thread panicked"));
    }
    sim.finish(last, Trace::merge(parts))
}
