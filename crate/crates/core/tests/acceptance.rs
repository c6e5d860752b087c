//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! fails if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use common::{angle_diff, arb_world, fine_kinematics, march_ray};
use instinct_core::decision::Goal;
use instinct_core::external::{checks, run_sim, write_trace, AgentConfig, BackendKind, RunOptions, TaskSpec};
use instinct_core::instinct::safety_check;
use instinct_core::oracle::{
    agreement_report, gen_run_scenario, gen_scenario, hallucinating, oracle_safety, DT_FINE,
};
use instinct_core::sim::{clearance, raycast, step_kinematics, Point, Pose2D, Rect, RobotState, WorldModel};
use instinct_core::{EventBody, Layer, Params, RunOutput, Scenario, TraceEvent};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use serde_json::Value;

/// Ground-truth body clearance no run may go below.
const MIN_BODY_CLEARANCE: f64 = 0.10;
const RESILIENCE_RUNS: u64 = 100;
const RESILIENCE_BUDGET: Duration = Duration::from_secs(60);
const RESILIENCE_TICKS: u64 = 4000;
const DROPOUT_RUNS: u64 = 20;
const KILL_TICK: u64 = 500;
const TICKS_AFTER_KILL: u64 = 3000;
const ORACLE_CASES: u64 = 1000;
const ORACLE_BUDGET: Duration = Duration::from_secs(30);
const MAX_FALSE_REFUSAL_RATE: f64 = 0.05;
const GOTO_TICK_LIMIT: u64 = 6000;
const GOTO_TOLERANCE: f64 = 0.1;
const P99_BUDGET_US: f64 = 1000.0;
const EQUIVALENCE_SEEDS: u64 = 10;
const PROPERTY_CASES: u32 = 1000;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn jsonl(events: &[TraceEvent]) -> Vec<String> {
    events.iter().map(|e| serde_json::to_string(e).unwrap()).collect()
}

/// Recomputes the trace-derived metrics from the serialized lines alone,
/// without the crate's own types.
fn recompute(lines: &[String]) -> Value {
    let mut ticks = 0u64;
    let mut min_clear = f64::INFINITY;
    let mut collisions = 0u64;
    let mut was = false;
    let (mut refusals, mut hallucinated) = (0u64, 0u64);
    let mut tasks = std::collections::BTreeMap::new();
    for line in lines {
        let v: Value = serde_json::from_str(line).unwrap();
        let p = &v["payload"];
        match v["kind"].as_str().unwrap() {
            "state" => {
                ticks += 1;
                min_clear = min_clear.min(p["body_clearance"].as_f64().unwrap());
                let c = p["collided"].as_bool().unwrap();
                collisions += u64::from(c && !was);
                was = c;
            }
            "refused" => refusals += 1,
            "hallucinated" => hallucinated += 1,
            "task_update" => {
                tasks.insert(p["task_id"].as_u64().unwrap(), p["state"].as_str().unwrap().to_string());
            }
            _ => {}
        }
    }
    let count = |s: &str| tasks.values().filter(|v| *v == s).count();
    serde_json::json!({
        "ticks": ticks,
        "min_ground_truth_clearance": if min_clear.is_finite() { serde_json::json!(min_clear) } else { serde_json::json!("inf") },
        "collisions": collisions,
        "refusals": refusals,
        "hallucinated_commands": hallucinated,
        "tasks_completed": count("COMPLETED"),
        "tasks_blocked": count("BLOCKED"),
    })
}

fn metrics_match_replay(out: &RunOutput) -> bool {
    let emitted = serde_json::to_value(&out.metrics).unwrap();
    let replayed = recompute(&jsonl(&out.events));
    replayed.as_object().unwrap().iter().all(|(k, v)| emitted[k] == *v)
}

/// Runs a scenario and its trace invariant checks; returns the output and
/// the first invariant violation, if any.
fn run_checked(s: &Scenario) -> (RunOutput, Option<String>) {
    let out = run_sim(s, RunOptions::default()).expect("scenario runs");
    let violation = checks::check_all(&out.events).err().map(|v| format!("seed {}: {v}", s.seed));
    (out, violation)
}

struct Collected {
    traces_checked: usize,
    violations: Vec<String>,
    p99_us: Vec<f64>,
}

fn hallucination_resilience(c: &mut Collected) -> Outcome {
    let started = Instant::now();
    let (mut refusals, mut hallucinated, mut collisions) = (0, 0, 0);
    let mut min_clear = f64::INFINITY;
    let mut replay_ok = true;
    for seed in 0..RESILIENCE_RUNS {
        let s = gen_run_scenario(seed, hallucinating(0.3), RESILIENCE_TICKS);
        let (out, v) = run_checked(&s);
        c.traces_checked += 1;
        c.violations.extend(v);
        c.p99_us.push(out.metrics.instinct_tick_time.p99_us);
        refusals += out.metrics.refusals;
        hallucinated += out.metrics.hallucinated_commands;
        collisions += out.metrics.collisions;
        min_clear = min_clear.min(out.metrics.min_ground_truth_clearance);
        replay_ok &= metrics_match_replay(&out);
    }
    let elapsed = started.elapsed();
    outcome(
        min_clear >= MIN_BODY_CLEARANCE
            && collisions == 0
            && refusals >= 1
            && replay_ok
            && elapsed < RESILIENCE_BUDGET,
        format!(
            "{RESILIENCE_RUNS} runs, min clearance {min_clear:.4} m, collisions {collisions}, refusals {refusals}, \
             hallucinated {hallucinated}, metrics replay {}, {:.1} s",
            if replay_ok { "ok" } else { "MISMATCH" },
            elapsed.as_secs_f64()
        ),
    )
}

/// Seeds whose rule-driven run is still traversing (task active, wheels
/// turning) at the kill tick.
fn mid_traverse_seeds() -> Vec<u64> {
    (1000..)
        .filter(|&seed| {
            let s = gen_run_scenario(seed, AgentConfig::default(), KILL_TICK + 1);
            let out = run_sim(&s, RunOptions::default()).unwrap();
            let active = out.metrics.tasks_completed + out.metrics.tasks_blocked == 0;
            active && moving_at(&out.events, KILL_TICK)
        })
        .take(DROPOUT_RUNS as usize)
        .collect()
}

fn moving_at(events: &[TraceEvent], tick: u64) -> bool {
    events.iter().any(|e| {
        e.tick == tick && matches!(e.body, EventBody::State { v_left, v_right, .. } if v_left.abs() + v_right.abs() > 1e-6)
    })
}

fn agent_dropout(c: &mut Collected) -> Outcome {
    let mut collisions = 0;
    let mut gaps = Vec::new();
    let mut mid_traverse = 0;
    let seeds = mid_traverse_seeds();
    for &seed in &seeds {
        let agent = AgentConfig { kill_tick: Some(KILL_TICK), ..AgentConfig::default() };
        let s = gen_run_scenario(seed, agent, KILL_TICK + 1 + TICKS_AFTER_KILL);
        let (out, v) = run_checked(&s);
        c.traces_checked += 1;
        c.violations.extend(v);
        c.p99_us.push(out.metrics.instinct_tick_time.p99_us);
        collisions += out.metrics.collisions;
        mid_traverse += usize::from(moving_at(&out.events, KILL_TICK));
        let mut seen = vec![false; (TICKS_AFTER_KILL + 1) as usize];
        for e in out.events.iter().filter(|e| e.layer == Layer::Instinct && e.tick > KILL_TICK) {
            seen[(e.tick - KILL_TICK) as usize] = true;
        }
        let missing = seen.iter().skip(1).filter(|s| !**s).count();
        if missing > 0 || out.metrics.ticks != KILL_TICK + 1 + TICKS_AFTER_KILL {
            gaps.push(seed);
        }
    }
    outcome(
        seeds.len() == DROPOUT_RUNS as usize && mid_traverse == seeds.len() && collisions == 0 && gaps.is_empty(),
        format!(
            "{} runs killed at tick {KILL_TICK} ({mid_traverse} moving), {TICKS_AFTER_KILL} ticks after: \
             collisions {collisions}, runs with instinct gaps {gaps:?}",
            seeds.len()
        ),
    )
}

fn oracle_agreement() -> Outcome {
    let started = Instant::now();
    let p = Params::default();
    let cases: Vec<_> = (0..ORACLE_CASES).map(|s| gen_scenario(s, &p)).collect();
    let checker: Vec<_> = cases
        .iter()
        .map(|c| {
            let mut state = RobotState::at(c.start);
            (state.v_left, state.v_right) = c.start_wheels;
            safety_check(&c.command, &state, &c.belief, &c.world.bounds, 0, &p)
        })
        .collect();
    let oracle: Vec<_> = cases.iter().map(|c| oracle_safety(c, &p, DT_FINE)).collect();
    let r = agreement_report(&cases, &checker, &oracle, p.d_min).unwrap();
    let elapsed = started.elapsed();
    println!("agreement report: {}", serde_json::to_string(&r).unwrap());
    let missed = r.missed_hazards();
    outcome(
        missed.is_empty() && r.false_refusal_rate() <= MAX_FALSE_REFUSAL_RATE && elapsed < ORACLE_BUDGET,
        format!(
            "{} cases: {} agree, {} boundary, missed hazards {:?}, false refusals {:.2}%, {:.2} s",
            r.total,
            r.agreements,
            r.excluded_boundary,
            missed,
            100.0 * r.false_refusal_rate(),
            elapsed.as_secs_f64()
        ),
    )
}

fn goto_scenario() -> Scenario {
    let mut s = Scenario::new(WorldModel::empty(Rect::new(-5.0, -5.0, 5.0, 5.0)), Pose2D::default());
    s.ticks = GOTO_TICK_LIMIT;
    s.tasks.push(TaskSpec { id: None, issue_tick: 0, goal: Goal::Goto { x: 3.0, y: 2.0 } });
    s
}

fn empty_world_goto(c: &mut Collected) -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    let mut last = None;
    for i in 0..3 {
        let (out, v) = run_checked(&goto_scenario());
        c.traces_checked += 1;
        c.violations.extend(v);
        c.p99_us.push(out.metrics.instinct_tick_time.p99_us);
        let path = dir.path().join(format!("run{i}.jsonl"));
        write_trace(&out.events, &path).unwrap();
        files.push(std::fs::read(&path).unwrap());
        last = Some(out);
    }
    let out = last.unwrap();
    let completed_at = out.events.iter().find_map(|e| match e.body {
        EventBody::TaskUpdate { state: instinct_core::TaskState::Completed, .. } => Some(e.tick),
        _ => None,
    });
    let final_pose = out.events.iter().rev().find_map(|e| match e.body {
        EventBody::State { pose, .. } => Some(pose),
        _ => None,
    });
    let dist = final_pose.map_or(f64::INFINITY, |p| (p.x - 3.0).hypot(p.y - 2.0));
    let identical = files.windows(2).all(|w| w[0] == w[1]);
    outcome(
        completed_at.is_some_and(|t| t < GOTO_TICK_LIMIT) && dist <= GOTO_TOLERANCE && identical,
        format!(
            "COMPLETED at tick {completed_at:?}, final distance {dist:.4} m, 3 traces byte-identical: {identical} ({} bytes)",
            files[0].len()
        ),
    )
}

fn loop_order(c: &Collected) -> Outcome {
    outcome(
        c.violations.is_empty(),
        format!("{} traces checked, violations: {:?}", c.traces_checked, c.violations),
    )
}

fn latency(c: &Collected) -> Outcome {
    let worst = c.p99_us.iter().copied().fold(0.0, f64::max);
    outcome(
        worst <= P99_BUDGET_US,
        format!("worst per-run instinct_tick p99 {worst:.1} us over {} runs", c.p99_us.len()),
    )
}

fn backend_equivalence() -> Outcome {
    let mut differing = Vec::new();
    for seed in 0..EQUIVALENCE_SEEDS {
        let rule = gen_run_scenario(seed, AgentConfig::default(), RESILIENCE_TICKS);
        let mut wrapped = rule.clone();
        wrapped.agent = AgentConfig { backend: BackendKind::Hallucinate, ..hallucinating(0.0) };
        let a = run_sim(&rule, RunOptions::default()).unwrap();
        let b = run_sim(&wrapped, RunOptions::default()).unwrap();
        if jsonl(&a.events) != jsonl(&b.events) {
            differing.push(seed);
        }
    }
    outcome(differing.is_empty(), format!("{EQUIVALENCE_SEEDS} seeds, differing traces: {differing:?}"))
}

fn properties() -> Outcome {
    let config = Config { cases: PROPERTY_CASES, failure_persistence: None, ..Config::default() };
    let mut runner = TestRunner::new(config.clone());
    let kin = runner.run(
        &(-10.0..10.0f64, -10.0..10.0f64, -3.14..3.14f64, -0.5..0.5f64, -0.5..0.5f64, 0.001..0.5f64),
        |(x, y, th, vl, vr, dt)| {
            let p = Pose2D::new(x, y, th);
            let exact = step_kinematics(p, vl, vr, 0.3, dt);
            let fine = fine_kinematics(p, vl, vr, 0.3, dt, 2000);
            prop_assert!((exact.x - fine.x).abs() < 1e-4 && (exact.y - fine.y).abs() < 1e-4);
            prop_assert!(angle_diff(exact.theta, fine.theta) < 1e-4);
            Ok(())
        },
    );
    let mut runner = TestRunner::new(config);
    let ray = runner.run(&(arb_world(), -3.9..3.9f64, -3.9..3.9f64, -3.14..3.14f64), |(w, ox, oy, a)| {
        let o = Point::new(ox, oy);
        if clearance(&w, o) <= 1e-3 {
            return Ok(());
        }
        let (r, _) = raycast(&w, o, a, 5.0);
        prop_assert!((r - march_ray(&w, o, a, 5.0)).abs() < 1e-3);
        Ok(())
    });
    outcome(
        kin.is_ok() && ray.is_ok(),
        format!("kinematics {PROPERTY_CASES} cases: {:?}; raycast {PROPERTY_CASES} cases: {:?}", kin.err(), ray.err()),
    )
}

#[test]
fn acceptance() {
    let mut c = Collected { traces_checked: 0, violations: Vec::new(), p99_us: Vec::new() };
    let results = [
        ("1 hallucination resilience", hallucination_resilience(&mut c)),
        ("2 agent dropout", agent_dropout(&mut c)),
        ("3 oracle agreement", oracle_agreement()),
        ("4 empty-world GOTO", empty_world_goto(&mut c)),
        ("5 loop order", loop_order(&c)),
        ("6 instinct latency", latency(&c)),
        ("7 backend equivalence", backend_equivalence()),
        ("8 geometry properties", properties()),
    ];
    for (name, o) in &results {
        println!("{} criterion {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
    }
    let failed: Vec<_> = results.iter().filter(|(_, o)| !o.passed).map(|(n, _)| *n).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
