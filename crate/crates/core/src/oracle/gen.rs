use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::decision::Goal;
use crate::external::{AgentConfig, BackendKind, Scenario, TaskSpec};
use crate::instinct::{LowCommand, LowCommandKind, ObstacleBelief, Parent};
use crate::params::Params;
use crate::sim::{clearance, scan, Circle, Point, Pose2D, Rect, WorldModel};

/// Beams used to build a case's belief (the default lidar resolution).
pub const CASE_BELIEF_BEAMS: usize = 36;
/// Minimum gap between the start position and any obstacle or wall.
const START_CLEARANCE: f64 = 0.5;
const CASE_STREAM: u64 = 0x0AC1E;
const RUN_STREAM: u64 = 0x5CE7;

/// One safety-check input: a world, a robot state, a command and the belief
/// the checker would have built from a scan at the start pose.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioCase {
    pub seed: u64,
    pub world: WorldModel,
    pub start: Pose2D,
    /// Wheel speeds at the moment of the check.
    pub start_wheels: (f64, f64),
    pub command: LowCommand,
    pub belief: ObstacleBelief,
}

fn random_obstacle<R: Rng>(rng: &mut R, bounds: &Rect, world: &mut WorldModel) {
    let (w, h) = (bounds.max.x - bounds.min.x, bounds.max.y - bounds.min.y);
    if rng.random_bool(0.5) {
        let radius = rng.random_range(0.1..0.6);
        let center = Point::new(
            rng.random_range(bounds.min.x + radius..bounds.max.x - radius),
            rng.random_range(bounds.min.y + radius..bounds.max.y - radius),
        );
        world.circles.push(Circle { center, radius });
    } else {
        let sx = rng.random_range(0.2..1.5f64).min(w * 0.5);
        let sy = rng.random_range(0.2..1.5f64).min(h * 0.5);
        let x0 = rng.random_range(bounds.min.x..bounds.max.x - sx);
        let y0 = rng.random_range(bounds.min.y..bounds.max.y - sy);
        world.rects.push(Rect::new(x0, y0, x0 + sx, y0 + sy));
    }
}

/// Deterministic safety-check case from `seed`: 1-8 obstacles, a start at
/// least 0.5 m from everything, and (mostly) a wheel command.
pub fn gen_scenario(seed: u64, params: &Params) -> ScenarioCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(CASE_STREAM);
    loop {
        let hw = rng.random_range(2.0..5.0);
        let hh = rng.random_range(2.0..5.0);
        let bounds = Rect::new(-hw, -hh, hw, hh);
        let mut world = WorldModel::empty(bounds);
        for _ in 0..rng.random_range(1..=8) {
            random_obstacle(&mut rng, &bounds, &mut world);
        }
        let start = (0..200).find_map(|_| {
            let p = Point::new(rng.random_range(-hw..hw), rng.random_range(-hh..hh));
            (clearance(&world, p) >= START_CLEARANCE).then_some(p)
        });
        let Some(p) = start else { continue };
        let start = Pose2D::new(p.x, p.y, rng.random_range(-PI..PI));

        let vmax = params.v_wheel_max;
        let start_wheels = if rng.random_bool(0.3) {
            (rng.random_range(-vmax..=vmax), rng.random_range(-vmax..=vmax))
        } else {
            (0.0, 0.0)
        };
        let kind = match rng.random_range(0..10) {
            0 => LowCommandKind::StopAll,
            1 => LowCommandKind::AcquireScan,
            _ => LowCommandKind::SetWheels {
                v_left: rng.random_range(-vmax..=vmax),
                v_right: rng.random_range(-vmax..=vmax),
                duration_ticks: rng.random_range(1..=200),
            },
        };
        let sweep = scan(&world, start, CASE_BELIEF_BEAMS, params.lidar_max_range);
        let belief = ObstacleBelief::from_scan(&sweep, start, params.robot_radius);
        let command = LowCommand { id: seed, parent: Parent::Survival, kind };
        return ScenarioCase { seed, world, start, start_wheels, command, belief };
    }
}

/// A full run: 3-8 obstacles between a start on the left of the arena and
/// a GOTO goal on the right, driven by the given agent backend.
pub fn gen_run_scenario(seed: u64, agent: AgentConfig, ticks: u64) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(RUN_STREAM);
    let bounds = Rect::new(-1.0, -2.5, 7.0, 2.5);
    let start = Point::new(0.0, 0.0);
    let goal = Point::new(rng.random_range(5.0..6.0), rng.random_range(-1.5..1.5));
    let field = Rect::new(0.6, -2.5, 6.6, 2.5);
    let mut world = WorldModel::empty(bounds);
    let n = rng.random_range(3..=8);
    while world.obstacle_count() < n {
        let mut candidate = world.clone();
        random_obstacle(&mut rng, &field, &mut candidate);
        if clearance(&candidate, start) >= 0.7 && clearance(&candidate, goal) >= 0.6 {
            world = candidate;
        }
    }
    let mut s = Scenario::new(world, Pose2D::new(start.x, start.y, 0.0));
    s.seed = seed;
    s.ticks = ticks;
    s.agent = agent;
    s.tasks.push(TaskSpec { id: None, issue_tick: 0, goal: Goal::Goto { x: goal.x, y: goal.y } });
    s
}

/// Agent settings for a hallucinating rule planner.
pub fn hallucinating(probability: f64) -> AgentConfig {
    AgentConfig { backend: BackendKind::Hallucinate, inner: BackendKind::Rule, hallucination_prob: probability, kill_tick: None }
}
