use serde::{Deserialize, Serialize};

use super::command::{LowCommand, LowCommandKind, SafetyVerdict, VerdictReason};
use crate::params::Params;
use crate::sim::{step_kinematics, LidarScan, Point, Pose2D, Rect, RobotState};
use crate::Tick;

/// The instinct layer's picture of the world: hit endpoints of the latest
/// scan, each standing for a disc of radius `inflation` (the robot radius)
/// around it. Rebuilt from scratch every scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObstacleBelief {
    pub points: Vec<Point>,
    pub inflation: f64,
    pub built_tick: Tick,
}

impl ObstacleBelief {
    pub fn from_scan(scan: &LidarScan, pose: Pose2D, inflation: f64) -> Self {
        let origin = pose.xy();
        let points = (0..scan.len()).filter(|&i| scan.is_hit(i)).map(|i| scan.endpoint(origin, i)).collect();
        Self { points, inflation, built_tick: scan.tick }
    }

    /// Gap between the robot body at `p` and the nearest belief point.
    /// `+inf` when the belief is empty.
    pub fn clearance(&self, p: Point) -> f64 {
        self.points.iter().map(|q| p.dist(*q)).fold(f64::INFINITY, f64::min) - self.inflation
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Limiter {
    Belief,
    Geofence,
}

fn approach(current: f64, target: f64, max_delta: f64) -> f64 {
    current + (target - current).clamp(-max_delta, max_delta)
}

/// Poses visited when `cmd` is held for its duration and the wheels then
/// brake at full deceleration, sampled every `dt_pred`. Includes the start.
pub fn predict_trajectory(state: &RobotState, v_left: f64, v_right: f64, duration_ticks: u32, params: &Params) -> Vec<Pose2D> {
    let hold = duration_ticks as f64 * params.dt;
    let peak = v_left.abs().max(v_right.abs()).max(state.v_left.abs()).max(state.v_right.abs());
    let horizon = hold + peak / params.a_max + params.brake_margin;
    let steps = (horizon / params.dt_pred).ceil() as usize;
    let dv = params.a_max * params.dt_pred;
    let mut pose = state.pose;
    let (mut wl, mut wr) = (state.v_left, state.v_right);
    let mut out = Vec::with_capacity(steps + 1);
    out.push(pose);
    for k in 0..steps {
        let t = k as f64 * params.dt_pred;
        let (tl, tr) = if t < hold - 1e-12 { (v_left, v_right) } else { (0.0, 0.0) };
        wl = approach(wl, tl, dv);
        wr = approach(wr, tr, dv);
        pose = step_kinematics(pose, wl, wr, params.axle, params.dt_pred);
        out.push(pose);
    }
    out
}

/// Predictive check of a low-level command against the scan-derived belief
/// and the arena geofence. Never consults ground truth.
pub fn safety_check(
    low: &LowCommand,
    state: &RobotState,
    belief: &ObstacleBelief,
    geofence: &Rect,
    now: Tick,
    params: &Params,
) -> SafetyVerdict {
    let (v_left, v_right, duration_ticks) = match low.kind {
        LowCommandKind::StopAll | LowCommandKind::AcquireScan => return SafetyVerdict::ok_unbounded(),
        LowCommandKind::SetWheels { v_left, v_right, duration_ticks } => (v_left, v_right, duration_ticks),
    };
    let limit = params.v_wheel_max + 1e-12;
    if !(v_left.abs() <= limit && v_right.abs() <= limit) || duration_ticks == 0 {
        return SafetyVerdict::rejected(VerdictReason::LimitExceeded);
    }
    if now.saturating_sub(belief.built_tick) > params.stale_limit {
        return SafetyVerdict::rejected(VerdictReason::LimitExceeded);
    }
    let mut worst = f64::INFINITY;
    let mut limiter = Limiter::Belief;
    for pose in predict_trajectory(state, v_left, v_right, duration_ticks, params) {
        let p = pose.xy();
        let b = belief.clearance(p);
        let g = geofence.inner_margin(p) - params.robot_radius;
        if b < worst {
            worst = b;
            limiter = Limiter::Belief;
        }
        if g < worst {
            worst = g;
            limiter = Limiter::Geofence;
        }
    }
    if worst >= params.d_min {
        SafetyVerdict { safe: true, predicted_min_clearance: worst, reason: VerdictReason::Ok }
    } else {
        let reason = match limiter {
            Limiter::Belief => VerdictReason::ObstaclePredicted,
            Limiter::Geofence => VerdictReason::OutOfBounds,
        };
        SafetyVerdict { safe: false, predicted_min_clearance: worst, reason }
    }
}
