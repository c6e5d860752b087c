use std::f64::consts::FRAC_PI_4;

use super::command::{HighCommandKind, LowCommandKind};
use crate::params::Params;
use crate::sim::{wrap_angle, Point, RobotState};

/// One closed-loop translation step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Conversion {
    pub next: Option<LowCommandKind>,
    pub done: bool,
    /// Waypoint index for FOLLOW_PATH; 0 otherwise.
    pub progress: usize,
}

fn wheels(v: f64, omega: f64, params: &Params) -> LowCommandKind {
    let half = 0.5 * omega * params.axle;
    let (mut l, mut r) = (v - half, v + half);
    let peak = l.abs().max(r.abs());
    if peak > params.v_wheel_max {
        let s = params.v_wheel_max / peak;
        l *= s;
        r *= s;
    }
    LowCommandKind::SetWheels { v_left: l, v_right: r, duration_ticks: 1 }
}

fn move_to(target: Point, speed: Option<f64>, state: &RobotState, params: &Params) -> Option<LowCommandKind> {
    let pos = state.pose.xy();
    let d = pos.dist(target);
    if d <= params.eps_pos {
        return None;
    }
    let err = wrap_angle(pos.bearing_to(target) - state.pose.theta);
    let omega = (params.k_theta * err).clamp(-params.omega_max, params.omega_max);
    let cap = speed.unwrap_or(params.v_wheel_max);
    let v = if err.abs() < FRAC_PI_4 { (params.k_d * d).clamp(0.0, cap) } else { 0.0 };
    Some(wheels(v, omega, params))
}

/// Translates the active high-level command into the next per-tick
/// low-level command. `progress` is the FOLLOW_PATH waypoint index carried
/// between ticks.
pub fn convert(cmd: &HighCommandKind, progress: usize, state: &RobotState, params: &Params) -> Conversion {
    match cmd {
        HighCommandKind::MoveTo { x, y, speed } => {
            let next = move_to(Point::new(*x, *y), *speed, state, params);
            Conversion { done: next.is_none(), next, progress: 0 }
        }
        HighCommandKind::RotateTo { theta } => {
            let err = wrap_angle(theta - state.pose.theta);
            if err.abs() <= params.eps_heading {
                Conversion { next: None, done: true, progress: 0 }
            } else {
                let omega = (params.k_theta * err).clamp(-params.omega_max, params.omega_max);
                Conversion { next: Some(wheels(0.0, omega, params)), done: false, progress: 0 }
            }
        }
        HighCommandKind::FollowPath { waypoints } => {
            let mut i = progress;
            while i < waypoints.len() {
                if let Some(next) = move_to(waypoints[i], None, state, params) {
                    return Conversion { next: Some(next), done: false, progress: i };
                }
                i += 1;
            }
            Conversion { next: None, done: true, progress: i }
        }
        HighCommandKind::Stop => Conversion { next: Some(LowCommandKind::StopAll), done: true, progress: 0 },
        HighCommandKind::QueryStatus => {
            Conversion { next: Some(LowCommandKind::AcquireScan), done: true, progress: 0 }
        }
    }
}
