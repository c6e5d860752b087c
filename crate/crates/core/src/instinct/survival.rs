use rand::Rng;
use serde::{Deserialize, Serialize};

use super::command::LowCommandKind;
use super::status::front_min;
use crate::params::Params;
use crate::sim::{LidarScan, MotorStatus};

/// Result of the survival step. `speed_scale` also applies to any command
/// converted later in the same tick.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurvivalAction {
    pub speed_scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<LowCommandKind>,
}

impl SurvivalAction {
    pub fn is_noop(&self) -> bool {
        self.speed_scale >= 1.0 && self.command.is_none()
    }
}

/// Linear slow-down inside `[d_stop, d_slow)`; 1 outside.
pub fn governor_scale(front: f64, params: &Params) -> f64 {
    if front >= params.d_slow {
        1.0
    } else {
        ((front - params.d_stop) / (params.d_slow - params.d_stop)).clamp(0.0, 1.0)
    }
}

/// Obstacle-avoidance governor and random roaming.
///
/// `idle` means no high-level command is queued and the robot is in normal
/// mode. Roaming arcs turn away from the nearest return.
pub fn perform_survival_tasks<R: Rng>(
    scan: &LidarScan,
    motor: MotorStatus,
    idle: bool,
    params: &Params,
    rng: &mut R,
) -> SurvivalAction {
    let speed_scale = governor_scale(front_min(scan), params);
    if motor.is_executing() && speed_scale < 1.0 {
        let held = LowCommandKind::SetWheels {
            v_left: motor.target_left,
            v_right: motor.target_right,
            duration_ticks: motor.remaining_ticks,
        };
        return SurvivalAction { speed_scale, command: Some(held.scaled(speed_scale)) };
    }
    if idle && params.roaming && !motor.is_executing() {
        let arc = roaming_arc(scan, params, rng).scaled(speed_scale);
        return SurvivalAction { speed_scale, command: Some(arc) };
    }
    SurvivalAction { speed_scale, command: None }
}

fn roaming_arc<R: Rng>(scan: &LidarScan, params: &Params, rng: &mut R) -> LowCommandKind {
    let nearest = (0..scan.len())
        .min_by(|&a, &b| scan.ranges[a].total_cmp(&scan.ranges[b]))
        .map(|i| scan.relative_angle(i))
        .unwrap_or(0.0);
    let away = if nearest >= 0.0 { -1.0 } else { 1.0 };
    let v = rng.random_range(0.05..0.25) * params.v_wheel_max / 0.5;
    let omega = away * rng.random_range(0.2..1.0);
    let duration_ticks = rng.random_range(50..=150);
    let half = 0.5 * omega * params.axle;
    let (mut l, mut r) = (v - half, v + half);
    let peak = l.abs().max(r.abs());
    if peak > params.v_wheel_max {
        l *= params.v_wheel_max / peak;
        r *= params.v_wheel_max / peak;
    }
    LowCommandKind::SetWheels { v_left: l, v_right: r, duration_ticks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn scan_front(front: f64) -> LidarScan {
        let mut ranges = vec![5.0; 36];
        ranges[0] = front;
        LidarScan { ranges, angle_min: 0.0, angle_increment: std::f64::consts::TAU / 36.0, max_range: 5.0, tick: 0 }
    }

    #[test]
    fn governor_formula() {
        let p = Params::default();
        assert!((governor_scale(0.375, &p) - 0.5).abs() < 1e-12);
        assert_eq!(governor_scale(0.5, &p), 1.0);
        assert_eq!(governor_scale(3.0, &p), 1.0);
    }

    #[test]
    fn governor_scales_held_command() {
        let p = Params::default();
        let motor = MotorStatus { target_left: 0.4, target_right: 0.2, remaining_ticks: 10, command: Some(1) };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let a = perform_survival_tasks(&scan_front(0.375), motor, false, &p, &mut rng);
        assert_eq!(
            a.command,
            Some(LowCommandKind::SetWheels { v_left: 0.2, v_right: 0.1, duration_ticks: 10 })
        );
        let a = perform_survival_tasks(&scan_front(1.0), motor, false, &p, &mut rng);
        assert!(a.is_noop());
    }

    #[test]
    fn roaming_replays_with_seed_and_turns_away() {
        let p = Params { roaming: true, ..Params::default() };
        let mut ranges = vec![5.0; 36];
        ranges[9] = 1.0; // obstacle at +90° (left)
        let scan = LidarScan { ranges, ..scan_front(5.0) };
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            perform_survival_tasks(&scan, MotorStatus::default(), true, &p, &mut rng).command
        };
        let a = run(42);
        assert_eq!(a, run(42));
        match a {
            Some(LowCommandKind::SetWheels { v_left, v_right, duration_ticks }) => {
                assert!(v_right < v_left, "should turn right, away from the left obstacle");
                assert!((50..=150).contains(&duration_ticks));
                assert!(v_left.abs() <= p.v_wheel_max && v_right.abs() <= p.v_wheel_max);
            }
            other => panic!("expected arc, got {other:?}"),
        }
        let p_off = Params::default();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        assert!(perform_survival_tasks(&scan, MotorStatus::default(), true, &p_off, &mut rng).is_noop());
    }
}
