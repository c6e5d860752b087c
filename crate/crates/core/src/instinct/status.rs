use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_4;

use crate::params::Params;
use crate::sim::{LidarScan, RobotState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum UnsafeReason {
    ObstacleProximity,
    Overload,
    Collided,
    NoSensorData,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeviceStatus {
    Safe,
    Unsafe(UnsafeReason),
}

impl DeviceStatus {
    pub fn is_safe(self) -> bool {
        self == DeviceStatus::Safe
    }
}

/// Minimum range over beams within ±45° of the heading.
pub fn front_min(scan: &LidarScan) -> f64 {
    (0..scan.len())
        .filter(|&i| scan.relative_angle(i).abs() <= FRAC_PI_4 + 1e-9)
        .map(|i| scan.ranges[i])
        .fold(scan.max_range, f64::min)
}

/// Tracks how long the load has stayed above the overload threshold.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StatusMonitor {
    overload_run: u64,
}

impl StatusMonitor {
    pub fn new() -> Self {
        Self::default()
    }

    /// Must be called exactly once per tick with that tick's scan.
    pub fn check(&mut self, state: &RobotState, scan: &LidarScan, params: &Params) -> DeviceStatus {
        if state.load >= params.overload_threshold {
            self.overload_run += 1;
        } else {
            self.overload_run = 0;
        }
        if state.collided {
            DeviceStatus::Unsafe(UnsafeReason::Collided)
        } else if front_min(scan) < params.d_stop {
            DeviceStatus::Unsafe(UnsafeReason::ObstacleProximity)
        } else if self.overload_run >= params.overload_window {
            DeviceStatus::Unsafe(UnsafeReason::Overload)
        } else {
            DeviceStatus::Safe
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scan_with_front(front: f64) -> LidarScan {
        let mut ranges = vec![5.0; 36];
        ranges[0] = front;
        LidarScan { ranges, angle_min: 0.0, angle_increment: std::f64::consts::TAU / 36.0, max_range: 5.0, tick: 0 }
    }

    #[test]
    fn proximity_threshold() {
        let p = Params::default();
        let mut m = StatusMonitor::new();
        let s = m.check(&RobotState::default(), &scan_with_front(0.20), &p);
        assert_eq!(s, DeviceStatus::Unsafe(UnsafeReason::ObstacleProximity));
        assert!(m.check(&RobotState::default(), &scan_with_front(2.0), &p).is_safe());
    }

    #[test]
    fn side_beams_outside_front_sector_ignored() {
        let p = Params::default();
        let mut scan = scan_with_front(5.0);
        scan.ranges[5] = 0.1; // 50° to the left
        assert!(StatusMonitor::new().check(&RobotState::default(), &scan, &p).is_safe());
        scan.ranges[4] = 0.1; // 40°
        assert!(!StatusMonitor::new().check(&RobotState::default(), &scan, &p).is_safe());
    }

    #[test]
    fn overload_needs_full_window() {
        let p = Params::default();
        let mut m = StatusMonitor::new();
        let st = RobotState { load: 0.9, ..RobotState::default() };
        let scan = scan_with_front(2.0);
        for _ in 0..99 {
            assert!(m.check(&st, &scan, &p).is_safe());
        }
        assert_eq!(m.check(&st, &scan, &p), DeviceStatus::Unsafe(UnsafeReason::Overload));
        let calm = RobotState { load: 0.1, ..RobotState::default() };
        assert!(m.check(&calm, &scan, &p).is_safe());
    }

    #[test]
    fn collided_is_unsafe() {
        let st = RobotState { collided: true, ..RobotState::default() };
        assert_eq!(
            StatusMonitor::new().check(&st, &scan_with_front(5.0), &Params::default()),
            DeviceStatus::Unsafe(UnsafeReason::Collided)
        );
    }
}
