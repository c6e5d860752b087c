use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use super::pose::{wrap_angle, Point, Pose2D};
use super::world::{raycast, WorldModel};
use crate::Tick;

/// One 360° sweep. Beam `i` points at `angle_min + i * angle_increment`
/// (world frame); `angle_min` is the robot heading at scan time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LidarScan {
    pub ranges: Vec<f64>,
    pub angle_min: f64,
    pub angle_increment: f64,
    pub max_range: f64,
    pub tick: Tick,
}

impl LidarScan {
    pub fn len(&self) -> usize {
        self.ranges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranges.is_empty()
    }

    /// Beam angle relative to the robot heading, wrapped to `(-π, π]`.
    pub fn relative_angle(&self, i: usize) -> f64 {
        wrap_angle(i as f64 * self.angle_increment)
    }

    pub fn world_angle(&self, i: usize) -> f64 {
        self.angle_min + i as f64 * self.angle_increment
    }

    pub fn is_hit(&self, i: usize) -> bool {
        self.ranges[i] < self.max_range
    }

    /// World-frame endpoint of beam `i` cast from `origin`.
    pub fn endpoint(&self, origin: Point, i: usize) -> Point {
        origin.offset(self.world_angle(i), self.ranges[i])
    }
}

/// Noise-free scan from `pose`. The returned scan has `tick == 0`; callers
/// stamp it.
pub fn scan(world: &WorldModel, pose: Pose2D, n_beams: usize, max_range: f64) -> LidarScan {
    debug_assert!(n_beams >= 4);
    let increment = TAU / n_beams as f64;
    let origin = pose.xy();
    let ranges = (0..n_beams)
        .map(|i| raycast(world, origin, pose.theta + i as f64 * increment, max_range).0)
        .collect();
    LidarScan { ranges, angle_min: pose.theta, angle_increment: increment, max_range, tick: 0 }
}

/// Scan with additive Gaussian range noise on beams that hit something.
/// Noisy ranges are clamped into `(0, max_range)` so a hit stays a hit.
pub fn scan_with_noise<R: Rng>(
    world: &WorldModel,
    pose: Pose2D,
    n_beams: usize,
    max_range: f64,
    std_dev: f64,
    rng: &mut R,
) -> LidarScan {
    let mut s = scan(world, pose, n_beams, max_range);
    if std_dev > 0.0 {
        let normal = Normal::new(0.0, std_dev).expect("finite std dev");
        for r in s.ranges.iter_mut().filter(|r| **r < max_range) {
            *r = (*r + normal.sample(rng)).clamp(1e-3, max_range - 1e-9);
        }
    }
    s
}
