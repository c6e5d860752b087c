//! Brute-force references shared by the integration tests.
#![allow(dead_code)]

use instinct_core::sim::{clearance, Circle, Point, Pose2D, Rect, WorldModel};
use proptest::prelude::*;

/// Differential-drive pose after `dt` seconds, integrated with `n` RK4
/// substeps of the continuous equations.
pub fn fine_kinematics(pose: Pose2D, vl: f64, vr: f64, axle: f64, dt: f64, n: usize) -> Pose2D {
    let v = 0.5 * (vl + vr);
    let w = (vr - vl) / axle;
    let f = |th: f64| (v * th.cos(), v * th.sin());
    let h = dt / n as f64;
    let (mut x, mut y, mut th) = (pose.x, pose.y, pose.theta);
    for _ in 0..n {
        let k1 = f(th);
        let k2 = f(th + 0.5 * h * w);
        let k3 = k2;
        let k4 = f(th + h * w);
        x += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        y += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        th += h * w;
    }
    Pose2D { x, y, theta: th }
}

/// First-hit distance found by sphere tracing the world's distance field.
pub fn march_ray(world: &WorldModel, origin: Point, angle: f64, max_range: f64) -> f64 {
    let (dx, dy) = (angle.cos(), angle.sin());
    let mut t = 0.0;
    while t < max_range {
        let p = Point::new(origin.x + t * dx, origin.y + t * dy);
        let d = clearance(world, p);
        if d < 1e-7 {
            return t;
        }
        t += d.max(1e-7);
    }
    max_range
}

pub fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(std::f64::consts::TAU);
    d.min(std::f64::consts::TAU - d)
}

pub fn arb_world() -> impl Strategy<Value = WorldModel> {
    let circle = (-3.5..3.5f64, -3.5..3.5f64, 0.05..1.0f64)
        .prop_map(|(x, y, r)| Circle { center: Point::new(x, y), radius: r });
    let rect = (-3.8..3.0f64, -3.8..3.0f64, 0.05..0.8f64, 0.05..0.8f64)
        .prop_map(|(x, y, w, h)| Rect::new(x, y, x + w, y + h));
    (prop::collection::vec(circle, 0..5), prop::collection::vec(rect, 0..5)).prop_map(|(circles, rects)| {
        WorldModel { bounds: Rect::new(-4.0, -4.0, 4.0, 4.0), circles, rects }
    })
}
