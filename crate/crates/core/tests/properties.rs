//! Property checks of the analytic geometry against brute-force references.

mod common;

use common::{angle_diff, arb_world, fine_kinematics, march_ray};
use instinct_core::sim::{clearance, raycast, step_kinematics, Point, Pose2D};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn arc_step_matches_fine_integration(
        x in -10.0..10.0f64, y in -10.0..10.0f64, th in -3.14..3.14f64,
        vl in -0.5..0.5f64, vr in -0.5..0.5f64, dt in 0.001..0.5f64,
    ) {
        let p = Pose2D::new(x, y, th);
        let exact = step_kinematics(p, vl, vr, 0.3, dt);
        let fine = fine_kinematics(p, vl, vr, 0.3, dt, 2000);
        prop_assert!((exact.x - fine.x).abs() < 1e-4);
        prop_assert!((exact.y - fine.y).abs() < 1e-4);
        prop_assert!(angle_diff(exact.theta, fine.theta) < 1e-4);
    }

    #[test]
    fn raycast_matches_ray_marching(
        world in arb_world(), ox in -3.9..3.9f64, oy in -3.9..3.9f64, angle in -3.14..3.14f64,
    ) {
        let o = Point::new(ox, oy);
        prop_assume!(clearance(&world, o) > 1e-3);
        let (r, _) = raycast(&world, o, angle, 5.0);
        let m = march_ray(&world, o, angle, 5.0);
        prop_assert!((r - m).abs() < 1e-3, "closed form {} vs marched {}", r, m);
    }
}
