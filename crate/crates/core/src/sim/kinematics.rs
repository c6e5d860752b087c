use super::pose::{wrap_angle, Pose2D};

const OMEGA_EPS: f64 = 1e-9;

/// Advances a differential-drive pose with wheel speeds held constant for
/// `dt`. Integrates the arc exactly; falls back to a straight segment when
/// the turn rate is negligible.
pub fn step_kinematics(pose: Pose2D, v_left: f64, v_right: f64, axle: f64, dt: f64) -> Pose2D {
    debug_assert!(dt > 0.0 && axle > 0.0);
    let v = 0.5 * (v_left + v_right);
    let omega = (v_right - v_left) / axle;
    let (x, y, th) = (pose.x, pose.y, pose.theta);
    if omega.abs() > OMEGA_EPS {
        let radius = v / omega;
        let th1 = th + omega * dt;
        Pose2D {
            x: x + radius * (th1.sin() - th.sin()),
            y: y - radius * (th1.cos() - th.cos()),
            theta: wrap_angle(th1),
        }
    } else {
        Pose2D {
            x: x + v * dt * th.cos(),
            y: y + v * dt * th.sin(),
            theta: wrap_angle(th),
        }
    }
}
