use serde::{Deserialize, Serialize};

use super::kinematics::step_kinematics;
use super::pose::Pose2D;
use super::world::{clearance, WorldModel};
use crate::params::Params;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Mode {
    #[default]
    Normal,
    Safe,
}

/// Ground-truth robot state as seen by the device layer.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RobotState {
    pub pose: Pose2D,
    pub v_left: f64,
    pub v_right: f64,
    /// Actuator effort in `[0, 1]`: fraction of the acceleration limit used
    /// in the last step.
    pub load: f64,
    pub mode: Mode,
    /// Latched once the body touches an obstacle.
    pub collided: bool,
}

impl RobotState {
    pub fn at(pose: Pose2D) -> Self {
        Self { pose, ..Self::default() }
    }
}

fn approach(current: f64, target: f64, max_delta: f64) -> f64 {
    current + (target - current).clamp(-max_delta, max_delta)
}

/// One physics step: wheels slew toward the commanded speeds under the
/// acceleration limit, then the pose advances with the new speeds.
pub fn step_world(
    state: &RobotState,
    world: &WorldModel,
    cmd_v_left: f64,
    cmd_v_right: f64,
    dt: f64,
    params: &Params,
) -> RobotState {
    debug_assert!(dt > 0.0);
    let vmax = params.v_wheel_max;
    let max_delta = params.a_max * dt;
    let v_left = approach(state.v_left, cmd_v_left.clamp(-vmax, vmax), max_delta).clamp(-vmax, vmax);
    let v_right =
        approach(state.v_right, cmd_v_right.clamp(-vmax, vmax), max_delta).clamp(-vmax, vmax);
    let dv = (v_left - state.v_left).abs().max((v_right - state.v_right).abs());
    let load = (dv / max_delta).clamp(0.0, 1.0);
    let pose = step_kinematics(state.pose, v_left, v_right, params.axle, dt);
    let collided = state.collided || clearance(world, pose.xy()) < params.robot_radius;
    RobotState { pose, v_left, v_right, load, mode: state.mode, collided }
}
