//! Ground-truth world, differential-drive physics and the device-layer
//! models (motor, lidar, encoders, load).
//!
//! Everything here except [`Device`] is a pure function over value types.

mod device;
mod kinematics;
mod lidar;
mod pose;
mod robot;
mod world;

pub use device::{Actuators, Device, MotorStatus, SensorFrame};
pub use kinematics::step_kinematics;
pub use lidar::{scan, scan_with_noise, LidarScan};
pub use pose::{wrap_angle, Point, Pose2D};
pub use robot::{step_world, Mode, RobotState};
pub use world::{clearance, raycast, Circle, Rect, WorldError, WorldModel};
