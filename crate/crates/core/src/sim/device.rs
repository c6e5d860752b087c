use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::lidar::{scan_with_noise, LidarScan};
use super::robot::{step_world, Mode, RobotState};
use super::world::WorldModel;
use crate::instinct::{LowCommand, LowCommandKind};
use crate::params::Params;
use crate::Tick;

/// What the instinct layer receives from the sensor module each tick: the
/// lidar sweep plus encoder-derived state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensorFrame {
    pub tick: Tick,
    pub scan: LidarScan,
    pub state: RobotState,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MotorStatus {
    pub target_left: f64,
    pub target_right: f64,
    /// Physics steps the current target is still held for.
    pub remaining_ticks: u32,
    /// Command currently being held, if any.
    pub command: Option<u64>,
}

impl MotorStatus {
    pub fn is_executing(&self) -> bool {
        self.remaining_ticks > 0
    }
}

/// The device interface owned by the instinct layer.
pub trait Actuators {
    fn execute(&mut self, cmd: &LowCommand);
    fn motor(&self) -> MotorStatus;
    fn set_mode(&mut self, mode: Mode);
}

/// Simulated robot hardware: motors, lidar, encoders.
#[derive(Clone, Debug)]
pub struct Device {
    world: WorldModel,
    state: RobotState,
    motor: MotorStatus,
    params: Params,
    noise_rng: ChaCha8Rng,
    scan_requests: u32,
}

impl Device {
    pub fn new(world: WorldModel, state: RobotState, params: Params, seed: u64) -> Self {
        let mut noise_rng = ChaCha8Rng::seed_from_u64(seed);
        noise_rng.set_stream(0x5EE5);
        Self { world, state, motor: MotorStatus::default(), params, noise_rng, scan_requests: 0 }
    }

    pub fn state(&self) -> &RobotState {
        &self.state
    }

    pub fn world(&self) -> &WorldModel {
        &self.world
    }

    /// Advances physics by one tick using the held motor target.
    pub fn step(&mut self) {
        let (l, r) = if self.motor.is_executing() {
            self.motor.remaining_ticks -= 1;
            (self.motor.target_left, self.motor.target_right)
        } else {
            (0.0, 0.0)
        };
        if !self.motor.is_executing() {
            self.motor = MotorStatus::default();
        }
        self.state = step_world(&self.state, &self.world, l, r, self.params.dt, &self.params);
    }

    /// Lidar sweep plus encoder state, stamped with `tick`.
    pub fn sense(&mut self, tick: Tick) -> SensorFrame {
        let mut scan = scan_with_noise(
            &self.world,
            self.state.pose,
            self.params.lidar_beams,
            self.params.lidar_max_range,
            self.params.lidar_noise_std,
            &mut self.noise_rng,
        );
        scan.tick = tick;
        SensorFrame { tick, scan, state: self.state }
    }

    /// Number of explicit scan acquisitions requested so far.
    pub fn scan_requests(&self) -> u32 {
        self.scan_requests
    }
}

impl Actuators for Device {
    fn execute(&mut self, cmd: &LowCommand) {
        match cmd.kind {
            LowCommandKind::SetWheels { v_left, v_right, duration_ticks } => {
                self.motor = MotorStatus {
                    target_left: v_left,
                    target_right: v_right,
                    remaining_ticks: duration_ticks,
                    command: Some(cmd.id),
                };
            }
            LowCommandKind::StopAll => self.motor = MotorStatus::default(),
            LowCommandKind::AcquireScan => self.scan_requests += 1,
        }
    }

    fn motor(&self) -> MotorStatus {
        self.motor
    }

    fn set_mode(&mut self, mode: Mode) {
        self.state.mode = mode;
    }
}
