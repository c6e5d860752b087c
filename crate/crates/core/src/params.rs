//! Tunable constants shared by every layer.

use serde::{Deserialize, Serialize};

/// Physical limits and controller thresholds. Every field has a default and
/// any subset may be overridden from a scenario file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    // Robot / device layer.
    pub robot_radius: f64,
    pub axle: f64,
    pub v_wheel_max: f64,
    pub a_max: f64,
    /// Physics step, seconds. One logical tick.
    pub dt: f64,
    pub lidar_beams: usize,
    pub lidar_max_range: f64,
    /// Standard deviation of Gaussian range noise; 0 disables noise.
    pub lidar_noise_std: f64,

    // Instinct layer.
    pub d_min: f64,
    pub d_stop: f64,
    pub d_slow: f64,
    pub eps_pos: f64,
    pub eps_heading: f64,
    pub k_d: f64,
    pub k_theta: f64,
    pub omega_max: f64,
    pub dt_pred: f64,
    /// Extra time appended to the braking horizon of the safety check, seconds.
    pub brake_margin: f64,
    pub stale_limit: u64,
    pub safe_hold_ticks: u64,
    pub overload_threshold: f64,
    pub overload_window: u64,
    pub roaming: bool,

    // Decision layer.
    pub agent_period: u64,
    pub goal_tolerance: f64,
    pub block_expiry_ticks: u64,
    pub failure_cap: u32,
    pub detour_distance: f64,
    /// Extra body clearance, beyond `d_min`, the rule planner keeps from
    /// anything the scan shows.
    pub plan_standoff: f64,
    /// Ticks without any feedback after which an in-flight command is given up.
    pub command_timeout: u64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            robot_radius: 0.15,
            axle: 0.3,
            v_wheel_max: 0.5,
            a_max: 1.0,
            dt: 0.01,
            lidar_beams: 36,
            lidar_max_range: 5.0,
            lidar_noise_std: 0.0,
            d_min: 0.2,
            d_stop: 0.25,
            d_slow: 0.5,
            eps_pos: 0.05,
            eps_heading: 0.05,
            k_d: 1.0,
            k_theta: 2.0,
            omega_max: 2.0,
            dt_pred: 0.02,
            brake_margin: 0.1,
            stale_limit: 5,
            safe_hold_ticks: 200,
            overload_threshold: 0.8,
            overload_window: 100,
            roaming: false,
            agent_period: 50,
            goal_tolerance: 0.1,
            block_expiry_ticks: 400,
            failure_cap: 3,
            detour_distance: 1.0,
            plan_standoff: 0.25,
            command_timeout: 1000,
        }
    }
}

impl Params {
    /// Checks cross-field invariants. The error names the offending field.
    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("robot_radius", self.robot_radius),
            ("axle", self.axle),
            ("v_wheel_max", self.v_wheel_max),
            ("a_max", self.a_max),
            ("dt", self.dt),
            ("lidar_max_range", self.lidar_max_range),
            ("d_min", self.d_min),
            ("d_stop", self.d_stop),
            ("d_slow", self.d_slow),
            ("eps_pos", self.eps_pos),
            ("eps_heading", self.eps_heading),
            ("k_d", self.k_d),
            ("k_theta", self.k_theta),
            ("omega_max", self.omega_max),
            ("dt_pred", self.dt_pred),
            ("goal_tolerance", self.goal_tolerance),
            ("detour_distance", self.detour_distance),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(format!("params.{name}: must be finite and > 0, got {v}"));
            }
        }
        if !(self.plan_standoff.is_finite() && self.plan_standoff >= 0.0) {
            return Err(format!("params.plan_standoff: must be >= 0, got {}", self.plan_standoff));
        }
        if !(self.brake_margin.is_finite() && self.brake_margin >= 0.0) {
            return Err(format!("params.brake_margin: must be >= 0, got {}", self.brake_margin));
        }
        if !(self.lidar_noise_std.is_finite() && self.lidar_noise_std >= 0.0) {
            return Err(format!(
                "params.lidar_noise_std: must be >= 0, got {}",
                self.lidar_noise_std
            ));
        }
        if self.lidar_beams < 4 {
            return Err(format!("params.lidar_beams: need at least 4, got {}", self.lidar_beams));
        }
        if self.d_stop >= self.d_slow {
            return Err(format!(
                "params.d_stop: must be < d_slow ({} >= {})",
                self.d_stop, self.d_slow
            ));
        }
        if !(0.0..=1.0).contains(&self.overload_threshold) {
            return Err(format!(
                "params.overload_threshold: must be in [0,1], got {}",
                self.overload_threshold
            ));
        }
        if self.overload_window == 0 {
            return Err("params.overload_window: must be >= 1".into());
        }
        if self.agent_period == 0 {
            return Err("params.agent_period: must be >= 1".into());
        }
        if self.failure_cap == 0 {
            return Err("params.failure_cap: must be >= 1".into());
        }
        Ok(())
    }

    /// Physics ticks per second.
    pub fn tick_rate(&self) -> f64 {
        1.0 / self.dt
    }
}
