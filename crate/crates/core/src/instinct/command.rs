use serde::{Deserialize, Serialize};

use crate::params::Params;
use crate::sim::{Mode, Point, Pose2D};
use crate::Tick;

pub type CommandId = u64;

/// Symbolic command vocabulary offered to the decision layer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE", deny_unknown_fields)]
pub enum HighCommandKind {
    MoveTo {
        x: f64,
        y: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        speed: Option<f64>,
    },
    RotateTo {
        theta: f64,
    },
    FollowPath {
        waypoints: Vec<Point>,
    },
    Stop,
    QueryStatus,
}

impl HighCommandKind {
    pub fn move_to(x: f64, y: f64) -> Self {
        HighCommandKind::MoveTo { x, y, speed: None }
    }

    pub fn is_motion(&self) -> bool {
        matches!(
            self,
            HighCommandKind::MoveTo { .. }
                | HighCommandKind::RotateTo { .. }
                | HighCommandKind::FollowPath { .. }
        )
    }

    /// The first point this command drives toward, if it translates.
    pub fn target(&self) -> Option<Point> {
        match self {
            HighCommandKind::MoveTo { x, y, .. } => Some(Point::new(*x, *y)),
            HighCommandKind::FollowPath { waypoints } => waypoints.first().copied(),
            _ => None,
        }
    }

    pub fn validate(&self, params: &Params) -> Result<(), String> {
        let check_speed = |speed: &Option<f64>| match speed {
            Some(s) if !(s.is_finite() && *s > 0.0 && *s <= params.v_wheel_max) => Err(format!(
                "speed {s} outside (0, {}]",
                params.v_wheel_max
            )),
            _ => Ok(()),
        };
        match self {
            HighCommandKind::MoveTo { x, y, speed } => {
                if !(x.is_finite() && y.is_finite()) {
                    return Err("MOVE_TO target not finite".into());
                }
                check_speed(speed)
            }
            HighCommandKind::RotateTo { theta } if !theta.is_finite() => {
                Err("ROTATE_TO theta not finite".into())
            }
            HighCommandKind::FollowPath { waypoints } => {
                if waypoints.is_empty() {
                    Err("FOLLOW_PATH has no waypoints".into())
                } else if waypoints.iter().any(|p| !p.is_finite()) {
                    Err("FOLLOW_PATH waypoint not finite".into())
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HighCommand {
    pub id: CommandId,
    #[serde(flatten)]
    pub kind: HighCommandKind,
    pub issued_tick: Tick,
}

/// Who asked for a low-level command.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Parent {
    High(CommandId),
    Survival,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LowCommandKind {
    SetWheels { v_left: f64, v_right: f64, duration_ticks: u32 },
    StopAll,
    AcquireScan,
}

impl LowCommandKind {
    pub fn scaled(self, factor: f64) -> Self {
        match self {
            LowCommandKind::SetWheels { v_left, v_right, duration_ticks } => {
                LowCommandKind::SetWheels {
                    v_left: v_left * factor,
                    v_right: v_right * factor,
                    duration_ticks,
                }
            }
            other => other,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowCommand {
    pub id: u64,
    pub parent: Parent,
    #[serde(flatten)]
    pub kind: LowCommandKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum VerdictReason {
    Ok,
    ObstaclePredicted,
    OutOfBounds,
    LimitExceeded,
}

impl VerdictReason {
    pub fn code(self) -> &'static str {
        match self {
            VerdictReason::Ok => "OK",
            VerdictReason::ObstaclePredicted => "OBSTACLE_PREDICTED",
            VerdictReason::OutOfBounds => "OUT_OF_BOUNDS",
            VerdictReason::LimitExceeded => "LIMIT_EXCEEDED",
        }
    }
}

/// `safe` iff `reason == Ok` iff `predicted_min_clearance >= d_min`.
/// Commands that cannot move the robot report `+inf`; commands rejected
/// without simulation report `-inf`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SafetyVerdict {
    pub safe: bool,
    #[serde(with = "crate::finite")]
    pub predicted_min_clearance: f64,
    pub reason: VerdictReason,
}

impl SafetyVerdict {
    pub fn ok_unbounded() -> Self {
        Self { safe: true, predicted_min_clearance: f64::INFINITY, reason: VerdictReason::Ok }
    }

    pub fn rejected(reason: VerdictReason) -> Self {
        Self { safe: false, predicted_min_clearance: f64::NEG_INFINITY, reason }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FeedbackStatus {
    Accepted,
    Executing,
    Completed,
    Refused,
    SafeMode,
    DeviceError,
}

impl FeedbackStatus {
    pub fn is_terminal(self) -> bool {
        matches!(self, FeedbackStatus::Completed | FeedbackStatus::Refused | FeedbackStatus::SafeMode)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Feedback {
    pub command_id: CommandId,
    pub status: FeedbackStatus,
    pub reason: String,
    pub tick: Tick,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<SafetyVerdict>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Nearest {
    /// Robot-frame bearing, radians in `(-π, π]`.
    pub bearing: f64,
    pub range: f64,
}

/// The reduced view of the sensors handed to the decision layer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanSummary {
    /// Minimum range per 45° sector, sector 0 centered on the heading,
    /// counter-clockwise.
    pub sector_min: [f64; 8],
    pub nearest: Nearest,
    pub pose_estimate: Pose2D,
    pub load: f64,
    pub mode: Mode,
    pub tick: Tick,
}
