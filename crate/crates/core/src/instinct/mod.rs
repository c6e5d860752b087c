//! The instinct layer: a fixed-rate loop that runs survival tasks first and
//! only then converts, checks and executes (or refuses) high-level commands.

mod command;
mod convert;
mod safety;
mod status;
mod summary;
mod survival;
mod tick;

pub use command::{
    CommandId, Feedback, FeedbackStatus, HighCommand, HighCommandKind, LowCommand, LowCommandKind,
    Nearest, Parent, SafetyVerdict, ScanSummary, VerdictReason,
};
pub use convert::{convert, Conversion};
pub use safety::{predict_trajectory, safety_check, ObstacleBelief};
pub use status::{front_min, DeviceStatus, StatusMonitor, UnsafeReason};
pub use summary::{beam_sector, bearing_sector, sector_center, summarize, SECTORS};
pub use survival::{governor_scale, perform_survival_tasks, SurvivalAction};
pub use tick::{refuse, Instinct, InstinctPorts, TickReport};
