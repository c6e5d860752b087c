//! Layered robot control runtime: an always-on instinct layer that vets every
//! command coming from an unreliable decision layer, running on top of a
//! deterministic differential-drive simulator.
//!
//! Layers, bottom up:
//!
//! - [`sim`]: ground-truth world, robot physics and device models.
//! - [`bus`]: latency/drop channels between layers plus the memory log.
//! - [`instinct`]: the fixed-rate survival loop, safety check and refusal.
//! - [`decision`]: the agent loop with pluggable planners, including a
//!   hallucination injector and an LLM adapter.
//! - [`external`]: scenario files, the run harness, traces and metrics.
//! - [`oracle`]: brute-force reference checks and scenario generators.

pub mod bus;
pub mod decision;
pub mod external;
pub mod instinct;
pub mod oracle;
pub mod params;
pub mod sim;
pub mod trace;

mod finite;

pub use bus::{Channel, ChannelConfig, Envelope, Link, MemoryRecord, MemoryStore, SendOutcome};
pub use decision::{Agent, PlannerBackend, Task, TaskState};
pub use external::{load_scenario, run_sim, RunMetrics, RunOutput, Scenario};
pub use instinct::{
    Feedback, FeedbackStatus, HighCommand, HighCommandKind, Instinct, LowCommand,
    LowCommandKind, SafetyVerdict, ScanSummary, VerdictReason,
};
pub use params::Params;
pub use sim::{LidarScan, Mode, Point, Pose2D, RobotState, WorldModel};
pub use trace::{EventBody, Layer, Trace, TraceEvent};

/// Logical simulation time, in physics ticks.
pub type Tick = u64;
