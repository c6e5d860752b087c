//! The external layer and run harness: scenario files, task injection, the
//! tick loop, trace/metrics output and trace invariant checks.

pub mod checks;
mod metrics;
mod output;
mod run;
mod scenario;

pub use metrics::{metrics_from_trace, RunMetrics, TimingStats};
pub use output::{write_metrics, write_trace, OutputError};
pub use run::{run_sim, LiveConfig, RunOptions, RunOutput};
pub use scenario::{
    load_scenario, AgentConfig, BackendKind, ChannelsConfig, Scenario, ScenarioError, TaskSpec,
};
