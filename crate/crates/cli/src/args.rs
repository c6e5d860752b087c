use clap::{Parser, ValueEnum};
use instinct_core::external::BackendKind;
use instinct_core::Scenario;
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AgentArg {
    Rule,
    Hallucinate,
    Llm,
}

/// Run a robot scenario through the instinct runtime and simulator.
#[derive(Debug, Parser)]
#[command(name = "instinct-sim", version)]
pub struct Cli {
    /// Scenario file (JSON).
    #[arg(long, value_name = "PATH")]
    pub scenario: PathBuf,
    /// Overrides the scenario seed.
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    /// Overrides the run length in ticks.
    #[arg(long, value_name = "N")]
    pub ticks: Option<u64>,
    /// Overrides the decision backend.
    #[arg(long, value_enum)]
    pub agent: Option<AgentArg>,
    /// Overrides the hallucination probability.
    #[arg(long, value_name = "P")]
    pub hallucination_prob: Option<f64>,
    /// Write the event trace here, one JSON object per line.
    #[arg(long, value_name = "PATH")]
    pub trace_out: Option<PathBuf>,
    /// Write run metrics here as JSON. Printed to stdout when omitted.
    #[arg(long, value_name = "PATH")]
    pub metrics_out: Option<PathBuf>,
    /// Run the decision layer in its own thread with wall-clock pacing.
    /// Output is not reproducible in this mode.
    #[arg(long)]
    pub live: bool,
    /// Simulated seconds per wall-clock second in live mode.
    #[arg(long, value_name = "X", default_value_t = 1.0, requires = "live")]
    pub speedup: f64,
}

pub fn apply_overrides(cli: &Cli, scenario: &mut Scenario) {
    if let Some(seed) = cli.seed {
        scenario.seed = seed;
    }
    if let Some(ticks) = cli.ticks {
        scenario.ticks = ticks;
    }
    let agent = &mut scenario.agent;
    match cli.agent {
        Some(AgentArg::Rule) => agent.backend = BackendKind::Rule,
        Some(AgentArg::Llm) => agent.backend = BackendKind::Llm,
        Some(AgentArg::Hallucinate) => {
            agent.backend = BackendKind::Hallucinate;
            if !matches!(agent.inner, BackendKind::Rule | BackendKind::Llm) {
                agent.inner = BackendKind::Rule;
            }
        }
        None => {}
    }
    if let Some(p) = cli.hallucination_prob {
        agent.hallucination_prob = p;
    }
}

/// Whether running `scenario` requires a completion endpoint.
pub fn needs_llm(scenario: &Scenario) -> bool {
    let a = &scenario.agent;
    a.backend == BackendKind::Llm || (a.backend == BackendKind::Hallucinate && a.inner == BackendKind::Llm)
}
