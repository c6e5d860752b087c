//! Command-line front end for the instinct runtime: scenario loading with
//! flag overrides, trace/metrics output, and an HTTP completion client for
//! the LLM backend.

mod args;
mod http;

pub use args::{apply_overrides, needs_llm, AgentArg, Cli};
pub use http::{HttpCompletionClient, HttpConfig, ENV_API_KEY, ENV_ENDPOINT, ENV_MODEL};

use anyhow::Context;
use instinct_core::external::{write_metrics, write_trace, LiveConfig, RunOptions};
use instinct_core::{load_scenario, run_sim, RunMetrics, Scenario};

/// Why a run did not produce output. The binary maps these to exit codes.
#[derive(Debug)]
pub enum Failure {
    /// The scenario file or a flag override is invalid.
    Scenario(anyhow::Error),
    /// Anything else: backend setup, I/O while writing results.
    Run(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Scenario(_) => 2,
            Failure::Run(_) => 1,
        }
    }

    pub fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Scenario(e) | Failure::Run(e) => e,
        }
    }
}

/// Loads the scenario named on the command line and applies flag overrides.
pub fn prepare(cli: &Cli) -> Result<Scenario, Failure> {
    let mut scenario = load_scenario(&cli.scenario).map_err(|e| Failure::Scenario(e.into()))?;
    apply_overrides(cli, &mut scenario);
    scenario
        .validate()
        .with_context(|| format!("{} after command-line overrides", cli.scenario.display()))
        .map_err(Failure::Scenario)?;
    Ok(scenario)
}

/// Runs the scenario and writes whatever outputs were requested.
pub fn execute(cli: &Cli, scenario: &Scenario) -> Result<RunMetrics, Failure> {
    let mut options = RunOptions::default();
    if cli.live {
        options.live = Some(LiveConfig { speedup: cli.speedup });
    }
    if needs_llm(scenario) {
        let config = HttpConfig::from_env().map_err(Failure::Run)?;
        options.llm = Some(Box::new(HttpCompletionClient::new(config)));
    }
    let out = run_sim(scenario, options).map_err(|e| Failure::Run(e.into()))?;
    if let Some(path) = &cli.trace_out {
        write_trace(&out.events, path).map_err(|e| Failure::Run(e.into()))?;
    }
    if let Some(path) = &cli.metrics_out {
        write_metrics(&out.metrics, path).map_err(|e| Failure::Run(e.into()))?;
    }
    Ok(out.metrics)
}

/// One human-readable line summarising a run.
pub fn summary_line(m: &RunMetrics) -> String {
    format!(
        "ticks={} min_clearance={:.4} collisions={} refusals={} hallucinated={} completed={} blocked={} instinct_p99_us={:.1}",
        m.ticks,
        m.min_ground_truth_clearance,
        m.collisions,
        m.refusals,
        m.hallucinated_commands,
        m.tasks_completed,
        m.tasks_blocked,
        m.instinct_tick_time.p99_us,
    )
}
