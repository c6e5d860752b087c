//! Brute-force reference implementations and seeded generators used to
//! validate the instinct layer's analytic pieces. Nothing here shares code
//! with the components it checks beyond plain data types.

mod fine;
mod gen;
mod report;

pub use fine::{oracle_safety, DT_FINE};
pub use gen::{gen_run_scenario, gen_scenario, hallucinating, ScenarioCase, CASE_BELIEF_BEAMS};
pub use report::{agreement_report, AgreementReport, Mismatch, OracleError, BOUNDARY_BAND};
