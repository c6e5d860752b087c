use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::gen::ScenarioCase;
use crate::instinct::SafetyVerdict;

/// Half-width of the band around `d_min` inside which checker and oracle are
/// allowed to disagree (see docs/oracle.md for the derivation).
pub const BOUNDARY_BAND: f64 = 0.02;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("verdict lists differ in length: {cases} cases, {checker} checker, {oracle} oracle")]
    LengthMismatch { cases: usize, checker: usize, oracle: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mismatch {
    pub seed: u64,
    pub checker_safe: bool,
    #[serde(with = "crate::finite")]
    pub oracle_clearance: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub total: usize,
    pub agreements: usize,
    pub mismatches: Vec<Mismatch>,
    pub excluded_boundary: usize,
}

impl AgreementReport {
    /// Checker said safe, oracle said unsafe: never acceptable.
    pub fn missed_hazards(&self) -> Vec<u64> {
        self.mismatches.iter().filter(|m| m.checker_safe).map(|m| m.seed).collect()
    }

    /// Checker refused what the oracle would have allowed: tolerated up to a
    /// rate.
    pub fn false_refusals(&self) -> usize {
        self.mismatches.iter().filter(|m| !m.checker_safe).count()
    }

    pub fn false_refusal_rate(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.false_refusals() as f64 / self.total as f64
        }
    }
}

/// Compares checker and oracle `safe` flags case by case. Cases whose
/// oracle clearance is within [`BOUNDARY_BAND`] of `d_min` are set aside.
pub fn agreement_report(
    cases: &[ScenarioCase],
    checker: &[SafetyVerdict],
    oracle: &[SafetyVerdict],
    d_min: f64,
) -> Result<AgreementReport, OracleError> {
    if cases.len() != checker.len() || cases.len() != oracle.len() {
        return Err(OracleError::LengthMismatch { cases: cases.len(), checker: checker.len(), oracle: oracle.len() });
    }
    let mut r = AgreementReport { total: cases.len(), ..Default::default() };
    for ((case, c), o) in cases.iter().zip(checker).zip(oracle) {
        if (o.predicted_min_clearance - d_min).abs() < BOUNDARY_BAND {
            r.excluded_boundary += 1;
        } else if c.safe == o.safe {
            r.agreements += 1;
        } else {
            r.mismatches.push(Mismatch {
                seed: case.seed,
                checker_safe: c.safe,
                oracle_clearance: o.predicted_min_clearance,
            });
        }
    }
    Ok(r)
}
