use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::decision::TaskState;
use crate::trace::{EventBody, TraceEvent};

/// Wall-clock cost of the instinct tick, in microseconds. The only part of
/// the metrics that cannot be recomputed from the trace.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TimingStats {
    pub samples: u64,
    pub mean_us: f64,
    pub p50_us: f64,
    pub p99_us: f64,
    pub max_us: f64,
}

impl TimingStats {
    /// Nearest-rank percentiles over per-tick samples.
    pub fn from_samples(samples_us: &[f64]) -> Self {
        if samples_us.is_empty() {
            return Self::default();
        }
        let mut s = samples_us.to_vec();
        s.sort_by(f64::total_cmp);
        let rank = |q: f64| s[((q * s.len() as f64).ceil() as usize).clamp(1, s.len()) - 1];
        Self {
            samples: s.len() as u64,
            mean_us: s.iter().sum::<f64>() / s.len() as f64,
            p50_us: rank(0.50),
            p99_us: rank(0.99),
            max_us: s[s.len() - 1],
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    /// Physics ticks simulated.
    pub ticks: u64,
    /// Smallest gap between the robot body and any obstacle or wall, from
    /// ground truth. `inf` when nothing was simulated.
    #[serde(with = "crate::finite")]
    pub min_ground_truth_clearance: f64,
    /// Number of times the collision flag went up.
    pub collisions: u64,
    /// Agent-originated low-level commands refused by the safety check.
    pub refusals: u64,
    /// Survival-originated low-level commands refused by the safety check.
    pub survival_refusals: u64,
    pub hallucinated_commands: u64,
    pub commands_sent: u64,
    pub commands_executed: u64,
    pub tasks_completed: u64,
    pub tasks_blocked: u64,
    pub safe_mode_entries: u64,
    pub unsafe_ticks: u64,
    pub instinct_tick_time: TimingStats,
}

/// Every metric except timing, derived from the trace alone.
pub fn metrics_from_trace(events: &[TraceEvent]) -> RunMetrics {
    let mut m = RunMetrics { min_ground_truth_clearance: f64::INFINITY, ..Default::default() };
    let mut was_collided = false;
    let mut tasks: BTreeMap<u64, TaskState> = BTreeMap::new();
    for e in events {
        match &e.body {
            EventBody::State { body_clearance, collided, .. } => {
                m.ticks += 1;
                m.min_ground_truth_clearance = m.min_ground_truth_clearance.min(*body_clearance);
                if *collided && !was_collided {
                    m.collisions += 1;
                }
                was_collided = *collided;
            }
            EventBody::Refused { .. } => m.refusals += 1,
            EventBody::SurvivalRefused { .. } => m.survival_refusals += 1,
            EventBody::Hallucinated { .. } => m.hallucinated_commands += 1,
            EventBody::CommandSent { .. } => m.commands_sent += 1,
            EventBody::Execute { .. } => m.commands_executed += 1,
            EventBody::SafeModeEnter { .. } => m.safe_mode_entries += 1,
            EventBody::Status { safe: false, .. } => m.unsafe_ticks += 1,
            EventBody::TaskUpdate { task_id, state, .. } => {
                tasks.insert(*task_id, *state);
            }
            _ => {}
        }
    }
    m.tasks_completed = tasks.values().filter(|s| **s == TaskState::Completed).count() as u64;
    m.tasks_blocked = tasks.values().filter(|s| **s == TaskState::Blocked).count() as u64;
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_rank_percentiles() {
        let samples: Vec<f64> = (1..=100).map(f64::from).collect();
        let t = TimingStats::from_samples(&samples);
        assert_eq!(t.p50_us, 50.0);
        assert_eq!(t.p99_us, 99.0);
        assert_eq!(t.max_us, 100.0);
        assert_eq!(TimingStats::from_samples(&[]).samples, 0);
    }

    #[test]
    fn empty_trace() {
        let m = metrics_from_trace(&[]);
        assert_eq!(m.ticks, 0);
        assert_eq!(m.min_ground_truth_clearance, f64::INFINITY);
        let json = serde_json::to_string(&m).unwrap();
        assert!(json.contains(r#""min_ground_truth_clearance":"inf""#));
    }
}
