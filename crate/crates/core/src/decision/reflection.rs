use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::instinct::{bearing_sector, CommandId, Feedback, FeedbackStatus, HighCommandKind, ScanSummary, VerdictReason};
use crate::params::Params;
use crate::Tick;

/// What the agent has learned from recent feedback.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReflectionNote {
    /// World-frame sector index -> tick at which the block expires.
    pub blocked: BTreeMap<usize, Tick>,
    pub consecutive_failures: u32,
    pub last_refusal_reason: Option<String>,
}

impl ReflectionNote {
    pub fn is_blocked(&self, sector: usize) -> bool {
        self.blocked.contains_key(&sector)
    }

    pub fn blocked_sectors(&self) -> Vec<usize> {
        self.blocked.keys().copied().collect()
    }
}

/// Folds a batch of feedback into the notes. `sent` maps command ids to what
/// was asked, so a refusal can be tied back to the direction it pointed in.
pub fn self_reflection(
    mut notes: ReflectionNote,
    feedback: &[Feedback],
    summary: &ScanSummary,
    sent: &BTreeMap<CommandId, HighCommandKind>,
    now: Tick,
    params: &Params,
) -> ReflectionNote {
    notes.blocked.retain(|_, expiry| *expiry > now);
    let here = summary.pose_estimate.xy();
    for fb in feedback {
        match fb.status {
            FeedbackStatus::Completed => notes = ReflectionNote::default(),
            FeedbackStatus::Refused => {
                notes.consecutive_failures += 1;
                notes.last_refusal_reason = Some(fb.reason.clone());
                let obstacle = fb.verdict.is_some_and(|v| v.reason == VerdictReason::ObstaclePredicted);
                let target = sent.get(&fb.command_id).and_then(HighCommandKind::target);
                if let (true, Some(target)) = (obstacle, target) {
                    let sector = bearing_sector(here.bearing_to(target));
                    let expiry = now + params.block_expiry_ticks;
                    let e = notes.blocked.entry(sector).or_insert(expiry);
                    *e = (*e).max(expiry);
                }
            }
            FeedbackStatus::SafeMode => {
                notes.consecutive_failures += 1;
                notes.last_refusal_reason = Some(fb.reason.clone());
            }
            _ => {}
        }
    }
    notes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instinct::{Nearest, SafetyVerdict};
    use crate::sim::{Mode, Pose2D};

    fn summary() -> ScanSummary {
        ScanSummary {
            sector_min: [5.0; 8],
            nearest: Nearest { bearing: 0.0, range: 5.0 },
            pose_estimate: Pose2D::default(),
            load: 0.0,
            mode: Mode::Normal,
            tick: 0,
        }
    }

    fn refused(id: u64) -> Feedback {
        Feedback {
            command_id: id,
            status: FeedbackStatus::Refused,
            reason: "OBSTACLE_PREDICTED".into(),
            tick: 0,
            verdict: Some(SafetyVerdict { safe: false, predicted_min_clearance: 0.1, reason: VerdictReason::ObstaclePredicted }),
        }
    }

    #[test]
    fn refusal_blocks_commanded_sector() {
        let p = Params::default();
        let a = 10f64.to_radians();
        let sent = BTreeMap::from([(1, HighCommandKind::move_to(a.cos(), a.sin()))]);
        let n = self_reflection(ReflectionNote::default(), &[refused(1)], &summary(), &sent, 100, &p);
        assert_eq!(n.blocked_sectors(), vec![0]);
        assert_eq!(n.blocked[&0], 500);
        assert_eq!(n.consecutive_failures, 1);
    }

    #[test]
    fn completed_resets() {
        let p = Params::default();
        let sent = BTreeMap::from([(1, HighCommandKind::move_to(1.0, 0.0))]);
        let n = self_reflection(ReflectionNote::default(), &[refused(1), refused(1)], &summary(), &sent, 0, &p);
        assert_eq!(n.consecutive_failures, 2);
        let done = Feedback { status: FeedbackStatus::Completed, verdict: None, ..refused(2) };
        let n = self_reflection(n, &[done], &summary(), &sent, 1, &p);
        assert!(n.blocked.is_empty());
        assert_eq!(n.consecutive_failures, 0);
    }

    #[test]
    fn blocks_expire() {
        let p = Params::default();
        let sent = BTreeMap::from([(1, HighCommandKind::move_to(1.0, 0.0))]);
        let n = self_reflection(ReflectionNote::default(), &[refused(1)], &summary(), &sent, 0, &p);
        let n = self_reflection(n, &[], &summary(), &sent, 399, &p);
        assert!(n.is_blocked(0));
        let n = self_reflection(n, &[], &summary(), &sent, 400, &p);
        assert!(!n.is_blocked(0));
    }
}
