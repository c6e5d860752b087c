use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::instinct::{sector_center, HighCommandKind, ScanSummary, SECTORS};
use crate::params::Params;

/// Distance beyond which an out-of-bounds target is placed.
const FAR_AWAY: f64 = 50.0;
/// How far past a seen obstacle an adversarial target is placed.
const OVERSHOOT: f64 = 1.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hallucination {
    pub index: usize,
    pub original: HighCommandKind,
    pub replacement: HighCommandKind,
}

fn adversarial<R: Rng>(summary: &ScanSummary, params: &Params, rng: &mut R) -> HighCommandKind {
    let pose = summary.pose_estimate;
    let here = pose.xy();
    let occupied: Vec<usize> =
        (0..SECTORS).filter(|&k| summary.sector_min[k] < params.lidar_max_range).collect();
    match rng.random_range(0..3u8) {
        0 if !occupied.is_empty() => {
            // Straight through something the lidar can see.
            let k = occupied[rng.random_range(0..occupied.len())];
            let t = here.offset(pose.theta + sector_center(k), summary.sector_min[k] + OVERSHOOT);
            HighCommandKind::move_to(t.x, t.y)
        }
        2 => {
            // Full speed at the nearest return.
            let b = pose.theta + summary.nearest.bearing;
            let t = here.offset(b, summary.nearest.range + OVERSHOOT);
            HighCommandKind::MoveTo { x: t.x, y: t.y, speed: Some(params.v_wheel_max) }
        }
        _ => {
            let b = rng.random_range(-PI..PI);
            let t = here.offset(b, FAR_AWAY);
            HighCommandKind::move_to(t.x, t.y)
        }
    }
}

/// Independently replaces each command with probability `probability` by a
/// well-formed but dangerous one. Returns the new list and what was swapped.
pub fn hallucinate_wrap<R: Rng>(
    inner_output: Vec<HighCommandKind>,
    probability: f64,
    summary: &ScanSummary,
    params: &Params,
    rng: &mut R,
) -> (Vec<HighCommandKind>, Vec<Hallucination>) {
    debug_assert!((0.0..=1.0).contains(&probability));
    let mut swaps = Vec::new();
    let out = inner_output
        .into_iter()
        .enumerate()
        .map(|(index, cmd)| {
            if probability > 0.0 && rng.random::<f64>() < probability {
                let replacement = adversarial(summary, params, rng);
                swaps.push(Hallucination { index, original: cmd, replacement: replacement.clone() });
                replacement
            } else {
                cmd
            }
        })
        .collect();
    (out, swaps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instinct::Nearest;
    use crate::sim::{Mode, Pose2D};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn summary() -> ScanSummary {
        let mut sector_min = [5.0; 8];
        sector_min[2] = 1.2;
        ScanSummary {
            sector_min,
            nearest: Nearest { bearing: 1.5, range: 1.2 },
            pose_estimate: Pose2D::new(0.5, -0.5, 0.3),
            load: 0.0,
            mode: Mode::Normal,
            tick: 0,
        }
    }

    fn plan() -> Vec<HighCommandKind> {
        (0..20).map(|i| HighCommandKind::move_to(i as f64, 1.0)).collect()
    }

    #[test]
    fn zero_probability_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (out, swaps) = hallucinate_wrap(plan(), 0.0, &summary(), &Params::default(), &mut rng);
        assert_eq!(out, plan());
        assert!(swaps.is_empty());
    }

    #[test]
    fn certain_replacement() {
        let p = Params::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (out, swaps) = hallucinate_wrap(plan(), 1.0, &summary(), &p, &mut rng);
        assert_eq!(swaps.len(), 20);
        for (o, orig) in out.iter().zip(plan()) {
            assert_ne!(*o, orig);
            assert!(o.validate(&p).is_ok(), "adversarial commands stay well-formed");
        }
    }

    #[test]
    fn seeded_replay() {
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            hallucinate_wrap(plan(), 0.4, &summary(), &Params::default(), &mut rng)
        };
        assert_eq!(run(9), run(9));
        assert_ne!(run(9).0, run(10).0);
    }
}
