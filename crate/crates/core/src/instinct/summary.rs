use super::command::{Nearest, ScanSummary};
use crate::sim::{LidarScan, RobotState};

pub const SECTORS: usize = 8;

/// Sector of beam `i` out of `n`: sector k spans relative angles
/// `[45k - 22.5°, 45k + 22.5°)`. Integer arithmetic keeps beams that sit
/// exactly on a sector edge in a stable sector.
pub fn beam_sector(i: usize, n: usize) -> usize {
    ((16 * i + n) / (2 * n)) % SECTORS
}

/// Sector containing a robot-frame bearing.
pub fn bearing_sector(bearing: f64) -> usize {
    let step = std::f64::consts::TAU / SECTORS as f64;
    let k = ((bearing + 0.5 * step) / step).floor() as i64;
    k.rem_euclid(SECTORS as i64) as usize
}

/// Center bearing of sector `k`, in `(-π, π]`.
pub fn sector_center(k: usize) -> f64 {
    crate::sim::wrap_angle(k as f64 * std::f64::consts::TAU / SECTORS as f64)
}

pub fn summarize(scan: &LidarScan, state: &RobotState) -> ScanSummary {
    let n = scan.len();
    let mut sector_min = [scan.max_range; SECTORS];
    let mut nearest = Nearest { bearing: 0.0, range: scan.max_range };
    let mut best = f64::INFINITY;
    for (i, &r) in scan.ranges.iter().enumerate() {
        let k = beam_sector(i, n);
        sector_min[k] = sector_min[k].min(r);
        if r < best {
            best = r;
            nearest = Nearest { bearing: scan.relative_angle(i), range: r };
        }
    }
    ScanSummary {
        sector_min,
        nearest,
        pose_estimate: state.pose,
        load: state.load,
        mode: state.mode,
        tick: scan.tick,
    }
}
