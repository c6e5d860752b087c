use super::map::FreeSpaceMap;
use super::reflection::ReflectionNote;
use super::task::{Goal, Task};
use crate::instinct::{bearing_sector, sector_center, HighCommandKind, ScanSummary, SECTORS};
use crate::params::Params;
use crate::sim::Point;

/// Route to `target` from what the map knows and the refusal history.
///
/// The preferred leg runs as far along the map's cheapest path as a clean
/// straight line allows, ending at the target itself when nothing is in the
/// way. If that leg points into a refused sector, or nothing clean is known,
/// a detour of fixed length goes through the closest unblocked sector whose
/// leg is clean (followed by the target when that leg is clean too). With no
/// clean option at all, refusal history alone decides. Empty when every
/// sector is blocked.
fn route(
    summary: &ScanSummary,
    target: Point,
    notes: &ReflectionNote,
    map: &FreeSpaceMap,
    params: &Params,
) -> Vec<HighCommandKind> {
    let from = summary.pose_estimate.xy();
    let goal = HighCommandKind::move_to(target.x, target.y);
    let direct = bearing_sector(from.bearing_to(target));
    let open = |k: usize| !notes.is_blocked(k);
    let offsets: Vec<usize> =
        (1..=SECTORS / 2).flat_map(|off| [(direct + off) % SECTORS, (direct + SECTORS - off) % SECTORS]).collect();
    let detour = |k: usize| from.offset(sector_center(k), params.detour_distance);

    // Narrow passages: settle for less standoff before giving up on the map.
    for fraction in STANDOFF_STEPS {
        let relaxed = Params { plan_standoff: params.plan_standoff * fraction, ..params.clone() };
        if let Some(leg) = map.next_leg(from, target, &relaxed) {
            if open(bearing_sector(from.bearing_to(leg))) {
                return vec![HighCommandKind::move_to(leg.x, leg.y)];
            }
            break;
        }
    }
    if let Some(d) = offsets.iter().filter(|&&k| open(k)).map(|&k| detour(k)).find(|&d| map.is_clean(from, d, params)) {
        let first = HighCommandKind::move_to(d.x, d.y);
        return if map.is_clean(d, target, params) { vec![first, goal] } else { vec![first] };
    }
    // Nothing clean is known: trust refusal history alone.
    if open(direct) {
        return vec![goal];
    }
    offsets.iter().find(|&&k| open(k)).map(|&k| detour(k)).map(|d| vec![HighCommandKind::move_to(d.x, d.y)]).unwrap_or_default()
}

/// Fractions of the planning standoff tried in turn when no leg is clean.
const STANDOFF_STEPS: [f64; 2] = [1.0, 0.5];

/// Deterministic planner.
pub fn plan_rule(
    task: &Task,
    notes: &ReflectionNote,
    summary: &ScanSummary,
    map: &FreeSpaceMap,
    params: &Params,
) -> Vec<HighCommandKind> {
    match &task.goal {
        Goal::Hold => vec![HighCommandKind::Stop],
        Goal::Goto { .. } | Goal::Patrol { .. } => match task.current_target() {
            Some(target) => route(summary, target, notes, map, params),
            None => Vec::new(),
        },
    }
}
