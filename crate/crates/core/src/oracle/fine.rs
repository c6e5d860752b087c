use super::gen::ScenarioCase;
use crate::instinct::{LowCommandKind, SafetyVerdict, VerdictReason};
use crate::params::Params;

/// Default integration step for the reference check, a tenth of the
/// checker's prediction step.
pub const DT_FINE: f64 = 0.002;

/// Exact unicycle update for constant wheel speeds over `h` seconds.
fn arc(x: f64, y: f64, th: f64, vl: f64, vr: f64, axle: f64, h: f64) -> (f64, f64, f64) {
    let v = 0.5 * (vl + vr);
    let w = (vr - vl) / axle;
    if w.abs() < 1e-12 {
        (x + v * h * th.cos(), y + v * h * th.sin(), th)
    } else {
        let th1 = th + w * h;
        let r = v / w;
        (x + r * (th1.sin() - th.sin()), y - r * (th1.cos() - th.cos()), th1)
    }
}

fn ramp(cur: f64, target: f64, step: f64) -> f64 {
    if target > cur {
        (cur + step).min(target)
    } else {
        (cur - step).max(target)
    }
}

/// Reference verdict for `case`: the command held for its duration, then
/// full braking plus the brake margin, integrated every `dt_fine` seconds
/// with exact arcs. Clearance is measured against the case's belief points
/// and the world bounds, exactly as the checker sees them.
pub fn oracle_safety(case: &ScenarioCase, params: &Params, dt_fine: f64) -> SafetyVerdict {
    assert!(dt_fine > 0.0 && dt_fine <= params.dt_pred / 10.0 + 1e-15, "dt_fine too coarse");
    let (vl_cmd, vr_cmd, ticks) = match case.command.kind {
        LowCommandKind::StopAll | LowCommandKind::AcquireScan => return SafetyVerdict::ok_unbounded(),
        LowCommandKind::SetWheels { v_left, v_right, duration_ticks } => (v_left, v_right, duration_ticks),
    };
    if vl_cmd.abs() > params.v_wheel_max + 1e-12 || vr_cmd.abs() > params.v_wheel_max + 1e-12 || ticks == 0 {
        return SafetyVerdict::rejected(VerdictReason::LimitExceeded);
    }

    let hold = ticks as f64 * params.dt;
    let peak = [vl_cmd, vr_cmd, case.start_wheels.0, case.start_wheels.1]
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let horizon = hold + peak / params.a_max + params.brake_margin;
    let n = (horizon / dt_fine).ceil() as usize;
    let dv = params.a_max * dt_fine;
    let b = &case.world.bounds;

    let body_gap = |x: f64, y: f64| -> (f64, bool) {
        let mut best = f64::INFINITY;
        for p in &case.belief.points {
            let d = ((x - p.x).powi(2) + (y - p.y).powi(2)).sqrt() - case.belief.inflation;
            best = best.min(d);
        }
        let fence = [x - b.min.x, b.max.x - x, y - b.min.y, b.max.y - y]
            .into_iter()
            .fold(f64::INFINITY, f64::min)
            - params.robot_radius;
        if fence < best {
            (fence, true)
        } else {
            (best, false)
        }
    };

    let (mut x, mut y, mut th) = (case.start.x, case.start.y, case.start.theta);
    let (mut vl, mut vr) = case.start_wheels;
    let (mut worst, mut fence_limited) = body_gap(x, y);
    for k in 0..n {
        let t = k as f64 * dt_fine;
        let (tl, tr) = if t < hold - 1e-12 { (vl_cmd, vr_cmd) } else { (0.0, 0.0) };
        vl = ramp(vl, tl, dv);
        vr = ramp(vr, tr, dv);
        (x, y, th) = arc(x, y, th, vl, vr, params.axle, dt_fine);
        let (g, fence) = body_gap(x, y);
        if g < worst {
            worst = g;
            fence_limited = fence;
        }
    }
    if worst >= params.d_min {
        SafetyVerdict { safe: true, predicted_min_clearance: worst, reason: VerdictReason::Ok }
    } else {
        let reason = if fence_limited { VerdictReason::OutOfBounds } else { VerdictReason::ObstaclePredicted };
        SafetyVerdict { safe: false, predicted_min_clearance: worst, reason }
    }
}
