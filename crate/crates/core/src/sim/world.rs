use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::pose::Point;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Circle {
    pub center: Point,
    pub radius: f64,
}

/// Axis-aligned rectangle, `min < max` componentwise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rect {
    pub min: Point,
    pub max: Point,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self { min: Point::new(x0, y0), max: Point::new(x1, y1) }
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    /// Distance from `p` to the nearest edge, positive inside, negative outside.
    pub fn inner_margin(&self, p: Point) -> f64 {
        (p.x - self.min.x)
            .min(self.max.x - p.x)
            .min(p.y - self.min.y)
            .min(self.max.y - p.y)
    }

    /// Signed distance to the rectangle as a solid obstacle.
    fn signed_distance(&self, p: Point) -> f64 {
        let cx = 0.5 * (self.min.x + self.max.x);
        let cy = 0.5 * (self.min.y + self.max.y);
        let dx = (p.x - cx).abs() - 0.5 * (self.max.x - self.min.x);
        let dy = (p.y - cy).abs() - 0.5 * (self.max.y - self.min.y);
        let outside = dx.max(0.0).hypot(dy.max(0.0));
        let inside = dx.max(dy).min(0.0);
        outside + inside
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum WorldError {
    #[error("world.circles[{index}]: radius must be > 0, got {radius}")]
    BadRadius { index: usize, radius: f64 },
    #[error("world.rects[{index}]: min must be < max componentwise")]
    BadRect { index: usize },
    #[error("world.bounds: min must be < max componentwise")]
    BadBounds,
    #[error("world.{kind}[{index}]: obstacle extends outside bounds")]
    OutsideBounds { kind: &'static str, index: usize },
    #[error("world: non-finite coordinate")]
    NonFinite,
}

/// Static 2D environment: circles and axis-aligned rectangles inside a
/// rectangular arena.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorldModel {
    pub bounds: Rect,
    #[serde(default)]
    pub circles: Vec<Circle>,
    #[serde(default)]
    pub rects: Vec<Rect>,
}

impl WorldModel {
    pub fn empty(bounds: Rect) -> Self {
        Self { bounds, circles: Vec::new(), rects: Vec::new() }
    }

    pub fn obstacle_count(&self) -> usize {
        self.circles.len() + self.rects.len()
    }

    pub fn validate(&self) -> Result<(), WorldError> {
        let b = &self.bounds;
        let coords = [b.min, b.max]
            .into_iter()
            .chain(self.circles.iter().map(|c| c.center))
            .chain(self.rects.iter().flat_map(|r| [r.min, r.max]));
        if coords.into_iter().any(|p| !p.is_finite())
            || self.circles.iter().any(|c| !c.radius.is_finite())
        {
            return Err(WorldError::NonFinite);
        }
        if !(b.min.x < b.max.x && b.min.y < b.max.y) {
            return Err(WorldError::BadBounds);
        }
        for (index, c) in self.circles.iter().enumerate() {
            if c.radius <= 0.0 {
                return Err(WorldError::BadRadius { index, radius: c.radius });
            }
            if b.inner_margin(c.center) < c.radius {
                return Err(WorldError::OutsideBounds { kind: "circles", index });
            }
        }
        for (index, r) in self.rects.iter().enumerate() {
            if !(r.min.x < r.max.x && r.min.y < r.max.y) {
                return Err(WorldError::BadRect { index });
            }
            if !(b.contains(r.min) && b.contains(r.max)) {
                return Err(WorldError::OutsideBounds { kind: "rects", index });
            }
        }
        Ok(())
    }
}

/// Signed distance from `point` to the nearest obstacle surface or arena
/// edge. Negative values are penetration depth.
pub fn clearance(world: &WorldModel, point: Point) -> f64 {
    let mut best = world.bounds.inner_margin(point);
    for c in &world.circles {
        best = best.min(point.dist(c.center) - c.radius);
    }
    for r in &world.rects {
        best = best.min(r.signed_distance(point));
    }
    best
}

fn ray_circle(origin: Point, dx: f64, dy: f64, c: &Circle) -> Option<f64> {
    let ox = origin.x - c.center.x;
    let oy = origin.y - c.center.y;
    let b = ox * dx + oy * dy;
    let cc = ox * ox + oy * oy - c.radius * c.radius;
    if cc <= 0.0 {
        return Some(0.0);
    }
    let disc = b * b - cc;
    if disc < 0.0 {
        return None;
    }
    let t = -b - disc.sqrt();
    (t >= 0.0).then_some(t)
}

fn ray_rect(origin: Point, dx: f64, dy: f64, r: &Rect) -> Option<f64> {
    let mut t_near = f64::NEG_INFINITY;
    let mut t_far = f64::INFINITY;
    for (o, d, lo, hi) in [(origin.x, dx, r.min.x, r.max.x), (origin.y, dy, r.min.y, r.max.y)] {
        if d.abs() < 1e-15 {
            if o < lo || o > hi {
                return None;
            }
        } else {
            let t0 = (lo - o) / d;
            let t1 = (hi - o) / d;
            t_near = t_near.max(t0.min(t1));
            t_far = t_far.min(t0.max(t1));
        }
    }
    if t_near > t_far || t_far < 0.0 {
        return None;
    }
    Some(t_near.max(0.0))
}

fn ray_bounds(origin: Point, dx: f64, dy: f64, b: &Rect) -> f64 {
    if !b.contains(origin) {
        return 0.0;
    }
    let mut t = f64::INFINITY;
    if dx > 1e-15 {
        t = t.min((b.max.x - origin.x) / dx);
    } else if dx < -1e-15 {
        t = t.min((b.min.x - origin.x) / dx);
    }
    if dy > 1e-15 {
        t = t.min((b.max.y - origin.y) / dy);
    } else if dy < -1e-15 {
        t = t.min((b.min.y - origin.y) / dy);
    }
    t
}

/// Casts a ray and returns `(range, hit)`. The range is capped at
/// `max_range`; `hit` is false exactly when the cap applied. A ray starting
/// inside an obstacle reports range 0.
pub fn raycast(world: &WorldModel, origin: Point, angle: f64, max_range: f64) -> (f64, bool) {
    debug_assert!(max_range > 0.0);
    let (dy, dx) = angle.sin_cos();
    let mut t = ray_bounds(origin, dx, dy, &world.bounds);
    for c in &world.circles {
        if let Some(tc) = ray_circle(origin, dx, dy, c) {
            t = t.min(tc);
        }
    }
    for r in &world.rects {
        if let Some(tr) = ray_rect(origin, dx, dy, r) {
            t = t.min(tr);
        }
    }
    if t >= max_range {
        (max_range, false)
    } else {
        (t, true)
    }
}
