use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use crate::instinct::{bearing_sector, ScanSummary};
use crate::params::Params;
use crate::sim::{wrap_angle, Point};

/// Grid resolution of the free-space map, metres.
pub const CELL: f64 = 0.1;

/// Extra cost per metre for moving through a cell right next to a possible
/// return, tapering linearly to zero at the planning margin.
const PROXIMITY_COST: f64 = 20.0;

/// Slack around everything known when bounding the path search, metres.
const SEARCH_SLACK: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Cell {
    /// Inside a scanned sector, closer than its minimum range.
    Free,
    /// On the arc at a sector's minimum range and never seen free: the return
    /// that set the minimum may be here.
    Candidate,
}

type Key = (i32, i32);

fn key(p: Point) -> Key {
    ((p.x / CELL).round() as i32, (p.y / CELL).round() as i32)
}

fn center(k: Key) -> Point {
    Point::new(k.0 as f64 * CELL, k.1 as f64 * CELL)
}

/// What the decision layer has learned about free space from the summaries
/// it has received. The world is static, so evidence accumulates: a cell
/// once seen free stays free, and a possible return stays possible until
/// some later view sees through it.
#[derive(Clone, Debug, Default)]
pub struct FreeSpaceMap {
    cells: HashMap<Key, Cell>,
    /// Bounding box of every cell touched, for limiting the path search.
    extent: Option<(Key, Key)>,
}

/// Distance from each cell near a candidate to the closest candidate.
struct Proximity {
    near: HashMap<Key, f64>,
    margin: f64,
}

impl Proximity {
    fn distance(&self, k: Key) -> f64 {
        self.near.get(&k).copied().unwrap_or(f64::INFINITY)
    }

    /// Extra cost factor for a step into `k`.
    fn penalty(&self, k: Key) -> f64 {
        let d = self.distance(k);
        if d >= self.margin {
            0.0
        } else {
            PROXIMITY_COST * (self.margin - d) / self.margin
        }
    }
}

/// Distance from a cell to the nearest cell not seen free, capped at the
/// margin. Memoized per planning call.
struct Corridor<'a> {
    map: &'a FreeSpaceMap,
    margin: f64,
    floor: f64,
    memo: HashMap<Key, f64>,
}

impl<'a> Corridor<'a> {
    fn new(map: &'a FreeSpaceMap, params: &Params) -> Self {
        let margin = FreeSpaceMap::margin(params);
        let floor = FreeSpaceMap::floor(params).min(margin);
        Self { map, margin, floor, memo: HashMap::new() }
    }

    fn width(&mut self, k: Key) -> f64 {
        if let Some(&w) = self.memo.get(&k) {
            return w;
        }
        let span = (self.margin / CELL).ceil() as i32;
        let mut w = self.margin;
        for i in -span..=span {
            for j in -span..=span {
                let d = CELL * ((i * i + j * j) as f64).sqrt();
                if d < w && self.map.cells.get(&(k.0 + i, k.1 + j)) != Some(&Cell::Free) {
                    w = d;
                }
            }
        }
        self.memo.insert(k, w);
        w
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Open {
    f: f64,
    g: f64,
    key: Key,
}

impl Eq for Open {}

impl Ord for Open {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on f, ties broken by key so the search is deterministic.
        other.f.total_cmp(&self.f).then_with(|| other.key.cmp(&self.key))
    }
}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl FreeSpaceMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn free_cells(&self) -> usize {
        self.cells.values().filter(|c| **c == Cell::Free).count()
    }

    pub fn candidate_cells(&self) -> usize {
        self.cells.values().filter(|c| **c == Cell::Candidate).count()
    }

    fn touch(&mut self, k: Key) {
        self.extent = Some(match self.extent {
            None => (k, k),
            Some((lo, hi)) => ((lo.0.min(k.0), lo.1.min(k.1)), (hi.0.max(k.0), hi.1.max(k.1))),
        });
    }

    /// Folds one summary into the map.
    pub fn integrate(&mut self, summary: &ScanSummary, params: &Params) {
        let pose = summary.pose_estimate;
        let origin = pose.xy();
        let max_range = params.lidar_max_range;
        let reach = summary.sector_min.iter().fold(0.0f64, |a, &r| a.max(r)).min(max_range) + CELL;
        let (c0, span) = (key(origin), (reach / CELL).ceil() as i32);
        for i in -span..=span {
            for j in -span..=span {
                let k = (c0.0 + i, c0.1 + j);
                let p = center(k);
                let r = origin.dist(p);
                if r > reach {
                    continue;
                }
                let rho = summary.sector_min[bearing_sector(wrap_angle(origin.bearing_to(p) - pose.theta))];
                if r < rho {
                    self.cells.insert(k, Cell::Free);
                    self.touch(k);
                } else if rho < max_range && r < rho + CELL {
                    self.cells.entry(k).or_insert(Cell::Candidate);
                    self.touch(k);
                }
            }
        }
    }

    fn proximity(&self, margin: f64) -> Proximity {
        let span = (margin / CELL).ceil() as i32;
        let mut near = HashMap::new();
        for (&k, &c) in &self.cells {
            if c != Cell::Candidate {
                continue;
            }
            for i in -span..=span {
                for j in -span..=span {
                    let d = CELL * ((i * i + j * j) as f64).sqrt();
                    if d >= margin {
                        continue;
                    }
                    let e = near.entry((k.0 + i, k.1 + j)).or_insert(d);
                    if d < *e {
                        *e = d;
                    }
                }
            }
        }
        Proximity { near, margin }
    }

    /// Planning margin: the robot's body, the safety gap and the planner's
    /// standoff.
    pub fn margin(params: &Params) -> f64 {
        params.robot_radius + params.d_min + params.plan_standoff
    }

    /// Closest the planner lets a leg run alongside anything not seen free:
    /// the body and the safety gap plus one cell for grid quantization.
    fn floor(params: &Params) -> f64 {
        params.robot_radius + params.d_min + CELL
    }

    /// Whether the straight leg `a → b` keeps the planning margin from
    /// everything not seen free (possible returns and unexplored space
    /// alike), or at least never gets closer to it than at `a`, so legs
    /// leading away from a nearby obstacle are allowed. Hovering below the
    /// margin is only allowed above a floor; a leg starting below the floor
    /// must end above it.
    pub fn is_clean(&self, a: Point, b: Point, params: &Params) -> bool {
        self.clean_with(&mut Corridor::new(self, params), a, b)
    }

    fn clean_with(&self, corridor: &mut Corridor<'_>, a: Point, b: Point) -> bool {
        let start = corridor.width(key(a));
        let steps = (a.dist(b) / (0.25 * CELL)).ceil().max(1.0) as usize;
        let margin = corridor.margin;
        let along = (1..=steps).all(|s| {
            let t = s as f64 / steps as f64;
            let d = corridor.width(key(Point::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y))));
            d >= margin || d >= start
        });
        along && (start >= corridor.floor || corridor.width(key(b)) >= corridor.floor)
    }

    /// Cheapest grid path from `from` to `to`, preferring distance from
    /// possible returns. Unknown space is assumed free. `None` when the
    /// search box (everything known plus some slack) holds no path.
    pub fn path(&self, from: Point, to: Point, params: &Params) -> Option<Vec<Point>> {
        let prox = self.proximity(Self::margin(params));
        self.path_with(&prox, from, to)
    }

    fn path_with(&self, prox: &Proximity, from: Point, to: Point) -> Option<Vec<Point>> {
        let (s, g) = (key(from), key(to));
        let slack = (SEARCH_SLACK / CELL).ceil() as i32;
        let (mut lo, mut hi) = self.extent.unwrap_or((s, s));
        for k in [s, g] {
            lo = (lo.0.min(k.0), lo.1.min(k.1));
            hi = (hi.0.max(k.0), hi.1.max(k.1));
        }
        let (lo, hi) = ((lo.0 - slack, lo.1 - slack), (hi.0 + slack, hi.1 + slack));
        let inside = |k: Key| k.0 >= lo.0 && k.0 <= hi.0 && k.1 >= lo.1 && k.1 <= hi.1;
        let h = |k: Key| center(k).dist(center(g));

        let mut best: HashMap<Key, f64> = HashMap::from([(s, 0.0)]);
        let mut parent: HashMap<Key, Key> = HashMap::new();
        let mut open = BinaryHeap::from([Open { f: h(s), g: 0.0, key: s }]);
        while let Some(Open { g: cost, key: k, .. }) = open.pop() {
            if k == g {
                let mut path = vec![to];
                let mut at = k;
                while let Some(&p) = parent.get(&at) {
                    at = p;
                    if at != s {
                        path.push(center(at));
                    }
                }
                path.push(from);
                path.reverse();
                return Some(path);
            }
            if cost > best.get(&k).copied().unwrap_or(f64::INFINITY) {
                continue;
            }
            for (di, dj) in [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)] {
                let n = (k.0 + di, k.1 + dj);
                if !inside(n) {
                    continue;
                }
                let step = CELL * if di != 0 && dj != 0 { std::f64::consts::SQRT_2 } else { 1.0 };
                let next = cost + step * (1.0 + prox.penalty(n));
                if next < best.get(&n).copied().unwrap_or(f64::INFINITY) {
                    best.insert(n, next);
                    parent.insert(n, k);
                    open.push(Open { f: next + h(n), g: next, key: n });
                }
            }
        }
        None
    }

    /// Next straight leg toward `to`: the furthest point along the cheapest
    /// path that can be reached in a clean straight line. `None` when there
    /// is no path or not even its first stretch is clean.
    pub fn next_leg(&self, from: Point, to: Point, params: &Params) -> Option<Point> {
        let path = self.path_with(&self.proximity(Self::margin(params)), from, to)?;
        let mut corridor = Corridor::new(self, params);
        path.iter().skip(1).rev().find(|&&p| self.clean_with(&mut corridor, from, p)).copied()
    }
}
