//! A* global planning on an inflated occupancy grid.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::SQRT_2;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::geometry::{closest_point_on_segment, Vec2};
use crate::world::{Cell, OccupancyGrid};

use super::PlanError;

/// Planning view of a map: the base grid dilated by a disc.
#[derive(Debug, Clone)]
pub struct PlannerGrid {
    base: Arc<OccupancyGrid>,
    inflation_radius: f64,
    inflated: Vec<bool>,
}

/// Minkowski dilation of `grid` by a disc: a cell is blocked iff its center
/// lies within `radius` of some occupied cell's center.
pub fn inflate(grid: Arc<OccupancyGrid>, radius: f64) -> PlannerGrid {
    let radius = radius.max(0.0);
    let res = grid.resolution();
    let reach = (radius / res).floor() as i64;
    let r2 = radius * radius;
    let kernel: Vec<(i64, i64)> = (-reach..=reach)
        .flat_map(|dy| (-reach..=reach).map(move |dx| (dx, dy)))
        .filter(|&(dx, dy)| ((dx * dx + dy * dy) as f64) * res * res <= r2)
        .collect();
    let mut inflated = grid.cells().to_vec();
    for (idx, _) in grid.cells().iter().enumerate().filter(|(_, &occ)| occ) {
        let (ix, iy) = grid.cell_of_index(idx);
        for &(dx, dy) in &kernel {
            if let Some(j) = grid.index((ix + dx, iy + dy)) {
                inflated[j] = true;
            }
        }
    }
    PlannerGrid { base: grid, inflation_radius: radius, inflated }
}

impl PlannerGrid {
    pub fn base(&self) -> &Arc<OccupancyGrid> {
        &self.base
    }

    pub fn inflation_radius(&self) -> f64 {
        self.inflation_radius
    }

    pub fn inflated(&self) -> &[bool] {
        &self.inflated
    }

    pub fn is_blocked(&self, cell: Cell) -> bool {
        self.base.index(cell).map_or(true, |i| self.inflated[i])
    }

    pub fn is_free_at(&self, p: Vec2) -> bool {
        !self.is_blocked(self.base.cell_at(p))
    }

    /// Center of the free cell nearest to `p` (by cell-center distance).
    pub fn nearest_free(&self, p: Vec2) -> Option<Vec2> {
        let g = &self.base;
        let (cx, cy) = g.cell_at(p);
        let max_ring = g.width().max(g.height()) as i64;
        let mut best: Option<(f64, Vec2)> = None;
        for ring in 0..=max_ring {
            for dy in -ring..=ring {
                for dx in -ring..=ring {
                    if dx.abs() != ring && dy.abs() != ring {
                        continue;
                    }
                    let c = (cx + dx, cy + dy);
                    if !self.is_blocked(c) {
                        let q = g.cell_center(c);
                        let d = q.dist(p);
                        if best.map_or(true, |(bd, _)| d < bd) {
                            best = Some((d, q));
                        }
                    }
                }
            }
            // Centers in ring k + 1 are at least (k + 0.5)·res from p.
            if let Some((d, q)) = best {
                if d <= (ring as f64 + 0.5) * g.resolution() {
                    return Some(q);
                }
            }
        }
        best.map(|(_, q)| q)
    }
}

/// Polyline from the global planner with an arclength index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalPath {
    poses: Vec<Vec2>,
    cumulative: Vec<f64>,
    /// Grid cost of the underlying cell path (straight moves `res`,
    /// diagonal moves `√2·res`).
    cost: f64,
}

impl GlobalPath {
    /// Builds a path from explicit poses; consecutive duplicates are dropped.
    pub fn from_poses(poses: Vec<Vec2>) -> Result<Self, PlanError> {
        let mut clean: Vec<Vec2> = Vec::with_capacity(poses.len());
        for p in poses {
            if clean.last() != Some(&p) {
                clean.push(p);
            }
        }
        if clean.is_empty() {
            return Err(PlanError::EmptyPath);
        }
        let mut cumulative = Vec::with_capacity(clean.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for w in clean.windows(2) {
            acc += w[0].dist(w[1]);
            cumulative.push(acc);
        }
        let cost = acc;
        Ok(Self { poses: clean, cumulative, cost })
    }

    pub fn poses(&self) -> &[Vec2] {
        &self.poses
    }

    pub fn cumulative_arclength(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn total_length(&self) -> f64 {
        *self.cumulative.last().expect("non-empty path")
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn start(&self) -> Vec2 {
        self.poses[0]
    }

    pub fn goal(&self) -> Vec2 {
        *self.poses.last().expect("non-empty path")
    }

    /// Point at arclength `s` by linear interpolation.
    pub fn query(&self, s: f64) -> Result<Vec2, PlanError> {
        let total = self.total_length();
        if !(0.0..=total).contains(&s) {
            return Err(PlanError::ArclengthOutOfRange { s, total });
        }
        if self.poses.len() == 1 {
            return Ok(self.poses[0]);
        }
        // First segment whose end reaches s.
        let i = self.cumulative.partition_point(|&c| c < s).clamp(1, self.poses.len() - 1);
        let (s0, s1) = (self.cumulative[i - 1], self.cumulative[i]);
        let t = if s1 > s0 { (s - s0) / (s1 - s0) } else { 0.0 };
        Ok(self.poses[i - 1].lerp(self.poses[i], t))
    }

    /// Closest point on the polyline to `p`: `(point, arclength, distance)`.
    pub fn project(&self, p: Vec2) -> (Vec2, f64, f64) {
        if self.poses.len() == 1 {
            return (self.poses[0], 0.0, self.poses[0].dist(p));
        }
        let mut best = (self.poses[0], 0.0, f64::INFINITY);
        for (i, w) in self.poses.windows(2).enumerate() {
            let (q, t) = closest_point_on_segment(p, w[0], w[1]);
            let d = q.dist(p);
            if d < best.2 {
                best = (q, self.cumulative[i] + t * (self.cumulative[i + 1] - self.cumulative[i]), d);
            }
        }
        best
    }

    pub fn distance_to(&self, p: Vec2) -> f64 {
        self.project(p).2
    }

    /// Copy of this path with `p` prepended.
    pub fn prepended(&self, p: Vec2) -> Self {
        let mut poses = Vec::with_capacity(self.poses.len() + 1);
        poses.push(p);
        poses.extend_from_slice(&self.poses);
        let cost = self.cost;
        let mut out = Self::from_poses(poses).expect("non-empty");
        out.cost = cost;
        out
    }
}

/// Anything that can produce a global path between two points.
pub trait GlobalPlanner {
    fn plan(&self, start: Vec2, goal: Vec2) -> Result<GlobalPath, PlanError>;

    /// A plannable point near `p`, used when `p` itself is not plannable.
    fn nearest_free(&self, _p: Vec2) -> Option<Vec2> {
        None
    }
}

impl GlobalPlanner for PlannerGrid {
    fn plan(&self, start: Vec2, goal: Vec2) -> Result<GlobalPath, PlanError> {
        plan_astar(self, start, goal)
    }

    fn nearest_free(&self, p: Vec2) -> Option<Vec2> {
        PlannerGrid::nearest_free(self, p)
    }
}

/// Octile distance between cells, in meters.
pub fn octile(a: Cell, b: Cell, res: f64) -> f64 {
    let dx = (a.0 - b.0).abs() as f64;
    let dy = (a.1 - b.1).abs() as f64;
    let (lo, hi) = if dx < dy { (dx, dy) } else { (dy, dx) };
    res * (hi - lo) + SQRT_2 * res * lo
}

/// The 8 moves with their step counts `(straight, diagonal)`. Diagonal
/// moves may not cut the corner of a blocked cell.
pub fn neighbors(pg: &PlannerGrid, (ix, iy): Cell) -> impl Iterator<Item = (Cell, bool)> + '_ {
    const MOVES: [(i64, i64); 8] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)];
    MOVES.iter().filter_map(move |&(dx, dy)| {
        let n = (ix + dx, iy + dy);
        if pg.is_blocked(n) {
            return None;
        }
        let diagonal = dx != 0 && dy != 0;
        if diagonal && (pg.is_blocked((ix + dx, iy)) || pg.is_blocked((ix, iy + dy))) {
            return None;
        }
        Some((n, diagonal))
    })
}

/// Exact cost of a move sequence; independent of summation order.
pub fn move_cost(straight: usize, diagonal: usize, res: f64) -> f64 {
    straight as f64 * res + diagonal as f64 * SQRT_2 * res
}

#[derive(PartialEq)]
struct OpenEntry {
    f: f64,
    h: f64,
    idx: usize,
}

impl Eq for OpenEntry {}

impl Ord for OpenEntry {
    fn cmp(&self, o: &Self) -> Ordering {
        // Min-heap on (f, h, idx).
        o.f.total_cmp(&self.f)
            .then_with(|| o.h.total_cmp(&self.h))
            .then_with(|| o.idx.cmp(&self.idx))
    }
}

impl PartialOrd for OpenEntry {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// 8-connected A* with the octile heuristic. Poses are cell centers with
/// the exact start and goal coordinates attached at the ends.
pub fn plan_astar(pg: &PlannerGrid, start: Vec2, goal: Vec2) -> Result<GlobalPath, PlanError> {
    let g = pg.base();
    let res = g.resolution();
    let sc = g.cell_at(start);
    let gc = g.cell_at(goal);
    if pg.is_blocked(sc) {
        return Err(PlanError::InvalidEndpoint { which: "start", at: start });
    }
    if pg.is_blocked(gc) {
        return Err(PlanError::InvalidEndpoint { which: "goal", at: goal });
    }
    let n = g.cells().len();
    let s_idx = g.index(sc).expect("in bounds");
    let g_idx = g.index(gc).expect("in bounds");

    let mut best_g = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut open = BinaryHeap::new();
    best_g[s_idx] = 0.0;
    let h0 = octile(sc, gc, res);
    open.push(OpenEntry { f: h0, h: h0, idx: s_idx });

    while let Some(OpenEntry { idx, .. }) = open.pop() {
        if closed[idx] {
            continue;
        }
        closed[idx] = true;
        if idx == g_idx {
            break;
        }
        let cell = g.cell_of_index(idx);
        for (nc, diagonal) in neighbors(pg, cell) {
            let j = g.index(nc).expect("neighbors are in bounds");
            if closed[j] {
                continue;
            }
            let cand = best_g[idx] + if diagonal { SQRT_2 * res } else { res };
            if cand < best_g[j] {
                best_g[j] = cand;
                parent[j] = idx;
                let h = octile(nc, gc, res);
                open.push(OpenEntry { f: cand + h, h, idx: j });
            }
        }
    }
    if !closed[g_idx] {
        return Err(PlanError::NoPath { start, goal });
    }

    let mut cells = vec![g_idx];
    while let Some(&last) = cells.last() {
        if last == s_idx {
            break;
        }
        cells.push(parent[last]);
    }
    cells.reverse();
    let (mut straight, mut diagonal) = (0, 0);
    for w in cells.windows(2) {
        let (a, b) = (g.cell_of_index(w[0]), g.cell_of_index(w[1]));
        if a.0 != b.0 && a.1 != b.1 {
            diagonal += 1;
        } else {
            straight += 1;
        }
    }
    let mut poses = Vec::with_capacity(cells.len() + 2);
    poses.push(start);
    poses.extend(cells.iter().map(|&i| g.cell_center(g.cell_of_index(i))));
    poses.push(goal);
    if s_idx == g_idx {
        poses = vec![start, goal];
    }
    let mut path = GlobalPath::from_poses(poses)?;
    path.cost = move_cost(straight, diagonal, res);
    Ok(path)
}
