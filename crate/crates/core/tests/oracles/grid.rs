//! Brute-force references for lidar and grid search.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::f64::consts::SQRT_2;

use nav_arena::geometry::Vec2;
use nav_arena::planning::PlannerGrid;
use nav_arena::world::{ObstacleState, OccupancyGrid};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Marches a ray in 1 mm steps until it enters an occupied cell or an
/// obstacle disc.
pub fn marched_range(grid: &OccupancyGrid, obstacles: &[ObstacleState], origin: Vec2, angle: f64, max: f64) -> f64 {
    let dir = Vec2::new(angle.cos(), angle.sin());
    let n = (max / 1e-3).round() as usize;
    for k in 0..=n {
        let t = k as f64 * 1e-3;
        let p = origin + dir * t;
        if grid.is_occupied_at(p) || obstacles.iter().any(|o| p.dist(o.position) <= o.radius) {
            return t;
        }
    }
    max
}

/// True if the ray hits an occupied cell at `t` but crosses it along a
/// chord shorter than the 1 mm marching step.
pub fn grazes_corner(grid: &OccupancyGrid, origin: Vec2, angle: f64, t: f64) -> bool {
    let dir = Vec2::new(angle.cos(), angle.sin());
    let cell = grid.cell_at(origin + dir * (t + 1e-9));
    if !grid.is_occupied(cell) {
        return false;
    }
    let res = grid.resolution();
    let lo = Vec2::new(cell.0 as f64 * res, cell.1 as f64 * res);
    let (mut t0, mut t1) = (f64::NEG_INFINITY, f64::INFINITY);
    for (o, d, a, b) in [(origin.x, dir.x, lo.x, lo.x + res), (origin.y, dir.y, lo.y, lo.y + res)] {
        if d.abs() < 1e-15 {
            if o < a || o > b {
                return false;
            }
            continue;
        }
        let (u, v) = ((a - o) / d, (b - o) / d);
        t0 = t0.max(u.min(v));
        t1 = t1.min(u.max(v));
    }
    t1 - t0 < 1e-3
}

pub fn random_grid(rng: &mut ChaCha8Rng, n: usize, density: f64) -> OccupancyGrid {
    let mut cells = vec![false; n * n];
    for iy in 0..n {
        for ix in 0..n {
            cells[iy * n + ix] = ix == 0 || iy == 0 || ix == n - 1 || iy == n - 1 || rng.random_bool(density);
        }
    }
    OccupancyGrid::from_cells(n, n, 0.1, cells).unwrap()
}

/// Dijkstra over (straight, diagonal) move counts. Diagonals may not cut
/// a blocked corner. Costs a + b·√2 are compared exactly since √2 is
/// irrational, so equal costs imply equal counts.
pub fn dijkstra(pg: &PlannerGrid, s: (i64, i64), g: (i64, i64)) -> Option<(usize, usize)> {
    let grid = pg.base();
    let w = grid.width() as i64;
    let key = |(a, b): (usize, usize)| a as f64 + b as f64 * SQRT_2;
    let mut best: Vec<Option<(usize, usize)>> = vec![None; grid.cells().len()];
    let mut heap = BinaryHeap::new();
    best[(s.1 * w + s.0) as usize] = Some((0, 0));
    heap.push(Reverse((ordered(key((0, 0))), 0usize, 0usize, s)));
    while let Some(Reverse((_, a, b, (x, y)))) = heap.pop() {
        if best[(y * w + x) as usize] != Some((a, b)) {
            continue;
        }
        if (x, y) == g {
            return Some((a, b));
        }
        for dx in -1i64..=1 {
            for dy in -1i64..=1 {
                if (dx, dy) == (0, 0) || pg.is_blocked((x + dx, y + dy)) {
                    continue;
                }
                let diag = dx != 0 && dy != 0;
                if diag && (pg.is_blocked((x + dx, y)) || pg.is_blocked((x, y + dy))) {
                    continue;
                }
                let next = if diag { (a, b + 1) } else { (a + 1, b) };
                let slot = &mut best[((y + dy) * w + x + dx) as usize];
                if slot.is_none_or(|old| key(next) < key(old)) {
                    *slot = Some(next);
                    heap.push(Reverse((ordered(key(next)), next.0, next.1, (x + dx, y + dy))));
                }
            }
        }
    }
    None
}

fn ordered(x: f64) -> u64 {
    x.to_bits()
}

pub fn random_free_cell(pg: &PlannerGrid, rng: &mut ChaCha8Rng) -> Option<(i64, i64)> {
    let n = pg.base().width() as i64;
    (0..200).map(|_| (rng.random_range(0..n), rng.random_range(0..n))).find(|&c| !pg.is_blocked(c))
}

