//! Randomized training maps: axis-aligned walls plus rectangular blocks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{OccupancyGrid, WorldError};

pub const MAX_MAP_ATTEMPTS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MapGenParams {
    /// Cells.
    pub width: usize,
    /// Cells.
    pub height: usize,
    pub resolution: f64,
    pub walls: usize,
    /// Inclusive wall length range, cells.
    pub wall_length: (usize, usize),
    pub wall_thickness: usize,
    pub static_obstacles: usize,
    /// Inclusive block side range, cells.
    pub obstacle_size: (usize, usize),
}

impl Default for MapGenParams {
    fn default() -> Self {
        Self {
            width: 100,
            height: 100,
            resolution: 0.1,
            walls: 3,
            wall_length: (15, 40),
            wall_thickness: 2,
            static_obstacles: 4,
            obstacle_size: (3, 8),
        }
    }
}

impl MapGenParams {
    pub fn validate(&self) -> Result<(), WorldError> {
        let bad = |m: String| Err(WorldError::InvalidMapParams(m));
        if self.width < 3 || self.height < 3 {
            return bad(format!("map {}x{} too small", self.width, self.height));
        }
        if !(self.resolution > 0.0) {
            return bad(format!("resolution {} must be positive", self.resolution));
        }
        if self.wall_length.0 == 0 || self.wall_length.0 > self.wall_length.1 {
            return bad(format!("wall length range {:?} invalid", self.wall_length));
        }
        if self.obstacle_size.0 == 0 || self.obstacle_size.0 > self.obstacle_size.1 {
            return bad(format!("obstacle size range {:?} invalid", self.obstacle_size));
        }
        if self.wall_thickness == 0 {
            return bad("wall thickness must be positive".into());
        }
        let inner_w = self.width - 2;
        let inner_h = self.height - 2;
        if (self.static_obstacles > 0 && self.obstacle_size.0 > inner_w.min(inner_h))
            || (self.walls > 0 && self.wall_thickness > inner_w.min(inner_h))
        {
            return bad("features do not fit inside the border".into());
        }
        Ok(())
    }
}

/// Generates a bounded random map whose largest free component holds at
/// least half of all free cells. Deterministic in `(seed, params)`.
pub fn generate_random_map(seed: u64, params: &MapGenParams) -> Result<OccupancyGrid, WorldError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_MAP_ATTEMPTS {
        let grid = draw_map(&mut rng, params)?;
        let (sizes, _) = grid.free_components();
        let free = grid.free_count();
        let largest = sizes.iter().copied().max().unwrap_or(0);
        if free > 0 && 2 * largest >= free {
            return Ok(grid);
        }
    }
    Err(WorldError::MapGenerationFailed { attempts: MAX_MAP_ATTEMPTS })
}

fn draw_map(rng: &mut ChaCha8Rng, p: &MapGenParams) -> Result<OccupancyGrid, WorldError> {
    let mut grid = OccupancyGrid::empty(p.width, p.height, p.resolution)?;
    let (w, h) = (p.width as i64, p.height as i64);
    for _ in 0..p.walls {
        let len = rng.random_range(p.wall_length.0..=p.wall_length.1) as i64;
        let thick = p.wall_thickness as i64;
        let horizontal = rng.random_bool(0.5);
        let (sx, sy) = if horizontal { (len, thick) } else { (thick, len) };
        let sx = sx.min(w - 2);
        let sy = sy.min(h - 2);
        let x0 = rng.random_range(1..=(w - 1 - sx));
        let y0 = rng.random_range(1..=(h - 1 - sy));
        fill(&mut grid, x0, y0, sx, sy);
    }
    for _ in 0..p.static_obstacles {
        let sx = (rng.random_range(p.obstacle_size.0..=p.obstacle_size.1) as i64).min(w - 2);
        let sy = (rng.random_range(p.obstacle_size.0..=p.obstacle_size.1) as i64).min(h - 2);
        let x0 = rng.random_range(1..=(w - 1 - sx));
        let y0 = rng.random_range(1..=(h - 1 - sy));
        fill(&mut grid, x0, y0, sx, sy);
    }
    Ok(grid)
}

fn fill(grid: &mut OccupancyGrid, x0: i64, y0: i64, sx: i64, sy: i64) {
    for iy in y0..y0 + sy {
        for ix in x0..x0 + sx {
            grid.set((ix, iy), true);
        }
    }
}
