use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::geometry::Vec2;

use super::collision::disc_overlaps_grid;
use super::{OccupancyGrid, WorldError};

pub const MAX_SPAWN_ATTEMPTS: usize = 1000;

/// Motion model family, as named in scenario files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MotionKind {
    LinearBounce,
    WaypointLoop,
    RandomWalk,
}

impl std::str::FromStr for MotionKind {
    type Err = WorldError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linear-bounce" => Ok(Self::LinearBounce),
            "waypoint-loop" => Ok(Self::WaypointLoop),
            "random-walk" => Ok(Self::RandomWalk),
            other => Err(WorldError::InvalidConfig(format!("unknown motion model {other:?}"))),
        }
    }
}

/// Per-obstacle motion state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MotionModel {
    /// Constant velocity; the velocity component normal to a wall flips on contact.
    LinearBounce,
    /// Cycles through `waypoints`, heading for `waypoints[next]`.
    WaypointLoop { waypoints: Vec<Vec2>, next: usize },
    /// Heading diffuses with standard deviation `heading_noise·√dt` per step;
    /// bounces like [`MotionModel::LinearBounce`].
    RandomWalk { heading_noise: f64 },
}

/// A dynamic disc obstacle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstacleState {
    pub position: Vec2,
    pub velocity: Vec2,
    pub radius: f64,
    /// Configured speed; `|velocity|` tracks it.
    pub speed: f64,
    pub model: MotionModel,
}

impl ObstacleState {
    pub fn advance(&mut self, grid: &OccupancyGrid, dt: f64, rng: &mut ChaCha8Rng) {
        match &mut self.model {
            MotionModel::LinearBounce => bounce_step(grid, &mut self.position, &mut self.velocity, self.radius, dt),
            MotionModel::RandomWalk { heading_noise } => {
                let sigma = *heading_noise * dt.sqrt();
                if sigma > 0.0 {
                    let delta = Normal::new(0.0, sigma).expect("finite sigma").sample(rng);
                    self.velocity = Vec2::from_polar(self.speed, self.velocity.angle() + delta);
                }
                bounce_step(grid, &mut self.position, &mut self.velocity, self.radius, dt)
            }
            MotionModel::WaypointLoop { waypoints, next } => {
                if waypoints.is_empty() || self.speed == 0.0 {
                    return;
                }
                let mut budget = self.speed * dt;
                // Bounded so degenerate loops of coincident waypoints terminate.
                for _ in 0..=waypoints.len() {
                    let target = waypoints[*next];
                    let to = target - self.position;
                    let dist = to.norm();
                    if dist > budget {
                        self.velocity = to * (self.speed / dist);
                        self.position = self.position + to * (budget / dist);
                        return;
                    }
                    self.position = target;
                    budget -= dist;
                    *next = (*next + 1) % waypoints.len();
                }
            }
        }
    }
}

/// Per-axis move with reflection: an axis whose move would overlap the
/// map keeps its coordinate and negates its velocity component.
fn bounce_step(grid: &OccupancyGrid, pos: &mut Vec2, vel: &mut Vec2, radius: f64, dt: f64) {
    let nx = pos.x + vel.x * dt;
    if disc_overlaps_grid(grid, Vec2::new(nx, pos.y), radius) {
        vel.x = -vel.x;
    } else {
        pos.x = nx;
    }
    let ny = pos.y + vel.y * dt;
    if disc_overlaps_grid(grid, Vec2::new(pos.x, ny), radius) {
        vel.y = -vel.y;
    } else {
        pos.y = ny;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpawnOptions {
    pub radius: f64,
    /// Discs `(center, radius)` that spawned obstacles must not touch,
    /// typically the robot start and the goal.
    pub keep_clear: Vec<(Vec2, f64)>,
    /// Heading diffusion for random-walk obstacles, rad/√s.
    pub heading_noise: f64,
}

impl Default for SpawnOptions {
    fn default() -> Self {
        Self { radius: 0.3, keep_clear: Vec::new(), heading_noise: 0.8 }
    }
}

/// Places `n` non-overlapping obstacles in free space, each moving at `v_obs`.
pub fn spawn_obstacles(
    grid: &OccupancyGrid,
    n: usize,
    v_obs: f64,
    kind: MotionKind,
    seed: u64,
    opts: &SpawnOptions,
) -> Result<Vec<ObstacleState>, WorldError> {
    if !(v_obs >= 0.0) || !(opts.radius > 0.0) {
        return Err(WorldError::InvalidConfig(format!(
            "obstacle speed {v_obs} / radius {} invalid",
            opts.radius
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let extent = grid.extent();
    let r = opts.radius;
    let mut out: Vec<ObstacleState> = Vec::with_capacity(n);
    if n > 0 && (extent.x <= 2.0 * r || extent.y <= 2.0 * r) {
        return Err(WorldError::SpawnFailed { placed: 0, requested: n });
    }
    let mut attempts = 0;
    while out.len() < n {
        if attempts >= MAX_SPAWN_ATTEMPTS {
            return Err(WorldError::SpawnFailed { placed: out.len(), requested: n });
        }
        attempts += 1;
        let p = Vec2::new(rng.random_range(r..extent.x - r), rng.random_range(r..extent.y - r));
        let clear = !disc_overlaps_grid(grid, p, r)
            && out.iter().all(|o| o.position.dist(p) >= o.radius + r)
            && opts.keep_clear.iter().all(|&(c, cr)| c.dist(p) >= cr + r);
        if !clear {
            continue;
        }
        let heading = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
        let model = match kind {
            MotionKind::LinearBounce => MotionModel::LinearBounce,
            MotionKind::RandomWalk => MotionModel::RandomWalk { heading_noise: opts.heading_noise },
            MotionKind::WaypointLoop => {
                let q = Vec2::new(rng.random_range(r..extent.x - r), rng.random_range(r..extent.y - r));
                if !segment_clear(grid, p, q, r) {
                    continue;
                }
                MotionModel::WaypointLoop { waypoints: vec![p, q], next: 1 }
            }
        };
        let velocity = match &model {
            MotionModel::WaypointLoop { waypoints, .. } if waypoints[1] != p => {
                (waypoints[1] - p) * (v_obs / (waypoints[1] - p).norm())
            }
            _ => Vec2::from_polar(v_obs, heading),
        };
        out.push(ObstacleState { position: p, velocity, radius: r, speed: v_obs, model });
    }
    Ok(out)
}

/// Sweeps a disc along `a → b` at half-cell spacing.
pub(crate) fn segment_clear(grid: &OccupancyGrid, a: Vec2, b: Vec2, radius: f64) -> bool {
    let len = a.dist(b);
    let steps = (len / (0.5 * grid.resolution())).ceil().max(1.0) as usize;
    (0..=steps).all(|k| !disc_overlaps_grid(grid, a.lerp(b, k as f64 / steps as f64), radius))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> OccupancyGrid {
        OccupancyGrid::empty(100, 100, 0.1).unwrap()
    }

    #[test]
    fn zero_obstacles() {
        let v = spawn_obstacles(&grid(), 0, 0.1, MotionKind::LinearBounce, 1, &SpawnOptions::default()).unwrap();
        assert!(v.is_empty());
    }

    #[test]
    fn five_obstacles_at_configured_speed() {
        for kind in [MotionKind::LinearBounce, MotionKind::WaypointLoop, MotionKind::RandomWalk] {
            let v = spawn_obstacles(&grid(), 5, 0.1, kind, 3, &SpawnOptions::default()).unwrap();
            assert_eq!(v.len(), 5);
            for o in &v {
                assert!((o.velocity.norm() - 0.1).abs() < 1e-9);
                assert!(!disc_overlaps_grid(&grid(), o.position, o.radius));
            }
            for (i, a) in v.iter().enumerate() {
                for b in &v[i + 1..] {
                    assert!(a.position.dist(b.position) >= a.radius + b.radius);
                }
            }
        }
    }

    #[test]
    fn tiny_map_cannot_host_obstacles() {
        // 4 free cells of 0.1 m cannot host a 0.3 m disc.
        let g = OccupancyGrid::empty(4, 4, 0.1).unwrap();
        assert_eq!(g.free_count(), 4);
        let err = spawn_obstacles(&g, 20, 0.1, MotionKind::LinearBounce, 1, &SpawnOptions::default());
        assert!(matches!(err, Err(WorldError::SpawnFailed { placed: 0, requested: 20 })));
    }

    #[test]
    fn keep_clear_zone_respected() {
        let opts = SpawnOptions {
            keep_clear: vec![(Vec2::new(5.0, 5.0), 2.0)],
            ..SpawnOptions::default()
        };
        let v = spawn_obstacles(&grid(), 10, 0.2, MotionKind::RandomWalk, 9, &opts).unwrap();
        assert!(v.iter().all(|o| o.position.dist(Vec2::new(5.0, 5.0)) >= 2.3));
    }

    #[test]
    fn linear_bounce_reflects_normal_component() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        // Heading for the east wall (x ∈ [9.9, 10.0]).
        let mut o = ObstacleState {
            position: Vec2::new(9.4, 5.0),
            velocity: Vec2::new(0.3, 0.1),
            radius: 0.3,
            speed: 0.1f64.hypot(0.3),
            model: MotionModel::LinearBounce,
        };
        let mut flipped = false;
        for _ in 0..40 {
            let before = o.velocity;
            o.advance(&g, 0.1, &mut rng);
            if o.velocity.x != before.x {
                assert_eq!(o.velocity.x, -before.x);
                assert_eq!(o.velocity.y, before.y);
                flipped = true;
                break;
            }
        }
        assert!(flipped);
        assert!(o.position.x + o.radius <= 9.9 + 1e-12);
    }

    #[test]
    fn waypoint_loop_cycles() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let a = Vec2::new(2.0, 2.0);
        let b = Vec2::new(3.0, 2.0);
        let mut o = ObstacleState {
            position: a,
            velocity: Vec2::new(0.5, 0.0),
            radius: 0.3,
            speed: 0.5,
            model: MotionModel::WaypointLoop { waypoints: vec![a, b], next: 1 },
        };
        for _ in 0..40 {
            o.advance(&g, 0.1, &mut rng);
        }
        // 1 m out and 1 m back at 0.05 m per step.
        assert!(o.position.dist(a) < 1e-9, "{:?}", o.position);
    }
}
