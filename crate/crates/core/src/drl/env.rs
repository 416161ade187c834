//! Episodic training environment over randomized maps.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{Pose, Vec2};
use crate::world::{
    disc_overlaps_grid, generate_random_map, segment_clear, spawn_obstacles, Action, MapGenParams, MotionKind,
    ObstacleState, OccupancyGrid, SpawnOptions, World, WorldConfig,
};

use super::observation::{build_observation, Observation};
use super::reward::{compute_reward, RewardBreakdown, RewardParams, StepSnapshot};
use super::DrlError;

/// Result of one environment step.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvStep {
    pub observation: Observation,
    pub reward: RewardBreakdown,
    /// The episode is over (terminal or truncated).
    pub done: bool,
    /// The episode ended in an absorbing state (goal or collision).
    pub terminal: bool,
    pub success: bool,
}

/// An episodic task a training worker can drive.
pub trait Environment: Send {
    /// Starts a new episode with `obstacle_count` dynamic obstacles.
    fn reset(&mut self, obstacle_count: usize) -> Result<Observation, DrlError>;
    fn step(&mut self, action: Action) -> Result<EnvStep, DrlError>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainEnvParams {
    pub map: MapGenParams,
    /// Fraction of episodes on a border-only map.
    pub empty_map_fraction: f64,
    /// Start-to-goal distance range, meters.
    pub goal_distance: (f64, f64),
    pub obstacle_speed: (f64, f64),
    pub obstacle_radius: f64,
    pub motion_kinds: Vec<MotionKind>,
    /// Radius around the start kept free of obstacles at spawn time.
    pub start_clearance: f64,
    pub max_episode_steps: usize,
}

impl Default for TrainEnvParams {
    fn default() -> Self {
        Self {
            map: MapGenParams::default(),
            empty_map_fraction: 0.25,
            goal_distance: (1.0, 2.5),
            obstacle_speed: (0.1, 0.3),
            obstacle_radius: 0.3,
            motion_kinds: vec![MotionKind::LinearBounce, MotionKind::RandomWalk, MotionKind::WaypointLoop],
            start_clearance: 1.0,
            max_episode_steps: 128,
        }
    }
}

impl TrainEnvParams {
    pub fn validate(&self) -> Result<(), DrlError> {
        let bad = |m: &str| Err(DrlError::Config(m.into()));
        self.map.validate()?;
        if !(0.0..=1.0).contains(&self.empty_map_fraction) {
            return bad("empty_map_fraction must lie in [0, 1]");
        }
        if !(self.goal_distance.0 > 0.0 && self.goal_distance.0 <= self.goal_distance.1) {
            return bad("goal_distance must be a positive range");
        }
        if !(self.obstacle_speed.0 >= 0.0 && self.obstacle_speed.0 <= self.obstacle_speed.1) {
            return bad("obstacle_speed must be a non-negative range");
        }
        if self.motion_kinds.is_empty() || !(self.obstacle_radius > 0.0) || self.max_episode_steps == 0 {
            return bad("motion kinds, obstacle radius and episode length must be non-empty/positive");
        }
        Ok(())
    }
}

const PLACEMENT_TRIES: usize = 200;

/// Random map, start, nearby goal with a clear straight line, and a
/// mixed population of moving obstacles. Episodes end on goal, collision
/// (including a lidar return closer than the robot radius) or step cap.
pub struct TrainEnv {
    params: TrainEnvParams,
    world_config: WorldConfig,
    reward: RewardParams,
    rng: ChaCha8Rng,
    empty: Arc<OccupancyGrid>,
    world: Option<World>,
    goal: Vec2,
    prev: StepSnapshot,
    steps: usize,
}

impl TrainEnv {
    pub fn new(params: TrainEnvParams, world_config: WorldConfig, reward: RewardParams, seed: u64) -> Result<Self, DrlError> {
        params.validate()?;
        world_config.validate()?;
        let m = &params.map;
        let empty = Arc::new(OccupancyGrid::empty(m.width, m.height, m.resolution)?);
        let prev = StepSnapshot { goal_distance: 0.0, min_clearance: 0.0, displacement: 0.0, collision: false, goal_reached: false };
        Ok(Self { params, world_config, reward, rng: ChaCha8Rng::seed_from_u64(seed), empty, world: None, goal: Vec2::ZERO, prev, steps: 0 })
    }

    pub fn world(&self) -> Option<&World> {
        self.world.as_ref()
    }

    pub fn goal(&self) -> Vec2 {
        self.goal
    }

    fn draw_grid(&mut self) -> Result<Arc<OccupancyGrid>, DrlError> {
        if self.rng.random_bool(self.params.empty_map_fraction) {
            return Ok(self.empty.clone());
        }
        Ok(Arc::new(generate_random_map(self.rng.random(), &self.params.map)?))
    }

    fn place_start_goal(&mut self, grid: &OccupancyGrid) -> Option<(Pose, Vec2)> {
        let ext = grid.extent();
        let r = self.world_config.robot_radius;
        let margin = r + 0.1;
        for _ in 0..PLACEMENT_TRIES {
            let s = Vec2::new(self.rng.random_range(margin..ext.x - margin), self.rng.random_range(margin..ext.y - margin));
            if disc_overlaps_grid(grid, s, margin) {
                continue;
            }
            for _ in 0..20 {
                let (lo, hi) = self.params.goal_distance;
                let d = if hi > lo { self.rng.random_range(lo..=hi) } else { lo };
                let g = s + Vec2::from_polar(d, self.rng.random_range(-PI..PI));
                if g.x < margin || g.y < margin || g.x > ext.x - margin || g.y > ext.y - margin {
                    continue;
                }
                if !disc_overlaps_grid(grid, g, margin) && segment_clear(grid, s, g, r) {
                    let heading = self.rng.random_range(-PI..PI);
                    return Some((Pose::new(s.x, s.y, heading), g));
                }
            }
        }
        None
    }

    fn spawn(&mut self, grid: &OccupancyGrid, n: usize, start: Vec2, goal: Vec2) -> Vec<ObstacleState> {
        let p = &self.params;
        let mut opts = SpawnOptions {
            radius: p.obstacle_radius,
            keep_clear: vec![(start, p.start_clearance), (goal, self.world_config.goal_radius)],
            ..Default::default()
        };
        let mut out: Vec<ObstacleState> = Vec::with_capacity(n);
        for _ in 0..n {
            let (lo, hi) = self.params.obstacle_speed;
            let v = if hi > lo { self.rng.random_range(lo..=hi) } else { lo };
            let kind = self.params.motion_kinds[self.rng.random_range(0..self.params.motion_kinds.len())];
            if let Ok(mut one) = spawn_obstacles(grid, 1, v, kind, self.rng.random(), &opts) {
                let o = one.pop().expect("one obstacle");
                opts.keep_clear.push((o.position, o.radius));
                out.push(o);
            }
        }
        out
    }

    fn snapshot(&mut self, displacement: f64, world_collision: bool) -> (Observation, StepSnapshot) {
        let world = self.world.as_mut().expect("reset before step");
        let scan = world.scan();
        let robot = world.robot;
        let obs = build_observation(&scan, &robot, self.goal).expect("world config guarantees enough beams");
        let min_clearance = scan.min_range();
        let goal_distance = robot.position().dist(self.goal);
        let snap = StepSnapshot {
            goal_distance,
            min_clearance,
            displacement,
            collision: world_collision || min_clearance < robot.radius,
            goal_reached: goal_distance < self.world_config.goal_radius,
        };
        (obs, snap)
    }
}

impl Environment for TrainEnv {
    fn reset(&mut self, obstacle_count: usize) -> Result<Observation, DrlError> {
        for _ in 0..crate::world::MAX_MAP_ATTEMPTS {
            let grid = self.draw_grid()?;
            let Some((start, goal)) = self.place_start_goal(&grid) else { continue };
            let obstacles = self.spawn(&grid, obstacle_count, start.position(), goal);
            let cfg = WorldConfig { seed: self.rng.random(), ..self.world_config.clone() };
            self.world = Some(World::new(grid, cfg, start, obstacles)?);
            self.goal = goal;
            self.steps = 0;
            let (obs, snap) = self.snapshot(0.0, false);
            self.prev = snap;
            return Ok(obs);
        }
        Err(DrlError::Config("could not place a start and goal on generated maps".into()))
    }

    fn step(&mut self, action: Action) -> Result<EnvStep, DrlError> {
        let info = self.world.as_mut().ok_or_else(|| DrlError::Config("step before reset".into()))?.step(action);
        self.steps += 1;
        let (observation, snap) = self.snapshot(info.displacement, info.collision);
        let reward = compute_reward(&self.prev, &snap, &self.reward);
        self.prev = snap;
        let terminal = snap.collision || snap.goal_reached;
        Ok(EnvStep {
            observation,
            reward,
            done: terminal || self.steps >= self.params.max_episode_steps,
            terminal,
            success: snap.goal_reached && !snap.collision,
        })
    }
}
