use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::geometry::{wrap_angle, Pose, Vec2};

use super::collision::{check_collision, disc_overlaps_grid};
use super::lidar::{raycast, LidarScan};
use super::{ObstacleState, OccupancyGrid, WorldError};

/// Minimum raw beam count; the policy input downsamples to this many bins.
pub const OBSERVATION_BEAMS: usize = 344;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WorldConfig {
    /// Seconds per step.
    pub dt: f64,
    pub n_beams_raw: usize,
    pub range_max: f64,
    pub v_max: f64,
    pub omega_max: f64,
    pub robot_radius: f64,
    pub goal_radius: f64,
    /// Standard deviation of additive range noise, meters. Zero disables it.
    pub lidar_noise_std: f64,
    /// Reject robot translations that would overlap the static map.
    pub block_on_walls: bool,
    pub seed: u64,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            dt: 0.1,
            n_beams_raw: 360,
            range_max: 3.5,
            v_max: 0.5,
            omega_max: 1.5,
            robot_radius: 0.3,
            goal_radius: 0.3,
            lidar_noise_std: 0.0,
            block_on_walls: true,
            seed: 0,
        }
    }
}

impl WorldConfig {
    pub fn validate(&self) -> Result<(), WorldError> {
        let check = |ok: bool, msg: &str| if ok { Ok(()) } else { Err(WorldError::InvalidConfig(msg.into())) };
        check(self.dt > 0.0 && self.dt.is_finite(), "dt must be positive")?;
        check(self.n_beams_raw >= OBSERVATION_BEAMS, "n_beams_raw must be at least 344")?;
        check(self.range_max > 0.0, "range_max must be positive")?;
        check(self.v_max > 0.0 && self.omega_max > 0.0, "kinematic limits must be positive")?;
        check(self.robot_radius > 0.0, "robot radius must be positive")?;
        check(self.goal_radius > 0.0, "goal radius must be positive")?;
        check(self.lidar_noise_std >= 0.0, "lidar noise must be non-negative")
    }
}

/// Velocity command (a twist).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Action {
    /// m/s.
    pub v: f64,
    /// rad/s.
    pub omega: f64,
}

impl Action {
    pub const STOP: Action = Action { v: 0.0, omega: 0.0 };

    pub const fn new(v: f64, omega: f64) -> Self {
        Self { v, omega }
    }

    pub fn clamped(self, v_max: f64, omega_max: f64) -> Self {
        Self { v: self.v.clamp(-v_max, v_max), omega: self.omega.clamp(-omega_max, omega_max) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotState {
    pub x: f64,
    pub y: f64,
    /// Radians in `(-π, π]`.
    pub theta: f64,
    pub v: f64,
    pub omega: f64,
    pub radius: f64,
}

impl RobotState {
    pub fn at(pose: Pose, radius: f64) -> Self {
        Self { x: pose.x, y: pose.y, theta: wrap_angle(pose.theta), v: 0.0, omega: 0.0, radius }
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    pub fn pose(&self) -> Pose {
        Pose::new(self.x, self.y, self.theta)
    }
}

/// What happened during one [`World::step`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    /// Distance the robot center actually moved.
    pub displacement: f64,
    pub collision: bool,
    /// The commanded translation was rejected by a wall.
    pub blocked: bool,
}

/// A single simulation instance. Obstacle motion never depends on the
/// robot, so two worlds built from the same seed replay identical obstacle
/// trajectories whatever the robot does.
#[derive(Debug, Clone)]
pub struct World {
    grid: Arc<OccupancyGrid>,
    config: WorldConfig,
    pub robot: RobotState,
    pub obstacles: Vec<ObstacleState>,
    time: f64,
    steps: u64,
    collision: bool,
    motion_rng: ChaCha8Rng,
    noise_rng: ChaCha8Rng,
}

impl World {
    pub fn new(
        grid: Arc<OccupancyGrid>,
        config: WorldConfig,
        start: Pose,
        obstacles: Vec<ObstacleState>,
    ) -> Result<Self, WorldError> {
        config.validate()?;
        let robot = RobotState::at(start, config.robot_radius);
        let collision = check_collision(&robot, &grid, &obstacles);
        let motion_rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x6f62_7374_6163_6c65);
        let noise_rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x6c69_6461_726e_6f69);
        Ok(Self { grid, config, robot, obstacles, time: 0.0, steps: 0, collision, motion_rng, noise_rng })
    }

    pub fn grid(&self) -> &Arc<OccupancyGrid> {
        &self.grid
    }

    pub fn config(&self) -> &WorldConfig {
        &self.config
    }

    /// Simulated seconds since construction.
    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn in_collision(&self) -> bool {
        self.collision
    }

    /// Advances obstacles and the robot by one `dt` under `action`
    /// (clamped to the kinematic limits).
    pub fn step(&mut self, action: Action) -> StepInfo {
        let dt = self.config.dt;
        for o in &mut self.obstacles {
            o.advance(&self.grid, dt, &mut self.motion_rng);
        }

        let a = action.clamped(self.config.v_max, self.config.omega_max);
        let r = &mut self.robot;
        let old = r.position();
        let nx = r.x + a.v * r.theta.cos() * dt;
        let ny = r.y + a.v * r.theta.sin() * dt;
        r.theta = wrap_angle(r.theta + a.omega * dt);
        r.v = a.v;
        r.omega = a.omega;
        let target = Vec2::new(nx, ny);
        let blocked = self.config.block_on_walls
            && target != old
            && disc_overlaps_grid(&self.grid, target, r.radius);
        if !blocked {
            r.x = nx;
            r.y = ny;
        }
        let displacement = r.position().dist(old);

        self.collision = check_collision(&self.robot, &self.grid, &self.obstacles) || blocked;
        self.steps += 1;
        self.time = self.steps as f64 * dt;
        StepInfo { displacement, collision: self.collision, blocked }
    }

    pub fn scan(&mut self) -> LidarScan {
        let mut scan = raycast(
            &self.grid,
            &self.obstacles,
            &self.robot.pose(),
            self.config.n_beams_raw,
            self.config.range_max,
        );
        if self.config.lidar_noise_std > 0.0 {
            let noise = Normal::new(0.0, self.config.lidar_noise_std).expect("finite noise");
            for r in &mut scan.ranges {
                *r = (*r + noise.sample(&mut self.noise_rng)).clamp(0.0, scan.range_max);
            }
        }
        scan
    }

    /// Moves the robot without simulating, e.g. to stage a test.
    pub fn teleport(&mut self, pose: Pose) {
        self.robot = RobotState { v: 0.0, omega: 0.0, ..RobotState::at(pose, self.robot.radius) };
        self.collision = check_collision(&self.robot, &self.grid, &self.obstacles);
    }
}
