//! Deterministic 2D world: occupancy grid, unicycle robot, dynamic disc
//! obstacles, lidar and collision checks.

mod collision;
mod grid;
mod lidar;
mod mapgen;
mod obstacle;
mod sim;

use thiserror::Error;

pub use collision::{check_collision, disc_overlaps_grid};
pub use grid::{Cell, OccupancyGrid};
pub use lidar::{cast_grid, raycast, LidarScan};
pub use mapgen::{generate_random_map, MapGenParams, MAX_MAP_ATTEMPTS};
pub use obstacle::{spawn_obstacles, MotionKind, MotionModel, ObstacleState, SpawnOptions, MAX_SPAWN_ATTEMPTS};
pub(crate) use obstacle::segment_clear;
pub use sim::{Action, RobotState, StepInfo, World, WorldConfig, OBSERVATION_BEAMS};

#[derive(Debug, Error)]
pub enum WorldError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("map format: {0}")]
    MapFormat(String),
    #[error("invalid map generation parameters: {0}")]
    InvalidMapParams(String),
    #[error("no acceptable map after {attempts} attempts")]
    MapGenerationFailed { attempts: usize },
    #[error("placed only {placed} of {requested} obstacles")]
    SpawnFailed { placed: usize, requested: usize },
    #[error("invalid world configuration: {0}")]
    InvalidConfig(String),
    #[error("{0}: {1}")]
    Io(String, #[source] std::io::Error),
}
