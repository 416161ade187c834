//! Learning components: observations, rewards, the recurrent actor-critic,
//! its loss gradients, the optimizer, curriculum and the A3C trainer.

mod a3c;
mod adam;
mod checkpoint;
mod config;
mod curriculum;
mod env;
mod loss;
pub mod nn;
mod observation;
mod returns;
mod reward;

use thiserror::Error;

pub use a3c::{a3c_train, a3c_train_with, initial_params, EnvFactory, EpisodeRecord, StopReason, TrainLog, TrainOutcome};
pub use adam::{Adam, AdamParams};
pub use checkpoint::{decode_params, encode_params, load_params, load_params_checked, save_params, MAGIC, VERSION};
pub use config::{HiddenSizes, Schedule, TrainConfig};
pub use curriculum::{CurriculumParams, CurriculumState};
pub use env::{EnvStep, Environment, TrainEnv, TrainEnvParams};
pub use loss::{compute_gradients, targets, LossConfig, LossReport, Trajectory, TrajectoryStep};
pub use nn::{forward, forward_cached, log_softmax, softmax, HiddenState, NetworkParams, NetworkShape, StepOutput};
pub use observation::{build_observation, Observation};
pub use returns::{discounted_returns, gae};
pub use reward::{compute_reward, RewardBreakdown, RewardParams, StepSnapshot};

use crate::world::WorldError;

#[derive(Debug, Error)]
pub enum DrlError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("non-finite loss (policy {policy_loss}, value {value_loss}, entropy {entropy})")]
    NonFinite { policy_loss: f64, value_loss: f64, entropy: f64 },
    #[error("invalid checkpoint: {0}")]
    Checkpoint(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{0}: {1}")]
    Io(String, #[source] std::io::Error),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error("worker {worker} failed: {message} ({} episodes logged)", log.episodes.len())]
    WorkerCrashed { worker: usize, message: String, log: Box<TrainLog> },
}
