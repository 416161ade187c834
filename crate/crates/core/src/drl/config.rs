use serde::{Deserialize, Serialize};

use crate::local::DiscreteActionSet;
use crate::world::WorldConfig;

use super::adam::AdamParams;
use super::curriculum::CurriculumParams;
use super::env::TrainEnvParams;
use super::loss::LossConfig;
use super::nn::NetworkShape;
use super::reward::RewardParams;
use super::DrlError;

/// How worker gradients reach the shared parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Schedule {
    /// Workers roll out against the same snapshot, then their gradients are
    /// applied one by one in worker order. Reproducible for any worker count.
    Lockstep,
    /// Free-running threads submitting to a locked store as they finish.
    Async,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct HiddenSizes {
    pub fc1: usize,
    pub fc2: usize,
    pub gru: usize,
}

impl Default for HiddenSizes {
    fn default() -> Self {
        Self { fc1: 128, fc2: 64, gru: 64 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub seed: u64,
    pub n_workers: usize,
    /// Environment steps summed over all workers.
    pub total_steps: u64,
    /// Optional wall-clock budget in seconds.
    pub max_wall_time_s: Option<f64>,
    pub schedule: Schedule,
    pub rollout_length: usize,
    /// Recorded for completeness; A3C updates per rollout.
    pub batch_size: usize,
    pub max_episode_steps: usize,
    pub gamma: f64,
    pub learning_rate: f64,
    pub adam_epsilon: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub use_gae: bool,
    pub gae_lambda: f64,
    pub use_value_clip: bool,
    pub value_clip_range: f64,
    pub max_gradient_norm: f64,
    pub entropy_coef: f64,
    pub value_loss_coef: f64,
    /// Epsilon-greedy schedule entries; inert under A3C.
    pub epsilon_end: f64,
    pub epsilon_max_steps: u64,
    /// Stop once the success average over a full window at the top
    /// curriculum level reaches this bound.
    pub mean_success_bound: f64,
    pub network: HiddenSizes,
    pub actions: DiscreteActionSet,
    pub reward: RewardParams,
    pub curriculum: CurriculumParams,
    pub env: TrainEnvParams,
    pub world: WorldConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n_workers: 4,
            total_steps: 2_000_000,
            max_wall_time_s: None,
            schedule: Schedule::Lockstep,
            rollout_length: 32,
            batch_size: 64,
            max_episode_steps: 128,
            gamma: 0.99,
            learning_rate: 0.00025,
            adam_epsilon: 1e-5,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            use_gae: false,
            gae_lambda: 0.95,
            use_value_clip: false,
            value_clip_range: 0.2,
            max_gradient_norm: 0.5,
            entropy_coef: 0.01,
            value_loss_coef: 0.5,
            epsilon_end: 0.05,
            epsilon_max_steps: 100_000,
            mean_success_bound: 1.0,
            network: HiddenSizes::default(),
            actions: DiscreteActionSet::default(),
            reward: RewardParams::default(),
            curriculum: CurriculumParams::default(),
            env: TrainEnvParams::default(),
            world: WorldConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), DrlError> {
        let check = |ok: bool, m: &str| if ok { Ok(()) } else { Err(DrlError::Config(m.into())) };
        check(self.gamma > 0.0 && self.gamma < 1.0, "gamma must lie in (0, 1)")?;
        check(self.learning_rate > 0.0 && self.adam_epsilon > 0.0, "learning rate and Adam epsilon must be positive")?;
        check((0.0..1.0).contains(&self.adam_beta1) && (0.0..1.0).contains(&self.adam_beta2), "Adam betas must lie in [0, 1)")?;
        check(self.n_workers >= 1, "at least one worker is required")?;
        check(self.rollout_length >= 1 && self.max_episode_steps >= 1, "rollout and episode lengths must be positive")?;
        check(self.gae_lambda > 0.0 && self.gae_lambda <= 1.0, "gae_lambda must lie in (0, 1]")?;
        check(self.value_clip_range > 0.0 && self.max_gradient_norm > 0.0, "clip ranges must be positive")?;
        check(self.entropy_coef >= 0.0 && self.value_loss_coef > 0.0, "loss coefficients must be non-negative")?;
        check(self.max_wall_time_s.is_none_or(|t| t > 0.0), "wall-time budget must be positive")?;
        let c = &self.curriculum;
        check(
            c.window >= 1 && c.down_threshold < c.up_threshold && (0.0..=1.0).contains(&c.up_threshold),
            "curriculum thresholds must satisfy 0 ≤ down < up ≤ 1",
        )?;
        self.shape().validate()?;
        self.env.validate()?;
        self.world.validate()?;
        Ok(())
    }

    pub fn shape(&self) -> NetworkShape {
        NetworkShape {
            input: super::Observation::INPUT_LEN,
            fc1: self.network.fc1,
            fc2: self.network.fc2,
            hidden: self.network.gru,
            actions: self.actions.len(),
        }
    }

    pub fn loss(&self) -> LossConfig {
        LossConfig {
            gamma: self.gamma,
            value_coef: self.value_loss_coef,
            entropy_coef: self.entropy_coef,
            gae_lambda: self.use_gae.then_some(self.gae_lambda),
            value_clip: self.use_value_clip.then_some(self.value_clip_range),
            max_grad_norm: Some(self.max_gradient_norm),
        }
    }

    pub fn adam(&self) -> AdamParams {
        AdamParams { learning_rate: self.learning_rate, beta1: self.adam_beta1, beta2: self.adam_beta2, epsilon: self.adam_epsilon }
    }

    /// Environment parameters with the episode cap taken from this config.
    pub fn env_params(&self) -> TrainEnvParams {
        TrainEnvParams { max_episode_steps: self.max_episode_steps, ..self.env.clone() }
    }
}
