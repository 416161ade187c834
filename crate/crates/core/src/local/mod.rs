//! Local planners: the DWA baseline and the learned policy runner.

mod actions;
mod dwa;
mod policy;

pub use actions::DiscreteActionSet;
pub use dwa::{dwa_plan, dwa_samples, DwaDecision, DwaParams};
pub use policy::{policy_plan, select_action, PolicyDecision, PolicyMode};

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::drl::{build_observation, DrlError, HiddenState, NetworkParams};
use crate::geometry::Vec2;
use crate::scalar::Real;
use crate::world::{Action, LidarScan, RobotState};

/// A planner turning the current scan and subgoal into a velocity command.
/// Instances hold per-episode state only.
pub trait LocalPlanner {
    fn name(&self) -> &str;
    /// Clears per-episode state.
    fn reset(&mut self);
    fn act(&mut self, scan: &LidarScan, robot: &RobotState, subgoal: Vec2) -> Result<Action, DrlError>;
}

#[derive(Debug, Clone)]
pub struct DwaPlanner {
    pub params: DwaParams,
}

impl LocalPlanner for DwaPlanner {
    fn name(&self) -> &str {
        "dwa"
    }

    fn reset(&mut self) {}

    fn act(&mut self, scan: &LidarScan, robot: &RobotState, subgoal: Vec2) -> Result<Action, DrlError> {
        Ok(dwa_plan(scan, robot, subgoal, &self.params).action)
    }
}

/// Runs a trained network over observations built from each scan.
#[derive(Debug, Clone)]
pub struct PolicyPlanner<T: Real> {
    params: Arc<NetworkParams<T>>,
    actions: DiscreteActionSet,
    mode: PolicyMode,
    seed: u64,
    hidden: HiddenState<T>,
    rng: ChaCha8Rng,
    input: Vec<T>,
}

impl<T: Real> PolicyPlanner<T> {
    pub fn new(params: Arc<NetworkParams<T>>, actions: DiscreteActionSet, mode: PolicyMode, seed: u64) -> Result<Self, DrlError> {
        let shape = params.shape();
        if shape.actions != actions.len() {
            return Err(DrlError::Shape(format!(
                "network has {} action logits, action set has {}",
                shape.actions,
                actions.len()
            )));
        }
        let hidden = HiddenState::zeros(shape.hidden);
        Ok(Self { params, actions, mode, seed, hidden, rng: ChaCha8Rng::seed_from_u64(seed), input: Vec::new() })
    }

    pub fn hidden(&self) -> &HiddenState<T> {
        &self.hidden
    }
}

impl<T: Real> LocalPlanner for PolicyPlanner<T> {
    fn name(&self) -> &str {
        "arena"
    }

    fn reset(&mut self) {
        self.hidden = HiddenState::zeros(self.params.shape().hidden);
        self.rng = ChaCha8Rng::seed_from_u64(self.seed);
    }

    fn act(&mut self, scan: &LidarScan, robot: &RobotState, subgoal: Vec2) -> Result<Action, DrlError> {
        let obs = build_observation(scan, robot, subgoal)?;
        obs.write_input(&mut self.input);
        let d = policy_plan(&self.input, &self.params, &self.hidden, self.mode, &mut self.rng)?;
        self.hidden = d.hidden;
        Ok(self.actions.get(d.index))
    }
}
