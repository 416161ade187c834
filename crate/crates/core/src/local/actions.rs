use serde::{Deserialize, Serialize};

use crate::drl::DrlError;
use crate::world::Action;

/// Ordered, finite action vocabulary of the policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Action>", into = "Vec<Action>")]
pub struct DiscreteActionSet {
    actions: Vec<Action>,
}

impl DiscreteActionSet {
    pub fn new(actions: Vec<Action>) -> Result<Self, DrlError> {
        if actions.len() < 2 {
            return Err(DrlError::Config(format!("action set needs at least 2 actions, got {}", actions.len())));
        }
        if !actions.contains(&Action::STOP) {
            return Err(DrlError::Config("action set must contain the stop action (0, 0)".into()));
        }
        if actions.iter().any(|a| !a.v.is_finite() || !a.omega.is_finite()) {
            return Err(DrlError::Config("action set contains a non-finite velocity".into()));
        }
        Ok(Self { actions })
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn get(&self, i: usize) -> Action {
        self.actions[i]
    }

    pub fn as_slice(&self) -> &[Action] {
        &self.actions
    }
}

impl Default for DiscreteActionSet {
    fn default() -> Self {
        Self {
            actions: vec![
                Action::new(0.3, 0.0),
                Action::new(0.3, 0.75),
                Action::new(0.3, -0.75),
                Action::new(0.3, 1.5),
                Action::new(0.3, -1.5),
                Action::STOP,
                Action::new(-0.15, 0.0),
            ],
        }
    }
}

impl TryFrom<Vec<Action>> for DiscreteActionSet {
    type Error = DrlError;
    fn try_from(v: Vec<Action>) -> Result<Self, DrlError> {
        Self::new(v)
    }
}

impl From<DiscreteActionSet> for Vec<Action> {
    fn from(s: DiscreteActionSet) -> Self {
        s.actions
    }
}
