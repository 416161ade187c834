use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CurriculumParams {
    pub window: usize,
    pub up_threshold: f64,
    pub down_threshold: f64,
    pub step: usize,
    pub initial: usize,
    pub max_obstacles: usize,
}

impl Default for CurriculumParams {
    fn default() -> Self {
        Self { window: 100, up_threshold: 0.8, down_threshold: 0.4, step: 2, initial: 0, max_obstacles: 20 }
    }
}

/// Obstacle-count schedule driven by the success rate over a full window
/// of episodes. The window restarts after every level change.
#[derive(Debug, Clone, PartialEq)]
pub struct CurriculumState {
    params: CurriculumParams,
    level: usize,
    recent: VecDeque<bool>,
}

impl CurriculumState {
    pub fn new(params: CurriculumParams) -> Self {
        Self { params, level: params.initial.min(params.max_obstacles), recent: VecDeque::with_capacity(params.window) }
    }

    pub fn obstacle_count(&self) -> usize {
        self.level
    }

    pub fn params(&self) -> &CurriculumParams {
        &self.params
    }

    pub fn at_max(&self) -> bool {
        self.level == self.params.max_obstacles
    }

    /// Success fraction over the episodes seen since the last change.
    pub fn moving_average(&self) -> f64 {
        if self.recent.is_empty() {
            0.0
        } else {
            self.recent.iter().filter(|&&s| s).count() as f64 / self.recent.len() as f64
        }
    }

    pub fn window_full(&self) -> bool {
        self.recent.len() >= self.params.window
    }

    /// Records one episode; returns true when the level changed.
    pub fn update(&mut self, success: bool) -> bool {
        if self.recent.len() == self.params.window {
            self.recent.pop_front();
        }
        self.recent.push_back(success);
        if !self.window_full() {
            return false;
        }
        let avg = self.moving_average();
        let next = if avg >= self.params.up_threshold {
            (self.level + self.params.step).min(self.params.max_obstacles)
        } else if avg <= self.params.down_threshold {
            self.level.saturating_sub(self.params.step)
        } else {
            self.level
        };
        let changed = next != self.level;
        if changed {
            self.recent.clear();
        }
        self.level = next;
        changed
    }
}
