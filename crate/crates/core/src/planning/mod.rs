//! Global A* planning and the intermediate subgoal planner.

pub mod global;
pub mod intermediate;

use thiserror::Error;

use crate::geometry::Vec2;

pub use global::{inflate, plan_astar, GlobalPath, GlobalPlanner, PlannerGrid};
pub use intermediate::{
    compute_subgoal, should_replan, update, HorizonParams, Subgoal, SubgoalKind, SubgoalQuery, SubgoalState,
};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum PlanError {
    #[error("no path from {start:?} to {goal:?}")]
    NoPath { start: Vec2, goal: Vec2 },
    #[error("{which} {at:?} is not in free space")]
    InvalidEndpoint { which: &'static str, at: Vec2 },
    #[error("arclength {s} outside [0, {total}]")]
    ArclengthOutOfRange { s: f64, total: f64 },
    #[error("a path needs at least one pose")]
    EmptyPath,
    #[error("{0}")]
    InvalidParams(String),
}
