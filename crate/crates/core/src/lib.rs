//! Hierarchical 2D robot navigation workbench.
//!
//! A global A* planner feeds an intermediate spatial-horizon subgoal
//! generator, which in turn drives an interchangeable local planner: a
//! Dynamic Window Approach baseline or a recurrent actor-critic policy
//! trained with asynchronous advantage actor-critic (A3C). The
//! [`benchmark`] module runs seeded scenario matrices over any of them.

pub mod benchmark;
pub mod drl;
pub mod geometry;
pub mod local;
pub mod planning;
pub mod scalar;
pub mod seeds;
pub mod world;

pub use geometry::{Pose, Vec2};
pub use scalar::Real;

/// Network parameters in double precision.
pub type NetworkParams = drl::NetworkParams<f64>;
/// Network parameters in single precision, used for fast training.
pub type NetworkParamsF32 = drl::NetworkParams<f32>;
/// Recurrent state in double precision.
pub type HiddenState = drl::HiddenState<f64>;
