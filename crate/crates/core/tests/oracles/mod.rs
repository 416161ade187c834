//! Independent reference implementations shared by the integration tests
//! and the acceptance run.
#![allow(dead_code)]

pub mod grid;
pub mod network;
pub mod subgoal;
