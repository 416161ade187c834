//! Spatial-horizon subgoal generation with replanning triggers.
//!
//! The subgoal is where a circle of radius `d_ahead` around the robot
//! crosses the global path, taking the crossing farthest along the path.
//! When the circle misses the path, the robot is off course for longer
//! than `d_off`, or it has not moved for `t_lim` seconds, the global
//! path is replanned from the current position.

use serde::{Deserialize, Serialize};

use crate::geometry::{segment_circle_intersections, Vec2};
use crate::world::RobotState;

use super::global::{GlobalPath, GlobalPlanner};
use super::PlanError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HorizonParams {
    /// Look-ahead radius, meters.
    pub d_ahead: f64,
    /// Stuck-time limit, seconds.
    pub t_lim: f64,
    /// Off-course distance that forces a replan, meters.
    pub d_off: f64,
    /// Speeds at or below this count as not moving, m/s.
    pub move_eps: f64,
}

impl Default for HorizonParams {
    fn default() -> Self {
        Self { d_ahead: 1.55, t_lim: 4.0, d_off: 1.0, move_eps: 0.01 }
    }
}

impl HorizonParams {
    pub fn validate(&self) -> Result<(), PlanError> {
        if [self.d_ahead, self.t_lim, self.d_off, self.move_eps].iter().all(|v| *v > 0.0 && v.is_finite()) {
            Ok(())
        } else {
            Err(PlanError::InvalidParams(format!("horizon parameters must be positive: {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SubgoalKind {
    /// The global goal lies strictly inside the horizon circle.
    Goal,
    /// Circle/path crossing at this arclength.
    Horizon { arclength: f64 },
    /// Closest path pose after a replan that still missed the circle.
    Fallback,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Subgoal {
    pub point: Vec2,
    pub kind: SubgoalKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SubgoalQuery {
    Found(Subgoal),
    NeedsReplan,
}

/// Subgoal on `path` for a robot at `p_r`.
pub fn compute_subgoal(path: &GlobalPath, p_r: Vec2, d_ahead: f64) -> SubgoalQuery {
    let goal = path.goal();
    if goal.dist(p_r) < d_ahead {
        return SubgoalQuery::Found(Subgoal { point: goal, kind: SubgoalKind::Goal });
    }
    let poses = path.poses();
    let cum = path.cumulative_arclength();
    let mut best: Option<(f64, Vec2)> = None;
    // Walk backwards: the first segment with a crossing holds the farthest one.
    for i in (0..poses.len().saturating_sub(1)).rev() {
        let (a, b) = (poses[i], poses[i + 1]);
        if let Some(&t) = segment_circle_intersections(a, b, p_r, d_ahead).last() {
            let s = cum[i] + t * (cum[i + 1] - cum[i]);
            best = Some((s, a.lerp(b, t)));
            break;
        }
    }
    match best {
        Some((arclength, point)) => SubgoalQuery::Found(Subgoal { point, kind: SubgoalKind::Horizon { arclength } }),
        None => SubgoalQuery::NeedsReplan,
    }
}

/// Per-episode subgoal bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct SubgoalState {
    pub subgoal: Option<Subgoal>,
    pub path: GlobalPath,
    /// Last time the robot was seen moving, seconds.
    pub last_progress_time: f64,
    pub replan_count: usize,
}

impl SubgoalState {
    pub fn new(path: GlobalPath, now: f64) -> Self {
        Self { subgoal: None, path, last_progress_time: now, replan_count: 0 }
    }
}

/// Off course by more than `d_off`, or not moving for more than `t_lim`.
pub fn should_replan(state: &SubgoalState, robot: &RobotState, params: &HorizonParams, now: f64) -> bool {
    let last_progress = if robot.v.abs() > params.move_eps { now } else { state.last_progress_time };
    state.path.distance_to(robot.position()) > params.d_off || now - last_progress > params.t_lim
}

/// One subgoal update, replanning at most once.
pub fn update(
    state: &mut SubgoalState,
    robot: &RobotState,
    planner: &dyn GlobalPlanner,
    goal: Vec2,
    params: &HorizonParams,
    now: f64,
) -> Result<Subgoal, PlanError> {
    let p_r = robot.position();
    let replan = should_replan(state, robot, params, now);
    if robot.v.abs() > params.move_eps {
        state.last_progress_time = now;
    }
    if !replan {
        if let SubgoalQuery::Found(sg) = compute_subgoal(&state.path, p_r, params.d_ahead) {
            state.subgoal = Some(sg);
            return Ok(sg);
        }
    }

    state.path = replan_from(planner, p_r, goal)?;
    state.replan_count += 1;
    state.last_progress_time = now;
    let sg = match compute_subgoal(&state.path, p_r, params.d_ahead) {
        SubgoalQuery::Found(sg) => sg,
        SubgoalQuery::NeedsReplan => {
            let closest = state
                .path
                .poses()
                .iter()
                .copied()
                .min_by(|a, b| a.dist(p_r).total_cmp(&b.dist(p_r)))
                .expect("non-empty path");
            Subgoal { point: closest, kind: SubgoalKind::Fallback }
        }
    };
    state.subgoal = Some(sg);
    Ok(sg)
}

/// Plans from `p_r`; if `p_r` sits in inflated space, plans from the nearest
/// free cell and prepends `p_r` so the path still starts at the robot.
fn replan_from(planner: &dyn GlobalPlanner, p_r: Vec2, goal: Vec2) -> Result<GlobalPath, PlanError> {
    match planner.plan(p_r, goal) {
        Err(PlanError::InvalidEndpoint { which: "start", .. }) => match planner.nearest_free(p_r) {
            Some(q) => Ok(planner.plan(q, goal)?.prepended(p_r)),
            None => Err(PlanError::InvalidEndpoint { which: "start", at: p_r }),
        },
        other => other,
    }
}
