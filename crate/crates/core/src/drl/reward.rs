use serde::{Deserialize, Serialize};

/// Quantities the reward reads from one side of a transition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepSnapshot {
    /// Distance from the robot to the episode goal.
    pub goal_distance: f64,
    /// Smallest lidar range.
    pub min_clearance: f64,
    /// Distance the robot moved during the step leading here.
    pub displacement: f64,
    pub collision: bool,
    pub goal_reached: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RewardParams {
    pub success: f64,
    pub collision: f64,
    pub danger: f64,
    pub idle: f64,
    pub d_safe: f64,
    pub w_p: f64,
    pub w_n: f64,
}

impl Default for RewardParams {
    fn default() -> Self {
        Self { success: 15.0, collision: -10.0, danger: -0.15, idle: -0.01, d_safe: 0.5, w_p: 0.25, w_n: 0.4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub r_s: f64,
    pub r_c: f64,
    pub r_d: f64,
    pub r_p: f64,
    pub r_m: f64,
    pub total: f64,
}

pub fn compute_reward(prev: &StepSnapshot, curr: &StepSnapshot, params: &RewardParams) -> RewardBreakdown {
    let r_s = if curr.goal_reached { params.success } else { 0.0 };
    let r_c = if curr.collision { params.collision } else { 0.0 };
    let r_d = if !curr.collision && curr.min_clearance < params.d_safe { params.danger } else { 0.0 };
    let d = prev.goal_distance - curr.goal_distance;
    let r_p = if d >= 0.0 { params.w_p * d } else { params.w_n * d };
    let r_m = if curr.displacement == 0.0 { params.idle } else { 0.0 };
    RewardBreakdown { r_s, r_c, r_d, r_p, r_m, total: r_s + r_c + r_d + r_p + r_m }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn snap(goal_distance: f64) -> StepSnapshot {
        StepSnapshot { goal_distance, min_clearance: 3.5, displacement: 0.03, collision: false, goal_reached: false }
    }

    #[test]
    fn success_with_progress() {
        let curr = StepSnapshot { goal_reached: true, ..snap(0.2) };
        let r = compute_reward(&snap(0.22), &curr, &RewardParams::default());
        assert_eq!(r.r_s, 15.0);
        assert!((r.total - 15.005).abs() < 1e-12);
    }

    #[test]
    fn collision_suppresses_danger() {
        let curr = StepSnapshot { collision: true, min_clearance: 0.1, ..snap(1.0) };
        let r = compute_reward(&snap(1.0), &curr, &RewardParams::default());
        assert_eq!((r.r_c, r.r_d), (-10.0, 0.0));
    }

    #[test]
    fn idle_and_retreat() {
        let p = RewardParams::default();
        let idle = compute_reward(&snap(2.0), &StepSnapshot { displacement: 0.0, ..snap(2.0) }, &p);
        assert_eq!(idle.total, -0.01);
        let back = compute_reward(&snap(2.0), &snap(2.1), &p);
        assert!((back.r_p + 0.04).abs() < 1e-12);
    }
}
