//! Dynamic Window Approach over a lidar point snapshot.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::geometry::{wrap_angle, Pose, Vec2};
use crate::world::{Action, LidarScan, RobotState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DwaParams {
    pub n_v: usize,
    pub n_omega: usize,
    pub t_sim: f64,
    /// Integration step of the forward simulation and the control period
    /// defining the window.
    pub dt: f64,
    pub heading_weight: f64,
    pub clearance_weight: f64,
    pub velocity_weight: f64,
    pub clearance_cap: f64,
    pub accel_v: f64,
    pub accel_omega: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub omega_max: f64,
    pub robot_radius: f64,
}

impl Default for DwaParams {
    fn default() -> Self {
        Self {
            n_v: 10,
            n_omega: 20,
            t_sim: 1.5,
            dt: 0.1,
            heading_weight: 0.8,
            clearance_weight: 0.2,
            velocity_weight: 0.2,
            clearance_cap: 2.0,
            accel_v: 2.5,
            accel_omega: 3.2,
            v_min: 0.0,
            v_max: 0.5,
            omega_max: 1.5,
            robot_radius: 0.3,
        }
    }
}

impl DwaParams {
    pub fn validate(&self) -> Result<(), String> {
        let w = [self.heading_weight, self.clearance_weight, self.velocity_weight];
        if w.iter().any(|x| !(*x >= 0.0)) {
            return Err("DWA weights must be non-negative".into());
        }
        if !(self.t_sim > 0.0) || !(self.dt > 0.0) || self.n_v == 0 || self.n_omega == 0 {
            return Err("DWA horizon, step and sample counts must be positive".into());
        }
        if !(self.clearance_cap > 0.0) || !(self.v_max > 0.0) || !(self.v_min <= self.v_max) {
            return Err("DWA clearance cap and velocity limits are inconsistent".into());
        }
        Ok(())
    }

    pub fn sim_steps(&self) -> usize {
        (self.t_sim / self.dt).round().max(1.0) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DwaDecision {
    pub action: Action,
    /// Every sampled trajectory violated the clearance bound.
    pub fallback: bool,
    pub score: f64,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 || hi <= lo {
        return vec![hi];
    }
    (0..n).map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect()
}

/// Velocity pairs reachable within one control period, `v` major.
/// `ω = 0` is added when the window contains it.
pub fn dwa_samples(robot: &RobotState, params: &DwaParams) -> Vec<Action> {
    let v_lo = (robot.v - params.accel_v * params.dt).max(params.v_min);
    let v_hi = (robot.v + params.accel_v * params.dt).min(params.v_max);
    let w_lo = (robot.omega - params.accel_omega * params.dt).max(-params.omega_max);
    let w_hi = (robot.omega + params.accel_omega * params.dt).min(params.omega_max);
    let vs = linspace(v_lo.min(v_hi), v_hi, params.n_v);
    let mut ws = linspace(w_lo.min(w_hi), w_hi, params.n_omega);
    if w_lo <= 0.0 && 0.0 <= w_hi && !ws.contains(&0.0) {
        let at = ws.partition_point(|&w| w < 0.0);
        ws.insert(at, 0.0);
    }
    vs.iter().flat_map(|&v| ws.iter().map(move |&w| Action::new(v, w))).collect()
}

/// Poses after each of the `steps` integration steps.
pub(crate) fn rollout(start: Pose, a: Action, dt: f64, steps: usize) -> Vec<Pose> {
    let mut p = start;
    (0..steps)
        .map(|_| {
            p = Pose::new(p.x + a.v * p.theta.cos() * dt, p.y + a.v * p.theta.sin() * dt, wrap_angle(p.theta + a.omega * dt));
            p
        })
        .collect()
}

pub fn dwa_plan(scan: &LidarScan, robot: &RobotState, subgoal: Vec2, params: &DwaParams) -> DwaDecision {
    let pose = robot.pose();
    let steps = params.sim_steps();
    let samples = dwa_samples(robot, params);
    let travel = samples.iter().map(|a| a.v.abs()).fold(0.0, f64::max) * params.dt * steps as f64;
    let reach = travel + params.clearance_cap;
    let points: Vec<Vec2> = scan
        .hit_points(&pose)
        .into_iter()
        .filter(|q| q.dist(pose.position()) <= reach)
        .collect();
    let r2 = params.robot_radius * params.robot_radius;

    let mut best: Option<(f64, Action)> = None;
    for &a in &samples {
        let traj = rollout(pose, a, params.dt, steps);
        let mut min_d2 = f64::INFINITY;
        'poses: for p in &traj {
            let c = p.position();
            for q in &points {
                let d2 = (q.x - c.x) * (q.x - c.x) + (q.y - c.y) * (q.y - c.y);
                if d2 < min_d2 {
                    min_d2 = d2;
                    if min_d2 < r2 {
                        break 'poses;
                    }
                }
            }
        }
        if min_d2 < r2 {
            continue;
        }
        let end = traj.last().expect("at least one step");
        let err = wrap_angle((subgoal.y - end.y).atan2(subgoal.x - end.x) - end.theta);
        let clearance = min_d2.sqrt().min(params.clearance_cap);
        let score = params.heading_weight * (PI - err.abs()) / PI
            + params.clearance_weight * clearance / params.clearance_cap
            + params.velocity_weight * a.v / params.v_max;
        if best.is_none_or(|(s, _)| score > s) {
            best = Some((score, a));
        }
    }

    match best {
        Some((score, action)) => DwaDecision { action, fallback: false, score },
        None => {
            let err = wrap_angle((subgoal.y - pose.y).atan2(subgoal.x - pose.x) - pose.theta);
            let omega = if err >= 0.0 { params.omega_max } else { -params.omega_max };
            DwaDecision { action: Action::new(0.0, omega), fallback: true, score: f64::NEG_INFINITY }
        }
    }
}
