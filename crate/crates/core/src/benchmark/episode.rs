use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::drl::NetworkParams;
use crate::geometry::{Pose, Vec2};
use crate::local::{DiscreteActionSet, DwaParams, DwaPlanner, LocalPlanner, PolicyMode, PolicyPlanner};
use crate::planning::{update, GlobalPlanner, HorizonParams, SubgoalState};
use crate::seeds::{derive_seed, stream};
use crate::world::{spawn_obstacles, SpawnOptions, World, WorldConfig};

use super::scenario::PreparedScenario;

#[derive(Debug, Clone)]
pub enum PlannerKind {
    Dwa(DwaParams),
    Arena { params: Arc<NetworkParams<f64>>, actions: DiscreteActionSet, mode: PolicyMode },
}

/// A named local planner configuration.
#[derive(Debug, Clone)]
pub struct PlannerSpec {
    pub name: String,
    pub kind: PlannerKind,
}

impl PlannerSpec {
    pub fn dwa(params: DwaParams) -> Self {
        Self { name: "dwa".into(), kind: PlannerKind::Dwa(params) }
    }

    pub fn arena(params: Arc<NetworkParams<f64>>, actions: DiscreteActionSet) -> Self {
        Self { name: "arena".into(), kind: PlannerKind::Arena { params, actions, mode: PolicyMode::Greedy } }
    }

    /// A fresh per-episode planner instance.
    pub fn instantiate(&self, seed: u64) -> Result<Box<dyn LocalPlanner>, crate::drl::DrlError> {
        Ok(match &self.kind {
            PlannerKind::Dwa(p) => Box::new(DwaPlanner { params: *p }),
            PlannerKind::Arena { params, actions, mode } => {
                Box::new(PolicyPlanner::new(params.clone(), actions.clone(), *mode, seed)?)
            }
        })
    }
}

/// Settings shared by every layer of the navigation stack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StackParams {
    pub world: WorldConfig,
    pub horizon: HorizonParams,
    /// Inflation radius of the global planning grid.
    pub inflation: f64,
    /// Keep every n-th pose of the robot trajectory.
    pub trajectory_stride: usize,
    /// Record obstacle paths for runs with index below this.
    pub obstacle_trace_runs: usize,
    /// Spacing of recorded obstacle positions, in steps.
    pub obstacle_trace_stride: usize,
    /// Radius around start and goal kept free of obstacles at spawn time.
    pub spawn_clearance: f64,
}

impl Default for StackParams {
    fn default() -> Self {
        let world = WorldConfig::default();
        Self {
            inflation: world.robot_radius + 0.05,
            world,
            horizon: HorizonParams::default(),
            trajectory_stride: 5,
            obstacle_trace_runs: 1,
            obstacle_trace_stride: 10,
            spawn_clearance: 1.0,
        }
    }
}

/// Outcome of one benchmark episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub planner: String,
    pub scenario: String,
    pub run: usize,
    /// Simulated seconds until the goal was reached or the run ended.
    pub time_s: f64,
    pub path_m: f64,
    pub collisions: usize,
    pub reached_goal: bool,
    pub success: bool,
    pub timeout: bool,
    pub replans: usize,
    /// Subsampled robot poses, always including the first and last.
    pub trajectory: Vec<Pose>,
    pub collision_points: Vec<Vec2>,
    pub obstacle_paths: Vec<Vec<Vec2>>,
    /// Set when the planner stack failed; the run counts as unsuccessful.
    pub error: Option<String>,
}

/// Runs `planner` on run `run` of a scenario. The obstacle population and
/// its motion depend only on the scenario seed base and `run`.
/// A run succeeds when the goal is reached with fewer than two collisions.
pub fn is_success(reached_goal: bool, collisions: usize) -> bool {
    reached_goal && collisions < 2
}

pub fn run_episode(planner: &PlannerSpec, prepared: &PreparedScenario, stack: &StackParams, run: usize) -> RunResult {
    let sc = &prepared.scenario;
    let seed = sc.seed_base.wrapping_add(run as u64);
    let mut result = RunResult {
        planner: planner.name.clone(),
        scenario: sc.name.clone(),
        run,
        time_s: 0.0,
        path_m: 0.0,
        collisions: 0,
        reached_goal: false,
        success: false,
        timeout: false,
        replans: 0,
        trajectory: vec![sc.start],
        collision_points: Vec::new(),
        obstacle_paths: Vec::new(),
        error: None,
    };

    let opts = SpawnOptions {
        radius: sc.obstacle_radius,
        keep_clear: vec![(sc.start.position(), stack.spawn_clearance), (sc.goal, stack.spawn_clearance)],
        ..Default::default()
    };
    let setup = spawn_obstacles(&prepared.grid, sc.n_obstacles, sc.v_obs, sc.motion, derive_seed(seed, stream::OBSTACLES, 0), &opts)
        .map_err(|e| e.to_string())
        .and_then(|obs| {
            let cfg = WorldConfig { seed: derive_seed(seed, stream::WORLD, 0), ..stack.world.clone() };
            World::new(prepared.grid.clone(), cfg, sc.start, obs).map_err(|e| e.to_string())
        })
        .and_then(|w| {
            let path = prepared.planner_grid.plan(sc.start.position(), sc.goal).map_err(|e| e.to_string())?;
            let local = planner.instantiate(derive_seed(seed, stream::POLICY, 0)).map_err(|e| e.to_string())?;
            Ok((w, path, local))
        });
    let (mut world, path, mut local) = match setup {
        Ok(v) => v,
        Err(e) => {
            result.error = Some(e);
            return result;
        }
    };

    let trace = run < stack.obstacle_trace_runs;
    if trace {
        result.obstacle_paths = world.obstacles.iter().map(|o| vec![o.position]).collect();
    }
    let mut state = SubgoalState::new(path, 0.0);
    let mut contact = world.in_collision();
    let max_steps = (sc.timeout_s / stack.world.dt).round() as u64;
    let goal_radius = stack.world.goal_radius;
    let stride = stack.trajectory_stride.max(1) as u64;
    while world.steps() < max_steps {
        if world.robot.position().dist(sc.goal) < goal_radius {
            result.reached_goal = true;
            break;
        }
        let scan = world.scan();
        let robot = world.robot;
        let step = update(&mut state, &robot, prepared.planner_grid.as_ref(), sc.goal, &stack.horizon, world.time())
            .map_err(|e| e.to_string())
            .and_then(|sg| local.act(&scan, &robot, sg.point).map_err(|e| e.to_string()));
        let action = match step {
            Ok(a) => a,
            Err(e) => {
                result.error = Some(e);
                break;
            }
        };
        let info = world.step(action);
        result.path_m += info.displacement;
        let now_contact = world.in_collision();
        if now_contact && !contact {
            result.collisions += 1;
            result.collision_points.push(world.robot.position());
        }
        contact = now_contact;
        if world.steps() % stride == 0 {
            result.trajectory.push(world.robot.pose());
        }
        if trace && world.steps() % stack.obstacle_trace_stride.max(1) as u64 == 0 {
            for (p, o) in result.obstacle_paths.iter_mut().zip(&world.obstacles) {
                p.push(o.position);
            }
        }
    }
    if !result.reached_goal && result.error.is_none() && world.robot.position().dist(sc.goal) < goal_radius {
        result.reached_goal = true;
    }
    if result.trajectory.last() != Some(&world.robot.pose()) {
        result.trajectory.push(world.robot.pose());
    }
    result.time_s = world.time();
    result.replans = state.replan_count;
    result.timeout = !result.reached_goal && result.error.is_none();
    result.success = is_success(result.reached_goal, result.collisions);
    result
}
