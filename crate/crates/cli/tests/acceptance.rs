//! Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails.
//!
//! The training criteria (6, 7) share one run. Its budget defaults to
//! `DEFAULT_TRAIN_STEPS` and can be overridden with
//! `NAV_ARENA_ACCEPTANCE_STEPS`; `NAV_ARENA_ACCEPTANCE_SKIP_TRAINING=1`
//! reports both as skipped (and failing) for quick iterations.

#[path = "../../core/tests/oracles/mod.rs"]
mod oracles;

use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use nav_arena::benchmark::{default_matrix, run_suite, PlannerSpec, Scenario, StackParams};
use nav_arena::drl::{a3c_train, compute_reward, LossConfig, RewardParams, Schedule, StepSnapshot, TrainConfig};
use nav_arena::geometry::{Pose, Vec2};
use nav_arena::local::DwaParams;
use nav_arena::planning::{compute_subgoal, inflate, plan_astar, update, HorizonParams, SubgoalQuery, SubgoalState};
use nav_arena::world::{generate_random_map, raycast, MapGenParams, OccupancyGrid, World, WorldConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use oracles::grid::{dijkstra, grazes_corner, marched_range, random_free_cell, random_grid};
use oracles::network::max_relative_error;
use oracles::subgoal::{random_path, sampled_subgoal};

const DEFAULT_TRAIN_STEPS: u64 = 3_000_000;
const TRAIN_WALL_LIMIT_S: f64 = 2.0 * 3600.0;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> (Outcome, Duration) {
    let t = Instant::now();
    let mut o = f();
    let dt = t.elapsed();
    if let Some(l) = limit {
        if dt > l {
            o.pass = false;
            o.detail += &format!("; runtime {:.1}s over the {:.0}s limit", dt.as_secs_f64(), l.as_secs_f64());
        }
    }
    (o, dt)
}

/// Reward computed straight from the definition, term by term.
fn reward_oracle(d0: f64, d1: f64, clearance: f64, moved: f64, collision: bool, goal: bool) -> f64 {
    let mut r = 0.0;
    if goal {
        r += 15.0;
    }
    if collision {
        r -= 10.0;
    } else if clearance < 0.5 {
        r -= 0.15;
    }
    let progress = d0 - d1;
    r += if progress >= 0.0 { 0.25 * progress } else { 0.4 * progress };
    if moved == 0.0 {
        r -= 0.01;
    }
    r
}

fn criterion_1() -> Outcome {
    // (prev distance, distance, min clearance, displacement, collision, goal reached)
    let cases: [(f64, f64, f64, f64, bool, bool); 20] = [
        (1.0, 0.2, 3.5, 0.05, false, true),
        (2.0, 2.0, 0.2, 0.00, true, false),
        (2.0, 1.95, 0.4, 0.05, false, false),
        (2.0, 2.0, 3.5, 0.00, false, false),
        (2.0, 1.9, 3.5, 0.10, false, false),
        (2.0, 2.1, 3.5, 0.10, false, false),
        (0.35, 0.25, 0.45, 0.10, false, true),
        (3.0, 3.05, 0.1, 0.05, true, false),
        (3.0, 3.05, 0.49, 0.05, false, false),
        (3.0, 3.05, 0.5, 0.05, false, false),
        (1.0, 1.0, 0.3, 0.0, false, false),
        (1.0, 1.0, 0.3, 0.0, true, false),
        (5.0, 4.97, 2.0, 0.03, false, false),
        (5.0, 5.03, 2.0, 0.03, false, false),
        (0.5, 0.29, 0.2, 0.21, true, true),
        (4.0, 3.5, 3.5, 0.5, false, false),
        (4.0, 4.5, 3.5, 0.5, false, false),
        (1.2, 1.2, 0.0, 0.0, true, false),
        (0.31, 0.29, 3.5, 0.02, false, true),
        (2.5, 2.5, 3.5, 1e-9, false, false),
    ];
    let p = RewardParams::default();
    let mut worst: f64 = 0.0;
    for &(d0, d1, c, m, col, goal) in &cases {
        let prev = StepSnapshot { goal_distance: d0, min_clearance: 3.5, displacement: 0.05, collision: false, goal_reached: false };
        let curr = StepSnapshot { goal_distance: d1, min_clearance: c, displacement: m, collision: col, goal_reached: goal };
        let r = compute_reward(&prev, &curr, &p);
        worst = worst.max((r.total - reward_oracle(d0, d1, c, m, col, goal)).abs());
    }
    outcome(worst <= 1e-12, format!("20 cases, max |error| {worst:.1e}"))
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut worst, mut branch_mismatch, mut crossings) = (0.0f64, 0, 0);
    for _ in 0..1000 {
        let path = random_path(&mut rng);
        let p_r = Vec2::new(rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0));
        match (compute_subgoal(&path, p_r, 1.55), sampled_subgoal(&path, p_r, 1.55)) {
            (SubgoalQuery::Found(sg), Some((_, q))) => {
                crossings += 1;
                worst = worst.max(sg.point.dist(q));
            }
            (SubgoalQuery::NeedsReplan, None) => {}
            _ => branch_mismatch += 1,
        }
    }
    outcome(
        worst <= 2e-3 && branch_mismatch == 0,
        format!("1000 pairs ({crossings} with a subgoal), max offset {:.2} mm, branch mismatches {branch_mismatch}", worst * 1e3),
    )
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut compared, mut mismatches) = (0, 0);
    while compared < 100 {
        let grid = Arc::new(random_grid(&mut rng, 20, 0.1));
        let pg = inflate(grid.clone(), 0.1);
        let (Some(s), Some(g)) = (random_free_cell(&pg, &mut rng), random_free_cell(&pg, &mut rng)) else { continue };
        compared += 1;
        let astar = plan_astar(&pg, grid.cell_center(s), grid.cell_center(g)).ok().map(|p| p.cost());
        let oracle = dijkstra(&pg, s, g).map(|(a, b)| a as f64 * 0.1 + b as f64 * std::f64::consts::SQRT_2 * 0.1);
        if astar != oracle {
            mismatches += 1;
        }
    }
    outcome(mismatches == 0, format!("100 grids, {mismatches} cost mismatches"))
}

fn criterion_4() -> Outcome {
    let cfg = LossConfig { max_grad_norm: None, ..Default::default() };
    let worst = (0..5).map(|seed| max_relative_error(seed, &cfg)).fold(0.0, f64::max);
    outcome(worst < 1e-3, format!("5 seeds, max relative error {worst:.2e}"))
}

fn criterion_5() -> Outcome {
    let params = MapGenParams { width: 40, height: 40, walls: 2, static_obstacles: 3, ..MapGenParams::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut worst, mut beams) = (0.0f64, 0);
    for q in 0..1000u64 {
        let grid = generate_random_map(q / 50, &params).unwrap();
        let ext = grid.extent();
        let origin = loop {
            let p = Vec2::new(rng.random_range(0.0..ext.x), rng.random_range(0.0..ext.y));
            if !grid.is_occupied_at(p) {
                break p;
            }
        };
        let pose = Pose::new(origin.x, origin.y, rng.random_range(-3.14..3.14));
        let scan = raycast(&grid, &[], &pose, 36, 3.5);
        for (i, &r) in scan.ranges.iter().enumerate() {
            let angle = pose.theta + scan.beam_angle(i);
            let err = (r - marched_range(&grid, &[], origin, angle, 3.5)).abs();
            if err > 0.05 && grazes_corner(&grid, origin, angle, r) {
                continue;
            }
            beams += 1;
            worst = worst.max(err);
        }
    }
    outcome(worst <= 0.05, format!("1000 queries ({beams} beams), max |error| {:.2} mm", worst * 1e3))
}

struct Trained {
    params: Arc<nav_arena::NetworkParams>,
    detail: String,
}

fn train_policy() -> Result<Trained, String> {
    let steps = std::env::var("NAV_ARENA_ACCEPTANCE_STEPS").ok().and_then(|s| s.parse().ok()).unwrap_or(DEFAULT_TRAIN_STEPS);
    let cfg = TrainConfig {
        n_workers: 4,
        total_steps: steps,
        max_wall_time_s: Some(TRAIN_WALL_LIMIT_S),
        schedule: Schedule::Lockstep,
        ..TrainConfig::default()
    };
    let t = Instant::now();
    let out = a3c_train::<f32>(&cfg).map_err(|e| e.to_string())?;
    let params = out.params.cast::<f64>();
    if let Some(dir) = option_env!("CARGO_TARGET_TMPDIR") {
        let _ = nav_arena::drl::save_params(&params, Path::new(dir).join("acceptance.ckpt"));
    }
    Ok(Trained {
        params: Arc::new(params),
        detail: format!(
            "{} steps in {:.0} s, curriculum level {}, training success {:.2}",
            out.env_steps,
            t.elapsed().as_secs_f64(),
            out.curriculum_level,
            out.success_average
        ),
    })
}

fn scenario(name: &str) -> Scenario {
    default_matrix(100).into_iter().find(|s| s.name == name).expect("matrix scenario")
}

fn criterion_6(trained: &Trained) -> Outcome {
    let arena = PlannerSpec::arena(trained.params.clone(), Default::default());
    let out = run_suite(&[arena], &[scenario("obs05_v0.1")], &StackParams::default(), available()).unwrap();
    let row = &out.stats.rows[0];
    outcome(
        row.success_pct >= 90.0,
        format!("{}; greedy success {:.0}% over {} episodes (5 obstacles, 0.1 m/s)", trained.detail, row.success_pct, row.runs),
    )
}

fn criterion_7(trained: &Trained) -> Outcome {
    let planners = [PlannerSpec::arena(trained.params.clone(), Default::default()), PlannerSpec::dwa(DwaParams::default())];
    let out = run_suite(&planners, &[scenario("obs20_v0.3")], &StackParams::default(), available()).unwrap();
    let a = out.stats.get("arena", "obs20_v0.3").unwrap();
    let d = out.stats.get("dwa", "obs20_v0.3").unwrap();
    outcome(
        a.total_collisions < d.total_collisions && a.success_pct > d.success_pct,
        format!(
            "20 obstacles at 0.3 m/s, 100 runs: arena {} collisions / {:.0}% success, dwa {} / {:.0}%",
            a.total_collisions, a.success_pct, d.total_collisions, d.success_pct
        ),
    )
}

fn available() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn cli(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_nav-arena")).args(args).output().map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)))
    }
}

fn criterion_8() -> Outcome {
    let run = || -> Result<(bool, bool), String> {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let d = dir.path();
        let p = |name: &str| d.join(name).to_str().unwrap().to_owned();
        let suite = d.join("suite.toml");
        std::fs::write(
            &suite,
            "planners = [\"arena\", \"dwa\"]\n[[scenario]]\nname = \"det\"\nn_obstacles = 10\nv_obs = 0.2\nrepeats = 4\ntimeout_s = 90.0\n",
        )
        .map_err(|e| e.to_string())?;
        cli(&["train", "--workers", "1", "--steps", "4000", "--seed", "8", "--out", &p("a.ckpt")])?;
        cli(&["train", "--workers", "1", "--steps", "4000", "--seed", "8", "--out", &p("b.ckpt")])?;
        for out in ["eval_a", "eval_b"] {
            cli(&["evaluate", "--suite", suite.to_str().unwrap(), "--checkpoint", &p("a.ckpt"), "--out-dir", &p(out)])?;
        }
        let read = |f: &str| std::fs::read(d.join(f)).unwrap_or_default();
        let ckpt_same = !read("a.ckpt").is_empty() && read("a.ckpt") == read("b.ckpt");
        let csv_same = !read("eval_a/runs.csv").is_empty() && read("eval_a/runs.csv") == read("eval_b/runs.csv");
        Ok((ckpt_same, csv_same))
    };
    match run() {
        Ok((ckpt, csv)) => outcome(ckpt && csv, format!("checkpoints identical: {ckpt}; evaluate CSVs identical: {csv}")),
        Err(e) => outcome(false, e),
    }
}

fn criterion_9() -> Outcome {
    let grid = Arc::new(OccupancyGrid::empty(100, 100, 0.1).unwrap());
    let pg = inflate(grid.clone(), 0.35);
    let params = HorizonParams::default();
    let start = Pose::new(2.0, 2.0, 0.0);
    let goal = Vec2::new(8.0, 2.0);
    let cfg = WorldConfig::default();
    let dt = cfg.dt;

    // Held stationary for 4.5 s.
    let mut world = World::new(grid.clone(), cfg.clone(), start, Vec::new()).unwrap();
    let mut state = SubgoalState::new(plan_astar(&pg, start.position(), goal).unwrap(), 0.0);
    let mut first_replan_at = None;
    while world.time() < 4.5 - 1e-9 {
        update(&mut state, &world.robot, &pg, goal, &params, world.time()).unwrap();
        if state.replan_count > 0 && first_replan_at.is_none() {
            first_replan_at = Some(world.time());
        }
        world.step(nav_arena::world::Action { v: 0.0, omega: 0.0 });
    }
    let stuck_replans = state.replan_count;
    let stuck_ok = stuck_replans == 1 && first_replan_at.is_some_and(|t| t > 4.0 && t <= 4.0 + dt + 1e-9);

    // Driven along the path, then teleported 2 m sideways.
    let mut world = World::new(grid, cfg, start, Vec::new()).unwrap();
    let mut state = SubgoalState::new(plan_astar(&pg, start.position(), goal).unwrap(), 0.0);
    for _ in 0..10 {
        update(&mut state, &world.robot, &pg, goal, &params, world.time()).unwrap();
        world.step(nav_arena::world::Action { v: 0.5, omega: 0.0 });
    }
    let before = state.replan_count;
    let p = world.robot.position();
    world.teleport(Pose::new(p.x, p.y + 2.0, 0.0));
    update(&mut state, &world.robot, &pg, goal, &params, world.time()).unwrap();
    let here = world.robot.position();
    let off_ok = before == 0 && state.replan_count == 1 && state.path.start().dist(here) < 1e-9;

    outcome(
        stuck_ok && off_ok,
        format!(
            "stationary: {} replan(s), first at {:?} s; teleported: {} replan(s), new path starts {:.1e} m from the robot",
            stuck_replans,
            first_replan_at,
            state.replan_count - before,
            state.path.start().dist(here)
        ),
    )
}

fn main() {
    // `cargo test -- --list` and filters: there are no individual tests to list.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let s = Duration::from_secs;
    let mut results: Vec<(usize, Outcome, Duration)> = Vec::new();
    let mut record = |n: usize, (o, d): (Outcome, Duration)| {
        println!("criterion {n}: {} ({:.1} s) {}", if o.pass { "PASS" } else { "FAIL" }, d.as_secs_f64(), o.detail);
        results.push((n, o, d));
    };
    record(1, timed(Some(s(1)), criterion_1));
    record(2, timed(Some(s(30)), criterion_2));
    record(3, timed(Some(s(10)), criterion_3));
    record(4, timed(Some(s(60)), criterion_4));
    record(5, timed(Some(s(30)), criterion_5));

    let skip = std::env::var("NAV_ARENA_ACCEPTANCE_SKIP_TRAINING").is_ok_and(|v| v == "1");
    let trained = if skip { Err("training skipped by NAV_ARENA_ACCEPTANCE_SKIP_TRAINING".to_owned()) } else { train_policy() };
    match &trained {
        Ok(t) => {
            record(6, timed(None, || criterion_6(t)));
            record(7, timed(None, || criterion_7(t)));
        }
        Err(e) => {
            record(6, (outcome(false, e.clone()), Duration::ZERO));
            record(7, (outcome(false, e.clone()), Duration::ZERO));
        }
    }
    record(8, timed(Some(s(300)), criterion_8));
    record(9, timed(Some(s(10)), criterion_9));

    let failed: Vec<usize> = results.iter().filter(|(_, o, _)| !o.pass).map(|(n, _, _)| *n).collect();
    if failed.is_empty() {
        println!("acceptance: all 9 criteria pass");
    } else {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}
