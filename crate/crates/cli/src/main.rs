//! `nav-arena`: map generation, training, evaluation, replay rendering
//! and artifact inspection.

mod config;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::error::ErrorKind;
use clap::{CommandFactory, Parser, Subcommand, ValueEnum};
use nav_arena::benchmark::{
    export_csv, export_svg, format_relative, format_stats, read_jsonl, relative_performance, run_suite, write_jsonl,
    PlannerSpec, RunResult, SuiteFile,
};
use nav_arena::drl::{a3c_train, load_params, save_params, Schedule, TrainOutcome};
use nav_arena::world::{generate_random_map, MapGenParams, OccupancyGrid};
use nav_arena::Real;

use config::{FileConfig, RunManifest};

#[derive(Debug, Parser)]
#[command(name = "nav-arena", version, about = "Hierarchical 2D navigation workbench")]
struct Cli {
    /// TOML configuration file; flags take precedence over it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a random occupancy map.
    GenMap(GenMapArgs),
    /// Train the policy with A3C.
    Train(TrainArgs),
    /// Run a benchmark suite.
    Evaluate(EvaluateArgs),
    /// Render recorded runs to SVG.
    Replay(ReplayArgs),
    /// Summarize a checkpoint, map or run-record file.
    Inspect(InspectArgs),
}

fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected WxH, got {s:?}"))?;
    let w: usize = w.trim().parse().map_err(|e| format!("width: {e}"))?;
    let h: usize = h.trim().parse().map_err(|e| format!("height: {e}"))?;
    if w < 3 || h < 3 {
        return Err(format!("map must be at least 3x3 cells, got {w}x{h}"));
    }
    Ok((w, h))
}

#[derive(Debug, clap::Args)]
struct GenMapArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Size in cells, e.g. 100x100.
    #[arg(long, value_parser = parse_size, default_value = "100x100")]
    size: (usize, usize),
    /// Cell size in meters.
    #[arg(long, default_value_t = 0.1)]
    resolution: f64,
    /// Number of rectangular static obstacles.
    #[arg(long = "static", default_value_t = 4)]
    static_obstacles: usize,
    #[arg(long, default_value_t = 3)]
    walls: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Precision {
    F32,
    F64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScheduleArg {
    Lockstep,
    Async,
}

#[derive(Debug, clap::Args)]
struct TrainArgs {
    /// Checkpoint output path.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    workers: Option<usize>,
    /// Environment step budget summed over workers.
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Stop after this many wall-clock seconds.
    #[arg(long)]
    wall_time: Option<f64>,
    #[arg(long, value_enum)]
    schedule: Option<ScheduleArg>,
    /// Arithmetic used during training; checkpoints always store f64.
    #[arg(long, value_enum, default_value = "f32")]
    precision: Precision,
    /// Training log CSV; defaults to `<out>.log.csv`.
    #[arg(long)]
    log: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
struct EvaluateArgs {
    /// Suite definition; defaults to the 9-scenario matrix with both planners.
    #[arg(long)]
    suite: Option<PathBuf>,
    /// Comma-separated planner names (arena, dwa); overrides the suite file.
    #[arg(long, value_delimiter = ',')]
    planners: Option<Vec<String>>,
    /// Required when the arena planner is selected.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[arg(long)]
    out_dir: PathBuf,
    /// Worker threads; defaults to the available processors.
    #[arg(long)]
    parallel: Option<usize>,
    /// Overrides every scenario's repeat count.
    #[arg(long)]
    repeats: Option<usize>,
    /// Shifts every scenario's seed base.
    #[arg(long)]
    seed: Option<u64>,
    /// Reference planner of the relative table; defaults to the first one.
    #[arg(long)]
    reference: Option<String>,
}

#[derive(Debug, clap::Args)]
struct ReplayArgs {
    /// JSONL run-record file written by `evaluate`.
    #[arg(long)]
    record: PathBuf,
    #[arg(long)]
    map: Option<PathBuf>,
    #[arg(long)]
    planner: Option<String>,
    #[arg(long)]
    scenario: Option<String>,
    /// Single run index; all matching runs are overlaid when omitted.
    #[arg(long)]
    run: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, clap::Args)]
struct InspectArgs {
    #[arg(long, group = "what")]
    checkpoint: Option<PathBuf>,
    #[arg(long, group = "what")]
    map: Option<PathBuf>,
    #[arg(long, group = "what")]
    record: Option<PathBuf>,
}

fn usage_error(kind: ErrorKind, msg: impl std::fmt::Display) -> ! {
    Cli::command().error(kind, msg).exit()
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("NAV_ARENA_LOG", "warn")).init();
    let cli = Cli::parse();
    let file = FileConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::GenMap(a) => gen_map(a),
        Command::Train(a) => train(a, &file),
        Command::Evaluate(a) => evaluate(a, &file),
        Command::Replay(a) => replay(a),
        Command::Inspect(a) => inspect(a),
    }
}

fn gen_map(a: GenMapArgs) -> Result<()> {
    let params = MapGenParams {
        width: a.size.0,
        height: a.size.1,
        resolution: a.resolution,
        walls: a.walls,
        static_obstacles: a.static_obstacles,
        ..MapGenParams::default()
    };
    let grid = generate_random_map(a.seed, &params)?;
    grid.save(&a.out)?;
    print_grid_stats(&grid);
    Ok(())
}

fn print_grid_stats(grid: &OccupancyGrid) {
    let (sizes, _) = grid.free_components();
    let ext = grid.extent();
    println!("size {}x{} cells, resolution {} m ({:.2} x {:.2} m)", grid.width(), grid.height(), grid.resolution(), ext.x, ext.y);
    println!(
        "free cells {} of {}, {} free components, largest {}",
        grid.free_count(),
        grid.width() * grid.height(),
        sizes.len(),
        sizes.iter().max().copied().unwrap_or(0)
    );
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(suffix);
    PathBuf::from(s)
}

fn train(a: TrainArgs, file: &FileConfig) -> Result<()> {
    let mut cfg = file.train_config();
    if let Some(w) = a.workers {
        cfg.n_workers = w;
    }
    if let Some(s) = a.steps {
        cfg.total_steps = s;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(t) = a.wall_time {
        cfg.max_wall_time_s = Some(t);
    }
    if let Some(s) = a.schedule {
        cfg.schedule = match s {
            ScheduleArg::Lockstep => Schedule::Lockstep,
            ScheduleArg::Async => Schedule::Async,
        };
    }
    cfg.validate()?;
    let log_path = a.log.unwrap_or_else(|| sibling(&a.out, ".log.csv"));
    let manifest_path = sibling(&a.out, ".manifest.json");
    let manifest = RunManifest::start("train", cfg.seed, &cfg, vec![a.out.clone(), log_path.clone()], &manifest_path)?;

    log::info!("training: {} workers, {} steps, seed {}, {:?}", cfg.n_workers, cfg.total_steps, cfg.seed, a.precision);
    let (summary, log) = match a.precision {
        Precision::F32 => finish_training(a3c_train::<f32>(&cfg), &a.out)?,
        Precision::F64 => finish_training(a3c_train::<f64>(&cfg), &a.out)?,
    };
    log.save_csv(&log_path)?;
    manifest.finish("ok", &manifest_path)?;
    println!("{summary}");
    Ok(())
}

fn finish_training<T: Real>(
    result: Result<TrainOutcome<T>, nav_arena::drl::DrlError>,
    out: &Path,
) -> Result<(String, nav_arena::drl::TrainLog)> {
    let outcome = match result {
        Ok(o) => o,
        Err(nav_arena::drl::DrlError::WorkerCrashed { worker, message, log }) => {
            let partial = sibling(out, ".partial.log.csv");
            log.save_csv(&partial)?;
            bail!("worker {worker} failed: {message}; partial log in {}", partial.display());
        }
        Err(e) => return Err(e.into()),
    };
    save_params(&outcome.params, out)?;
    let summary = format!(
        "steps {} updates {} episodes {} stop {:?}; curriculum level {} success moving average {:.3}",
        outcome.env_steps,
        outcome.updates,
        outcome.log.episodes.len(),
        outcome.stop,
        outcome.curriculum_level,
        outcome.success_average
    );
    Ok((summary, outcome.log))
}

fn evaluate(a: EvaluateArgs, file: &FileConfig) -> Result<()> {
    let suite = match &a.suite {
        Some(p) => SuiteFile::load(p)?,
        None => SuiteFile { default_matrix: true, ..SuiteFile::default() },
    };
    let planner_names = a.planners.clone().unwrap_or_else(|| suite.planners.clone());
    if planner_names.is_empty() {
        usage_error(ErrorKind::InvalidValue, "no planners selected");
    }
    let mut scenarios = suite.resolve();
    if scenarios.is_empty() {
        usage_error(ErrorKind::InvalidValue, "the suite defines no scenarios");
    }
    for s in &mut scenarios {
        if let Some(r) = a.repeats {
            s.repeats = r;
        }
        if let Some(seed) = a.seed.or(file.seed) {
            s.seed_base = s.seed_base.wrapping_add(seed);
        }
    }

    let mut planners = Vec::new();
    for name in &planner_names {
        planners.push(match name.as_str() {
            "dwa" => PlannerSpec::dwa(file.dwa()),
            "arena" => {
                let Some(ckpt) = &a.checkpoint else {
                    usage_error(ErrorKind::MissingRequiredArgument, "--checkpoint is required for the arena planner")
                };
                let params = load_params::<f64>(ckpt).with_context(|| format!("loading {}", ckpt.display()))?;
                PlannerSpec::arena(Arc::new(params), file.train.actions.clone())
            }
            other => usage_error(ErrorKind::InvalidValue, format!("unknown planner {other:?} (expected arena or dwa)")),
        });
    }

    std::fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    let csv_path = a.out_dir.join("runs.csv");
    let jsonl_path = a.out_dir.join("runs.jsonl");
    let stats_path = a.out_dir.join("stats.json");
    let manifest_path = a.out_dir.join("manifest.json");
    let parallel = a.parallel.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let config = serde_json::json!({
        "planners": planner_names,
        "scenarios": scenarios,
        "checkpoint": a.checkpoint,
        "parallel": parallel,
        "stack": file.stack(),
        "dwa": file.dwa(),
    });
    let manifest = RunManifest::start(
        "evaluate",
        a.seed.or(file.seed).unwrap_or(0),
        &config,
        vec![csv_path.clone(), jsonl_path.clone(), stats_path.clone()],
        &manifest_path,
    )?;

    let stack = file.stack();
    log::info!("evaluating {} planners on {} scenarios with {parallel} threads", planners.len(), scenarios.len());
    let out = run_suite(&planners, &scenarios, &stack, parallel)?;
    export_csv(&out.records, &csv_path)?;
    write_jsonl(&out.records, &jsonl_path)?;
    for s in &scenarios {
        let grid = s.map.load()?;
        let runs: Vec<RunResult> = out.records.iter().filter(|r| r.scenario == s.name).cloned().collect();
        export_svg(&runs, Some(&grid), a.out_dir.join(format!("{}.svg", s.name)))?;
        grid.save(a.out_dir.join(format!("{}.map", s.name)))?;
    }
    std::fs::write(&stats_path, serde_json::to_string_pretty(&out.stats)? + "\n")?;
    print!("{}", format_stats(&out.stats));
    let reference = a.reference.clone().unwrap_or_else(|| planner_names[0].clone());
    let rel = relative_performance(&out.stats, &reference)?;
    println!();
    print!("{}", format_relative(&rel));
    let failures = out.records.iter().filter(|r| r.error.is_some()).count();
    if failures > 0 {
        println!("{failures} runs ended with a planner failure (see runs.jsonl)");
    }
    manifest.finish("ok", &manifest_path)
}

fn replay(a: ReplayArgs) -> Result<()> {
    let records = read_jsonl(&a.record)?;
    let selected: Vec<RunResult> = records
        .into_iter()
        .filter(|r| a.planner.as_ref().is_none_or(|p| &r.planner == p))
        .filter(|r| a.scenario.as_ref().is_none_or(|s| &r.scenario == s))
        .filter(|r| a.run.is_none_or(|i| r.run == i))
        .collect();
    if selected.is_empty() {
        match a.run {
            Some(id) => bail!("no run {id} matches the selection in {}", a.record.display()),
            None => bail!("no runs match the selection in {}", a.record.display()),
        }
    }
    let grid = a.map.as_ref().map(OccupancyGrid::load).transpose()?;
    export_svg(&selected, grid.as_ref(), &a.out)?;
    println!("rendered {} runs to {}", selected.len(), a.out.display());
    Ok(())
}

fn inspect(a: InspectArgs) -> Result<()> {
    if let Some(p) = a.checkpoint {
        let params = load_params::<f64>(&p)?;
        let s = params.shape();
        println!("checkpoint {}", p.display());
        println!("layers: input {} -> fc {} -> fc {} -> gru {} -> {} actions + value", s.input, s.fc1, s.fc2, s.hidden, s.actions);
        println!("parameters {} (l2 norm {:.4})", s.param_count(), params.l2_norm());
    } else if let Some(p) = a.map {
        print_grid_stats(&OccupancyGrid::load(&p)?);
    } else if let Some(p) = a.record {
        let records = read_jsonl(&p)?;
        println!("{} runs", records.len());
        let rows: Vec<_> = records.iter().map(nav_arena::benchmark::RunRow::from).collect();
        print!("{}", format_stats(&nav_arena::benchmark::AggregateStats::from_rows(&rows)));
    } else {
        usage_error(ErrorKind::MissingRequiredArgument, "one of --checkpoint, --map or --record is required");
    }
    Ok(())
}
