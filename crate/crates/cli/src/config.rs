//! Configuration file and run manifest.
//!
//! Precedence: command-line flags override the config file, which
//! overrides built-in defaults.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use nav_arena::benchmark::StackParams;
use nav_arena::drl::TrainConfig;
use nav_arena::local::DwaParams;
use nav_arena::planning::HorizonParams;
use nav_arena::world::WorldConfig;
use serde::{Deserialize, Serialize};

/// Settings of the benchmark harness other than the world and horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchmarkSection {
    pub inflation: Option<f64>,
    pub trajectory_stride: usize,
    pub obstacle_trace_runs: usize,
    pub spawn_clearance: f64,
}

impl Default for BenchmarkSection {
    fn default() -> Self {
        let s = StackParams::default();
        Self {
            inflation: None,
            trajectory_stride: s.trajectory_stride,
            obstacle_trace_runs: s.obstacle_trace_runs,
            spawn_clearance: s.spawn_clearance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    /// Root seed shared by every component.
    pub seed: Option<u64>,
    pub world: WorldConfig,
    pub horizon: HorizonParams,
    pub dwa: DwaParams,
    pub train: TrainConfig,
    pub benchmark: BenchmarkSection,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig { world: self.world.clone(), seed: self.seed.unwrap_or(self.train.seed), ..self.train.clone() }
    }

    pub fn stack(&self) -> StackParams {
        let b = &self.benchmark;
        StackParams {
            world: self.world.clone(),
            horizon: self.horizon,
            inflation: b.inflation.unwrap_or(self.world.robot_radius + 0.05),
            trajectory_stride: b.trajectory_stride,
            obstacle_trace_runs: b.obstacle_trace_runs,
            spawn_clearance: b.spawn_clearance,
            ..StackParams::default()
        }
    }

    /// DWA limits follow the world's robot.
    pub fn dwa(&self) -> DwaParams {
        DwaParams {
            v_max: self.world.v_max,
            omega_max: self.world.omega_max,
            robot_radius: self.world.robot_radius,
            dt: self.world.dt,
            ..self.dwa
        }
    }
}

fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

/// Record of one invocation, written before the work starts and
/// rewritten when it ends.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub artifacts: Vec<PathBuf>,
    pub started_unix_s: f64,
    pub finished_unix_s: Option<f64>,
    pub status: String,
}

impl RunManifest {
    pub fn start(command: &str, seed: u64, config: &impl Serialize, artifacts: Vec<PathBuf>, path: &Path) -> Result<Self> {
        let m = Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed,
            config: serde_json::to_value(config)?,
            artifacts,
            started_unix_s: unix_now(),
            finished_unix_s: None,
            status: "running".into(),
        };
        m.write(path)?;
        Ok(m)
    }

    pub fn finish(mut self, status: &str, path: &Path) -> Result<()> {
        self.finished_unix_s = Some(unix_now());
        self.status = status.into();
        self.write(path)
    }

    fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").with_context(|| format!("writing manifest {}", path.display()))
    }
}
