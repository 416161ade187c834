use std::f64::consts::FRAC_PI_4;
use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::geometry::{Pose, Vec2};
use crate::planning::{inflate, PlannerGrid};
use crate::world::{generate_random_map, MapGenParams, MotionKind, OccupancyGrid};

use super::BenchError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MapSource {
    /// Border-only map; sizes in meters.
    Empty { width: f64, height: f64, resolution: f64 },
    File { path: PathBuf },
    Generated { seed: u64, #[serde(default)] params: MapGenParams },
}

impl Default for MapSource {
    fn default() -> Self {
        Self::Empty { width: 12.0, height: 12.0, resolution: 0.1 }
    }
}

impl MapSource {
    pub fn load(&self) -> Result<OccupancyGrid, BenchError> {
        Ok(match self {
            Self::Empty { width, height, resolution } => {
                let cells = |m: f64| (m / resolution).round() as usize;
                OccupancyGrid::empty(cells(*width), cells(*height), *resolution)?
            }
            Self::File { path } => OccupancyGrid::load(path)?,
            Self::Generated { seed, params } => generate_random_map(*seed, params)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Scenario {
    pub name: String,
    pub map: MapSource,
    pub n_obstacles: usize,
    pub v_obs: f64,
    pub motion: MotionKind,
    pub obstacle_radius: f64,
    pub start: Pose,
    pub goal: Vec2,
    pub repeats: usize,
    pub seed_base: u64,
    /// Simulated seconds.
    pub timeout_s: f64,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            name: "default".into(),
            map: MapSource::default(),
            n_obstacles: 0,
            v_obs: 0.1,
            motion: MotionKind::LinearBounce,
            obstacle_radius: 0.3,
            start: Pose::new(1.5, 1.5, FRAC_PI_4),
            goal: Vec2::new(10.5, 10.5),
            repeats: 100,
            seed_base: 1000,
            timeout_s: 180.0,
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |reason: &str| Err(BenchError::InvalidScenario { name: self.name.clone(), reason: reason.into() });
        if self.name.is_empty() {
            return bad("empty name");
        }
        if !(self.v_obs >= 0.0) || !self.v_obs.is_finite() {
            return bad("v_obs must be non-negative");
        }
        if self.repeats < 1 {
            return bad("repeats must be at least 1");
        }
        if !(self.timeout_s > 0.0) || !(self.obstacle_radius > 0.0) {
            return bad("timeout and obstacle radius must be positive");
        }
        Ok(())
    }

    /// Loads the map and its inflated planning grid.
    pub fn prepare(&self, inflation: f64) -> Result<PreparedScenario, BenchError> {
        self.validate()?;
        let grid = Arc::new(self.map.load()?);
        for (what, p) in [("start", self.start.position()), ("goal", self.goal)] {
            if grid.is_occupied_at(p) {
                return Err(BenchError::InvalidScenario {
                    name: self.name.clone(),
                    reason: format!("{what} ({:.2}, {:.2}) is outside the map or inside an obstacle", p.x, p.y),
                });
            }
        }
        let planner_grid = Arc::new(inflate(grid.clone(), inflation));
        Ok(PreparedScenario { scenario: self.clone(), grid, planner_grid })
    }
}

/// A scenario with its map loaded once for all runs.
#[derive(Debug, Clone)]
pub struct PreparedScenario {
    pub scenario: Scenario,
    pub grid: Arc<OccupancyGrid>,
    pub planner_grid: Arc<PlannerGrid>,
}

/// {5, 10, 20} obstacles × {0.1, 0.2, 0.3} m/s on the default empty map.
pub fn default_matrix(repeats: usize) -> Vec<Scenario> {
    let mut out = Vec::new();
    for n in [5, 10, 20] {
        for v in [0.1, 0.2, 0.3] {
            out.push(Scenario { name: format!("obs{n:02}_v{v:.1}"), n_obstacles: n, v_obs: v, repeats, ..Default::default() });
        }
    }
    out
}

/// Suite definition file: planner names plus scenarios, optionally
/// starting from the default matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteFile {
    pub planners: Vec<String>,
    /// Overrides every scenario's repeat count.
    pub repeats: Option<usize>,
    pub default_matrix: bool,
    #[serde(rename = "scenario")]
    pub scenarios: Vec<Scenario>,
}

impl Default for SuiteFile {
    fn default() -> Self {
        Self { planners: vec!["arena".into(), "dwa".into()], repeats: None, default_matrix: false, scenarios: Vec::new() }
    }
}

impl SuiteFile {
    pub fn parse(text: &str) -> Result<Self, BenchError> {
        toml::from_str(text).map_err(|e| BenchError::Format(e.to_string()))
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self, BenchError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::Io(path.display().to_string(), e))?;
        Self::parse(&text)
    }

    /// The scenario list with the repeat override applied.
    pub fn resolve(&self) -> Vec<Scenario> {
        let mut out = if self.default_matrix { default_matrix(100) } else { Vec::new() };
        out.extend(self.scenarios.iter().cloned());
        if let Some(r) = self.repeats {
            out.iter_mut().for_each(|s| s.repeats = r);
        }
        out
    }
}
