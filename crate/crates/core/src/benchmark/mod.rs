//! Scenario execution with collision, timing and path metrics, suite
//! aggregation, relative performance, and CSV/JSONL/SVG export.

mod episode;
mod export;
mod report;
mod scenario;
mod suite;

pub use episode::{is_success, run_episode, PlannerKind, PlannerSpec, RunResult, StackParams};
pub use export::{export_csv, export_svg, read_csv, read_jsonl, render_svg, write_csv, write_jsonl, RunRow};
pub use report::{format_relative, format_stats, relative_performance, AggregateRow, AggregateStats, RelativeRow, RelativeTable, RATIO_CAP};
pub use scenario::{default_matrix, MapSource, PreparedScenario, Scenario, SuiteFile};
pub use suite::{run_suite, SuiteResult};

use thiserror::Error;

use crate::drl::DrlError;
use crate::world::WorldError;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid scenario {name:?}: {reason}")]
    InvalidScenario { name: String, reason: String },
    #[error("no planners selected")]
    NoPlanners,
    #[error("no scenarios selected")]
    NoScenarios,
    #[error("reference planner {0:?} not present in the results")]
    MissingReference(String),
    #[error("no run records to render")]
    EmptyRecords,
    #[error("{0}: {1}")]
    Io(String, #[source] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("suite file: {0}")]
    Format(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Drl(#[from] DrlError),
    #[error("thread pool: {0}")]
    Pool(String),
}
