use rayon::prelude::*;

use super::episode::{run_episode, PlannerSpec, RunResult, StackParams};
use super::export::RunRow;
use super::report::AggregateStats;
use super::scenario::{PreparedScenario, Scenario};
use super::BenchError;

#[derive(Debug, Clone)]
pub struct SuiteResult {
    /// Planner-major, then scenario, then run index.
    pub records: Vec<RunResult>,
    pub stats: AggregateStats,
}

/// Runs every planner on every scenario repeat using `parallelism`
/// threads. Run `i` of a scenario uses seed `seed_base + i` for every
/// planner, so all planners face identical obstacle motion.
pub fn run_suite(
    planners: &[PlannerSpec],
    scenarios: &[Scenario],
    stack: &StackParams,
    parallelism: usize,
) -> Result<SuiteResult, BenchError> {
    if planners.is_empty() {
        return Err(BenchError::NoPlanners);
    }
    if scenarios.is_empty() {
        return Err(BenchError::NoScenarios);
    }
    let prepared: Vec<PreparedScenario> = scenarios.iter().map(|s| s.prepare(stack.inflation)).collect::<Result<_, _>>()?;
    let jobs: Vec<(&PlannerSpec, &PreparedScenario, usize)> = planners
        .iter()
        .flat_map(|p| prepared.iter().flat_map(move |s| (0..s.scenario.repeats).map(move |i| (p, s, i))))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| BenchError::Pool(e.to_string()))?;
    let records: Vec<RunResult> = pool.install(|| jobs.par_iter().map(|&(p, s, i)| run_episode(p, s, stack, i)).collect());
    let rows: Vec<RunRow> = records.iter().map(RunRow::from).collect();
    Ok(SuiteResult { stats: AggregateStats::from_rows(&rows), records })
}
