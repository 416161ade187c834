use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::export::RunRow;
use super::BenchError;

/// Saturation value for ratios whose denominator is zero.
pub const RATIO_CAP: f64 = 10.0;

/// Metrics of one (planner, scenario) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub planner: String,
    pub scenario: String,
    pub runs: usize,
    pub reached: usize,
    pub successes: usize,
    pub timeouts: usize,
    /// Mean over runs that reached the goal.
    pub mean_time_s: Option<f64>,
    pub mean_path_m: Option<f64>,
    pub total_collisions: usize,
    pub mean_collisions: f64,
    pub success_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AggregateStats {
    /// In order of first appearance of each (planner, scenario) pair.
    pub rows: Vec<AggregateRow>,
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

fn aggregate(planner: &str, scenario: &str, runs: &[&RunRow]) -> AggregateRow {
    let reached: Vec<&&RunRow> = runs.iter().filter(|r| r.reached_goal).collect();
    let total_collisions: usize = runs.iter().map(|r| r.collisions).sum();
    let successes = runs.iter().filter(|r| r.success).count();
    AggregateRow {
        planner: planner.to_string(),
        scenario: scenario.to_string(),
        runs: runs.len(),
        reached: reached.len(),
        successes,
        timeouts: runs.iter().filter(|r| r.timeout).count(),
        mean_time_s: mean(&reached.iter().map(|r| r.time_s).collect::<Vec<_>>()),
        mean_path_m: mean(&reached.iter().map(|r| r.path_m).collect::<Vec<_>>()),
        total_collisions,
        mean_collisions: total_collisions as f64 / runs.len().max(1) as f64,
        success_pct: 100.0 * successes as f64 / runs.len().max(1) as f64,
    }
}

impl AggregateStats {
    pub fn from_rows(rows: &[RunRow]) -> Self {
        let mut order: Vec<(String, String)> = Vec::new();
        let mut groups: BTreeMap<(String, String), Vec<&RunRow>> = BTreeMap::new();
        for r in rows {
            let key = (r.planner.clone(), r.scenario.clone());
            let g = groups.entry(key.clone()).or_default();
            if g.is_empty() {
                order.push(key);
            }
            g.push(r);
        }
        Self { rows: order.iter().map(|k| aggregate(&k.0, &k.1, &groups[k])).collect() }
    }

    pub fn planners(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.planner) {
                out.push(r.planner.clone());
            }
        }
        out
    }

    pub fn get(&self, planner: &str, scenario: &str) -> Option<&AggregateRow> {
        self.rows.iter().find(|r| r.planner == planner && r.scenario == scenario)
    }
}

/// Overall metrics of one planner expressed against the reference.
/// Every ratio is oriented so that values above 1 are better than the
/// reference: `reference / planner` for time, path and collisions,
/// `planner / reference` for success.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelativeRow {
    pub planner: String,
    pub time_ratio: f64,
    pub path_ratio: f64,
    pub collision_ratio: f64,
    pub success_ratio: f64,
    /// Sum of the four ratios in percent.
    pub overall_pct: f64,
    /// Names of ratios clamped at [`RATIO_CAP`] because of a zero denominator.
    pub saturated: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelativeTable {
    pub reference: String,
    pub rows: Vec<RelativeRow>,
}

struct Overall {
    time: f64,
    path: f64,
    collisions: f64,
    success: f64,
}

fn overall(stats: &AggregateStats, planner: &str) -> Overall {
    let rows: Vec<&AggregateRow> = stats.rows.iter().filter(|r| r.planner == planner).collect();
    let weighted = |f: fn(&AggregateRow) -> Option<f64>| {
        let (sum, n) = rows
            .iter()
            .filter_map(|r| f(r).map(|m| (m * r.reached as f64, r.reached)))
            .fold((0.0, 0usize), |(s, n), (v, k)| (s + v, n + k));
        if n == 0 { 0.0 } else { sum / n as f64 }
    };
    let runs: usize = rows.iter().map(|r| r.runs).sum();
    Overall {
        time: weighted(|r| r.mean_time_s),
        path: weighted(|r| r.mean_path_m),
        collisions: rows.iter().map(|r| r.total_collisions).sum::<usize>() as f64,
        success: 100.0 * rows.iter().map(|r| r.successes).sum::<usize>() as f64 / runs.max(1) as f64,
    }
}

fn ratio(num: f64, den: f64, name: &str, saturated: &mut Vec<String>) -> f64 {
    if den == 0.0 {
        if num == 0.0 {
            return 1.0;
        }
        saturated.push(name.to_string());
        return RATIO_CAP;
    }
    (num / den).min(RATIO_CAP)
}

pub fn relative_performance(stats: &AggregateStats, reference: &str) -> Result<RelativeTable, BenchError> {
    if !stats.rows.iter().any(|r| r.planner == reference) {
        return Err(BenchError::MissingReference(reference.to_string()));
    }
    let rf = overall(stats, reference);
    let rows = stats
        .planners()
        .into_iter()
        .map(|planner| {
            let p = overall(stats, &planner);
            let mut saturated = Vec::new();
            let time_ratio = ratio(rf.time, p.time, "time", &mut saturated);
            let path_ratio = ratio(rf.path, p.path, "path", &mut saturated);
            let collision_ratio = ratio(rf.collisions, p.collisions, "collisions", &mut saturated);
            let success_ratio = ratio(p.success, rf.success, "success", &mut saturated);
            let overall_pct = 100.0 * (time_ratio + path_ratio + collision_ratio + success_ratio);
            RelativeRow { planner, time_ratio, path_ratio, collision_ratio, success_ratio, overall_pct, saturated }
        })
        .collect();
    Ok(RelativeTable { reference: reference.to_string(), rows })
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.2}"))
}

/// Plain-text table: one row per (planner, scenario).
pub fn format_stats(stats: &AggregateStats) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<10} {:<14} {:>5} {:>9} {:>9} {:>10} {:>9} {:>9}",
        "planner", "scenario", "runs", "time_s", "path_m", "collisions", "mean_col", "success%"
    );
    for r in &stats.rows {
        let _ = writeln!(
            s,
            "{:<10} {:<14} {:>5} {:>9} {:>9} {:>10} {:>9.2} {:>9.1}",
            r.planner,
            r.scenario,
            r.runs,
            opt(r.mean_time_s),
            opt(r.mean_path_m),
            r.total_collisions,
            r.mean_collisions,
            r.success_pct
        );
    }
    s
}

pub fn format_relative(t: &RelativeTable) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "relative to {} (>1 is better; time/path/collisions as reference/planner, success as planner/reference)", t.reference);
    let _ = writeln!(s, "{:<10} {:>8} {:>8} {:>10} {:>8} {:>9}  saturated", "planner", "time", "path", "collisions", "success", "overall%");
    for r in &t.rows {
        let _ = writeln!(
            s,
            "{:<10} {:>8.3} {:>8.3} {:>10.3} {:>8.3} {:>9.1}  {}",
            r.planner,
            r.time_ratio,
            r.path_ratio,
            r.collision_ratio,
            r.success_ratio,
            r.overall_pct,
            r.saturated.join(",")
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(planner: &str, run: usize, collisions: usize, reached: bool) -> RunRow {
        RunRow {
            planner: planner.into(),
            scenario: "s".into(),
            run,
            time_s: 40.0 + run as f64,
            path_m: 13.0,
            collisions,
            reached_goal: reached,
            success: reached && collisions < 2,
            timeout: !reached,
            replans: 0,
        }
    }

    #[test]
    fn aggregates() {
        let rows = vec![row("a", 0, 0, true), row("a", 1, 1, true), row("a", 2, 3, false)];
        let s = AggregateStats::from_rows(&rows);
        let r = &s.rows[0];
        assert_eq!((r.runs, r.reached, r.successes, r.total_collisions), (3, 2, 2, 4));
        assert_eq!(r.mean_time_s, Some(40.5));
        assert!((r.success_pct - 200.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn identity_and_halving() {
        let mut rows: Vec<RunRow> = (0..4).map(|i| row("ref", i, 1, true)).collect();
        rows.extend((0..4).map(|i| row("other", i, 2, true)));
        let t = relative_performance(&AggregateStats::from_rows(&rows), "ref").unwrap();
        let me = &t.rows[0];
        assert_eq!((me.time_ratio, me.path_ratio, me.collision_ratio, me.success_ratio), (1.0, 1.0, 1.0, 1.0));
        assert_eq!(t.rows[1].collision_ratio, 0.5);
        assert!(relative_performance(&AggregateStats::from_rows(&rows), "nope").is_err());
    }

    #[test]
    fn zero_denominator_saturates() {
        let mut rows: Vec<RunRow> = (0..2).map(|i| row("ref", i, 1, true)).collect();
        rows.extend((0..2).map(|i| row("clean", i, 0, true)));
        let t = relative_performance(&AggregateStats::from_rows(&rows), "ref").unwrap();
        assert_eq!(t.rows[1].collision_ratio, RATIO_CAP);
        assert_eq!(t.rows[1].saturated, vec!["collisions".to_string()]);
    }
}
