use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::geometry::Vec2;
use crate::world::OccupancyGrid;

use super::episode::RunResult;
use super::BenchError;

/// One CSV line per run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub planner: String,
    pub scenario: String,
    pub run: usize,
    pub time_s: f64,
    pub path_m: f64,
    pub collisions: usize,
    pub success: bool,
    pub timeout: bool,
    pub replans: usize,
    pub reached_goal: bool,
}

impl From<&RunResult> for RunRow {
    fn from(r: &RunResult) -> Self {
        Self {
            planner: r.planner.clone(),
            scenario: r.scenario.clone(),
            run: r.run,
            time_s: r.time_s,
            path_m: r.path_m,
            collisions: r.collisions,
            success: r.success,
            timeout: r.timeout,
            replans: r.replans,
            reached_goal: r.reached_goal,
        }
    }
}

const HEADER: [&str; 10] =
    ["planner", "scenario", "run", "time_s", "path_m", "collisions", "success", "timeout", "replans", "reached_goal"];

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> BenchError + '_ {
    move |e| BenchError::Io(path.display().to_string(), e)
}

pub fn write_csv<W: Write>(rows: &[RunRow], w: W) -> Result<(), BenchError> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    out.write_record(HEADER)?;
    for r in rows {
        out.serialize(r)?;
    }
    out.flush().map_err(|e| BenchError::Io("csv".into(), e))
}

pub fn read_csv<R: Read>(r: R) -> Result<Vec<RunRow>, BenchError> {
    csv::Reader::from_reader(r).deserialize().map(|row| row.map_err(BenchError::from)).collect()
}

pub fn export_csv(records: &[RunResult], path: impl AsRef<Path>) -> Result<(), BenchError> {
    let path = path.as_ref();
    let f = File::create(path).map_err(io_err(path))?;
    let rows: Vec<RunRow> = records.iter().map(RunRow::from).collect();
    write_csv(&rows, BufWriter::new(f))
}

/// Full run records, one JSON object per line.
pub fn write_jsonl(records: &[RunResult], path: impl AsRef<Path>) -> Result<(), BenchError> {
    let path = path.as_ref();
    let mut w = BufWriter::new(File::create(path).map_err(io_err(path))?);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_jsonl(path: impl AsRef<Path>) -> Result<Vec<RunResult>, BenchError> {
    let path = path.as_ref();
    let f = File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for line in BufReader::new(f).lines() {
        let line = line.map_err(io_err(path))?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];
const SCALE: f64 = 40.0;
const MIN_OPACITY: f64 = 0.05;

/// Maps world meters to SVG pixels with the y axis pointing up.
struct Frame {
    height: f64,
}

impl Frame {
    fn pt(&self, p: Vec2) -> (f64, f64) {
        (p.x * SCALE, (self.height - p.y) * SCALE)
    }
}

fn polyline(s: &mut String, frame: &Frame, pts: impl Iterator<Item = Vec2>, style: &str) {
    let coords: Vec<String> = pts
        .map(|p| {
            let (x, y) = frame.pt(p);
            format!("{x:.2},{y:.2}")
        })
        .collect();
    let _ = writeln!(s, r#"<polyline points="{}" fill="none" {style}/>"#, coords.join(" "));
}

/// Renders the map, obstacle paths, robot trajectories and collision points.
///
/// Each trajectory is drawn with opacity `1/n` (floored at 0.05), where
/// `n` is the number of runs of its planner, so overlapping paths compose
/// to an intensity that grows with how often a route was taken.
pub fn render_svg(records: &[RunResult], grid: Option<&OccupancyGrid>) -> Result<String, BenchError> {
    if records.is_empty() {
        return Err(BenchError::EmptyRecords);
    }
    let extent = match grid {
        Some(g) => g.extent(),
        None => records
            .iter()
            .flat_map(|r| r.trajectory.iter().map(|p| p.position()))
            .fold(Vec2::new(1.0, 1.0), |m, p| Vec2::new(m.x.max(p.x + 1.0), m.y.max(p.y + 1.0))),
    };
    let frame = Frame { height: extent.y };
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{:.0}" viewBox="0 0 {:.2} {:.2}">"#,
        extent.x * SCALE,
        extent.y * SCALE,
        extent.x * SCALE,
        extent.y * SCALE
    );
    let _ = writeln!(s, r##"<rect x="0" y="0" width="100%" height="100%" fill="#ffffff"/>"##);

    if let Some(g) = grid {
        let res = g.resolution();
        let _ = writeln!(s, r##"<g id="map" fill="#404040">"##);
        for iy in 0..g.height() {
            let mut ix = 0;
            while ix < g.width() {
                if !g.is_occupied((ix as i64, iy as i64)) {
                    ix += 1;
                    continue;
                }
                let start = ix;
                while ix < g.width() && g.is_occupied((ix as i64, iy as i64)) {
                    ix += 1;
                }
                let (x, y) = frame.pt(Vec2::new(start as f64 * res, (iy + 1) as f64 * res));
                let _ = writeln!(
                    s,
                    r#"<rect x="{x:.2}" y="{y:.2}" width="{:.2}" height="{:.2}"/>"#,
                    (ix - start) as f64 * res * SCALE,
                    res * SCALE
                );
            }
        }
        let _ = writeln!(s, "</g>");
    }

    let _ = writeln!(s, r#"<g id="obstacles">"#);
    for r in records {
        for path in r.obstacle_paths.iter().filter(|p| !p.is_empty()) {
            polyline(&mut s, &frame, path.iter().copied(), r##"stroke="#888888" stroke-width="1.5" stroke-dasharray="4 3""##);
            let (x, y) = frame.pt(path[0]);
            let _ = writeln!(s, r##"<circle cx="{x:.2}" cy="{y:.2}" r="{:.2}" fill="#bbbbbb"/>"##, 0.3 * SCALE);
        }
    }
    let _ = writeln!(s, "</g>");

    let mut planners: Vec<&str> = Vec::new();
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for r in records {
        if !planners.contains(&r.planner.as_str()) {
            planners.push(&r.planner);
        }
        *counts.entry(&r.planner).or_default() += 1;
    }
    for (k, planner) in planners.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let opacity = (1.0 / counts[planner] as f64).max(MIN_OPACITY);
        let _ = writeln!(s, r#"<g id="planner-{planner}" data-runs="{}">"#, counts[planner]);
        for r in records.iter().filter(|r| r.planner == *planner) {
            let style = format!(r#"stroke="{color}" stroke-width="2" stroke-opacity="{opacity:.4}""#);
            polyline(&mut s, &frame, r.trajectory.iter().map(|p| p.position()), &style);
        }
        for r in records.iter().filter(|r| r.planner == *planner) {
            for &c in &r.collision_points {
                let (x, y) = frame.pt(c);
                let _ = writeln!(
                    s,
                    r#"<circle class="collision" cx="{x:.2}" cy="{y:.2}" r="{:.2}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                    0.3 * SCALE
                );
            }
        }
        let _ = writeln!(s, "</g>");
    }
    let _ = writeln!(s, "</svg>");
    Ok(s)
}

pub fn export_svg(records: &[RunResult], grid: Option<&OccupancyGrid>, path: impl AsRef<Path>) -> Result<(), BenchError> {
    let path = path.as_ref();
    let svg = render_svg(records, grid)?;
    std::fs::write(path, svg).map_err(io_err(path))
}
