//! 2D lidar simulation by exact grid traversal plus analytic disc hits.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::geometry::{ray_circle, Pose, Vec2};

use super::{ObstacleState, OccupancyGrid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LidarScan {
    pub angle_min: f64,
    pub angle_increment: f64,
    pub range_max: f64,
    pub ranges: Vec<f64>,
}

impl LidarScan {
    pub fn n_beams(&self) -> usize {
        self.ranges.len()
    }

    /// Beam angle relative to the robot heading.
    pub fn beam_angle(&self, i: usize) -> f64 {
        self.angle_min + i as f64 * self.angle_increment
    }

    pub fn min_range(&self) -> f64 {
        self.ranges.iter().copied().fold(self.range_max, f64::min)
    }

    /// World-frame endpoints of beams that hit something.
    pub fn hit_points(&self, pose: &Pose) -> Vec<Vec2> {
        self.ranges
            .iter()
            .enumerate()
            .filter(|(_, &r)| r < self.range_max)
            .map(|(i, &r)| pose.position() + Vec2::from_polar(r, pose.theta + self.beam_angle(i)))
            .collect()
    }
}

/// Full-circle scan of `n_beams` beams starting at `-π` relative to the heading.
pub fn raycast(
    grid: &OccupancyGrid,
    obstacles: &[ObstacleState],
    pose: &Pose,
    n_beams: usize,
    range_max: f64,
) -> LidarScan {
    let angle_min = -PI;
    let inc = 2.0 * PI / n_beams as f64;
    let origin = pose.position();
    let mut ranges: Vec<f64> = (0..n_beams)
        .map(|i| {
            let a = pose.theta + angle_min + i as f64 * inc;
            cast_grid(grid, origin, Vec2::new(a.cos(), a.sin()), range_max)
        })
        .collect();

    for o in obstacles {
        let rel = o.position - origin;
        let d = rel.norm();
        if d - o.radius >= range_max {
            continue;
        }
        if d <= o.radius {
            ranges.iter_mut().for_each(|r| *r = 0.0);
            continue;
        }
        // Only beams inside the subtended cone (plus one beam of slack) can hit.
        let half = (o.radius / d).asin();
        let bearing = rel.angle() - pose.theta - angle_min;
        let first = ((bearing - half) / inc).floor() as i64 - 1;
        let last = ((bearing + half) / inc).ceil() as i64 + 1;
        let span = (last - first + 1).min(n_beams as i64);
        for k in first..first + span {
            let i = k.rem_euclid(n_beams as i64) as usize;
            let a = pose.theta + angle_min + i as f64 * inc;
            if let Some(t) = ray_circle(origin, Vec2::new(a.cos(), a.sin()), o.position, o.radius) {
                if t < ranges[i] {
                    ranges[i] = t;
                }
            }
        }
    }
    LidarScan { angle_min, angle_increment: inc, range_max, ranges }
}

/// Distance along a unit ray to the first occupied cell boundary, capped at
/// `max`. Visits every cell the ray passes through (Amanatides–Woo).
pub fn cast_grid(grid: &OccupancyGrid, origin: Vec2, dir: Vec2, max: f64) -> f64 {
    let res = grid.resolution();
    let (mut ix, mut iy) = grid.cell_at(origin);
    if grid.is_occupied((ix, iy)) {
        return 0.0;
    }
    let (step_x, mut t_max_x, dt_x) = axis_setup(origin.x, dir.x, ix, res);
    let (step_y, mut t_max_y, dt_y) = axis_setup(origin.y, dir.y, iy, res);
    loop {
        let t = if t_max_x < t_max_y {
            ix += step_x;
            let t = t_max_x;
            t_max_x += dt_x;
            t
        } else {
            iy += step_y;
            let t = t_max_y;
            t_max_y += dt_y;
            t
        };
        if t >= max {
            return max;
        }
        if grid.is_occupied((ix, iy)) {
            return t;
        }
    }
}

fn axis_setup(o: f64, d: f64, i: i64, res: f64) -> (i64, f64, f64) {
    if d > 0.0 {
        (1, ((i + 1) as f64 * res - o) / d, res / d)
    } else if d < 0.0 {
        (-1, (i as f64 * res - o) / d, -res / d)
    } else {
        (0, f64::INFINITY, f64::INFINITY)
    }
}
