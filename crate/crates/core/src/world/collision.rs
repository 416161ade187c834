use crate::geometry::Vec2;

use super::{ObstacleState, OccupancyGrid, RobotState};

/// True iff the open disc `(center, radius)` overlaps an occupied cell.
///
/// Each occupied cell is treated as its closed axis-aligned box; touching
/// exactly at the boundary does not count as overlap.
pub fn disc_overlaps_grid(grid: &OccupancyGrid, center: Vec2, radius: f64) -> bool {
    let res = grid.resolution();
    let x0 = ((center.x - radius) / res).floor() as i64;
    let x1 = ((center.x + radius) / res).floor() as i64;
    let y0 = ((center.y - radius) / res).floor() as i64;
    let y1 = ((center.y + radius) / res).floor() as i64;
    let r2 = radius * radius;
    for iy in y0..=y1 {
        for ix in x0..=x1 {
            if !grid.is_occupied((ix, iy)) {
                continue;
            }
            let nx = center.x.clamp(ix as f64 * res, (ix + 1) as f64 * res);
            let ny = center.y.clamp(iy as f64 * res, (iy + 1) as f64 * res);
            let (dx, dy) = (center.x - nx, center.y - ny);
            if dx * dx + dy * dy < r2 {
                return true;
            }
        }
    }
    false
}

/// Robot disc against the static map and every obstacle disc.
pub fn check_collision(robot: &RobotState, grid: &OccupancyGrid, obstacles: &[ObstacleState]) -> bool {
    let p = robot.position();
    disc_overlaps_grid(grid, p, robot.radius)
        || obstacles
            .iter()
            .any(|o| p.dist(o.position) < robot.radius + o.radius)
}
