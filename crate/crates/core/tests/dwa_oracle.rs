//! DWA against an exhaustive re-scoring of the same sample grid.

use std::f64::consts::PI;

use nav_arena::geometry::{Pose, Vec2};
use nav_arena::local::{dwa_plan, dwa_samples, DwaParams};
use nav_arena::world::{raycast, Action, MotionModel, ObstacleState, OccupancyGrid, RobotState};
use proptest::prelude::*;

fn wrap(a: f64) -> f64 {
    let mut a = a % (2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    } else if a <= -PI {
        a += 2.0 * PI;
    }
    a
}

fn trajectory(start: Pose, a: Action, p: &DwaParams) -> Vec<Pose> {
    let n = (p.t_sim / p.dt).round() as usize;
    let mut out = Vec::with_capacity(n);
    let (mut x, mut y, mut th) = (start.x, start.y, start.theta);
    for _ in 0..n {
        x += a.v * th.cos() * p.dt;
        y += a.v * th.sin() * p.dt;
        th = wrap(th + a.omega * p.dt);
        out.push(Pose::new(x, y, th));
    }
    out
}

fn clearance(traj: &[Pose], points: &[Vec2]) -> f64 {
    traj.iter()
        .flat_map(|q| points.iter().map(move |pt| pt.dist(q.position())))
        .fold(f64::INFINITY, f64::min)
}

/// Best (index, score) over all admissible samples, first index on ties.
fn oracle(robot: &RobotState, points: &[Vec2], goal: Vec2, p: &DwaParams) -> Option<(Action, f64)> {
    let mut best: Option<(Action, f64)> = None;
    for a in dwa_samples(robot, p) {
        let traj = trajectory(robot.pose(), a, p);
        let c = clearance(&traj, points);
        if c < p.robot_radius {
            continue;
        }
        let end = traj.last().unwrap();
        let err = wrap((goal.y - end.y).atan2(goal.x - end.x) - end.theta);
        let score = p.heading_weight * (PI - err.abs()) / PI
            + p.clearance_weight * c.min(p.clearance_cap) / p.clearance_cap
            + p.velocity_weight * a.v / p.v_max;
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((a, score));
        }
    }
    best
}

fn scene() -> impl Strategy<Value = (RobotState, Vec<(f64, f64, f64)>, (f64, f64))> {
    (
        (0.0f64..0.5, -1.5f64..1.5, -3.14f64..3.14),
        prop::collection::vec((-2.5f64..2.5, -2.5f64..2.5, 0.1f64..0.5), 0..6),
        (-4.0f64..4.0, -4.0f64..4.0),
    )
        .prop_map(|((v, omega, theta), obs, goal)| {
            let robot = RobotState { v, omega, ..RobotState::at(Pose::new(5.0, 5.0, theta), 0.3) };
            (robot, obs, goal)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn matches_exhaustive_oracle_and_is_admissible((robot, obs, goal) in scene()) {
        let grid = OccupancyGrid::empty(100, 100, 0.1).unwrap();
        let obstacles: Vec<ObstacleState> = obs
            .iter()
            .map(|&(dx, dy, r)| ObstacleState {
                position: Vec2::new(5.0 + dx, 5.0 + dy),
                velocity: Vec2::new(0.0, 0.0),
                radius: r,
                speed: 0.0,
                model: MotionModel::LinearBounce,
            })
            .filter(|o| o.position.dist(robot.position()) > o.radius + 0.05)
            .collect();
        let scan = raycast(&grid, &obstacles, &robot.pose(), 360, 3.5);
        let points = scan.hit_points(&robot.pose());
        let goal = Vec2::new(5.0 + goal.0, 5.0 + goal.1);
        let p = DwaParams::default();
        let d = dwa_plan(&scan, &robot, goal, &p);
        match oracle(&robot, &points, goal, &p) {
            Some((a, score)) => {
                prop_assert!(!d.fallback);
                prop_assert_eq!(d.action, a);
                prop_assert!((d.score - score).abs() < 1e-12);
                let traj = trajectory(robot.pose(), d.action, &p);
                prop_assert!(clearance(&traj, &points) >= p.robot_radius);
                prop_assert!(d.action.v.abs() <= p.v_max && d.action.omega.abs() <= p.omega_max);
            }
            None => {
                prop_assert!(d.fallback);
                prop_assert_eq!(d.action.v, 0.0);
                prop_assert_eq!(d.action.omega.abs(), p.omega_max);
            }
        }
    }

    #[test]
    fn samples_respect_the_window(v in 0.0f64..0.5, omega in -1.5f64..1.5) {
        let p = DwaParams::default();
        let robot = RobotState { v, omega, ..RobotState::at(Pose::new(0.0, 0.0, 0.0), 0.3) };
        for a in dwa_samples(&robot, &p) {
            prop_assert!((a.v - v).abs() <= p.accel_v * p.dt + 1e-12);
            prop_assert!((a.omega - omega).abs() <= p.accel_omega * p.dt + 1e-12);
            prop_assert!(a.v >= p.v_min && a.v <= p.v_max);
            prop_assert!(a.omega.abs() <= p.omega_max);
        }
    }
}
