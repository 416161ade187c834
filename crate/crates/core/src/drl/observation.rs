use serde::{Deserialize, Serialize};

use crate::geometry::{wrap_angle, Vec2};
use crate::scalar::Real;
use crate::world::{LidarScan, RobotState, OBSERVATION_BEAMS};

use super::DrlError;

/// Down-sampled scan plus the subgoal in polar robot-frame coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    /// Ranges divided by `range_max`, in `[0, 1]`.
    pub lidar: Vec<f64>,
    pub goal_distance: f64,
    /// Radians in `(-π, π]`.
    pub goal_angle: f64,
}

impl Observation {
    pub const INPUT_LEN: usize = OBSERVATION_BEAMS + 2;

    /// Network input vector: the bins followed by distance and angle.
    pub fn to_input<T: Real>(&self) -> Vec<T> {
        let mut v = Vec::with_capacity(self.lidar.len() + 2);
        self.write_input(&mut v);
        v
    }

    pub fn write_input<T: Real>(&self, out: &mut Vec<T>) {
        out.clear();
        out.extend(self.lidar.iter().map(|&r| T::of(r)));
        out.push(T::of(self.goal_distance));
        out.push(T::of(self.goal_angle));
    }
}

/// Min-pools the scan into 344 angular bins; beam `i` of `n` falls in bin
/// `floor(i·344/n)`.
pub fn build_observation(scan: &LidarScan, robot: &RobotState, subgoal: Vec2) -> Result<Observation, DrlError> {
    let n = scan.n_beams();
    if n < OBSERVATION_BEAMS {
        return Err(DrlError::Shape(format!("scan has {n} beams, at least {OBSERVATION_BEAMS} required")));
    }
    let mut lidar = vec![f64::INFINITY; OBSERVATION_BEAMS];
    for (i, &r) in scan.ranges.iter().enumerate() {
        let bin = i * OBSERVATION_BEAMS / n;
        lidar[bin] = lidar[bin].min(r);
    }
    for v in &mut lidar {
        *v = (*v / scan.range_max).clamp(0.0, 1.0);
    }
    let d = subgoal - robot.position();
    Ok(Observation { lidar, goal_distance: d.norm(), goal_angle: wrap_angle(d.y.atan2(d.x) - robot.theta) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Pose;

    fn scan(n: usize) -> LidarScan {
        LidarScan {
            angle_min: -std::f64::consts::PI,
            angle_increment: std::f64::consts::TAU / n as f64,
            range_max: 3.5,
            ranges: vec![3.5; n],
        }
    }

    fn robot() -> RobotState {
        RobotState::at(Pose::new(1.0, 2.0, 0.5), 0.3)
    }

    #[test]
    fn free_scan_is_all_ones() {
        let o = build_observation(&scan(360), &robot(), Vec2::new(3.0, 3.0)).unwrap();
        assert_eq!(o.lidar.len(), 344);
        assert!(o.lidar.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn goal_ahead() {
        let r = robot();
        let g = r.position() + Vec2::from_polar(1.0, r.theta);
        let o = build_observation(&scan(360), &r, g).unwrap();
        assert!((o.goal_distance - 1.0).abs() < 1e-12);
        assert!(o.goal_angle.abs() < 1e-12);
    }

    #[test]
    fn single_short_beam_maps_to_one_bin() {
        let mut s = scan(688);
        s.ranges[301] = 0.5 * 3.5;
        let o = build_observation(&s, &robot(), Vec2::new(0.0, 0.0)).unwrap();
        for (b, &v) in o.lidar.iter().enumerate() {
            // Brute-force membership: beam 301 belongs to the bin whose
            // index range [b·688/344, (b+1)·688/344) contains it.
            let member = (b * 688..(b + 1) * 688).contains(&(301 * 344));
            assert_eq!(v, if member { 0.5 } else { 1.0 }, "bin {b}");
        }
    }

    #[test]
    fn too_few_beams_rejected() {
        assert!(build_observation(&scan(343), &robot(), Vec2::ZERO).is_err());
    }
}
