//! Dense-sampling reference for subgoal selection.

use nav_arena::geometry::Vec2;
use nav_arena::planning::GlobalPath;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn random_path(rng: &mut ChaCha8Rng) -> GlobalPath {
    let n = rng.random_range(2..8);
    let mut p = Vec2::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
    let mut poses = vec![p];
    for _ in 1..n {
        p = p + Vec2::from_polar(rng.random_range(0.2..2.0), rng.random_range(-3.14..3.14));
        poses.push(p);
    }
    GlobalPath::from_poses(poses).unwrap()
}

/// Maximal-arclength 1 mm path sample inside the horizon circle, or the
/// goal. With the goal outside, the path leaves the circle right after it.
pub fn sampled_subgoal(path: &GlobalPath, p_r: Vec2, d: f64) -> Option<(f64, Vec2)> {
    if path.goal().dist(p_r) < d {
        return Some((path.total_length(), path.goal()));
    }
    let n = (path.total_length() / 1e-3).floor() as usize;
    (0..=n)
        .rev()
        .map(|k| {
            let s = k as f64 * 1e-3;
            (s, path.query(s).unwrap())
        })
        .find(|(_, q)| q.dist(p_r) <= d)
}

/// Path whose headings stay within ±40° of +x, so the distance from any
/// path point to later points grows with arclength.
pub fn forward_path(rng: &mut ChaCha8Rng) -> GlobalPath {
    let mut p = Vec2::new(0.0, 0.0);
    let mut poses = vec![p];
    for _ in 0..rng.random_range(1..8) {
        p = p + Vec2::from_polar(rng.random_range(0.2..2.0), rng.random_range(-0.7..0.7));
        poses.push(p);
    }
    GlobalPath::from_poses(poses).unwrap()
}

