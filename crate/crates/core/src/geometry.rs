//! Small planar geometry toolkit shared by the simulator and planners.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// A point or displacement in the plane, meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_polar(len: f64, angle: f64) -> Self {
        Self::new(len * angle.cos(), len * angle.sin())
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Vec2) -> f64 {
        (self - o).norm()
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn lerp(self, o: Vec2, t: f64) -> Vec2 {
        self + (o - self) * t
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl From<(f64, f64)> for Vec2 {
    fn from((x, y): (f64, f64)) -> Self {
        Vec2::new(x, y)
    }
}

/// A planar pose: position plus heading.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose {
    pub const fn new(x: f64, y: f64, theta: f64) -> Self {
        Self { x, y, theta }
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut w = a % (2.0 * PI);
    if w <= -PI {
        w += 2.0 * PI;
    } else if w > PI {
        w -= 2.0 * PI;
    }
    w
}

/// Closest point on segment `ab` to `p`, with its segment parameter in `[0, 1]`.
pub fn closest_point_on_segment(p: Vec2, a: Vec2, b: Vec2) -> (Vec2, f64) {
    let ab = b - a;
    let len_sq = ab.norm_sq();
    if len_sq == 0.0 {
        return (a, 0.0);
    }
    let t = ((p - a).dot(ab) / len_sq).clamp(0.0, 1.0);
    (a + ab * t, t)
}

pub fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    closest_point_on_segment(p, a, b).0.dist(p)
}

/// Parameters `t ∈ [0, 1]` where segment `ab` crosses the circle `(c, r)`,
/// in increasing order. Tangent contact yields a single root.
pub fn segment_circle_intersections(a: Vec2, b: Vec2, c: Vec2, r: f64) -> Vec<f64> {
    let d = b - a;
    let f = a - c;
    let qa = d.norm_sq();
    if qa == 0.0 {
        return Vec::new();
    }
    let qb = 2.0 * f.dot(d);
    let qc = f.norm_sq() - r * r;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        return Vec::new();
    }
    let sq = disc.sqrt();
    // Numerically stable pair of roots.
    let q = -0.5 * (qb + qb.signum() * sq);
    let (mut t0, mut t1) = if q == 0.0 {
        let t = -qb / (2.0 * qa);
        (t, t)
    } else {
        (q / qa, qc / q)
    };
    if t0 > t1 {
        std::mem::swap(&mut t0, &mut t1);
    }
    let mut out = Vec::with_capacity(2);
    for t in [t0, t1] {
        if (0.0..=1.0).contains(&t) && out.last() != Some(&t) {
            out.push(t);
        }
    }
    out
}

/// Smallest non-negative ray parameter at which the ray `o + t·dir`
/// (unit `dir`) meets the circle, or `None`. A ray starting inside the
/// circle reports `Some(0.0)`.
pub fn ray_circle(o: Vec2, dir: Vec2, c: Vec2, r: f64) -> Option<f64> {
    let f = o - c;
    let c2 = f.norm_sq() - r * r;
    if c2 <= 0.0 {
        return Some(0.0);
    }
    let b = f.dot(dir);
    if b >= 0.0 {
        return None;
    }
    let disc = b * b - c2;
    if disc < 0.0 {
        return None;
    }
    // Stable smaller root for a unit direction.
    let t = c2 / (-b + disc.sqrt());
    Some(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(-0.5) + 0.5).abs() < 1e-15);
        assert!((wrap_angle(2.0 * PI + 0.25) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn segment_circle_roots() {
        let ts = segment_circle_intersections(
            Vec2::new(0.0, 0.0),
            Vec2::new(10.0, 0.0),
            Vec2::new(2.0, 0.0),
            1.55,
        );
        assert_eq!(ts.len(), 2);
        assert!((ts[0] * 10.0 - 0.45).abs() < 1e-12);
        assert!((ts[1] * 10.0 - 3.55).abs() < 1e-12);
    }

    #[test]
    fn ray_circle_hit_and_miss() {
        let t = ray_circle(Vec2::ZERO, Vec2::new(1.0, 0.0), Vec2::new(1.0, 0.0), 0.3).unwrap();
        assert!((t - 0.7).abs() < 1e-12);
        assert!(ray_circle(Vec2::ZERO, Vec2::new(-1.0, 0.0), Vec2::new(1.0, 0.0), 0.3).is_none());
        assert_eq!(
            ray_circle(Vec2::ZERO, Vec2::new(1.0, 0.0), Vec2::new(0.1, 0.0), 0.3),
            Some(0.0)
        );
    }
}
