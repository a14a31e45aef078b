//! 3D points, axis-aligned obstacle boxes and segment blockage tests.

#[allow(unused_imports)] // f64 math under no_std; inherent once std is linked
use num_traits::Float;
use core::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// A point or direction in meters. Serialized as `[x, y, z]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Self) -> Self {
        Self::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Unit vector in the same direction, or `None` for the zero vector.
    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        if n > 0.0 && n.is_finite() {
            Some(self * (1.0 / n))
        } else {
            None
        }
    }

    pub fn distance(self, other: Self) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    fn axis(self, i: usize) -> f64 {
        match i {
            0 => self.x,
            1 => self.y,
            _ => self.z,
        }
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(v: [f64; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        [v.x, v.y, v.z]
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Closed axis-aligned box. A segment that merely touches a face, edge or
/// corner counts as blocked.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    /// Builds a box from two opposite corners in any order.
    pub fn from_corners(a: Vec3, b: Vec3) -> Self {
        Self {
            min: Vec3::new(a.x.min(b.x), a.y.min(b.y), a.z.min(b.z)),
            max: Vec3::new(a.x.max(b.x), a.y.max(b.y), a.z.max(b.z)),
        }
    }

    pub fn contains(&self, p: Vec3) -> bool {
        (0..3).all(|i| self.min.axis(i) <= p.axis(i) && p.axis(i) <= self.max.axis(i))
    }

    /// Slab test of the segment `a -> b` against the closed box.
    ///
    /// The entry/exit parameters are kept as fractions and compared by
    /// cross-multiplication, so integer or dyadic coordinates are decided
    /// exactly, including grazing contact.
    pub fn intersects_segment(&self, a: Vec3, b: Vec3) -> bool {
        let d = b - a;
        // Feasible parameter interval [lo_n / lo_d, hi_n / hi_d], denominators > 0.
        let (mut lo_n, mut lo_d, mut hi_n, mut hi_d) = (0.0, 1.0, 1.0, 1.0);
        for i in 0..3 {
            let (p, di, mn, mx) = (a.axis(i), d.axis(i), self.min.axis(i), self.max.axis(i));
            if di == 0.0 {
                if p < mn || p > mx {
                    return false;
                }
                continue;
            }
            let (enter, exit, den) = if di > 0.0 {
                (mn - p, mx - p, di)
            } else {
                (p - mx, p - mn, -di)
            };
            if enter * lo_d > lo_n * den {
                lo_n = enter;
                lo_d = den;
            }
            if exit * hi_d < hi_n * den {
                hi_n = exit;
                hi_d = den;
            }
            if lo_n * hi_d > hi_n * lo_d {
                return false;
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_box() -> Aabb {
        Aabb::from_corners(Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 1.0, 1.0))
    }

    #[test]
    fn straddling_segment_is_blocked() {
        let b = unit_box();
        assert!(b.intersects_segment(Vec3::new(-1.0, 0.5, 0.5), Vec3::new(2.0, 0.5, 0.5)));
    }

    #[test]
    fn grazing_face_counts_as_blocked() {
        let b = unit_box();
        // runs along the top face
        assert!(b.intersects_segment(Vec3::new(-1.0, 0.5, 1.0), Vec3::new(2.0, 0.5, 1.0)));
        // touches a single edge
        assert!(b.intersects_segment(Vec3::new(-1.0, 1.0, 0.5), Vec3::new(1.0, -1.0, 0.5)));
        // just misses
        assert!(!b.intersects_segment(Vec3::new(-1.0, 0.5, 1.0 + 1e-9), Vec3::new(2.0, 0.5, 1.0 + 1e-9)));
    }

    #[test]
    fn segment_ending_before_box() {
        let b = unit_box();
        assert!(!b.intersects_segment(Vec3::new(-3.0, 0.5, 0.5), Vec3::new(-0.5, 0.5, 0.5)));
        assert!(b.intersects_segment(Vec3::new(-3.0, 0.5, 0.5), Vec3::new(0.0, 0.5, 0.5)));
    }

    #[test]
    fn degenerate_segment_is_point_test() {
        let b = unit_box();
        assert!(b.intersects_segment(Vec3::new(0.5, 0.5, 0.5), Vec3::new(0.5, 0.5, 0.5)));
        assert!(!b.intersects_segment(Vec3::new(1.5, 0.5, 0.5), Vec3::new(1.5, 0.5, 0.5)));
    }

    #[test]
    fn vector_algebra() {
        let x = Vec3::new(1.0, 0.0, 0.0);
        let y = Vec3::new(0.0, 1.0, 0.0);
        assert_eq!(x.cross(y), Vec3::new(0.0, 0.0, 1.0));
        assert_eq!(Vec3::new(3.0, 4.0, 0.0).norm(), 5.0);
        assert!(Vec3::default().normalized().is_none());
    }
}
