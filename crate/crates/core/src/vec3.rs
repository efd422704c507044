//! Minimal 3-vector algebra plus the unit-vector newtype used for points on
//! the unit 2-sphere.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Threshold below which a vector cannot be safely normalized.
pub const NEAR_ZERO: f64 = 1e-14;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Vec3) -> Vec3 {
        Vec3 {
            x: self.y * other.z - self.z * other.y,
            y: self.z * other.x - self.x * other.z,
            z: self.x * other.y - self.y * other.x,
        }
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Component of `self` orthogonal to the unit vector `axis`.
    pub fn reject_from_unit(self, axis: Vec3) -> Vec3 {
        self - axis * self.dot(axis)
    }

    pub fn as_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
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

/// A point of the unit 2-sphere: a 3-vector with norm 1 (within 1e-12 after
/// every constructing operation; constructors normalize exactly).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitVec3(Vec3);

impl UnitVec3 {
    /// Normalizes `v` onto the sphere. Fails with `NearZeroVector` when the
    /// input is too short to carry a direction.
    pub fn new(v: Vec3) -> Result<Self> {
        let n = v.norm();
        if !n.is_finite() || n <= NEAR_ZERO {
            return Err(Error::NearZeroVector(n));
        }
        Ok(UnitVec3(v * (1.0 / n)))
    }

    pub fn from_components(x: f64, y: f64, z: f64) -> Result<Self> {
        UnitVec3::new(Vec3::new(x, y, z))
    }

    /// Wraps a vector already known to be unit; debug-asserts the invariant.
    pub(crate) fn new_unchecked(v: Vec3) -> Self {
        debug_assert!((v.norm() - 1.0).abs() < 1e-9, "norm defect {}", (v.norm() - 1.0).abs());
        UnitVec3(v)
    }

    pub fn as_vec3(self) -> Vec3 {
        self.0
    }

    pub fn x(self) -> f64 {
        self.0.x
    }

    pub fn y(self) -> f64 {
        self.0.y
    }

    pub fn z(self) -> f64 {
        self.0.z
    }

    pub fn dot(self, other: UnitVec3) -> f64 {
        self.0.dot(other.0)
    }

    pub fn cross(self, other: UnitVec3) -> Vec3 {
        self.0.cross(other.0)
    }

    /// Geodesic (great-circle) distance, computed with atan2 for good
    /// conditioning near 0 and near pi.
    pub fn geodesic_distance(self, other: UnitVec3) -> f64 {
        let s = self.0.cross(other.0).norm();
        let c = self.0.dot(other.0);
        s.atan2(c)
    }

    pub fn antipode(self) -> UnitVec3 {
        UnitVec3(-self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cross_is_right_handed() {
        let x = Vec3::new(1.0, 0.0, 0.0);
        let y = Vec3::new(0.0, 1.0, 0.0);
        assert_eq!(x.cross(y), Vec3::new(0.0, 0.0, 1.0));
    }

    #[test]
    fn unit_vec_normalizes() {
        let u = UnitVec3::new(Vec3::new(3.0, 0.0, 4.0)).unwrap();
        assert!((u.as_vec3().norm() - 1.0).abs() < 1e-15);
        assert!((u.x() - 0.6).abs() < 1e-15);
        assert!((u.z() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn near_zero_vector_is_rejected() {
        assert!(matches!(
            UnitVec3::new(Vec3::new(1e-15, 0.0, 0.0)),
            Err(Error::NearZeroVector(_))
        ));
    }

    #[test]
    fn geodesic_distance_matches_angles() {
        let a = UnitVec3::from_components(1.0, 0.0, 0.0).unwrap();
        let b = UnitVec3::from_components(0.0, 1.0, 0.0).unwrap();
        assert!((a.geodesic_distance(b) - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!((a.geodesic_distance(a.antipode()) - std::f64::consts::PI).abs() < 1e-12);
    }
}
