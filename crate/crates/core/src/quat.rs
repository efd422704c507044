//! Quaternion algebra shared by the SO(3) path lifting and the Hopf lift.
//!
//! Convention: `q = w + x i + y j + z k`, with the imaginary part identified
//! with R^3 as (x, y, z).

use crate::error::{Error, Result};
use crate::vec3::{UnitVec3, Vec3};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quat {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quat {
    pub const IDENTITY: Quat = Quat { w: 1.0, x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Quat { w, x, y, z }
    }

    pub fn from_imaginary(v: Vec3) -> Self {
        Quat::new(0.0, v.x, v.y, v.z)
    }

    pub fn imaginary(self) -> Vec3 {
        Vec3::new(self.x, self.y, self.z)
    }

    pub fn conjugate(self) -> Self {
        Quat::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn dot(self, o: Quat) -> f64 {
        self.w * o.w + self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(self, s: f64) -> Self {
        Quat::new(self.w * s, self.x * s, self.y * s, self.z * s)
    }

    pub fn add(self, o: Quat) -> Self {
        Quat::new(self.w + o.w, self.x + o.x, self.y + o.y, self.z + o.z)
    }

    pub fn sub(self, o: Quat) -> Self {
        Quat::new(self.w - o.w, self.x - o.x, self.y - o.y, self.z - o.z)
    }

    pub fn mul(self, o: Quat) -> Self {
        Quat::new(
            self.w * o.w - self.x * o.x - self.y * o.y - self.z * o.z,
            self.w * o.x + self.x * o.w + self.y * o.z - self.z * o.y,
            self.w * o.y - self.x * o.z + self.y * o.w + self.z * o.x,
            self.w * o.z + self.x * o.y - self.y * o.x + self.z * o.w,
        )
    }

    pub fn normalized(self) -> Result<Quat> {
        let n = self.norm();
        if !n.is_finite() || n <= crate::vec3::NEAR_ZERO {
            return Err(Error::NearZeroVector(n));
        }
        Ok(self.scale(1.0 / n))
    }

    /// Rotation quaternion about a unit axis (half-angle convention).
    pub fn from_axis_angle(axis: UnitVec3, angle: f64) -> Quat {
        let (s, c) = (0.5 * angle).sin_cos();
        let a = axis.as_vec3();
        Quat::new(c, s * a.x, s * a.y, s * a.z)
    }

    /// Rotates an R^3 vector by conjugation `q v q^-1` (unit q assumed).
    pub fn rotate(self, v: Vec3) -> Vec3 {
        self.mul(Quat::from_imaginary(v)).mul(self.conjugate()).imaginary()
    }

    pub fn as_array(self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn is_finite(self) -> bool {
        self.w.is_finite() && self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}
