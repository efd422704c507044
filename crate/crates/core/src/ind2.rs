//! The Z/2 regular-homotopy invariant of closed regular curves on the
//! sphere: the tangent frame traces a closed path in SO(3); lifting it to
//! unit quaternions either returns to the start (+1) or to its negative
//! (-1). The sign is invariant under regular homotopies, so it separates the
//! single and the double cover of a great circle.

use crate::error::{Error, Result};
use crate::quat::Quat;
use crate::sphere::DiscreteCurve;
use crate::vec3::{UnitVec3, Vec3};

/// A rotation matrix stored by columns.
#[derive(Clone, Copy, Debug)]
pub struct Rot3 {
    pub cols: [Vec3; 3],
}

impl Rot3 {
    pub fn from_columns(a: Vec3, b: Vec3, c: Vec3) -> Self {
        Rot3 { cols: [a, b, c] }
    }

    pub fn from_axis_angle(axis: UnitVec3, angle: f64) -> Self {
        let rot = |v| crate::sphere::rotate_about_axis(v, axis, angle);
        Rot3 {
            cols: [
                rot(Vec3::new(1.0, 0.0, 0.0)),
                rot(Vec3::new(0.0, 1.0, 0.0)),
                rot(Vec3::new(0.0, 0.0, 1.0)),
            ],
        }
    }

    pub fn det(&self) -> f64 {
        self.cols[0].dot(self.cols[1].cross(self.cols[2]))
    }

    /// Largest deviation from orthonormality among the column Gram products.
    pub fn orthogonality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let g = self.cols[i].dot(self.cols[j]);
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - target).abs());
            }
        }
        worst
    }

    /// Rotation angle of `self^T * other` — the relative rotation between two
    /// frames.
    pub fn relative_angle(&self, other: &Rot3) -> f64 {
        let trace: f64 = (0..3).map(|i| self.cols[i].dot(other.cols[i])).sum();
        ((trace - 1.0) * 0.5).clamp(-1.0, 1.0).acos()
    }

    /// Conversion to a unit quaternion (Shepperd's branch selection). The
    /// overall sign is arbitrary; continuity along a path is restored by the
    /// lifting step.
    pub fn to_quaternion(&self) -> Quat {
        let m = |r: usize, c: usize| -> f64 {
            // column-major storage: entry (row r, column c)
            match c {
                0 => self.cols[0].as_array()[r],
                1 => self.cols[1].as_array()[r],
                _ => self.cols[2].as_array()[r],
            }
        };
        let trace = m(0, 0) + m(1, 1) + m(2, 2);
        let q = if trace > 0.0 {
            let s = (trace + 1.0).sqrt() * 2.0;
            Quat::new(
                0.25 * s,
                (m(2, 1) - m(1, 2)) / s,
                (m(0, 2) - m(2, 0)) / s,
                (m(1, 0) - m(0, 1)) / s,
            )
        } else if m(0, 0) > m(1, 1) && m(0, 0) > m(2, 2) {
            let s = (1.0 + m(0, 0) - m(1, 1) - m(2, 2)).sqrt() * 2.0;
            Quat::new(
                (m(2, 1) - m(1, 2)) / s,
                0.25 * s,
                (m(0, 1) + m(1, 0)) / s,
                (m(0, 2) + m(2, 0)) / s,
            )
        } else if m(1, 1) > m(2, 2) {
            let s = (1.0 + m(1, 1) - m(0, 0) - m(2, 2)).sqrt() * 2.0;
            Quat::new(
                (m(0, 2) - m(2, 0)) / s,
                (m(0, 1) + m(1, 0)) / s,
                0.25 * s,
                (m(1, 2) + m(2, 1)) / s,
            )
        } else {
            let s = (1.0 + m(2, 2) - m(0, 0) - m(1, 1)).sqrt() * 2.0;
            Quat::new(
                (m(1, 0) - m(0, 1)) / s,
                (m(0, 2) + m(2, 0)) / s,
                (m(1, 2) + m(2, 1)) / s,
                0.25 * s,
            )
        };
        q.normalized().expect("rotation matrices convert to unit quaternions")
    }
}

/// A cyclically closed, densely sampled path of rotations.
#[derive(Clone, Debug)]
pub struct So3Path {
    frames: Vec<Rot3>,
}

impl So3Path {
    /// Validates orthogonality (1e-9), positive determinant, and the
    /// consecutive-step bound of pi/4 that makes quaternion sign choices
    /// unambiguous.
    pub fn new(frames: Vec<Rot3>) -> Result<Self> {
        if frames.len() < 3 {
            return Err(Error::SamplingTooCoarse(format!("{} frames", frames.len())));
        }
        for (i, f) in frames.iter().enumerate() {
            let defect = f.orthogonality_defect();
            if defect > 1e-9 || f.det() < 0.0 {
                return Err(Error::SamplingTooCoarse(format!(
                    "frame {i} is not a rotation (defect {defect:e}, det {})",
                    f.det()
                )));
            }
        }
        let n = frames.len();
        for i in 0..n {
            let angle = frames[i].relative_angle(&frames[(i + 1) % n]);
            if angle >= std::f64::consts::FRAC_PI_4 {
                return Err(Error::SamplingTooCoarse(format!(
                    "step {i} rotates by {angle}, above pi/4"
                )));
            }
        }
        Ok(So3Path { frames })
    }

    pub fn frames(&self) -> &[Rot3] {
        &self.frames
    }
}

/// Builds the (position, tangent, normal) frame path of a curve, with
/// centered-difference tangents projected to the tangent plane.
pub fn frame_path(c: &DiscreteCurve) -> Result<So3Path> {
    if c.len() < 64 {
        return Err(Error::SamplingTooCoarse(format!("{} vertices", c.len())));
    }
    let n = c.len();
    let mut frames = Vec::with_capacity(n);
    for i in 0..n {
        let q = c.vertex(i as isize);
        let raw = c.vertex(i as isize + 1).as_vec3() - c.vertex(i as isize - 1).as_vec3();
        let t = raw.reject_from_unit(q.as_vec3());
        let tn = t.norm();
        if tn < 1e-12 {
            return Err(Error::SamplingTooCoarse(format!("vanishing tangent at vertex {i}")));
        }
        let tangent = t * (1.0 / tn);
        let normal = q.as_vec3().cross(tangent);
        frames.push(Rot3::from_columns(q.as_vec3(), tangent, normal));
    }
    So3Path::new(frames)
}

/// Lifts the rotation path to unit quaternions by nearest-sign continuation
/// and reports the holonomy sign of the closing step: +1 when the lift
/// returns to itself, -1 when it returns to its negative.
pub fn lift_to_quaternions(path: &So3Path) -> Result<(Vec<Quat>, i8)> {
    let frames = path.frames();
    let mut lift = Vec::with_capacity(frames.len());
    let mut prev = frames[0].to_quaternion();
    lift.push(prev);
    for (i, frame) in frames.iter().enumerate().skip(1) {
        let mut q = frame.to_quaternion();
        let d = q.dot(prev);
        if d < 0.0 {
            q = q.scale(-1.0);
        }
        if q.dot(prev) < 0.5 {
            return Err(Error::DiscontinuousPath(format!(
                "ambiguous sign at frame {i} (|dot| = {})",
                d.abs()
            )));
        }
        lift.push(q);
        prev = q;
    }
    // Close the loop through the first frame again.
    let mut closing = frames[0].to_quaternion();
    if closing.dot(prev) < 0.0 {
        closing = closing.scale(-1.0);
    }
    if closing.dot(prev) < 0.5 {
        return Err(Error::DiscontinuousPath("ambiguous sign on the closing step".into()));
    }
    let first = lift[0];
    let sign = if closing.sub(first).norm() < 1e-6 {
        1
    } else if closing.add(first).norm() < 1e-6 {
        -1
    } else {
        return Err(Error::DiscontinuousPath(format!(
            "closing lift matches neither sign (defects {:e} / {:e})",
            closing.sub(first).norm(),
            closing.add(first).norm()
        )));
    };
    Ok((lift, sign))
}

/// The Z/2 invariant: 0 for even holonomy (+1), 1 for odd (-1).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ind2Value {
    pub value: u8,
}

/// Computes the invariant of a closed regular curve.
pub fn ind2(c: &DiscreteCurve) -> Result<Ind2Value> {
    let path = frame_path(c)?;
    let (_, sign) = lift_to_quaternions(&path)?;
    Ok(Ind2Value { value: if sign > 0 { 0 } else { 1 } })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::{covered_great_circle, great_circle, resample_uniform};
    use crate::variation::perturbed_double_circle;
    use std::f64::consts::PI;

    fn rotation_path_about_z(turns: f64, steps: usize) -> So3Path {
        let axis = UnitVec3::from_components(0.0, 0.0, 1.0).unwrap();
        let frames = (0..steps)
            .map(|i| Rot3::from_axis_angle(axis, 2.0 * PI * turns * i as f64 / steps as f64))
            .collect();
        So3Path::new(frames).unwrap()
    }

    #[test]
    fn constant_path_has_even_holonomy() {
        let frames = vec![Rot3::from_axis_angle(UnitVec3::from_components(1.0, 0.0, 0.0).unwrap(), 0.3); 16];
        let path = So3Path::new(frames).unwrap();
        let (_, sign) = lift_to_quaternions(&path).unwrap();
        assert_eq!(sign, 1);
    }

    #[test]
    fn full_rotations_alternate_holonomy() {
        for (turns, expected) in [(1.0, -1), (2.0, 1), (3.0, -1), (4.0, 1)] {
            let path = rotation_path_about_z(turns, 64 * turns as usize);
            let (_, sign) = lift_to_quaternions(&path).unwrap();
            assert_eq!(sign, expected, "turns = {turns}");
        }
    }

    #[test]
    fn frame_path_is_orthonormal() {
        let c = great_circle(256).unwrap();
        let path = frame_path(&c).unwrap();
        for f in path.frames() {
            assert!(f.orthogonality_defect() < 1e-9);
            assert!((f.det() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn coarse_curves_are_rejected() {
        let c = great_circle(32).unwrap();
        assert!(matches!(frame_path(&c), Err(Error::SamplingTooCoarse(_))));
    }

    #[test]
    fn invariant_of_covered_circles() {
        // k-fold cover has invariant k mod 2.
        for (covers, expected) in [(1usize, 1u8), (2, 0), (3, 1), (4, 0)] {
            let c = covered_great_circle(covers, 256 * covers).unwrap();
            assert_eq!(ind2(&c).unwrap().value, expected, "covers = {covers}");
        }
    }

    #[test]
    fn perturbed_double_circle_is_even() {
        let c = perturbed_double_circle(0.05, 512).unwrap();
        assert_eq!(ind2(&c).unwrap().value, 0);
    }

    #[test]
    fn invariant_survives_refinement_and_rotation() {
        let base = perturbed_double_circle(0.07, 512).unwrap();
        let refined = resample_uniform(&base, 1024).unwrap();
        assert_eq!(ind2(&base).unwrap(), ind2(&refined).unwrap());

        let axis = UnitVec3::from_components(0.48, -0.6, 0.64).unwrap();
        let rotated = base.rotated(axis, 1.9);
        assert_eq!(ind2(&base).unwrap(), ind2(&rotated).unwrap());

        let single = great_circle(128).unwrap();
        assert_eq!(ind2(&single).unwrap(), ind2(&single.reversed()).unwrap());
        assert_eq!(ind2(&single.rotated(axis, 0.7)).unwrap().value, 1);
    }
}
