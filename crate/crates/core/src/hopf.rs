//! Hopf lifts: closed base curves on the 2-sphere lift to flat tori in the
//! 3-sphere, whose Willmore energy equals pi times the base curve's elastic
//! energy. The lift is transported horizontally step by step, closed up by a
//! uniform fiber-phase gauge, and swept by the fiber circle; the Willmore
//! integrand is evaluated from a local quadratic fit of the surface inside
//! the 3-sphere.

use std::f64::consts::PI;
use std::io::Write;

use crate::elastic;
use crate::error::{Error, Result};
use crate::quat::Quat;
use crate::sphere::{self, DiscreteCurve};
use crate::vec3::{UnitVec3, Vec3};

/// The imaginary unit whose conjugation orbit realizes the fibration.
const BASE_DIRECTION: Quat = Quat { w: 0.0, x: 1.0, y: 0.0, z: 0.0 };

/// The Hopf map as conjugation of a fixed unit imaginary quaternion:
/// pi(q) = q i q^-1. The identity maps to (1, 0, 0); the whole fiber
/// q e^{i theta} maps to the same point.
pub fn hopf_projection(q: Quat) -> UnitVec3 {
    let v = q.mul(BASE_DIRECTION).mul(q.conjugate());
    UnitVec3::new(v.imaginary()).expect("conjugation preserves unit imaginary quaternions")
}

/// Unit quaternion rotating `from` to `to` by the minimal rotation; any
/// perpendicular axis is used for near-antipodal inputs.
fn minimal_rotation(from: UnitVec3, to: UnitVec3) -> Result<Quat> {
    let cross = from.cross(to);
    let s = cross.norm();
    let angle = s.atan2(from.dot(to));
    if s < 1e-14 {
        if from.dot(to) > 0.0 {
            return Ok(Quat::IDENTITY);
        }
        // Antipodal: rotate by pi about any perpendicular direction.
        let helper = if from.x().abs() < 0.9 { Vec3::new(1.0, 0.0, 0.0) } else { Vec3::new(0.0, 1.0, 0.0) };
        let axis = UnitVec3::new(from.as_vec3().cross(helper))?;
        return Ok(Quat::from_axis_angle(axis, PI));
    }
    let axis = UnitVec3::new_unchecked(cross * (1.0 / s));
    Ok(Quat::from_axis_angle(axis, angle))
}

fn fiber_phase(theta: f64) -> Quat {
    Quat::new(theta.cos(), theta.sin(), 0.0, 0.0)
}

/// A doubly cyclic grid of unit quaternions sampling a Hopf torus: the first
/// index follows the base curve, the second the fiber circle.
#[derive(Clone, Debug)]
pub struct HopfTorusSample {
    grid: Vec<Vec<Quat>>,
}

impl HopfTorusSample {
    pub fn n_s(&self) -> usize {
        self.grid.len()
    }

    pub fn n_f(&self) -> usize {
        self.grid[0].len()
    }

    pub fn at(&self, i: isize, j: isize) -> Quat {
        let ns = self.grid.len() as isize;
        let nf = self.grid[0].len() as isize;
        self.grid[i.rem_euclid(ns) as usize][j.rem_euclid(nf) as usize]
    }

    pub fn grid(&self) -> &[Vec<Quat>] {
        &self.grid
    }
}

/// Horizontal lift of the base curve swept by the fiber circle. Every grid
/// sample projects back onto its base point; a drift beyond 1e-5 aborts.
pub fn lift_curve(c: &DiscreteCurve, n_f: usize) -> Result<HopfTorusSample> {
    if n_f < 32 {
        return Err(Error::DegenerateGrid(format!("fiber resolution {n_f} below 32")));
    }
    let n = c.len();
    let mut lift = Vec::with_capacity(n);
    let mut q = minimal_rotation(
        UnitVec3::new_unchecked(BASE_DIRECTION.imaginary()),
        c.vertex(0),
    )?;
    lift.push(q);
    for i in 1..n {
        let p = minimal_rotation(c.vertex(i as isize - 1), c.vertex(i as isize))?;
        q = p.mul(q).normalized()?;
        lift.push(q);
    }
    // Fiber phase left over after the closing step.
    let closing = minimal_rotation(c.vertex(n as isize - 1), c.vertex(0))?;
    let around = closing.mul(q).normalized()?;
    let residue = lift[0].conjugate().mul(around);
    let beta = residue.x.atan2(residue.w);

    // Spread the phase defect uniformly in arclength so the grid closes in
    // the curve direction while every sample stays on its fiber.
    let mut cumulative = 0.0;
    let total: f64 = (0..n).map(|i| c.edge_length(i)).sum();
    let mut gauged = Vec::with_capacity(n);
    for (i, qi) in lift.iter().enumerate() {
        let phase = -beta * cumulative / total;
        gauged.push(qi.mul(fiber_phase(phase)).normalized()?);
        cumulative += c.edge_length(i);
    }

    let mut grid = Vec::with_capacity(n);
    for (i, qi) in gauged.iter().enumerate() {
        let mut row = Vec::with_capacity(n_f);
        for j in 0..n_f {
            let theta = 2.0 * PI * j as f64 / n_f as f64;
            row.push(qi.mul(fiber_phase(theta)));
        }
        // Projection consistency against the base point.
        let defect = hopf_projection(row[0]).geodesic_distance(c.vertex(i as isize));
        if defect > 1e-5 {
            return Err(Error::LiftDrift(defect));
        }
        grid.push(row);
    }
    Ok(HopfTorusSample { grid })
}

fn dot4(a: [f64; 4], b: [f64; 4]) -> f64 {
    a.iter().zip(&b).map(|(x, y)| x * y).sum()
}

fn sub4(a: [f64; 4], b: [f64; 4]) -> [f64; 4] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]]
}

fn scale4(a: [f64; 4], s: f64) -> [f64; 4] {
    [a[0] * s, a[1] * s, a[2] * s, a[3] * s]
}

fn norm4(a: [f64; 4]) -> f64 {
    dot4(a, a).sqrt()
}

/// Generalized cross product in R^4: orthogonal to all three arguments.
fn cross4(u: [f64; 4], v: [f64; 4], w: [f64; 4]) -> [f64; 4] {
    let det3 = |a: [f64; 3], b: [f64; 3], c: [f64; 3]| -> f64 {
        a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
            + a[2] * (b[0] * c[1] - b[1] * c[0])
    };
    let drop = |a: [f64; 4], k: usize| -> [f64; 3] {
        let mut out = [0.0; 3];
        let mut idx = 0;
        for (i, &value) in a.iter().enumerate() {
            if i != k {
                out[idx] = value;
                idx += 1;
            }
        }
        out
    };
    let mut out = [0.0; 4];
    for k in 0..4 {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        out[k] = sign * det3(drop(u, k), drop(v, k), drop(w, k));
    }
    out
}

/// Solves a small dense system by Gauss-Jordan with partial pivoting.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&x, &y| a[x][col].abs().partial_cmp(&a[y][col].abs()).unwrap())?;
        if a[pivot][col].abs() < 1e-14 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        let diag = a[col][col];
        for row in 0..n {
            if row != col {
                let factor = a[row][col] / diag;
                for c in col..n {
                    let upd = a[col][c];
                    a[row][c] -= factor * upd;
                }
                b[row] -= factor * b[col];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// Discrete Willmore energy `integral of 1 + |H|^2 / 4` over the sampled
/// torus. The mean curvature is the trace of the second fundamental form
/// obtained from a quadratic fit of the geodesic-normal height over the
/// eight neighboring samples; the area element comes from the centered
/// first fundamental form. Second-order convergent in the grid spacing.
pub fn willmore_energy(sample: &HopfTorusSample) -> Result<f64> {
    let ns = sample.n_s();
    let nf = sample.n_f();
    if ns < 64 || nf < 64 {
        return Err(Error::DegenerateGrid(format!("grid {ns} x {nf} below 64 x 64")));
    }

    let mut total = 0.0;
    for i in 0..ns as isize {
        for j in 0..nf as isize {
            let q = sample.at(i, j).as_array();

            let project = |p: [f64; 4]| -> [f64; 4] { sub4(p, scale4(q, dot4(p, q))) };
            let tu = project(scale4(
                sub4(sample.at(i + 1, j).as_array(), sample.at(i - 1, j).as_array()),
                0.5,
            ));
            let tv = project(scale4(
                sub4(sample.at(i, j + 1).as_array(), sample.at(i, j - 1).as_array()),
                0.5,
            ));

            let e = dot4(tu, tu);
            let f = dot4(tu, tv);
            let g = dot4(tv, tv);
            let det = e * g - f * f;
            if det <= 0.0 {
                return Err(Error::DegenerateGrid(format!("degenerate metric at ({i}, {j})")));
            }
            let area = det.sqrt();

            // Orthonormal surface basis and the normal direction inside the
            // 3-sphere's tangent space.
            let u1 = scale4(tu, 1.0 / e.sqrt());
            let v_perp = sub4(tv, scale4(u1, dot4(tv, u1)));
            let vp_norm = norm4(v_perp);
            if vp_norm < 1e-14 {
                return Err(Error::DegenerateGrid(format!("collapsed cell at ({i}, {j})")));
            }
            let u2 = scale4(v_perp, 1.0 / vp_norm);
            let normal_raw = cross4(q, u1, u2);
            let nr = norm4(normal_raw);
            if nr < 1e-14 {
                return Err(Error::DegenerateGrid(format!("no normal at ({i}, {j})")));
            }
            let normal = scale4(normal_raw, 1.0 / nr);

            // Quadratic fit of the log-map height over the 8 neighbors.
            let mut ata = vec![vec![0.0; 5]; 5];
            let mut atb = vec![0.0; 5];
            for di in -1..=1 {
                for dj in -1..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let p = sample.at(i + di, j + dj).as_array();
                    let cosang = dot4(p, q).clamp(-1.0, 1.0);
                    let ang = cosang.acos();
                    let rest = sub4(p, scale4(q, cosang));
                    let rn = norm4(rest);
                    let log = if rn < 1e-15 { [0.0; 4] } else { scale4(rest, ang / rn) };
                    let a = dot4(log, u1);
                    let b = dot4(log, u2);
                    let h = dot4(log, normal);
                    let row = [a, b, 0.5 * a * a, a * b, 0.5 * b * b];
                    for r in 0..5 {
                        for c in 0..5 {
                            ata[r][c] += row[r] * row[c];
                        }
                        atb[r] += row[r] * h;
                    }
                }
            }
            let coeffs = solve_dense(ata, atb)
                .ok_or_else(|| Error::DegenerateGrid(format!("singular fit at ({i}, {j})")))?;
            let mean_curvature = coeffs[2] + coeffs[4];
            total += (1.0 + 0.25 * mean_curvature * mean_curvature) * area;
        }
    }
    Ok(total)
}

/// Willmore thresholds of the lifted torus and elastic thresholds of the
/// base curve.
#[derive(Clone, Debug)]
pub struct ThresholdReport {
    pub willmore: f64,
    pub base_energy: f64,
    pub below_4pi2: bool,
    pub below_8pi2_sqrt2: bool,
    /// The Li-Yau embeddedness threshold: energies below 8 pi force an
    /// almost-everywhere injective parametrization (reported, not proven).
    pub below_8pi: bool,
    pub base_below_4pi: bool,
    pub base_below_8pi_sqrt2: bool,
}

/// Lifts the base curve at the default grid and compares both energies to
/// their thresholds.
pub fn threshold_report(c: &DiscreteCurve) -> Result<ThresholdReport> {
    threshold_report_with_grid(c, 256, 64)
}

pub fn threshold_report_with_grid(c: &DiscreteCurve, n_s: usize, n_f: usize) -> Result<ThresholdReport> {
    let base = sphere::resample_uniform(c, n_s)?;
    let torus = lift_curve(&base, n_f)?;
    let willmore = willmore_energy(&torus)?;
    let base_energy = elastic::elastic_energy(&base)?;
    let sqrt2 = 2.0_f64.sqrt();
    Ok(ThresholdReport {
        willmore,
        base_energy,
        below_4pi2: willmore < 4.0 * PI * PI,
        below_8pi2_sqrt2: willmore < 8.0 * PI * PI / sqrt2,
        below_8pi: willmore < 8.0 * PI,
        base_below_4pi: base_energy < 4.0 * PI,
        base_below_8pi_sqrt2: base_energy < 8.0 * PI / sqrt2,
    })
}

/// Writes the torus as an OBJ quad mesh after stereographic projection from
/// the given unit pole in R^4. The pole must stay clear of the surface.
pub fn export_obj<W: Write>(sample: &HopfTorusSample, pole: [f64; 4], mut w: W) -> Result<()> {
    let pn = norm4(pole);
    if !(pn > 0.5) {
        return Err(Error::DegenerateGrid("stereographic pole must be a unit 4-vector".into()));
    }
    let pole = scale4(pole, 1.0 / pn);

    // Orthonormal basis of the pole's orthogonal complement, built by
    // Gram-Schmidt over the best-conditioned coordinate axes.
    let mut basis: Vec<[f64; 4]> = Vec::new();
    for k in 0..4 {
        if basis.len() == 3 {
            break;
        }
        let mut e = [0.0; 4];
        e[k] = 1.0;
        let mut v = sub4(e, scale4(pole, dot4(e, pole)));
        for b in &basis {
            v = sub4(v, scale4(*b, dot4(v, *b)));
        }
        let n = norm4(v);
        if n > 1e-6 {
            basis.push(scale4(v, 1.0 / n));
        }
    }

    let ns = sample.n_s();
    let nf = sample.n_f();
    for row in sample.grid() {
        for q in row {
            let x = q.as_array();
            let denom = 1.0 - dot4(x, pole);
            if denom.abs() < 1e-9 {
                return Err(Error::DegenerateGrid("surface passes through the projection pole".into()));
            }
            let coords: Vec<f64> = basis.iter().map(|b| dot4(x, *b) / denom).collect();
            writeln!(&mut w, "v {} {} {}", coords[0], coords[1], coords[2])
                .map_err(|e| Error::DegenerateGrid(format!("obj write failed: {e}")))?;
        }
    }
    for i in 0..ns {
        for j in 0..nf {
            let a = i * nf + j + 1;
            let b = ((i + 1) % ns) * nf + j + 1;
            let c = ((i + 1) % ns) * nf + (j + 1) % nf + 1;
            let d = i * nf + (j + 1) % nf + 1;
            writeln!(&mut w, "f {a} {b} {c} {d}")
                .map_err(|e| Error::DegenerateGrid(format!("obj write failed: {e}")))?;
        }
    }
    Ok(())
}
