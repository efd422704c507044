//! Discrete geodesic curvature, the elastic energy
//! `integral of (1 + k^2) d(arclength)`, and the L2-gradient velocity of its
//! flow, `-(2 k'' + k^3 + k) N`, on closed discrete curves.
//!
//! Sign convention: curvature is measured against the normal
//! `N = point x tangent`, with no per-curve choices anywhere.

use crate::error::{Error, Result};
use crate::sphere::{self, DiscreteCurve};
use crate::vec3::Vec3;

/// Signed geodesic curvature sampled at each vertex (units 1/length).
#[derive(Clone, Debug)]
pub struct CurvatureField {
    values: Vec<f64>,
}

impl CurvatureField {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// The flow velocity: one tangent vector per vertex, orthogonal both to the
/// sphere radius and to the curve tangent.
#[derive(Clone, Debug)]
pub struct VelocityField {
    vectors: Vec<Vec3>,
}

impl VelocityField {
    pub fn vectors(&self) -> &[Vec3] {
        &self.vectors
    }

    pub fn sup_norm(&self) -> f64 {
        self.vectors.iter().fold(0.0, |m, v| m.max(v.norm()))
    }
}

/// Per-vertex quantities shared by the energy and velocity computations.
pub(crate) struct VertexData {
    /// Signed curvature k_i.
    pub k: Vec<f64>,
    /// Dual lengths (l_prev + l_next) / 2; these sum to the curve length.
    pub weight: Vec<f64>,
    /// Backward edge lengths l_{i-1,i}.
    pub h_prev: Vec<f64>,
    /// Forward edge lengths l_{i,i+1}.
    pub h_next: Vec<f64>,
    /// Unit normals N_i = position x tangent.
    pub normal: Vec<Vec3>,
}

pub(crate) fn vertex_data(c: &DiscreteCurve) -> Result<VertexData> {
    let n = c.len();
    let mut k = Vec::with_capacity(n);
    let mut weight = Vec::with_capacity(n);
    let mut h_prev = Vec::with_capacity(n);
    let mut h_next = Vec::with_capacity(n);
    let mut normal = Vec::with_capacity(n);

    for i in 0..n {
        let p = c.vertex(i as isize - 1);
        let q = c.vertex(i as isize);
        let r = c.vertex(i as isize + 1);

        let lm = p.geodesic_distance(q);
        let lp = q.geodesic_distance(r);
        if lm <= sphere::MIN_EDGE_GAP || lp <= sphere::MIN_EDGE_GAP {
            return Err(Error::DegenerateEdge { index: i, length: lm.min(lp) });
        }

        // Unit tangents of the adjacent geodesic edges, both evaluated at q:
        // incoming direction (cos l q - p)/sin l and outgoing (r - cos l q)/sin l.
        let t_in = (q.as_vec3() * lm.cos() - p.as_vec3()) * (1.0 / lm.sin());
        let t_out = (r.as_vec3() - q.as_vec3() * lp.cos()) * (1.0 / lp.sin());

        // Signed turning angle at q, positive toward N = q x t.
        let sin_phi = t_in.cross(t_out).dot(q.as_vec3());
        let cos_phi = t_in.dot(t_out);
        let phi = sin_phi.atan2(cos_phi);

        let w = 0.5 * (lm + lp);
        k.push(phi / w);
        weight.push(w);
        h_prev.push(lm);
        h_next.push(lp);

        let t_mid = t_in + t_out;
        let tn = t_mid.norm();
        let tangent = if tn > 1e-12 { t_mid * (1.0 / tn) } else { t_out };
        normal.push(q.as_vec3().cross(tangent));
    }

    Ok(VertexData { k, weight, h_prev, h_next, normal })
}

/// Second-order signed geodesic curvature from turning angles of the
/// parallel-transported edge tangents, divided by the dual arclength.
pub fn geodesic_curvature(c: &DiscreteCurve) -> Result<CurvatureField> {
    let data = vertex_data(c)?;
    Ok(CurvatureField { values: data.k })
}

/// Elastic energy: quadrature of 1 + k^2 against the geodesic arclength
/// measure. Always at least the curve length.
pub fn elastic_energy(c: &DiscreteCurve) -> Result<f64> {
    let data = vertex_data(c)?;
    Ok(energy_from_data(&data))
}

pub(crate) fn energy_from_data(data: &VertexData) -> f64 {
    data.k
        .iter()
        .zip(&data.weight)
        .map(|(k, w)| (1.0 + k * k) * w)
        .sum()
}

/// Second arclength derivative on the cyclic non-uniform grid: the quadratic
/// Lagrange interpolant through (i-1, i, i+1) differentiated twice.
pub(crate) fn second_derivative(values: &[f64], h_prev: &[f64], h_next: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let h1 = h_prev[i];
        let h2 = h_next[i];
        let fm = values[(i + n - 1) % n];
        let f0 = values[i];
        let fp = values[(i + 1) % n];
        out.push(2.0 * (h2 * fm - (h1 + h2) * f0 + h1 * fp) / (h1 * h2 * (h1 + h2)));
    }
    out
}

/// Scalar flow speed -(2 k'' + k^3 + k) and the unit normals it acts along.
pub(crate) fn scalar_velocity(data: &VertexData) -> Vec<f64> {
    let kpp = second_derivative(&data.k, &data.h_prev, &data.h_next);
    data.k
        .iter()
        .zip(&kpp)
        .map(|(&k, &kpp)| -(2.0 * kpp + k * k * k + k))
        .collect()
}

/// The L2-gradient descent velocity of the elastic energy, vanishing on
/// covered great circles and on the closed elastica profiles.
pub fn flow_velocity(c: &DiscreteCurve) -> Result<VelocityField> {
    if c.len() < 32 {
        return Err(Error::TooFewVertices { min: 32, got: c.len() });
    }
    let data = vertex_data(c)?;
    let speed = scalar_velocity(&data);
    let vectors = speed
        .iter()
        .zip(&data.normal)
        .map(|(&s, &n)| n * s)
        .collect();
    Ok(VelocityField { vectors })
}

/// Outcome of the finite-difference gradient consistency check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GradientCheck {
    /// |dE/dt(0) + <V,V>| / <V,V> along the exp-map displacement by t V.
    Defect(f64),
    /// The squared velocity norm is below 1e-6; the curve is numerically
    /// critical and the ratio is meaningless.
    NearCritical,
}

/// Compares the analytic identity dE/dt = -<V, V> at t = 0 against a centered
/// finite difference of the energy along the displacement by t * field.
pub fn gradient_consistency_check(
    c: &DiscreteCurve,
    field: &VelocityField,
    h: f64,
) -> Result<GradientCheck> {
    if !(1e-6..=1e-3).contains(&h) {
        return Err(Error::InvalidConfig(format!("finite-difference step {h} outside [1e-6, 1e-3]")));
    }
    let data = vertex_data(c)?;
    let vv: f64 = field
        .vectors
        .iter()
        .zip(&data.weight)
        .map(|(v, w)| v.norm_sq() * w)
        .sum();
    if vv < 1e-6 {
        return Ok(GradientCheck::NearCritical);
    }
    let displaced = |t: f64| -> Result<f64> {
        let mut vertices = Vec::with_capacity(c.len());
        for (q, v) in c.vertices().iter().zip(&field.vectors) {
            vertices.push(sphere::exp_map(*q, *v * t)?);
        }
        elastic_energy(&DiscreteCurve::new(vertices)?)
    };
    let de = (displaced(h)? - displaced(-h)?) / (2.0 * h);
    Ok(GradientCheck::Defect((de + vv).abs() / vv))
}
