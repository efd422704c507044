//! Closed non-geodesic elastica on the sphere.
//!
//! A periodic curvature profile k(s) = k0 cn(r s, p) solves the stationary
//! equation 2 k'' + k^3 + k = 0 exactly when
//!
//!   k0^2 = 2 p^2 / (1 - 2 p^2),    r^2 = 1 / (2 (1 - 2 p^2)),
//!
//! which restricts the modulus to p < 1/sqrt(2). Integrating the frame system
//! over one curvature period yields a rigid monodromy rotation; its angle as
//! a function of p is strictly decreasing, which pins a unique modulus to
//! every admissible lobe/trip ratio m/n in (0, 2 - sqrt(2)) and closes the
//! curve after n periods. Energies then come in closed form from complete
//! elliptic integrals, cross-checked against curve quadrature.

use std::f64::consts::PI;

use crate::elastic;
use crate::elliptic::{agm_e, agm_k, Modulus};
use crate::error::{Error, Result};
use crate::ode::{integrate_frame, FrameState};
use crate::sphere::DiscreteCurve;
use crate::vec3::{UnitVec3, Vec3};

/// Largest admissible lobe/trip ratio, 2 - sqrt(2).
pub fn max_ratio() -> f64 {
    2.0 - 2.0_f64.sqrt()
}

/// Margin kept between synthesized moduli and the degenerate endpoint.
const MODULUS_MARGIN: f64 = 1e-6;

/// Coprime pair (m, n): m trips along the equator, n lobes, with
/// m/n in (0, 2 - sqrt(2)).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WaveIndex {
    m: u32,
    n: u32,
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl WaveIndex {
    pub fn new(m: u32, n: u32) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::RatioOutOfRange { m, n });
        }
        if gcd(m, n) != 1 {
            return Err(Error::NotCoprime { m, n });
        }
        let ratio = m as f64 / n as f64;
        if !(ratio > 0.0 && ratio < max_ratio()) {
            return Err(Error::RatioOutOfRange { m, n });
        }
        Ok(WaveIndex { m, n })
    }

    pub fn m(self) -> u32 {
        self.m
    }

    pub fn n(self) -> u32 {
        self.n
    }

    pub fn ratio(self) -> f64 {
        self.m as f64 / self.n as f64
    }
}

/// Amplitude/frequency constants of a periodic curvature profile
/// k(s) = k0 cn(r s, p), with arclength period 4 K(p) / r.
#[derive(Clone, Copy, Debug)]
pub struct ElasticaProfile {
    pub p: Modulus,
    pub k0: f64,
    pub r: f64,
    pub period: f64,
}

impl ElasticaProfile {
    /// Curvature at arclength s.
    pub fn curvature(&self, s: f64) -> f64 {
        self.k0 * crate::elliptic::jacobi_cn(self.r * s, self.p)
    }
}

/// Derives the cn-profile constants for a modulus in (0, 1/sqrt(2)).
pub fn profile_from_modulus(p: Modulus) -> Result<ElasticaProfile> {
    let pv = p.get();
    let bound = 0.5_f64.sqrt() - MODULUS_MARGIN;
    if !(pv > 0.0 && pv < bound) {
        return Err(Error::ModulusOutOfRange(pv));
    }
    let denom = 1.0 - 2.0 * pv * pv;
    let k0 = (2.0 * pv * pv / denom).sqrt();
    let r = (1.0 / (2.0 * denom)).sqrt();
    let period = 4.0 * agm_k(pv) / r;
    Ok(ElasticaProfile { p, k0, r, period })
}

/// Standard initial frame: gamma = (1,0,0), T = (0,1,0), curvature at its
/// crest k(0) = k0, k'(0) = 0.
fn initial_state(profile: &ElasticaProfile) -> FrameState {
    [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, profile.k0, 0.0]
}

struct Monodromy {
    /// Rotation angle in (0, 2 pi), oriented so that it is continuous and
    /// decreasing in p with limit 2 pi (2 - sqrt(2)) as p -> 0.
    angle: f64,
}

fn columns_of(y: &FrameState) -> (Vec3, Vec3, Vec3) {
    let gamma = Vec3::new(y[0], y[1], y[2]);
    let tangent = Vec3::new(y[3], y[4], y[5]);
    let normal = gamma.cross(tangent);
    (gamma, tangent, normal)
}

/// Applies the rotation matrix F_end * F_start^T (frames as columns) to v.
fn monodromy_apply(start: &FrameState, end: &FrameState, v: Vec3) -> Vec3 {
    let (g0, t0, n0) = columns_of(start);
    let (g1, t1, n1) = columns_of(end);
    // F_start^T v gives coefficients in the start frame; recombine with the
    // end frame columns.
    g1 * g0.dot(v) + t1 * t0.dot(v) + n1 * n0.dot(v)
}

fn monodromy_of(profile: &ElasticaProfile) -> Result<Monodromy> {
    let y0 = initial_state(profile);
    let mut winding = Vec3::ZERO;
    let mut last_s = 0.0;
    let mut last_gt = Vec3::ZERO;
    let end_state = integrate_frame(y0, 0.0, profile.period, 1e-11, profile.period / 64.0, |s, y| {
        // Accumulate integral of gamma x T to orient the rotation axis.
        let g = Vec3::new(y[0], y[1], y[2]);
        let t = Vec3::new(y[3], y[4], y[5]);
        let gt = g.cross(t);
        if s > last_s {
            winding = winding + (gt + last_gt) * (0.5 * (s - last_s));
        }
        last_s = s;
        last_gt = gt;
    })?;

    // Rotation matrix M = F_end F_start^T; extract angle about the oriented
    // winding axis. trace(M) and the skew part give cos and sin * axis.
    let (g0, t0, n0) = columns_of(&y0);
    let (g1, t1, n1) = columns_of(&end_state);
    let trace = g1.dot(g0) + t1.dot(t0) + n1.dot(n0);

    // skew vector: for M = sum_out outer(col1_i, col0_i), the axial vector of
    // (M - M^T)/2 is (sum col0_i x col1_i) / 2... derive by applying M to
    // basis vectors instead: M e_j known via monodromy_apply.
    let ex = monodromy_apply(&y0, &end_state, Vec3::new(1.0, 0.0, 0.0));
    let ey = monodromy_apply(&y0, &end_state, Vec3::new(0.0, 1.0, 0.0));
    let ez = monodromy_apply(&y0, &end_state, Vec3::new(0.0, 0.0, 1.0));
    let skew = Vec3::new(ey.z - ez.y, ez.x - ex.z, ex.y - ey.x); // 2 sin(angle) * axis

    let wn = winding.norm();
    if wn < 1e-12 {
        return Err(Error::IntegratorFailure("degenerate winding axis".into()));
    }
    let axis = winding * (1.0 / wn);
    let sin_raw = 0.5 * skew.dot(axis);
    let cos_raw = 0.5 * (trace - 1.0);
    let mut alpha = sin_raw.atan2(cos_raw); // rotation about +axis, in (-pi, pi]
    if alpha < 0.0 {
        alpha += 2.0 * PI;
    }
    // Turn the advance about the winding pole into the wavelength angle.
    let angle = 2.0 * PI - alpha;
    Ok(Monodromy { angle })
}

/// Rotation angle of the frame monodromy over one curvature period, in
/// (0, 2 pi), strictly decreasing in p, with small-p limit 2 pi (2 - sqrt 2).
pub fn monodromy_angle(p: Modulus) -> Result<f64> {
    let profile = profile_from_modulus(p)?;
    Ok(monodromy_of(&profile)?.angle)
}

/// Inverts the monodromy angle by bisection: the unique p with
/// angle(p) = 2 pi m / n, located to |angle - target| < 1e-10.
pub fn modulus_for_ratio(m: u32, n: u32) -> Result<Modulus> {
    let index = WaveIndex::new(m, n)?;
    let target = 2.0 * PI * index.ratio();

    let mut lo = 1e-4; // angle(lo) > target for every admissible ratio
    let mut hi = 0.5_f64.sqrt() - 10.0 * MODULUS_MARGIN;
    let angle_lo = monodromy_angle(Modulus::new(lo)?)?;
    if angle_lo <= target {
        // Ratio extremely close to the supremum; push the bracket downward.
        lo = 1e-7;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let angle = monodromy_angle(Modulus::new(mid)?)?;
        if (angle - target).abs() < 1e-10 {
            return Modulus::new(mid);
        }
        if angle > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            return Modulus::new(0.5 * (lo + hi));
        }
    }
    Err(Error::IntegratorFailure(format!(
        "bisection for ratio {m}/{n} did not reach the angle tolerance"
    )))
}

/// A synthesized closed elastica with both energy routes filled in.
#[derive(Clone, Debug)]
pub struct ClosedElastica {
    pub index: WaveIndex,
    pub profile: ElasticaProfile,
    pub curve: DiscreteCurve,
    pub energy_closed_form: f64,
    pub energy_quadrature: f64,
    /// Geodesic gap between the integrated end point and the start point.
    pub closure_gap: f64,
}

/// Closed-form elastic energy 8 n (2E(p) - K(p)) / sqrt(2 - 4 p^2) with
/// p = modulus_for_ratio(m, n).
pub fn energy_closed_form(m: u32, n: u32) -> Result<f64> {
    let index = WaveIndex::new(m, n)?;
    let p = modulus_for_ratio(m, n)?;
    Ok(closed_form_for_modulus(index.n(), p.get()))
}

fn closed_form_for_modulus(n: u32, p: f64) -> f64 {
    8.0 * n as f64 / (2.0 - 4.0 * p * p).sqrt() * (2.0 * agm_e(p) - agm_k(p))
}

/// Integrates the frame over n curvature periods and resamples the trace to
/// `n_vertices` uniformly spaced points.
pub fn synthesize(m: u32, n: u32, n_vertices: usize) -> Result<ClosedElastica> {
    let index = WaveIndex::new(m, n)?;
    if n_vertices < 64 * n as usize {
        return Err(Error::TooFewVertices { min: 64 * n as usize, got: n_vertices });
    }
    let p = modulus_for_ratio(m, n)?;
    let profile = profile_from_modulus(p)?;
    let total = profile.period * n as f64;

    // Record densely enough that piecewise-geodesic resampling stays well
    // below the closure tolerance.
    let h_max = (total / (12.0 * n_vertices as f64)).min(profile.period / 256.0);
    let mut points: Vec<UnitVec3> = Vec::new();
    let y0 = initial_state(&profile);
    let end = integrate_frame(y0, 0.0, total, 1e-11, h_max, |_, y| {
        points.push(UnitVec3::new_unchecked(
            Vec3::new(y[0], y[1], y[2]) * (1.0 / Vec3::new(y[0], y[1], y[2]).norm()),
        ));
    })?;

    let start = points[0];
    let closure_gap = start.geodesic_distance(UnitVec3::new(Vec3::new(end[0], end[1], end[2]))?);
    if closure_gap > 1e-6 {
        return Err(Error::IntegratorFailure(format!(
            "elastica ({m},{n}) failed to close: gap {closure_gap:e}"
        )));
    }

    // Walk the recorded polyline and place n_vertices points at uniform
    // arclength, leaving out the (nearly) duplicated endpoint.
    let curve = resample_open_polyline(&points, n_vertices)?;
    let energy_quadrature = elastic::elastic_energy(&curve)?;
    let energy_closed_form = closed_form_for_modulus(n, p.get());

    Ok(ClosedElastica { index, profile, curve, energy_closed_form, energy_quadrature, closure_gap })
}

fn resample_open_polyline(points: &[UnitVec3], n_vertices: usize) -> Result<DiscreteCurve> {
    let m = points.len();
    let mut cumulative = Vec::with_capacity(m);
    cumulative.push(0.0);
    for i in 1..m {
        let prev = cumulative[i - 1];
        cumulative.push(prev + points[i - 1].geodesic_distance(points[i]));
    }
    let total = cumulative[m - 1];
    let mut vertices = Vec::with_capacity(n_vertices);
    let mut edge = 0usize;
    for j in 0..n_vertices {
        let target = total * j as f64 / n_vertices as f64;
        while edge + 2 < m && cumulative[edge + 1] <= target {
            edge += 1;
        }
        let span = cumulative[edge + 1] - cumulative[edge];
        let t = if span > 0.0 { (target - cumulative[edge]) / span } else { 0.0 };
        let a = points[edge].as_vec3();
        let b = points[edge + 1].as_vec3();
        let theta = points[edge].geodesic_distance(points[edge + 1]);
        let v = if theta < 1e-12 {
            a
        } else {
            let s = theta.sin();
            a * (((1.0 - t) * theta).sin() / s) + b * ((t * theta).sin() / s)
        };
        vertices.push(UnitVec3::new(v)?);
    }
    DiscreteCurve::new(vertices)
}

/// One catalog row of the critical-value scan.
#[derive(Clone, Debug)]
pub struct GapScanEntry {
    pub m: u32,
    pub n: u32,
    pub p: f64,
    pub energy: f64,
}

/// Result of scanning every admissible (m, n) with n <= n_max.
#[derive(Clone, Debug)]
pub struct GapScanReport {
    pub entries: Vec<GapScanEntry>,
    pub min_energy: f64,
    /// Geodesic critical values 2 k pi inside (2 pi, 8 pi / sqrt 2].
    pub geodesic_values_in_window: Vec<f64>,
    pub pass: bool,
}

/// Enumerates admissible coprime pairs with n <= n_max in lexicographic
/// order.
pub fn admissible_pairs(n_max: u32) -> Vec<(u32, u32)> {
    let mut pairs = Vec::new();
    for n in 2..=n_max {
        for m in 1..n {
            if (m as f64 / n as f64) < max_ratio() && gcd(m, n) == 1 {
                pairs.push((m, n));
            }
        }
    }
    pairs
}

/// Checks that every non-geodesic closed elastica with n <= n_max has energy
/// strictly above 8 pi / sqrt 2, and that 4 pi is the only geodesic critical
/// value in (2 pi, 8 pi / sqrt 2].
pub fn critical_gap_scan(n_max: u32) -> Result<GapScanReport> {
    if n_max < 2 {
        return Err(Error::InvalidConfig(format!("n_max {n_max} below 2")));
    }
    let threshold = 8.0 * PI / 2.0_f64.sqrt();
    let mut entries = Vec::new();
    let mut min_energy = f64::INFINITY;
    for (m, n) in admissible_pairs(n_max) {
        let p = modulus_for_ratio(m, n)?;
        let energy = closed_form_for_modulus(n, p.get());
        min_energy = min_energy.min(energy);
        entries.push(GapScanEntry { m, n, p: p.get(), energy });
    }

    let mut geodesic_values_in_window = Vec::new();
    let mut k = 1u32;
    loop {
        let value = 2.0 * k as f64 * PI;
        if value > threshold {
            break;
        }
        if value > 2.0 * PI {
            geodesic_values_in_window.push(value);
        }
        k += 1;
    }

    let all_above = entries.iter().all(|e| e.energy > threshold);
    let window_is_4pi = geodesic_values_in_window.len() == 1
        && (geodesic_values_in_window[0] - 4.0 * PI).abs() < 1e-12;
    Ok(GapScanReport { entries, min_energy, geodesic_values_in_window, pass: all_above && window_is_4pi })
}
