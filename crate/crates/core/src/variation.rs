//! Second variation of the elastic energy at the doubly covered great circle,
//! its exact splitting into two single-loop forms, and the bump-perturbed
//! initial curve for the flow experiments.
//!
//! A normal field along the double cover is a pair of profiles
//! (phi1, phi2) on the circle; with z(t) = (phi1 (+) phi2)(exp(4 pi i t)) / 4 pi
//! on [0, 1], the quadratic form is
//!
//!   8 pi * integral of (z''/4pi + 4 pi z)(z''/4pi + 2 pi z) dt,
//!
//! which reproduces the second derivative of the energy along the exp-map
//! perturbation and splits at t = 1/2 into the two single-loop forms whenever
//! both profiles close smoothly at the basepoint.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::sphere::DiscreteCurve;
use crate::spectral::second_derivative_periodic;
use crate::vec3::{UnitVec3, Vec3};

/// Default upper bound for the perturbation size of the distorted double
/// circle; the energy window tests validate it empirically.
pub const DEFAULT_EPS_MAX: f64 = 0.15;

/// Default sample count for profiles and bump tables.
pub const DEFAULT_SAMPLES: usize = 1024;

const SEAM_MISMATCH_TOL: f64 = 1e-8;

/// Value of the flat bump at parameter t in [0, 2 pi]: the product
/// exp(-1/t^2) exp(-1/(2 pi - t)^2) scaled to maximum 1 (attained at pi),
/// vanishing with all derivatives at both endpoints and positive inside.
pub fn bump_value(t: f64) -> f64 {
    if t <= 0.0 || t >= 2.0 * PI {
        return 0.0;
    }
    let peak = 2.0 / (PI * PI); // exponent at the midpoint
    let exponent = peak - 1.0 / (t * t) - 1.0 / ((2.0 * PI - t) * (2.0 * PI - t));
    exponent.exp()
}

/// A sampled copy of the bump on [0, 2 pi], endpoints included.
#[derive(Clone, Debug)]
pub struct BumpProfile {
    samples: Vec<f64>,
}

impl BumpProfile {
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }
}

/// Samples the flat bump at DEFAULT_SAMPLES + 1 points of [0, 2 pi].
pub fn bump_phi() -> BumpProfile {
    let m = DEFAULT_SAMPLES;
    let samples = (0..=m).map(|j| bump_value(2.0 * PI * j as f64 / m as f64)).collect();
    BumpProfile { samples }
}

/// A pair of periodic scalar profiles defining a normal field along the
/// doubly covered great circle. Profiles are uniform samples over [0, 2 pi);
/// sample 0 sits at the basepoint.
#[derive(Clone, Debug)]
pub struct NormalPerturbation {
    phi1: Vec<f64>,
    phi2: Vec<f64>,
    smooth_closing: bool,
    seam_mismatch: f64,
}

impl NormalPerturbation {
    pub fn new(phi1: Vec<f64>, phi2: Vec<f64>) -> Result<Self> {
        if phi1.len() < 256 || phi1.len() != phi2.len() {
            return Err(Error::MalformedPerturbation(format!(
                "profiles need >= 256 samples of equal length, got {} and {}",
                phi1.len(),
                phi2.len()
            )));
        }
        if !phi1.iter().chain(&phi2).all(|v| v.is_finite()) {
            return Err(Error::MalformedPerturbation("non-finite sample".into()));
        }
        let m1 = seam_mismatch(&phi1);
        let m2 = seam_mismatch(&phi2);
        let seam = m1.max(m2);
        let scale = phi1
            .iter()
            .chain(&phi2)
            .fold(1.0_f64, |m, v| m.max(v.abs()));
        let smooth_closing = seam <= SEAM_MISMATCH_TOL * scale;
        Ok(NormalPerturbation { phi1, phi2, smooth_closing, seam_mismatch: seam })
    }

    /// The bump pair (phi, -phi): the canonical perturbation that raises the
    /// energy on both loops.
    pub fn bump_pair() -> Self {
        let m = DEFAULT_SAMPLES;
        let phi1: Vec<f64> = (0..m).map(|j| bump_value(2.0 * PI * j as f64 / m as f64)).collect();
        let phi2: Vec<f64> = phi1.iter().map(|v| -v).collect();
        NormalPerturbation::new(phi1, phi2).expect("bump profiles are well formed")
    }

    pub fn len(&self) -> usize {
        self.phi1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi1.is_empty()
    }

    pub fn phi1(&self) -> &[f64] {
        &self.phi1
    }

    pub fn phi2(&self) -> &[f64] {
        &self.phi2
    }

    pub fn smooth_closing(&self) -> bool {
        self.smooth_closing
    }
}

/// Mismatch between one-sided derivative estimates (orders 1..4) across the
/// periodic seam, in finite-difference units so that noise amplification from
/// small spacings stays out of the measure. Smooth periodic profiles give
/// mismatches at rounding level; a derivative jump at the seam shows up at
/// O(spacing).
fn seam_mismatch(samples: &[f64]) -> f64 {
    let n = samples.len();
    let stencil = 7usize;
    // Right side: offsets 0..5 from the seam; left side: offsets 0..-5.
    let right: Vec<f64> = (0..stencil).map(|i| samples[i % n]).collect();
    let left: Vec<f64> = (0..stencil).map(|i| samples[(n - i % n) % n]).collect();
    let mut worst: f64 = 0.0;
    for order in 1..=4 {
        let c = one_sided_coefficients(order, stencil);
        let dr: f64 = c.iter().zip(&right).map(|(c, f)| c * f).sum();
        let dl: f64 = c.iter().zip(&left).map(|(c, f)| c * f).sum();
        // Left-side offsets are negated, which flips odd derivatives.
        let dl = if order % 2 == 1 { -dl } else { dl };
        worst = worst.max((dr - dl).abs());
    }
    worst
}

/// Coefficients c_i with sum c_i f(i) ~ h^r f^(r)(0) for integer offsets
/// 0..len-1, from the Vandermonde system sum c_i i^k = r! delta_{k r}.
fn one_sided_coefficients(order: usize, len: usize) -> Vec<f64> {
    let mut a = vec![vec![0.0; len + 1]; len];
    for (k, row) in a.iter_mut().enumerate() {
        for i in 0..len {
            row[i] = (i as f64).powi(k as i32);
        }
        row[len] = if k == order { factorial(order) } else { 0.0 };
    }
    // Gaussian elimination with partial pivoting.
    for col in 0..len {
        let pivot = (col..len)
            .max_by(|&x, &y| a[x][col].abs().partial_cmp(&a[y][col].abs()).unwrap())
            .unwrap();
        a.swap(col, pivot);
        let diag = a[col][col];
        for row in 0..len {
            if row != col && a[row][col] != 0.0 {
                let factor = a[row][col] / diag;
                for c in col..=len {
                    let upd = a[col][c];
                    a[row][c] -= factor * upd;
                }
            }
        }
    }
    (0..len).map(|i| a[i][len] / a[i][i]).collect()
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

fn concatenated_profile(pert: &NormalPerturbation) -> Vec<f64> {
    let mut g = Vec::with_capacity(2 * pert.len());
    g.extend_from_slice(&pert.phi1);
    g.extend_from_slice(&pert.phi2);
    g
}

fn form_integrand(pert: &NormalPerturbation) -> Vec<f64> {
    let g = concatenated_profile(pert);
    let z: Vec<f64> = g.iter().map(|v| v / (4.0 * PI)).collect();
    let zpp = second_derivative_periodic(&z, 1.0);
    z.iter()
        .zip(&zpp)
        .map(|(&z, &zpp)| (zpp / (4.0 * PI) + 4.0 * PI * z) * (zpp / (4.0 * PI) + 2.0 * PI * z))
        .collect()
}

/// The quadratic form of the second variation at the doubly covered great
/// circle, evaluated by composite quadrature with spectral differentiation.
/// Non-negative for every admissible perturbation; zero exactly on the rigid
/// rotation modes.
pub fn second_variation_form(pert: &NormalPerturbation) -> f64 {
    let integrand = form_integrand(pert);
    let mean = integrand.iter().sum::<f64>() / integrand.len() as f64;
    8.0 * PI * mean
}

/// Splits the form at t = 1/2 into the two single-loop second variations.
/// Requires both profiles to close smoothly at the basepoint.
pub fn split_form(pert: &NormalPerturbation) -> Result<(f64, f64)> {
    if !pert.smooth_closing {
        return Err(Error::NotSmoothlyClosing(pert.seam_mismatch));
    }
    let integrand = form_integrand(pert);
    let n = integrand.len();
    let m = n / 2;
    let dt = 1.0 / n as f64;
    // Closed trapezoid on each half; the interface samples are shared.
    let trapezoid = |lo: usize, hi: usize| -> f64 {
        let mut acc = 0.5 * (integrand[lo % n] + integrand[hi % n]);
        for j in (lo + 1)..hi {
            acc += integrand[j % n];
        }
        acc * dt
    };
    let first = 8.0 * PI * trapezoid(0, m);
    let second = 8.0 * PI * trapezoid(m, n);
    Ok((first, second))
}

/// The equator point at angle theta with its constant normal +z.
fn equator(theta: f64) -> Vec3 {
    Vec3::new(theta.cos(), theta.sin(), 0.0)
}

/// Displaces the doubly covered equator by the signed normal profile
/// `amplitude * (phi1, phi2)` evaluated from the bump, producing a closed
/// regular curve. Internal building block shared by the public constructor
/// and the finite-difference oracles.
pub(crate) fn displaced_double_circle(amplitude: f64, n: usize) -> Result<DiscreteCurve> {
    let mut vertices = Vec::with_capacity(n);
    for j in 0..n {
        let s = 4.0 * PI * j as f64 / n as f64;
        let (theta, sign) = if s < 2.0 * PI { (s, 1.0) } else { (s - 2.0 * PI, -1.0) };
        let phi = sign * amplitude * bump_value(theta);
        let base = equator(theta);
        let v = base * phi.cos() + Vec3::new(0.0, 0.0, 1.0) * phi.sin();
        vertices.push(UnitVec3::new(v)?);
    }
    DiscreteCurve::new(vertices)
}

/// The bump-perturbed doubly covered great circle: the initial curve of the
/// counterexample flow. It is regular, closed, touches itself exactly once,
/// and its energy decreases to 4 pi under the elastic flow.
pub fn perturbed_double_circle(eps: f64, n: usize) -> Result<DiscreteCurve> {
    perturbed_double_circle_with_max(eps, n, DEFAULT_EPS_MAX)
}

/// Same construction with an explicit upper bound on eps.
pub fn perturbed_double_circle_with_max(eps: f64, n: usize, eps_max: f64) -> Result<DiscreteCurve> {
    if !(eps > 0.0 && eps <= eps_max) {
        return Err(Error::EpsOutOfRange { got: eps, max: eps_max });
    }
    if n < 256 {
        return Err(Error::TooFewVertices { min: 256, got: n });
    }
    displaced_double_circle(eps, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elastic::elastic_energy;
    use crate::sphere::{covered_great_circle, self_intersection_count};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn trig_profile(coeffs: &[(f64, f64)], m: usize) -> Vec<f64> {
        (0..m)
            .map(|j| {
                let t = 2.0 * PI * j as f64 / m as f64;
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, &(a, b))| a * ((k + 1) as f64 * t).cos() + b * ((k + 1) as f64 * t).sin())
                    .sum()
            })
            .collect()
    }

    fn random_smooth_perturbation(rng: &mut ChaCha8Rng) -> NormalPerturbation {
        let mut coeffs1 = Vec::new();
        let mut coeffs2 = Vec::new();
        for _ in 0..6 {
            coeffs1.push((rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)));
            coeffs2.push((rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)));
        }
        NormalPerturbation::new(
            trig_profile(&coeffs1, DEFAULT_SAMPLES),
            trig_profile(&coeffs2, DEFAULT_SAMPLES),
        )
        .unwrap()
    }

    #[test]
    fn bump_endpoints_and_interior() {
        assert_eq!(bump_value(0.0), 0.0);
        assert_eq!(bump_value(2.0 * PI), 0.0);
        assert!((bump_value(PI) - 1.0).abs() < 1e-15);
        for i in 1..50 {
            let t = 2.0 * PI * i as f64 / 50.0;
            assert!(bump_value(t) > 0.0, "bump not positive at {t}");
        }
    }

    #[test]
    fn bump_has_flat_contact_at_endpoints() {
        // Discrete derivatives up to order 4 at both ends, in difference
        // units: everything vanishes to far below 1e-8.
        let profile = bump_phi();
        let s = profile.samples();
        let m = s.len() - 1;
        for order in 1..=4 {
            let c = one_sided_coefficients(order, 7);
            let start: f64 = c.iter().enumerate().map(|(i, c)| c * s[i]).sum();
            let end: f64 = c.iter().enumerate().map(|(i, c)| c * s[m - i]).sum();
            assert!(start.abs() < 1e-8, "order {order} at 0: {start}");
            assert!(end.abs() < 1e-8, "order {order} at 2pi: {end}");
        }
    }

    #[test]
    fn zero_perturbation_has_zero_form() {
        let pert = NormalPerturbation::new(vec![0.0; 512], vec![0.0; 512]).unwrap();
        assert_eq!(second_variation_form(&pert), 0.0);
    }

    #[test]
    fn bump_pair_is_strictly_stabilizing() {
        let pert = NormalPerturbation::bump_pair();
        assert!(pert.smooth_closing());
        let form = second_variation_form(&pert);
        assert!(form > 0.0, "form = {form}");
        let (a, b) = split_form(&pert).unwrap();
        assert!(a > 0.0 && b > 0.0, "split = ({a}, {b})");
        let sum_defect = ((a + b) - form).abs() / form.abs();
        assert!(sum_defect < 1e-8, "splitting defect {sum_defect}");
    }

    #[test]
    fn form_is_nonnegative_on_random_smooth_perturbations() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let pert = random_smooth_perturbation(&mut rng);
            assert!(pert.smooth_closing());
            let form = second_variation_form(&pert);
            assert!(form >= -1e-8, "negative form {form}");
            let (a, b) = split_form(&pert).unwrap();
            assert!(a >= -1e-8 && b >= -1e-8);
            assert!(((a + b) - form).abs() <= 1e-8 * form.abs().max(1.0));
        }
    }

    #[test]
    fn rotation_mode_is_in_the_kernel() {
        // phi = cos(theta) on both loops displaces the circle rigidly; the
        // form vanishes on it.
        let m = DEFAULT_SAMPLES;
        let phi: Vec<f64> =
            (0..m).map(|j| (2.0 * PI * j as f64 / m as f64).cos()).collect();
        let pert = NormalPerturbation::new(phi.clone(), phi).unwrap();
        let form = second_variation_form(&pert);
        assert!(form.abs() < 1e-10, "rotation mode form {form}");
    }

    #[test]
    fn constant_mode_matches_latitude_energy() {
        // phi = 1 on both loops tilts the double circle into a double
        // latitude; d^2/deps^2 of 4 pi / cos(eps) at 0 is 4 pi.
        let m = DEFAULT_SAMPLES;
        let pert = NormalPerturbation::new(vec![1.0; m], vec![1.0; m]).unwrap();
        let form = second_variation_form(&pert);
        assert!((form - 4.0 * PI).abs() < 1e-8, "constant mode form {form}");
    }

    #[test]
    fn one_sided_perturbation_splits_one_sided() {
        let m = DEFAULT_SAMPLES;
        let zero = vec![0.0; m];
        let phi: Vec<f64> = (0..m).map(|j| bump_value(2.0 * PI * j as f64 / m as f64)).collect();
        let pert = NormalPerturbation::new(zero, phi).unwrap();
        let (a, b) = split_form(&pert).unwrap();
        assert!(a.abs() < 1e-9, "inactive half carries {a}");
        assert!(b > 0.0);
    }

    #[test]
    fn half_frequency_profile_is_rejected() {
        let m = 512;
        let phi: Vec<f64> = (0..m).map(|j| (PI * j as f64 / m as f64).sin()).collect();
        let pert = NormalPerturbation::new(phi.clone(), phi).unwrap();
        assert!(!pert.smooth_closing());
        assert!(matches!(split_form(&pert), Err(Error::NotSmoothlyClosing(_))));
    }

    #[test]
    fn form_matches_finite_difference_of_energy() {
        // Centered second difference of the exp-displaced energy against the
        // quadratic form, for the bump pair at N = 1024. The displacement is
        // even in eps, so E(eps) = E(-eps).
        let n = 1024;
        let pert = NormalPerturbation::bump_pair();
        let form = second_variation_form(&pert);
        let e0 = elastic_energy(&covered_great_circle(2, n).unwrap()).unwrap();
        let eps = 1e-2;
        let e_plus = elastic_energy(&displaced_double_circle(eps, n).unwrap()).unwrap();
        let fd = 2.0 * (e_plus - e0) / (eps * eps);
        let rel = (form - fd).abs() / fd.abs();
        assert!(rel < 5e-2, "form {form}, fd {fd}, rel {rel}");
    }

    #[test]
    fn perturbed_curve_basics() {
        let c = perturbed_double_circle(0.05, 512).unwrap();
        assert_eq!(self_intersection_count(&c).unwrap(), 1);
        let e = elastic_energy(&c).unwrap();
        assert!(e > 4.0 * PI && e < 13.0, "energy {e}");
    }

    #[test]
    fn energy_increases_with_eps_and_tends_to_4pi() {
        let mut prev = 4.0 * PI;
        for i in 1..=10 {
            let eps = 0.01 * i as f64;
            let e = elastic_energy(&perturbed_double_circle(eps, 512).unwrap()).unwrap();
            assert!(e > prev, "not increasing at eps {eps}");
            prev = e;
        }
        for &delta in &[0.5_f64, 0.1, 0.02] {
            // Small eps puts the energy inside (4 pi, 4 pi + delta).
            let eps = 0.4 * delta.sqrt().min(0.1);
            let e = elastic_energy(&perturbed_double_circle(eps, 512).unwrap()).unwrap();
            assert!(
                e > 4.0 * PI && e < 4.0 * PI + delta,
                "delta {delta}: energy {e} outside window"
            );
        }
    }

    #[test]
    fn eps_bounds_are_enforced() {
        assert!(matches!(
            perturbed_double_circle(0.0, 512),
            Err(Error::EpsOutOfRange { .. })
        ));
        assert!(matches!(
            perturbed_double_circle(0.2, 512),
            Err(Error::EpsOutOfRange { .. })
        ));
        assert!(matches!(
            perturbed_double_circle(0.05, 128),
            Err(Error::TooFewVertices { .. })
        ));
    }

    #[test]
    fn malformed_profiles_are_rejected()  {
        assert!(matches!(
            NormalPerturbation::new(vec![0.0; 100], vec![0.0; 100]),
            Err(Error::MalformedPerturbation(_))
        ));
        assert!(matches!(
            NormalPerturbation::new(vec![f64::NAN; 512], vec![0.0; 512]),
            Err(Error::MalformedPerturbation(_))
        ));
    }
}
