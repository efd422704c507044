//! Complete elliptic integrals K(p), E(p), the Jacobi cn function, and the
//! monotone energy factor f(p) = (2E(p) - K(p)) / sqrt(1 - 2p^2).
//!
//! All interfaces use the *modulus* convention: the argument is p, not the
//! parameter m = p^2. Mixing the two is the classic failure mode of elliptic
//! code, so the admissible range is enforced by the [`Modulus`] newtype.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

/// Maximum AGM iterations; the sequence converges quadratically, so this is
/// never reached for admissible moduli.
const MAX_AGM_ITER: usize = 40;

/// Upper end of the restricted domain of `f_of_p`: p < 1/sqrt(2) - 1e-9.
const F_DOMAIN_MARGIN: f64 = 1e-9;

/// A Jacobi modulus p with 0 <= p < 1.
///
/// The energy factor `f_of_p` and the elastica synthesis are additionally
/// restricted to p < 1/sqrt(2), which those functions enforce themselves.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Modulus(f64);

impl Modulus {
    pub fn new(p: f64) -> Result<Self> {
        if !p.is_finite() || !(0.0..1.0).contains(&p) {
            return Err(Error::ModulusOutOfRange(p));
        }
        Ok(Modulus(p))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// Complete elliptic integral of the first kind,
/// K(p) = integral of dtheta / sqrt(1 - p^2 sin^2 theta) over [0, pi/2],
/// by arithmetic-geometric mean iteration: K = pi / (2 agm(1, sqrt(1 - p^2))).
pub fn complete_k(p: Modulus) -> f64 {
    agm_k(p.get())
}

/// Complete elliptic integral of the second kind,
/// E(p) = integral of sqrt(1 - p^2 sin^2 theta) over [0, pi/2],
/// via the AGM together with the sum E = K (1 - sum 2^(i-1) c_i^2).
pub fn complete_e(p: Modulus) -> f64 {
    agm_e(p.get())
}

/// Jacobi cn(u, p), periodic with period 4K(p), by the descending Landen
/// transformation on the AGM scale. Absolute error well below 1e-10 on the
/// admissible range.
pub fn jacobi_cn(u: f64, p: Modulus) -> f64 {
    cn_agm(u, p.get())
}

/// The strictly increasing factor f(p) = (2E(p) - K(p)) / sqrt(1 - 2p^2),
/// defined for 0 <= p < 1/sqrt(2). Refuses the last 1e-9 sliver below the
/// endpoint rather than returning a huge or non-finite value.
pub fn f_of_p(p: Modulus) -> Result<f64> {
    let p = p.get();
    let bound = 0.5_f64.sqrt() - F_DOMAIN_MARGIN;
    if p >= bound {
        return Err(Error::ModulusOutOfRange(p));
    }
    let k = agm_k(p);
    let e = agm_e(p);
    Ok((2.0 * e - k) / (1.0 - 2.0 * p * p).sqrt())
}

pub(crate) fn agm_k(p: f64) -> f64 {
    debug_assert!((0.0..1.0).contains(&p));
    if p == 0.0 {
        return FRAC_PI_2;
    }
    let mut a = 1.0_f64;
    let mut b = (1.0 - p * p).sqrt();
    for _ in 0..MAX_AGM_ITER {
        let an = 0.5 * (a + b);
        let bn = (a * b).sqrt();
        if (an - bn).abs() < 1e-17 * an {
            return FRAC_PI_2 / an;
        }
        a = an;
        b = bn;
    }
    FRAC_PI_2 / a
}

pub(crate) fn agm_e(p: f64) -> f64 {
    debug_assert!((0.0..1.0).contains(&p));
    if p == 0.0 {
        return FRAC_PI_2;
    }
    let mut a = 1.0_f64;
    let mut b = (1.0 - p * p).sqrt();
    let mut c = p;
    let mut sum = c * c;
    let mut pow2 = 1.0;
    for _ in 0..MAX_AGM_ITER {
        let an = 0.5 * (a + b);
        let bn = (a * b).sqrt();
        c = 0.5 * (a - b);
        pow2 *= 2.0;
        sum += pow2 * c * c;
        a = an;
        b = bn;
        if c.abs() < 1e-17 * an {
            break;
        }
    }
    (FRAC_PI_2 / a) * (1.0 - 0.5 * sum)
}

pub(crate) fn cn_agm(u: f64, p: f64) -> f64 {
    debug_assert!((0.0..1.0).contains(&p));
    if p < 1e-12 {
        return u.cos();
    }

    // Range-reduce by the full period to keep 2^n * a_n * u well scaled.
    let quarter = agm_k(p);
    let period = 4.0 * quarter;
    let u = u - period * (u / period).round();

    // Ascend the AGM scale, recording the Landen coefficients.
    let mut a = vec![1.0_f64];
    let mut c = vec![p];
    let mut b = (1.0 - p * p).sqrt();
    while c.last().copied().unwrap().abs() > 1e-16 * a.last().copied().unwrap() {
        let a_prev = *a.last().unwrap();
        let an = 0.5 * (a_prev + b);
        let cn = 0.5 * (a_prev - b);
        b = (a_prev * b).sqrt();
        a.push(an);
        c.push(cn);
        if a.len() > MAX_AGM_ITER {
            break;
        }
    }

    // Descend: phi_{n-1} = (phi_n + asin((c_n/a_n) sin phi_n)) / 2.
    let n = a.len() - 1;
    let mut phi = (2.0_f64).powi(n as i32) * a[n] * u;
    for i in (1..=n).rev() {
        let s = ((c[i] / a[i]) * phi.sin()).clamp(-1.0, 1.0);
        phi = 0.5 * (phi + s.asin());
    }
    phi.cos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Independent oracle: adaptive Simpson quadrature of the defining
    /// integrals, kept free of any AGM machinery.
    fn simpson<F: Fn(f64) -> f64 + Copy>(f: F, a: f64, b: f64, fa: f64, fb: f64, fm: f64, eps: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() < 15.0 * eps {
            left + right + (left + right - whole) / 15.0
        } else {
            simpson(f, a, m, fa, fm, flm, 0.5 * eps, depth - 1)
                + simpson(f, m, b, fm, fb, frm, 0.5 * eps, depth - 1)
        }
    }

    fn quad<F: Fn(f64) -> f64 + Copy>(f: F, a: f64, b: f64) -> f64 {
        let m = 0.5 * (a + b);
        simpson(f, a, b, f(a), f(b), f(m), 1e-14, 40)
    }

    fn k_oracle(p: f64) -> f64 {
        quad(|t| 1.0 / (1.0 - p * p * t.sin().powi(2)).sqrt(), 0.0, FRAC_PI_2)
    }

    fn e_oracle(p: f64) -> f64 {
        quad(|t| (1.0 - p * p * t.sin().powi(2)).sqrt(), 0.0, FRAC_PI_2)
    }

    #[test]
    fn k_at_zero_is_half_pi() {
        assert_eq!(complete_k(Modulus::new(0.0).unwrap()), FRAC_PI_2);
    }

    #[test]
    fn k_matches_quadrature_oracle() {
        for &p in &[0.3, 0.5, 0.7, 0.9, 0.99] {
            let agm = complete_k(Modulus::new(p).unwrap());
            let reference = k_oracle(p);
            assert!(
                (agm - reference).abs() < 1e-10,
                "K({p}): agm {agm}, quadrature {reference}"
            );
        }
    }

    #[test]
    fn e_at_zero_is_half_pi() {
        assert_eq!(complete_e(Modulus::new(0.0).unwrap()), FRAC_PI_2);
    }

    #[test]
    fn e_matches_quadrature_oracle() {
        for &p in &[0.3, 0.5, 0.7, 0.9] {
            let agm = complete_e(Modulus::new(p).unwrap());
            let reference = e_oracle(p);
            assert!(
                (agm - reference).abs() < 1e-10,
                "E({p}): agm {agm}, quadrature {reference}"
            );
        }
    }

    #[test]
    fn e_near_one_tends_to_one() {
        let e = complete_e(Modulus::new(0.999999).unwrap());
        assert!((e - 1.0).abs() < 1e-5 * 2.0, "E(0.999999) = {e}");
        // The stated limit check: within 1e-6 of the p -> 1 value in the
        // leading term sense.
        assert!(e > 1.0 && e < 1.000007);
    }

    #[test]
    fn modulus_rejects_out_of_range() {
        assert!(matches!(Modulus::new(1.0), Err(Error::ModulusOutOfRange(_))));
        assert!(matches!(Modulus::new(-0.1), Err(Error::ModulusOutOfRange(_))));
        assert!(matches!(Modulus::new(f64::NAN), Err(Error::ModulusOutOfRange(_))));
    }

    #[test]
    fn legendre_relation_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x9e3779b9);
        for _ in 0..20 {
            let p: f64 = rng.gen_range(0.01..0.99);
            let pp = (1.0 - p * p).sqrt();
            let k = agm_k(p);
            let e = agm_e(p);
            let kp = agm_k(pp);
            let ep = agm_e(pp);
            let legendre = e * kp + ep * k - k * kp;
            assert!(
                (legendre - FRAC_PI_2).abs() < 1e-10,
                "Legendre defect {} at p = {p}",
                (legendre - FRAC_PI_2).abs()
            );
        }
    }

    #[test]
    fn cn_identities() {
        for &p in &[0.1, 0.4, 0.65] {
            let m = Modulus::new(p).unwrap();
            assert!((jacobi_cn(0.0, m) - 1.0).abs() < 1e-14);
            let quarter = complete_k(m);
            assert!(jacobi_cn(quarter, m).abs() < 1e-10, "cn(K, {p})");
        }
        for &u in &[0.3, 1.1, 2.7] {
            let c = jacobi_cn(u, Modulus::new(0.0).unwrap());
            assert!((c - u.cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn cn_period_is_four_quarter_periods() {
        let m = Modulus::new(0.55).unwrap();
        let period = 4.0 * complete_k(m);
        for &u in &[0.2, 1.3, 2.9] {
            assert!((jacobi_cn(u + period, m) - jacobi_cn(u, m)).abs() < 1e-10);
        }
    }

    #[test]
    fn cn_satisfies_differential_identity() {
        // (cn')^2 = (1 - cn^2)(1 - p^2 + p^2 cn^2), checked with centered
        // differences on a grid of evaluation points.
        let h = 1e-4;
        for &p in &[0.2, 0.5, 0.68] {
            let m = Modulus::new(p).unwrap();
            for i in 0..40 {
                let u = -3.0 + 0.15 * i as f64;
                let c = jacobi_cn(u, m);
                let d = (jacobi_cn(u + h, m) - jacobi_cn(u - h, m)) / (2.0 * h);
                let lhs = d * d;
                let rhs = (1.0 - c * c) * (1.0 - p * p + p * p * c * c);
                assert!(
                    (lhs - rhs).abs() < 1e-8,
                    "identity defect {} at u={u}, p={p}",
                    (lhs - rhs).abs()
                );
            }
        }
    }

    #[test]
    fn f_endpoint_and_monotonicity() {
        let f0 = f_of_p(Modulus::new(0.0).unwrap()).unwrap();
        assert!((f0 - FRAC_PI_2).abs() < 1e-12, "f(0) = {f0}");

        let mut prev = f0;
        for i in 1..=70 {
            let p = 0.01 * i as f64;
            let f = f_of_p(Modulus::new(p).unwrap()).unwrap();
            assert!(f > prev, "f not strictly increasing at p = {p}");
            assert!(f > 0.0);
            prev = f;
        }
    }

    #[test]
    fn f_cross_checks_against_quadrature() {
        let p = 0.5;
        let expected = (2.0 * e_oracle(p) - k_oracle(p)) / (1.0 - 2.0 * p * p).sqrt();
        let got = f_of_p(Modulus::new(p).unwrap()).unwrap();
        assert!((got - expected).abs() < 1e-10);
    }

    #[test]
    fn f_refuses_the_degenerate_sliver() {
        let p = Modulus::new(0.5_f64.sqrt() - 1e-12).unwrap();
        assert!(matches!(f_of_p(p), Err(Error::ModulusOutOfRange(_))));
    }

    #[test]
    fn k_increases_e_decreases_in_p() {
        let ps: Vec<f64> = (0..10).map(|i| 0.1 * i as f64).collect();
        for w in ps.windows(2) {
            assert!(agm_k(w[1]) > agm_k(w[0]));
            assert!(agm_e(w[1]) < agm_e(w[0]));
        }
    }

    proptest::proptest! {
        #[test]
        fn cn_stays_in_unit_band(u in -20.0..20.0f64, p in 0.0..0.95f64) {
            let c = cn_agm(u, p);
            proptest::prop_assert!(c.is_finite());
            proptest::prop_assert!(c.abs() <= 1.0 + 1e-12);
        }
    }
}
