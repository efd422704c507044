//! Adaptive Dormand-Prince 5(4) integration of the elastica frame system
//! on the sphere. The state packs (position, tangent, curvature, curvature
//! derivative) into eight components:
//!
//!   gamma' = T,   T' = k (gamma x T) - gamma,   k' = w,   w' = -(k^3 + k)/2
//!
//! so the curvature profile is carried by its own stationary ODE instead of
//! being re-evaluated from special functions inside the right-hand side.

use crate::error::{Error, Result};
use crate::vec3::Vec3;

pub(crate) type FrameState = [f64; 8];

pub(crate) fn frame_rhs(y: &FrameState) -> FrameState {
    let gamma = Vec3::new(y[0], y[1], y[2]);
    let tangent = Vec3::new(y[3], y[4], y[5]);
    let k = y[6];
    let w = y[7];
    let dg = tangent;
    let dt = gamma.cross(tangent) * k - gamma;
    [dg.x, dg.y, dg.z, dt.x, dt.y, dt.z, w, -0.5 * (k * k * k + k)]
}

// Dormand-Prince coefficients.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Embedded 4th-order weights.
const E1: f64 = 5179.0 / 57600.0;
const E3: f64 = 7571.0 / 16695.0;
const E4: f64 = 393.0 / 640.0;
const E5: f64 = -92097.0 / 339200.0;
const E6: f64 = 187.0 / 2100.0;
const E7: f64 = 1.0 / 40.0;

fn axpy(y: &FrameState, h: f64, terms: &[(f64, &FrameState)]) -> FrameState {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..8 {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Integrates the frame system from `s0` to `s1`, invoking `observer` at the
/// initial point and after every accepted step. Local error is controlled to
/// `tol` (mixed absolute/relative).
pub(crate) fn integrate_frame<F: FnMut(f64, &FrameState)>(
    y0: FrameState,
    s0: f64,
    s1: f64,
    tol: f64,
    h_max: f64,
    mut observer: F,
) -> Result<FrameState> {
    let span = s1 - s0;
    if !(span > 0.0) || !span.is_finite() {
        return Err(Error::IntegratorFailure(format!("bad interval [{s0}, {s1}]")));
    }
    let mut s = s0;
    let mut y = y0;
    let mut h = (span / 100.0).min(h_max).max(1e-12);
    observer(s, &y);

    let mut k1 = frame_rhs(&y);
    let max_steps = 50_000_000usize;
    for _ in 0..max_steps {
        if s >= s1 {
            return Ok(y);
        }
        if h > s1 - s {
            h = s1 - s;
        }

        let k2 = frame_rhs(&axpy(&y, h, &[(A21, &k1)]));
        let k3 = frame_rhs(&axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = frame_rhs(&axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = frame_rhs(&axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let k6 = frame_rhs(&axpy(
            &y,
            h,
            &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        ));
        let y5 = axpy(&y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let k7 = frame_rhs(&y5);
        let y4 = axpy(
            &y,
            h,
            &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)],
        );

        let mut err: f64 = 0.0;
        for i in 0..8 {
            let scale = tol + tol * y[i].abs().max(y5[i].abs());
            err = err.max((y5[i] - y4[i]).abs() / scale);
        }

        if err <= 1.0 {
            s += h;
            y = y5;
            k1 = k7; // FSAL
            observer(s, &y);
            if !y.iter().all(|v| v.is_finite()) {
                return Err(Error::IntegratorFailure("non-finite state".into()));
            }
        }

        let factor = if err > 0.0 { 0.9 * err.powf(-0.2) } else { 5.0 };
        h *= factor.clamp(0.2, 5.0);
        h = h.min(h_max);
        if h < 1e-14 {
            return Err(Error::IntegratorFailure(format!("step underflow at s = {s}")));
        }
    }
    Err(Error::IntegratorFailure("step budget exhausted".into()))
}
