//! FFT-based helpers: spectral differentiation of periodic samples and the
//! circulant solve used to stabilize the fourth-order flow step.

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Spectral second derivative of uniformly sampled periodic data.
pub(crate) fn second_derivative_periodic(samples: &[f64], period: f64) -> Vec<f64> {
    let n = samples.len();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);

    let mut buf: Vec<Complex<f64>> = samples.iter().map(|&x| Complex::new(x, 0.0)).collect();
    fwd.process(&mut buf);
    for (k, value) in buf.iter_mut().enumerate() {
        let wave = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
        let omega = 2.0 * std::f64::consts::PI * wave / period;
        *value *= -omega * omega;
    }
    inv.process(&mut buf);
    buf.iter().map(|c| c.re / n as f64).collect()
}

/// Solves `(I + dt * 2 * D4) x = rhs` where D4 is the squared three-point
/// second-difference operator on a uniform cyclic grid with spacing `h`. The
/// operator is circulant, so the solve is a pointwise division in Fourier
/// space.
pub(crate) struct BiharmonicSolver {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    buf: Vec<Complex<f64>>,
}

impl BiharmonicSolver {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        BiharmonicSolver {
            n,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
            buf: vec![Complex::new(0.0, 0.0); n],
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn solve(&mut self, rhs: &[f64], h: f64, dt: f64, out: &mut Vec<f64>) {
        assert_eq!(rhs.len(), self.n);
        let n = self.n;
        for (slot, &x) in self.buf.iter_mut().zip(rhs) {
            *slot = Complex::new(x, 0.0);
        }
        self.fwd.process(&mut self.buf);
        for (k, value) in self.buf.iter_mut().enumerate() {
            let angle = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            let sigma = (2.0 - 2.0 * angle.cos()) / (h * h);
            let denom = 1.0 + dt * 2.0 * sigma * sigma;
            *value /= denom;
        }
        self.inv.process(&mut self.buf);
        out.clear();
        out.extend(self.buf.iter().map(|c| c.re / n as f64));
    }
}
