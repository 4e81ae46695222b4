//! The single place where FFT scaling lives.
//!
//! Coefficients follow `c_k = (1/2pi) int f e^{-ikx} dx`, so sampling on `G`
//! equispaced points is an unnormalised inverse DFT and recovering
//! coefficients is a forward DFT divided by `G`.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Smallest power of two that is at least `min`.
pub fn grid_size(min: usize) -> usize {
    min.max(2).next_power_of_two()
}

/// Forward/inverse transform pair of a fixed size, with its own scratch.
pub struct GridTransform {
    size: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
}

impl GridTransform {
    pub fn new(size: usize) -> Self {
        let (forward, inverse) = PLANNER.with(|p| {
            let mut p = p.borrow_mut();
            (p.plan_fft_forward(size), p.plan_fft_inverse(size))
        });
        let len = forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len());
        Self { size, forward, inverse, scratch: vec![Complex64::new(0.0, 0.0); len] }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Grid values of the trigonometric polynomial whose modes `-n..=n` are
    /// stored in `coeffs` (index `k + n`).
    pub fn values_into(&mut self, coeffs: &[Complex64], out: &mut [Complex64]) {
        let n = (coeffs.len() / 2) as i64;
        let g = self.size as i64;
        assert!(2 * n < g, "grid too small for bandwidth");
        out.fill(Complex64::new(0.0, 0.0));
        for (i, c) in coeffs.iter().enumerate() {
            let k = i as i64 - n;
            out[k.rem_euclid(g) as usize] = *c;
        }
        self.inverse.process_with_scratch(out, &mut self.scratch);
    }

    /// Coefficients of modes `-n..=n` from grid values (values are consumed).
    pub fn coeffs_into(&mut self, values: &mut [Complex64], out: &mut [Complex64]) {
        let n = (out.len() / 2) as i64;
        let g = self.size as i64;
        assert!(2 * n < g, "grid too small for bandwidth");
        self.forward.process_with_scratch(values, &mut self.scratch);
        let scale = 1.0 / self.size as f64;
        for (i, c) in out.iter_mut().enumerate() {
            let k = i as i64 - n;
            *c = values[k.rem_euclid(g) as usize] * scale;
        }
    }

    /// Full aliased spectrum in FFT order (values are consumed).
    pub fn spectrum_in_place(&mut self, values: &mut [Complex64]) {
        self.forward.process_with_scratch(values, &mut self.scratch);
        let scale = 1.0 / self.size as f64;
        for v in values.iter_mut() {
            *v *= scale;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_identity() {
        let coeffs: Vec<Complex64> =
            (0..9).map(|i| Complex64::new(i as f64 * 0.5 - 1.0, (i * i) as f64 * 0.1)).collect();
        let mut t = GridTransform::new(16);
        let mut vals = vec![Complex64::new(0.0, 0.0); 16];
        t.values_into(&coeffs, &mut vals);
        let mut back = vec![Complex64::new(0.0, 0.0); 9];
        t.coeffs_into(&mut vals, &mut back);
        for (a, b) in coeffs.iter().zip(&back) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn single_mode_samples_exponential() {
        // e^{ix} on an 8-point grid.
        let mut coeffs = vec![Complex64::new(0.0, 0.0); 3];
        coeffs[2] = Complex64::new(1.0, 0.0);
        let mut t = GridTransform::new(8);
        let mut vals = vec![Complex64::new(0.0, 0.0); 8];
        t.values_into(&coeffs, &mut vals);
        for (j, v) in vals.iter().enumerate() {
            let x = 2.0 * std::f64::consts::PI * j as f64 / 8.0;
            assert!((v - Complex64::new(x.cos(), x.sin())).norm() < 1e-14);
        }
    }
}
