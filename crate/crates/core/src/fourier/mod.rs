//! Periodic fields stored by their Fourier coefficients and the basic
//! operators acting on them.
//!
//! Coefficients use the convention `c_k = (1/2pi) int f(x) e^{-ikx} dx`, so
//! `inner(f, g) = sum_k c_k(f) conj(c_k(g))` and `e^{ikx}` has unit norm.

mod grid;
pub mod io;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{bracket, kahan_sum, kahan_sum_complex};

pub use grid::{grid_size, GridTransform};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const REALITY_TOL: f64 = 1e-13;

/// Complex trigonometric polynomial with modes `-N..=N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexField {
    bandwidth: usize,
    coeffs: Vec<Complex64>,
}

impl ComplexField {
    pub fn zeros(bandwidth: usize) -> Self {
        Self { bandwidth, coeffs: vec![ZERO; 2 * bandwidth + 1] }
    }

    /// `coeffs[k + N]` holds mode `k`.
    pub fn from_coeffs(bandwidth: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != 2 * bandwidth + 1 {
            return Err(Error::DimensionMismatch { left: coeffs.len(), right: 2 * bandwidth + 1 });
        }
        if let Some(i) = coeffs.iter().position(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite(i as i64 - bandwidth as i64));
        }
        Ok(Self { bandwidth, coeffs })
    }

    pub fn from_fn(bandwidth: usize, mut f: impl FnMut(i64) -> Complex64) -> Self {
        let n = bandwidth as i64;
        Self { bandwidth, coeffs: (-n..=n).map(&mut f).collect() }
    }

    /// The exponential `e^{ikx}`.
    pub fn mode(k: i64) -> Self {
        let mut f = Self::zeros(k.unsigned_abs() as usize);
        f.set(k, Complex64::new(1.0, 0.0));
        f
    }

    pub fn constant(c: Complex64) -> Self {
        Self { bandwidth: 0, coeffs: vec![c] }
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient of mode `k`; zero outside the stored band.
    pub fn coeff(&self, k: i64) -> Complex64 {
        let n = self.bandwidth as i64;
        if k.abs() > n {
            ZERO
        } else {
            self.coeffs[(k + n) as usize]
        }
    }

    /// Panics if `k` lies outside the band.
    pub fn set(&mut self, k: i64, value: Complex64) {
        let n = self.bandwidth as i64;
        assert!(k.abs() <= n, "mode {k} outside bandwidth {n}");
        self.coeffs[(k + n) as usize] = value;
    }

    pub fn modes(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let n = self.bandwidth as i64;
        self.coeffs.iter().enumerate().map(move |(i, c)| (i as i64 - n, *c))
    }

    /// Truncates or zero-pads to a new bandwidth.
    pub fn with_bandwidth(&self, bandwidth: usize) -> Self {
        Self::from_fn(bandwidth, |k| self.coeff(k))
    }

    /// Pointwise complex conjugate: mode `k` becomes `conj(c_{-k})`.
    pub fn conj(&self) -> Self {
        Self::from_fn(self.bandwidth, |k| self.coeff(-k).conj())
    }

    pub fn scale(&self, a: Complex64) -> Self {
        Self { bandwidth: self.bandwidth, coeffs: self.coeffs.iter().map(|c| c * a).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.bandwidth.max(other.bandwidth);
        Self::from_fn(n, |k| self.coeff(k) + other.coeff(k))
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.bandwidth.max(other.bandwidth);
        Self::from_fn(n, |k| self.coeff(k) - other.coeff(k))
    }

    pub fn mean(&self) -> Complex64 {
        self.coeff(0)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Smallest bandwidth outside which every coefficient is at most
    /// `rel_tol` times the largest one.
    pub fn effective_bandwidth(&self, rel_tol: f64) -> usize {
        let cut = rel_tol * self.max_abs();
        let n = self.bandwidth as i64;
        (0..=n).rev().find(|&k| self.coeff(k).norm() > cut || self.coeff(-k).norm() > cut).unwrap_or(0) as usize
    }
}

/// Real-valued field with zero mean.
///
/// Conjugate symmetry is checked on construction and then imposed exactly,
/// so downstream code may rely on `c_{-k} = conj(c_k)` bit for bit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComplexField", into = "ComplexField")]
pub struct RealField {
    field: ComplexField,
}

impl TryFrom<ComplexField> for RealField {
    type Error = Error;
    fn try_from(f: ComplexField) -> Result<Self> {
        RealField::new(f)
    }
}

impl From<RealField> for ComplexField {
    fn from(u: RealField) -> Self {
        u.field
    }
}

impl RealField {
    pub fn new(field: ComplexField) -> Result<Self> {
        let scale = field.max_abs().max(1.0);
        let m0 = field.mean().norm();
        if m0 > REALITY_TOL * scale {
            return Err(Error::NonZeroMean(m0));
        }
        for k in 1..=field.bandwidth as i64 {
            let defect = (field.coeff(-k) - field.coeff(k).conj()).norm();
            if defect > REALITY_TOL * scale {
                return Err(Error::NotReal { mode: k, defect });
            }
        }
        let positive: Vec<Complex64> = (1..=field.bandwidth as i64).map(|k| field.coeff(k)).collect();
        Self::from_positive_modes(&positive)
    }

    /// Builds `u` from `c_1..=c_N` (`modes[k - 1] = c_k`); negative modes are
    /// the conjugates and the mean is zero.
    pub fn from_positive_modes(modes: &[Complex64]) -> Result<Self> {
        let n = modes.len();
        let mut field = ComplexField::zeros(n);
        for (i, c) in modes.iter().enumerate() {
            if !c.re.is_finite() || !c.im.is_finite() {
                return Err(Error::NonFinite(i as i64 + 1));
            }
            let k = i as i64 + 1;
            field.set(k, *c);
            field.set(-k, c.conj());
        }
        Ok(Self { field })
    }

    pub fn zero(bandwidth: usize) -> Self {
        Self { field: ComplexField::zeros(bandwidth) }
    }

    pub fn bandwidth(&self) -> usize {
        self.field.bandwidth
    }

    pub fn coeff(&self, k: i64) -> Complex64 {
        self.field.coeff(k)
    }

    pub fn as_complex(&self) -> &ComplexField {
        &self.field
    }

    pub fn positive_modes(&self) -> Vec<Complex64> {
        (1..=self.bandwidth() as i64).map(|k| self.coeff(k)).collect()
    }

    pub fn scale(&self, a: f64) -> Self {
        let m: Vec<Complex64> = self.positive_modes().iter().map(|c| c * a).collect();
        Self::from_positive_modes(&m).expect("scaling keeps coefficients finite")
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.bandwidth().max(other.bandwidth());
        let m: Vec<Complex64> = (1..=n as i64).map(|k| self.coeff(k) + other.coeff(k)).collect();
        Self::from_positive_modes(&m).expect("sum keeps coefficients finite")
    }

    pub fn with_bandwidth(&self, bandwidth: usize) -> Self {
        let m: Vec<Complex64> = (1..=bandwidth as i64).map(|k| self.coeff(k)).collect();
        Self::from_positive_modes(&m).expect("truncation keeps coefficients finite")
    }

    /// Drops trailing modes below `rel_tol` times the largest coefficient.
    pub fn trimmed(&self, rel_tol: f64) -> Self {
        self.with_bandwidth(self.field.effective_bandwidth(rel_tol).max(1))
    }

    /// `<u^2|1> = ||u||_0^2`.
    pub fn mean_square(&self) -> f64 {
        let s = kahan_sum((1..=self.bandwidth() as i64).map(|k| self.coeff(k).norm_sqr()));
        2.0 * s
    }

    /// Is every coefficient real (even function)?
    pub fn has_real_coefficients(&self) -> bool {
        self.field.coeffs.iter().all(|c| c.im == 0.0)
    }
}

/// Element of the Hardy space: modes `0..=N` only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HardyElement {
    coeffs: Vec<Complex64>,
    mean_free: bool,
}

impl HardyElement {
    /// `coeffs[n]` holds mode `n`. The mean-free flag is set when mode 0 is
    /// exactly zero.
    pub fn from_coeffs(coeffs: Vec<Complex64>) -> Self {
        assert!(!coeffs.is_empty(), "Hardy element needs mode 0");
        let mean_free = coeffs[0] == ZERO;
        Self { coeffs, mean_free }
    }

    pub fn zeros(bandwidth: usize) -> Self {
        Self::from_coeffs(vec![ZERO; bandwidth + 1])
    }

    pub fn bandwidth(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, n: i64) -> Complex64 {
        if n < 0 || n as usize >= self.coeffs.len() {
            ZERO
        } else {
            self.coeffs[n as usize]
        }
    }

    pub fn is_mean_free(&self) -> bool {
        self.mean_free
    }

    /// Zeroes mode 0 and sets the flag.
    pub fn into_mean_free(mut self) -> Self {
        self.coeffs[0] = ZERO;
        self.mean_free = true;
        self
    }

    pub fn to_field(&self) -> ComplexField {
        let n = self.bandwidth();
        ComplexField::from_fn(n, |k| self.coeff(k))
    }

    pub fn with_bandwidth(&self, bandwidth: usize) -> Self {
        let mut out = Self::from_coeffs((0..=bandwidth as i64).map(|k| self.coeff(k)).collect());
        if self.mean_free {
            out.mean_free = true;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.bandwidth().max(other.bandwidth());
        Self::from_coeffs((0..=n as i64).map(|k| self.coeff(k) - other.coeff(k)).collect())
    }

    pub fn sobolev_norm(&self, s: f64) -> f64 {
        sobolev_norm(&self.to_field(), s)
    }
}

/// Complex sequence `z_1, z_2, ...` with a nominal weight exponent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedSeq {
    entries: Vec<Complex64>,
    exponent: f64,
}

impl WeightedSeq {
    /// `entries[n - 1]` holds `z_n`.
    pub fn new(entries: Vec<Complex64>, exponent: f64) -> Self {
        Self { entries, exponent }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// `z_n` for `n >= 1`; zero beyond the stored range.
    pub fn get(&self, n: usize) -> Complex64 {
        assert!(n >= 1, "weighted sequences start at n = 1");
        self.entries.get(n - 1).copied().unwrap_or(ZERO)
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn norm(&self) -> f64 {
        seq_norm(self, self.exponent)
    }
}

/// `(1/2pi) int f conj(g)`.
pub fn inner(f: &ComplexField, g: &ComplexField) -> Result<Complex64> {
    if f.bandwidth != g.bandwidth {
        return Err(Error::DimensionMismatch { left: f.bandwidth, right: g.bandwidth });
    }
    Ok(kahan_sum_complex(f.coeffs.iter().zip(&g.coeffs).map(|(a, b)| a * b.conj())))
}

/// Szego projection: keeps modes `n >= 0`.
pub fn szego(f: &ComplexField) -> HardyElement {
    HardyElement::from_coeffs((0..=f.bandwidth as i64).map(|k| f.coeff(k)).collect())
}

/// Hilbert transform, multiplier `-i sign(n)`.
pub fn hilbert(f: &ComplexField) -> ComplexField {
    ComplexField::from_fn(f.bandwidth, |k| f.coeff(k) * Complex64::new(0.0, -(k.signum() as f64)))
}

/// Mean-dropping antiderivative: mode `n != 0` is divided by `in`.
pub fn antiderivative(f: &ComplexField) -> ComplexField {
    ComplexField::from_fn(f.bandwidth, |k| if k == 0 { ZERO } else { f.coeff(k) / Complex64::new(0.0, k as f64) })
}

/// Derivative, multiplier `in`.
pub fn derivative(f: &ComplexField) -> ComplexField {
    ComplexField::from_fn(f.bandwidth, |k| f.coeff(k) * Complex64::new(0.0, k as f64))
}

/// Exact product truncated to `out_bandwidth`.
///
/// The grid has more than `N_f + N_g + out_bandwidth` points, so none of the
/// returned modes is aliased.
pub fn multiply(f: &ComplexField, g: &ComplexField, out_bandwidth: usize) -> ComplexField {
    let nf = f.bandwidth;
    let ng = g.bandwidth;
    let min = (nf + ng + out_bandwidth + 1).max(2 * nf.max(ng).max(out_bandwidth) + 1);
    let size = grid_size(min);
    let mut t = GridTransform::new(size);
    let mut a = vec![ZERO; size];
    let mut b = vec![ZERO; size];
    t.values_into(&f.coeffs, &mut a);
    t.values_into(&g.coeffs, &mut b);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y;
    }
    let mut out = vec![ZERO; 2 * out_bandwidth + 1];
    t.coeffs_into(&mut a, &mut out);
    ComplexField { bandwidth: out_bandwidth, coeffs: out }
}

/// Full product, bandwidth `N_f + N_g`.
pub fn multiply_full(f: &ComplexField, g: &ComplexField) -> ComplexField {
    multiply(f, g, f.bandwidth + g.bandwidth)
}

/// Tuning for [`exp_field`].
#[derive(Clone, Copy, Debug)]
pub struct ExpOptions {
    /// Relative tail energy below which the spectrum counts as resolved.
    pub resolved_tail: f64,
    /// Relative tail energy the result may discard at most.
    pub tail_limit: f64,
    /// Largest grid tried before giving up.
    pub max_grid: usize,
}

impl Default for ExpOptions {
    fn default() -> Self {
        Self { resolved_tail: 1e-24, tail_limit: 1e-12, max_grid: 1 << 22 }
    }
}

/// Pointwise exponential.
pub fn exp_field(f: &ComplexField) -> Result<ComplexField> {
    exp_field_with(f, ExpOptions::default())
}

/// Pointwise exponential on a grid oversampled at least four times, doubled
/// until the upper half of the computed spectrum carries negligible energy.
pub fn exp_field_with(f: &ComplexField, opts: ExpOptions) -> Result<ComplexField> {
    let mut size = grid_size(4 * (2 * f.bandwidth + 1));
    loop {
        let mut t = GridTransform::new(size);
        let mut vals = vec![ZERO; size];
        t.values_into(&f.coeffs, &mut vals);
        for v in vals.iter_mut() {
            *v = v.exp();
        }
        t.spectrum_in_place(&mut vals);
        let half = (size / 4) as i64;
        let g = size as i64;
        let energy = |k: i64| vals[k.rem_euclid(g) as usize].norm_sqr();
        // Energy by |k|, ascending, over the whole aliased spectrum.
        let shells: Vec<f64> = (0..=g / 2)
            .map(|k| {
                if k == 0 {
                    energy(0)
                } else if k == g / 2 {
                    energy(k)
                } else {
                    energy(k) + energy(-k)
                }
            })
            .collect();
        let total = kahan_sum(shells.iter().copied());
        let upper = kahan_sum(shells[(half + 1) as usize..].iter().copied());
        let rel = if total > 0.0 { upper / total } else { 0.0 };
        let resolved = rel <= opts.resolved_tail;
        if resolved || size >= opts.max_grid {
            if !resolved && rel > opts.tail_limit {
                return Err(Error::TailNotResolved { bandwidth: half as usize, tail: rel });
            }
            // Smallest bandwidth whose discarded tail stays under the
            // resolution threshold.
            let budget = opts.resolved_tail.max(rel) * total;
            let mut tail = upper;
            let mut b = half;
            while b > 0 && tail + shells[b as usize] <= budget {
                tail += shells[b as usize];
                b -= 1;
            }
            let out = ComplexField::from_fn(b as usize, |k| vals[k.rem_euclid(g) as usize]);
            return Ok(out);
        }
        size *= 2;
    }
}

/// `(sum <n>^{2s} |c_n|^2)^{1/2}` with `<0> = 1`, summed in ascending `n`.
pub fn sobolev_norm(f: &ComplexField, s: f64) -> f64 {
    kahan_sum(f.modes().map(|(k, c)| bracket(k).powf(2.0 * s) * c.norm_sqr())).sqrt()
}

/// `(sum_{n>=1} n^{2s} |z_n|^2)^{1/2}`, summed in ascending `n`.
pub fn seq_norm(z: &WeightedSeq, s: f64) -> f64 {
    kahan_sum(z.entries.iter().enumerate().map(|(i, c)| ((i + 1) as f64).powf(2.0 * s) * c.norm_sqr())).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn two_cos() -> ComplexField {
        ComplexField::mode(1).add(&ComplexField::mode(-1))
    }

    fn close(a: &ComplexField, b: &ComplexField, tol: f64) -> bool {
        let n = a.bandwidth().max(b.bandwidth()) as i64;
        (-n..=n).all(|k| (a.coeff(k) - b.coeff(k)).norm() <= tol)
    }

    #[test]
    fn inner_products() {
        let e1 = ComplexField::mode(1).with_bandwidth(2);
        let e2 = ComplexField::mode(2);
        assert_eq!(inner(&e1, &e1).unwrap(), c(1.0, 0.0));
        assert_eq!(inner(&e1, &e2).unwrap(), c(0.0, 0.0));
        let f = ComplexField::constant(c(1.0, 0.0)).add(&ComplexField::mode(1).scale(c(2.0, 0.0)));
        let one = ComplexField::constant(c(1.0, 0.0)).with_bandwidth(1);
        assert_eq!(inner(&f, &one).unwrap(), c(1.0, 0.0));
        assert!(matches!(inner(&e2, &f), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn szego_examples() {
        let p = szego(&two_cos());
        assert_eq!(p.coeffs(), &[c(0.0, 0.0), c(1.0, 0.0)]);
        let one = szego(&ComplexField::constant(c(1.0, 0.0)));
        assert_eq!(one.coeffs(), &[c(1.0, 0.0)]);
        let neg = szego(&ComplexField::mode(-3));
        assert!(neg.coeffs().iter().all(|z| *z == c(0.0, 0.0)));
    }

    #[test]
    fn hilbert_examples() {
        // cos x -> sin x
        let cos = two_cos().scale(c(0.5, 0.0));
        let h = hilbert(&cos);
        assert_eq!(h.coeff(1), c(0.0, -0.5));
        assert_eq!(h.coeff(-1), c(0.0, 0.5));
        assert_eq!(hilbert(&ComplexField::constant(c(1.0, 0.0))).coeff(0), c(0.0, 0.0));
        assert_eq!(hilbert(&ComplexField::mode(2)).coeff(2), c(0.0, -1.0));
    }

    #[test]
    fn antiderivative_examples() {
        assert_eq!(antiderivative(&ComplexField::mode(1)).coeff(1), c(0.0, -1.0));
        let s = antiderivative(&two_cos());
        // 2 sin x = -i e^{ix} + i e^{-ix}
        assert_eq!(s.coeff(1), c(0.0, -1.0));
        assert_eq!(s.coeff(-1), c(0.0, 1.0));
        assert_eq!(antiderivative(&ComplexField::constant(c(5.0, 0.0))).coeff(0), c(0.0, 0.0));
    }

    #[test]
    fn multiply_examples() {
        let e1 = ComplexField::mode(1);
        assert!(close(&multiply(&e1, &e1, 2), &ComplexField::mode(2), 1e-15));
        let one = ComplexField::constant(c(1.0, 0.0));
        let a = one.add(&e1);
        let b = one.sub(&e1);
        let expect = one.sub(&ComplexField::mode(2));
        assert!(close(&multiply(&a, &b, 2), &expect, 1e-15));
        let sq = multiply(&two_cos(), &two_cos(), 2);
        let expect = ComplexField::constant(c(2.0, 0.0)).add(&ComplexField::mode(2)).add(&ComplexField::mode(-2));
        assert!(close(&sq, &expect, 1e-15));
    }

    #[test]
    fn exp_examples() {
        let z = exp_field(&ComplexField::zeros(3)).unwrap();
        assert!(close(&z, &ComplexField::constant(c(1.0, 0.0)), 1e-15));

        // -log(1 - 0.5 e^{ix}) has coefficients 0.5^k / k.
        let f =
            ComplexField::from_fn(80, |k| if k > 0 { c(0.5f64.powi(k as i32) / k as f64, 0.0) } else { c(0.0, 0.0) });
        let e = exp_field(&f).unwrap();
        // exp(-log(1 - q)) = 1 / (1 - q) = sum q^k
        for k in 0..40 {
            assert!((e.coeff(k) - c(0.5f64.powi(k as i32), 0.0)).norm() < 1e-13, "mode {k}");
        }
        for k in 1..40 {
            assert!(e.coeff(-k).norm() < 1e-13);
        }
    }

    #[test]
    fn exp_of_imaginary_is_unimodular() {
        let v = RealField::from_positive_modes(&[c(0.3, 0.1), c(-0.2, 0.05)]).unwrap();
        let e = exp_field(&v.as_complex().scale(c(0.0, 1.0))).unwrap();
        let n = e.bandwidth();
        let size = grid_size(2 * n + 1);
        let mut t = GridTransform::new(size);
        let mut vals = vec![c(0.0, 0.0); size];
        t.values_into(e.coeffs(), &mut vals);
        for v in vals {
            assert!((v.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn exp_gives_up_when_grid_cap_is_hit() {
        let f = ComplexField::from_fn(4, |k| if k == 1 { c(30.0, 0.0) } else { c(0.0, 0.0) });
        let opts = ExpOptions { max_grid: 64, ..ExpOptions::default() };
        assert!(matches!(exp_field_with(&f, opts), Err(Error::TailNotResolved { .. })));
    }

    #[test]
    fn sobolev_examples() {
        assert!((sobolev_norm(&two_cos(), 3.7) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(sobolev_norm(&ComplexField::constant(c(1.0, 0.0)), 5.0), 1.0);
        assert_eq!(sobolev_norm(&ComplexField::mode(2), 1.0), 2.0);
    }

    #[test]
    fn seq_norm_examples() {
        let z = WeightedSeq::new(vec![c(1.0, 0.0), c(0.0, 0.0)], 2.0);
        assert_eq!(z.norm(), 1.0);
        let z = WeightedSeq::new((1..=4).map(|n| c(1.0 / n as f64, 0.0)).collect(), 0.5);
        assert!((z.norm() - (1.0 + 0.5 + 1.0 / 3.0 + 0.25f64).sqrt()).abs() < 1e-15);
        let z = WeightedSeq::new(vec![c(0.0, 1.0)], 7.0);
        assert_eq!(z.norm(), 1.0);
    }

    #[test]
    fn real_field_rejects_asymmetric_input() {
        let mut f = ComplexField::zeros(2);
        f.set(1, c(1.0, 0.0));
        assert!(matches!(RealField::new(f.clone()), Err(Error::NotReal { mode: 1, .. })));
        f.set(-1, c(1.0, 0.0));
        f.set(0, c(0.1, 0.0));
        assert!(matches!(RealField::new(f), Err(Error::NonZeroMean(_))));
    }
}
