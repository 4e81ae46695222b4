//! Truncated Lax operator `(1/i) d/dx - T_u` on the Hardy space and the
//! spectral quantities derived from its eigenpairs.
//!
//! On the basis `e^{i m x}`, `0 <= m < M`, the operator is the Hermitian
//! matrix `A[m][n] = n delta_{mn} - c_{m-n}(u)`. Eigenvalues near the top of
//! the truncated spectrum are polluted by the cut, so everything downstream
//! is restricted to the trusted range `n <= M/2`.

use faer::{Mat, Side};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{HardyElement, RealField};
use crate::numeric::kahan_sum;

/// Gaps below `-GAP_TOL` are treated as solver failures.
pub const GAP_TOL: f64 = 1e-9;
/// Pairings smaller than this leave the eigenvector phase undetermined.
pub const PHASE_TOL: f64 = 1e-12;
/// Largest tolerated disagreement between the two formulas for `mu_n`.
pub const MU_TOL: f64 = 1e-6;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// The truncated Lax matrix, stored through its Toeplitz symbol.
#[derive(Clone, Debug)]
pub struct LaxMatrix {
    dim: usize,
    /// `symbol[k + dim - 1] = c_k(u)` for `|k| < dim`.
    symbol: Vec<Complex64>,
    real: bool,
}

impl LaxMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, m: usize, n: usize) -> Complex64 {
        let k = m as i64 - n as i64;
        let diag = if m == n { n as f64 } else { 0.0 };
        Complex64::new(diag, 0.0) - self.symbol[(k + self.dim as i64 - 1) as usize]
    }

    /// True when every entry is real, which halves the eigensolver cost.
    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn trace(&self) -> f64 {
        kahan_sum((0..self.dim).map(|n| self.entry(n, n).re))
    }

    pub fn hermitian_defect(&self) -> f64 {
        let d = self.dim as i64;
        (0..d)
            .map(|k| {
                let a = self.symbol[(k + d - 1) as usize];
                let b = self.symbol[(-k + d - 1) as usize];
                (a - b.conj()).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Dense row-major copy.
    pub fn to_dense(&self) -> Vec<Complex64> {
        let m = self.dim;
        let mut out = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                out.push(self.entry(i, j));
            }
        }
        out
    }
}

pub fn assemble_lax(u: &RealField, m: usize) -> Result<LaxMatrix> {
    let bw = u.bandwidth();
    if m < 2 * bw || m == 0 {
        return Err(Error::TruncationTooSmall { m, bandwidth: bw });
    }
    if m < 4 * bw {
        log::warn!("Lax truncation {m} is below four times the bandwidth {bw}");
    }
    let d = m as i64;
    let symbol: Vec<Complex64> = (-(d - 1)..d).map(|k| u.coeff(k)).collect();
    let real = symbol.iter().all(|c| c.im == 0.0);
    Ok(LaxMatrix { dim: m, symbol, real })
}

/// Eigenvalues and derived quantities of a truncated Lax matrix.
///
/// Sequences indexed from `n = 1` are stored at offset `n - 1`; use the
/// accessors.
#[derive(Clone, Debug)]
pub struct SpectralData {
    m: usize,
    p: usize,
    lambdas: Vec<f64>,
    gammas: Vec<f64>,
    kappas: Vec<f64>,
    mus: Vec<f64>,
    mus_product: Vec<f64>,
    /// Columns `f_0..=f_P`, each of length `M`.
    eigvecs: Vec<Complex64>,
    phase_ok: bool,
    kappa_tail_bound: f64,
}

impl SpectralData {
    pub fn dim(&self) -> usize {
        self.m
    }

    /// Trusted range `P = M/2`.
    pub fn trusted(&self) -> usize {
        self.p
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn lambda(&self, n: usize) -> f64 {
        self.lambdas[n]
    }

    /// `gamma_n` for `1 <= n < M`.
    pub fn gamma(&self, n: usize) -> f64 {
        self.gammas[n - 1]
    }

    /// `gamma_1, ..., gamma_{M-1}`.
    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    /// `kappa_n` for `1 <= n <= P`.
    pub fn kappa(&self, n: usize) -> f64 {
        self.kappas[n - 1]
    }

    pub fn kappas(&self) -> &[f64] {
        &self.kappas
    }

    /// `mu_n` from the eigenvector pairing, `1 <= n <= P`.
    pub fn mu(&self, n: usize) -> f64 {
        self.mus[n - 1]
    }

    pub fn mus(&self) -> &[f64] {
        &self.mus
    }

    /// `mu_n` from the truncated product formula.
    pub fn mus_product(&self) -> &[f64] {
        &self.mus_product
    }

    pub fn phase_ok(&self) -> bool {
        self.phase_ok
    }

    /// Multiplicative bound `exp(sum_{p>P} gamma_p)` on the error of the
    /// truncated products.
    pub fn kappa_tail_bound(&self) -> f64 {
        self.kappa_tail_bound
    }

    /// Coefficients of `f_n` on `e^{ikx}`, `0 <= k < M`, for `n <= P`.
    pub fn eigvec(&self, n: usize) -> &[Complex64] {
        assert!(n <= self.p, "eigenvector {n} outside the trusted range");
        &self.eigvecs[n * self.m..(n + 1) * self.m]
    }

    pub fn eigenfunction(&self, n: usize) -> HardyElement {
        HardyElement::from_coeffs(self.eigvec(n).to_vec())
    }

    /// `<f_n | e^{ix} f_{n-1}> = sum_k c_{k+1}(f_n) conj(c_k(f_{n-1}))`.
    pub fn shift_pairing(&self, n: usize) -> Complex64 {
        shift_pairing(self.eigvec(n), self.eigvec(n - 1))
    }

    pub fn to_report(&self) -> SpectralReport {
        SpectralReport {
            m: self.m,
            p: self.p,
            lambdas: self.lambdas.clone(),
            gammas: self.gammas.clone(),
            kappas: self.kappas.clone(),
            mus: self.mus.clone(),
            phase_ok: self.phase_ok,
        }
    }

    /// Eigenvectors `f_0..=f_P` as little-endian `f64` pairs `(re, im)`,
    /// one row per eigenvector.
    pub fn eigvecs_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.eigvecs.len() * 16);
        for c in &self.eigvecs {
            out.extend_from_slice(&c.re.to_le_bytes());
            out.extend_from_slice(&c.im.to_le_bytes());
        }
        out
    }
}

/// Serialised form of [`SpectralData`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "P")]
    pub p: usize,
    pub lambdas: Vec<f64>,
    pub gammas: Vec<f64>,
    pub kappas: Vec<f64>,
    pub mus: Vec<f64>,
    #[serde(rename = "phaseOK")]
    pub phase_ok: bool,
}

fn shift_pairing(fn_: &[Complex64], fprev: &[Complex64]) -> Complex64 {
    let mut acc = ZERO;
    for k in 0..fn_.len() - 1 {
        acc += fn_[k + 1] * fprev[k].conj();
    }
    acc
}

/// Dense Hermitian eigensolve. Keeps all eigenvalues and the eigenvectors
/// `f_0..=f_keep`, phase-normalised.
pub fn eigen_decompose(l: &LaxMatrix, keep: usize) -> Result<(Vec<f64>, Vec<Complex64>)> {
    let m = l.dim;
    let keep = keep.min(m - 1);
    let cols = keep + 1;
    let mut vecs = Vec::with_capacity(cols * m);
    let lambdas: Vec<f64>;
    if l.real {
        let a = Mat::<f64>::from_fn(m, m, |i, j| l.entry(i, j).re);
        let e = a.self_adjoint_eigen(Side::Lower).map_err(|e| Error::EigenFailure(format!("{e:?}")))?;
        drop(a);
        let s = e.S().column_vector();
        lambdas = (0..m).map(|i| s[i]).collect();
        let u = e.U();
        for j in 0..cols {
            for i in 0..m {
                vecs.push(Complex64::new(*u.get(i, j), 0.0));
            }
        }
    } else {
        let a = Mat::<Complex64>::from_fn(m, m, |i, j| l.entry(i, j));
        let e = a.self_adjoint_eigen(Side::Lower).map_err(|e| Error::EigenFailure(format!("{e:?}")))?;
        drop(a);
        let s = e.S().column_vector();
        lambdas = (0..m).map(|i| s[i].re).collect();
        let u = e.U();
        for j in 0..cols {
            for i in 0..m {
                vecs.push(*u.get(i, j));
            }
        }
    }
    if lambdas.iter().any(|x| !x.is_finite()) || lambdas.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::EigenFailure("eigenvalues not finite and ascending".into()));
    }
    normalize_phases(&mut vecs, m)?;
    Ok((lambdas, vecs))
}

/// Eigenvalues only.
pub fn eigenvalues(l: &LaxMatrix) -> Result<Vec<f64>> {
    let m = l.dim;
    let lambdas = if l.real {
        Mat::<f64>::from_fn(m, m, |i, j| l.entry(i, j).re)
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::EigenFailure(format!("{e:?}")))?
    } else {
        Mat::<Complex64>::from_fn(m, m, |i, j| l.entry(i, j))
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::EigenFailure(format!("{e:?}")))?
    };
    Ok(lambdas)
}

/// Rotates each column by a unimodular constant so that `<f_0|1> > 0` and
/// `<f_n|e^{ix} f_{n-1}> > 0`, in increasing `n`.
pub fn normalize_phases(vecs: &mut [Complex64], m: usize) -> Result<()> {
    let cols = vecs.len() / m;
    for n in 0..cols {
        let pairing = if n == 0 {
            vecs[0]
        } else {
            let (prev, cur) = vecs.split_at(n * m);
            shift_pairing(&cur[..m], &prev[(n - 1) * m..])
        };
        let modulus = pairing.norm();
        if modulus < PHASE_TOL {
            return Err(Error::DegeneratePhase { n, modulus });
        }
        let rot = pairing.conj() / modulus;
        for c in &mut vecs[n * m..(n + 1) * m] {
            *c *= rot;
        }
    }
    Ok(())
}

/// `gamma_n = lambda_n - lambda_{n-1} - 1` for `1 <= n < M`, clamped at 0.
///
/// Only gaps with `n <= trusted` can raise [`Error::NegativeGap`]; above the
/// trusted range negative values are clamped silently.
pub fn compute_gaps(lambdas: &[f64], trusted: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(lambdas.len().saturating_sub(1));
    for n in 1..lambdas.len() {
        let g = lambdas[n] - lambdas[n - 1] - 1.0;
        if g < -GAP_TOL && n <= trusted {
            return Err(Error::NegativeGap { n, gamma: g });
        }
        out.push(g.max(0.0));
    }
    Ok(out)
}

/// `kappa_n = (1/(lambda_n - lambda_0)) prod_{1<=p<=P, p!=n} (1 - gamma_p/(lambda_p - lambda_n))`
/// for `1 <= n <= P`, and the tail bound `exp(sum_{p>P} gamma_p)`.
pub fn compute_kappas(lambdas: &[f64], gammas: &[f64], p: usize) -> (Vec<f64>, f64) {
    let kappas = (1..=p)
        .map(|n| {
            let mut prod = 1.0;
            for q in 1..=p {
                if q != n {
                    prod *= 1.0 - gammas[q - 1] / (lambdas[q] - lambdas[n]);
                }
            }
            prod / (lambdas[n] - lambdas[0])
        })
        .collect();
    let tail = kahan_sum(gammas.iter().skip(p).copied()).exp();
    (kappas, tail)
}

/// `mu_n` by the product formula, `1 <= n <= P`.
pub fn mus_by_product(lambdas: &[f64], gammas: &[f64], p: usize) -> Vec<f64> {
    (1..=p)
        .map(|n| {
            let gn = gammas[n - 1];
            let mut prod = 1.0 - gn / (lambdas[n] - lambdas[0]);
            if gn != 0.0 {
                for q in 1..=p {
                    if q != n {
                        let b = gn * gammas[q - 1] / ((lambdas[q] - lambdas[n]) * (lambdas[q - 1] - lambdas[n - 1]));
                        prod *= 1.0 - b;
                    }
                }
            }
            prod
        })
        .collect()
}

/// Full pipeline: assemble, diagonalise, normalise phases and derive gaps,
/// `kappa_n` and `mu_n` on the trusted range `P = M/2`.
pub fn spectral_data(u: &RealField, m: usize) -> Result<SpectralData> {
    let l = assemble_lax(u, m)?;
    let defect = l.hermitian_defect();
    if defect > 1e-13 {
        return Err(Error::NotHermitian(defect));
    }
    let p = m / 2;
    let (lambdas, eigvecs) = eigen_decompose(&l, p)?;
    let gammas = compute_gaps(&lambdas, p)?;
    let (kappas, kappa_tail_bound) = compute_kappas(&lambdas, &gammas, p);
    log::debug!("kappa product tail bound {kappa_tail_bound:e} at P = {p}");
    let mus_product = mus_by_product(&lambdas, &gammas, p);
    let mut mus = Vec::with_capacity(p);
    for n in 1..=p {
        let a = &eigvecs[n * m..(n + 1) * m];
        let b = &eigvecs[(n - 1) * m..n * m];
        let pr = shift_pairing(a, b);
        let mu = (pr * pr).re;
        if (mu - mus_product[n - 1]).abs() > MU_TOL {
            return Err(Error::MuMismatch { n, pairing: mu, product: mus_product[n - 1] });
        }
        mus.push(mu);
    }
    Ok(SpectralData { m, p, lambdas, gammas, kappas, mus, mus_product, eigvecs, phase_ok: true, kappa_tail_bound })
}

/// Residuals of the trace identities over `0 <= n <= n_max`.
#[derive(Clone, Debug, Serialize)]
pub struct TraceReport {
    pub n_max: usize,
    /// `max_n |lambda_n - (n - sum_{k>n} gamma_k)|`.
    pub eigenvalue_residual: f64,
    /// Same with the sum doubled; reported for comparison only.
    pub eigenvalue_residual_doubled: f64,
    /// `| ||u||_0^2 - 2 sum n gamma_n |`.
    pub norm_residual: f64,
    /// Per `n`: `(n, residual, doubled residual)`.
    pub rows: Vec<(usize, f64, f64)>,
}

/// Sums run over the trusted range only.
pub fn trace_checks(u: &RealField, data: &SpectralData, n_max: usize) -> TraceReport {
    let p = data.p;
    let n_max = n_max.min(p);
    // tails[n] = sum_{n<k<=P} gamma_k
    let mut tails = vec![0.0; p + 1];
    for n in (0..p).rev() {
        tails[n] = tails[n + 1] + data.gamma(n + 1);
    }
    let rows: Vec<(usize, f64, f64)> = (0..=n_max)
        .map(|n| {
            let l = data.lambda(n);
            let x = n as f64;
            (n, (l - (x - tails[n])).abs(), (l - (x - 2.0 * tails[n])).abs())
        })
        .collect();
    let weighted = kahan_sum((1..=p).map(|n| n as f64 * data.gamma(n)));
    TraceReport {
        n_max,
        eigenvalue_residual: rows.iter().map(|r| r.1).fold(0.0, f64::max),
        eigenvalue_residual_doubled: rows.iter().map(|r| r.2).fold(0.0, f64::max),
        norm_residual: (u.mean_square() - 2.0 * weighted).abs(),
        rows,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::one_gap_potential;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn zero_potential_is_diagonal() {
        let l = assemble_lax(&RealField::zero(1), 4).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { c(i as f64) } else { c(0.0) };
                assert_eq!(l.entry(i, j), want);
            }
        }
    }

    #[test]
    fn two_cos_has_unit_off_diagonals() {
        let u = RealField::from_positive_modes(&[c(1.0)]).unwrap();
        let l = assemble_lax(&u, 3).unwrap();
        assert_eq!(l.entry(0, 1), c(-1.0));
        assert_eq!(l.entry(1, 0), c(-1.0));
        assert_eq!(l.entry(2, 1), c(-1.0));
        assert_eq!(l.entry(0, 2), c(0.0));
        assert_eq!(l.entry(2, 2), c(2.0));
    }

    #[test]
    fn one_gap_entry() {
        let u = one_gap_potential(c(0.5), 48).unwrap();
        let l = assemble_lax(&u, 192).unwrap();
        assert_eq!(l.entry(2, 1), c(-0.5));
        assert!(l.is_real());
    }

    #[test]
    fn truncation_too_small_is_rejected() {
        let u = RealField::from_positive_modes(&[c(0.1); 8]).unwrap();
        assert!(matches!(assemble_lax(&u, 15), Err(Error::TruncationTooSmall { .. })));
        assert!(assemble_lax(&u, 16).is_ok());
    }

    #[test]
    fn zero_potential_spectrum() {
        let d = spectral_data(&RealField::zero(1), 8).unwrap();
        for n in 0..8 {
            assert!((d.lambda(n) - n as f64).abs() < 1e-14);
        }
        for n in 0..=4 {
            let f = d.eigvec(n);
            for (k, v) in f.iter().enumerate() {
                let want = if k == n { 1.0 } else { 0.0 };
                assert!((v - c(want)).norm() < 1e-14);
            }
        }
        for n in 1..=4 {
            assert_eq!(d.gamma(n), 0.0);
            assert!((d.kappa(n) - 1.0 / n as f64).abs() < 1e-15);
            assert!((d.mu(n) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn one_gap_spectrum() {
        let u = one_gap_potential(c(0.5), 60).unwrap();
        let d = spectral_data(&u, 256).unwrap();
        assert!((d.gamma(1) - 1.0 / 3.0).abs() < 1e-12);
        for n in 2..=32 {
            assert!(d.gamma(n) < 1e-12);
        }
        assert!((d.lambda(0) + 1.0 / 3.0).abs() < 1e-12);
        assert!((d.kappa(1) - 0.75).abs() < 1e-12);
        assert!((d.mu(2) - 1.0).abs() < 1e-10);
        let p = d.shift_pairing(1);
        assert!(p.im.abs() < 1e-14 && p.re > 0.0);
        assert!((p.re - d.mu(1).sqrt()).abs() < 1e-14);
        let l = assemble_lax(&u, 256).unwrap();
        let sum = kahan_sum(d.lambdas().iter().copied());
        assert!((sum - l.trace()).abs() < 1e-9);
    }

    #[test]
    fn scaled_one_gap_closed_form() {
        let u = one_gap_potential(c(0.8), 200).unwrap();
        let d = spectral_data(&u, 800).unwrap();
        assert!((d.gamma(1) - 16.0 / 9.0).abs() < 1e-10);
    }

    #[test]
    fn one_gap_trace_identities() {
        let u = one_gap_potential(c(0.5), 60).unwrap();
        let d = spectral_data(&u, 256).unwrap();
        let r = trace_checks(&u, &d, 64);
        assert!(r.eigenvalue_residual < 1e-10);
        assert!((r.eigenvalue_residual_doubled - 1.0 / 3.0).abs() < 1e-10, "{}", r.eigenvalue_residual_doubled);
        assert!((r.eigenvalue_residual_doubled - 1.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn phases_fixed_for_complex_potential() {
        let u = RealField::from_positive_modes(&[Complex64::new(0.2, 0.3), Complex64::new(-0.1, 0.05)]).unwrap();
        let d = spectral_data(&u, 32).unwrap();
        assert!(d.eigvec(0)[0].im == 0.0 && d.eigvec(0)[0].re > 0.0);
        for n in 1..=16 {
            let p = d.shift_pairing(n);
            assert!(p.re > 0.0 && p.im.abs() < 1e-14);
        }
        for (a, b) in d.mus().iter().zip(d.mus_product()) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}
