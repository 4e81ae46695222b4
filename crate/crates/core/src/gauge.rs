//! Gauge transform `u -> d/dx Pi e^{-i D^{-1} u}`, its differential, the
//! anti-linear Hankel kernel test, and Hankel/Toeplitz operators.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier::{
    antiderivative, exp_field, multiply, multiply_full, sobolev_norm, szego, ComplexField, HardyElement, RealField,
};
use crate::numeric::{bracket, kahan_sum, log_log_fit, LineFit};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `e^{-i D^{-1} u}`.
pub fn inverse_gauge_factor(u: &RealField) -> Result<ComplexField> {
    exp_field(&antiderivative(u.as_complex()).scale(-I))
}

/// `d/dx Pi f`, a mean-free Hardy element.
fn derivative_of_projection(f: &ComplexField) -> HardyElement {
    let p = szego(f);
    let coeffs = p.coeffs().iter().enumerate().map(|(n, c)| c * Complex64::new(0.0, n as f64)).collect();
    HardyElement::from_coeffs(coeffs).into_mean_free()
}

pub fn gauge(u: &RealField) -> Result<HardyElement> {
    Ok(derivative_of_projection(&inverse_gauge_factor(u)?))
}

/// `-i d/dx Pi[(D^{-1} h) e^{-i D^{-1} u}]`.
pub fn gauge_differential(u: &RealField, h: &RealField) -> Result<HardyElement> {
    let e = inverse_gauge_factor(u)?;
    let q = multiply_full(&antiderivative(h.as_complex()), &e);
    let w = derivative_of_projection(&q);
    Ok(HardyElement::from_coeffs(w.coeffs().iter().map(|c| c * -I).collect()).into_mean_free())
}

/// `|| h - Pi[(D^{-1} w) conj(h)] ||_0`. A zero residual with `h != 0`
/// exhibits a kernel element of `Id - H_{D^{-1} w}` (anti-linear).
pub fn kernel_residual(w: &HardyElement, h: &HardyElement) -> f64 {
    let a = antiderivative(&w.to_field());
    let op = HankelOperator::new(a, HankelVariant::Antilinear);
    let image = op.apply(&h.to_field());
    let r = h.to_field().sub(&image);
    sobolev_norm(&r, 0.0)
}

/// Kernel witness `h_n = e^{ix} + e^{i(n-1)x}` for `w = i n e^{inx}`.
pub fn kernel_witness(n: usize) -> (HardyElement, HardyElement) {
    assert!(n >= 2, "witnesses start at n = 2");
    let mut w = vec![ZERO; n + 1];
    w[n] = Complex64::new(0.0, n as f64);
    let mut h = vec![ZERO; n];
    h[1] += 1.0;
    h[n - 1] += 1.0;
    (HardyElement::from_coeffs(w), HardyElement::from_coeffs(h))
}

/// Potential with `c_k = alpha^k`, `c_{-k} = conj(alpha)^k`: the one-gap
/// traveling wave `Pi u = alpha e^{ix}/(1 - alpha e^{ix})`.
pub fn one_gap_potential(alpha: Complex64, bandwidth: usize) -> Result<RealField> {
    let r = alpha.norm();
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::AlphaOutOfRange(r));
    }
    if r.powi(bandwidth as i32) >= 1e-14 {
        log::warn!("one-gap series truncated at {bandwidth} with |alpha|^N = {:e}", r.powi(bandwidth as i32));
    }
    let mut modes = Vec::with_capacity(bandwidth);
    let mut p = Complex64::new(1.0, 0.0);
    for _ in 0..bandwidth {
        p *= alpha;
        modes.push(p);
    }
    RealField::from_positive_modes(&modes)
}

/// Smallest bandwidth with `|alpha|^N < 1e-16`.
pub fn one_gap_bandwidth(alpha: Complex64) -> usize {
    let r = alpha.norm();
    if !(r > 0.0 && r < 1.0) {
        return 1;
    }
    ((-16.0 * std::f64::consts::LN_10) / r.ln()).ceil().max(1.0) as usize
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum HankelVariant {
    /// `f -> Pi[u f]` from `H_-` (modes `<= 0`) to `H_+`.
    Plus,
    /// `f -> (Id - Pi)[u f]` from `H_+` to strictly negative modes.
    Minus,
    /// `h -> Pi[g conj(h)]` on `H_+`.
    Antilinear,
}

#[derive(Clone, Debug)]
pub struct HankelOperator {
    symbol: ComplexField,
    variant: HankelVariant,
}

impl HankelOperator {
    pub fn new(symbol: ComplexField, variant: HankelVariant) -> Self {
        Self { symbol, variant }
    }

    pub fn symbol(&self) -> &ComplexField {
        &self.symbol
    }

    /// The part of `f` outside the variant's domain is ignored.
    pub fn apply(&self, f: &ComplexField) -> ComplexField {
        let nf = f.bandwidth();
        let ns = self.symbol.bandwidth();
        match self.variant {
            HankelVariant::Plus => {
                let f = ComplexField::from_fn(nf, |k| if k <= 0 { f.coeff(k) } else { ZERO });
                let p = multiply(&self.symbol, &f, ns);
                ComplexField::from_fn(ns, |k| if k >= 0 { p.coeff(k) } else { ZERO })
            }
            HankelVariant::Minus => {
                let f = ComplexField::from_fn(nf, |k| if k >= 0 { f.coeff(k) } else { ZERO });
                let p = multiply(&self.symbol, &f, ns);
                ComplexField::from_fn(ns, |k| if k < 0 { p.coeff(k) } else { ZERO })
            }
            HankelVariant::Antilinear => {
                let h = ComplexField::from_fn(nf, |k| if k >= 0 { f.coeff(k) } else { ZERO });
                let out = ns + nf;
                let p = multiply(&self.symbol, &h.conj(), out);
                ComplexField::from_fn(out, |k| if k >= 0 { p.coeff(k) } else { ZERO })
            }
        }
    }
}

/// `f -> Pi[u f]` on the Hardy space.
#[derive(Clone, Debug)]
pub struct ToeplitzOperator {
    symbol: ComplexField,
}

impl ToeplitzOperator {
    pub fn new(symbol: ComplexField) -> Self {
        Self { symbol }
    }

    pub fn apply(&self, f: &HardyElement) -> HardyElement {
        let out = f.bandwidth() + self.symbol.bandwidth();
        self.apply_truncated(f, out)
    }

    /// Output restricted to modes `0..=out_bandwidth`.
    pub fn apply_truncated(&self, f: &HardyElement, out_bandwidth: usize) -> HardyElement {
        let p = multiply(&self.symbol, &f.to_field(), out_bandwidth);
        szego(&p)
    }
}

/// Hypotheses of the Hankel smoothing estimate, ordered by gain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum HankelCase {
    /// `s > 1/2`: gain `alpha`.
    I,
    /// `s = 1/2`: gain `alpha - eps`.
    II,
    /// `0 <= s < 1/2`, `alpha >= 1/2 - s`: gain `beta = alpha + s - 1/2`.
    III,
    /// `s < 0`, `alpha >= 1/2 - s`, `alpha > -2s`: gain `beta`.
    IV,
}

impl HankelCase {
    pub fn classify(s: f64, alpha: f64) -> Result<Self> {
        let out = || Error::CaseOutOfRange { s, alpha };
        if alpha < 0.0 || !s.is_finite() || !alpha.is_finite() {
            return Err(out());
        }
        if s > 0.5 {
            Ok(Self::I)
        } else if s == 0.5 {
            Ok(Self::II)
        } else if s >= 0.0 && alpha >= 0.5 - s {
            Ok(Self::III)
        } else if s < 0.0 && alpha >= 0.5 - s && alpha > -2.0 * s {
            Ok(Self::IV)
        } else {
            Err(out())
        }
    }

    /// Regularity gained by the output, with `eps` the case (ii) loss.
    pub fn gain(self, s: f64, alpha: f64, eps: f64) -> f64 {
        match self {
            Self::I => alpha,
            Self::II => alpha - eps,
            Self::III | Self::IV => alpha + s - 0.5,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::I => "i",
            Self::II => "ii",
            Self::III => "iii",
            Self::IV => "iv",
        }
    }
}

/// Loss of regularity in case (ii).
pub const CASE_II_EPS: f64 = 0.05;

#[derive(Clone, Debug, Serialize)]
pub struct ProbeReport {
    pub bandwidth: usize,
    pub case: HankelCase,
    pub gain: f64,
    pub max_ratio: f64,
}

/// Random unit vector of `H^s_-` with profile `<p>^{-s-1/2-0.01}` on the
/// modes `-p`, `0 <= p <= n`.
fn probe_direction(rng: &mut ChaCha8Rng, s: f64, n: usize) -> ComplexField {
    let mut f = ComplexField::zeros(n);
    for p in 0..=n as i64 {
        let phase = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
        f.set(-p, Complex64::from_polar(bracket(p).powf(-s - 0.51), phase));
    }
    let norm = sobolev_norm(&f, s);
    f.scale(Complex64::new(1.0 / norm, 0.0))
}

/// Largest `||H_u f||_{s+gain} / (||u||_{s+alpha} ||f||_s)` over seeded
/// random directions `f`.
pub fn hankel_smoothing_probe(u: &ComplexField, s: f64, alpha: f64, trials: usize, seed: u64) -> Result<ProbeReport> {
    let case = HankelCase::classify(s, alpha)?;
    let gain = case.gain(s, alpha, CASE_II_EPS);
    let nu = sobolev_norm(u, s + alpha);
    let n = u.bandwidth();
    if nu == 0.0 {
        return Ok(ProbeReport { bandwidth: n, case, gain, max_ratio: 0.0 });
    }
    let op = HankelOperator::new(u.clone(), HankelVariant::Plus);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: f64 = 0.0;
    for _ in 0..trials {
        let f = probe_direction(&mut rng, s, n);
        let g = op.apply(&f);
        best = best.max(sobolev_norm(&g, s + gain) / (nu * sobolev_norm(&f, s)));
    }
    Ok(ProbeReport { bandwidth: n, case, gain, max_ratio: best })
}

/// Seeded symbol in `H^{s+alpha}` with profile `<k>^{-(s+alpha)-1/2-0.01}`.
pub fn probe_symbol(s: f64, alpha: f64, n: usize, seed: u64) -> ComplexField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ComplexField::from_fn(n, |k| {
        let phase = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
        Complex64::from_polar(bracket(k).powf(-(s + alpha) - 0.51), phase)
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeRefinement {
    pub rows: Vec<ProbeReport>,
    /// Slope of `log maxRatio` against `log N`.
    pub trend: Option<LineFit>,
}

/// Runs the probe at each bandwidth with a freshly seeded symbol and reports
/// the growth trend of the maximal ratio.
pub fn hankel_probe_refinement(
    s: f64,
    alpha: f64,
    bandwidths: &[usize],
    trials: usize,
    seed: u64,
) -> Result<ProbeRefinement> {
    let mut rows = Vec::with_capacity(bandwidths.len());
    for &n in bandwidths {
        let u = probe_symbol(s, alpha, n, seed);
        rows.push(hankel_smoothing_probe(&u, s, alpha, trials, seed.wrapping_add(1))?);
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.bandwidth as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.max_ratio).collect();
    Ok(ProbeRefinement { trend: log_log_fit(&xs, &ys), rows })
}

/// Largest coefficient gap between `d_0 G[h]` and `-i Pi h`.
pub fn differential_at_zero_defect(h: &RealField) -> Result<f64> {
    let d = gauge_differential(&RealField::zero(h.bandwidth()), h)?;
    let want = szego(h.as_complex());
    let n = d.bandwidth().max(want.bandwidth()) as i64;
    Ok((0..=n).map(|k| (d.coeff(k) - want.coeff(k) * -I).norm()).fold(0.0, f64::max))
}

/// Largest coefficient gap between `d_u G[h]` and the central difference
/// `(G(u + eps h) - G(u - eps h)) / (2 eps)`.
pub fn differential_fd_defect(u: &RealField, h: &RealField, eps: f64) -> Result<f64> {
    let d = gauge_differential(u, h)?;
    let plus = gauge(&u.add(&h.scale(eps)))?;
    let minus = gauge(&u.add(&h.scale(-eps)))?;
    let n = d.bandwidth().max(plus.bandwidth()).max(minus.bandwidth()) as i64;
    Ok((0..=n).map(|k| (d.coeff(k) - (plus.coeff(k) - minus.coeff(k)) / (2.0 * eps)).norm()).fold(0.0, f64::max))
}

/// Largest coefficient of `w` away from `mode`.
pub fn off_mode_defect(w: &HardyElement, mode: usize) -> f64 {
    w.coeffs().iter().enumerate().filter(|(k, _)| *k != mode).map(|(_, c)| c.norm()).fold(0.0, f64::max)
}

/// `||Pi f||_0` on the stored band.
pub fn hardy_l2(f: &HardyElement) -> f64 {
    kahan_sum(f.coeffs().iter().map(|c| c.norm_sqr())).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::sobolev_norm;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_real(seed: u64, n: usize, scale: f64) -> RealField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m: Vec<Complex64> = (0..n).map(|_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5) * scale).collect();
        RealField::from_positive_modes(&m).unwrap()
    }

    #[test]
    fn gauge_of_zero_is_zero() {
        let w = gauge(&RealField::zero(4)).unwrap();
        assert!(w.is_mean_free());
        assert!(w.coeffs().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn one_gap_gauge_closed_form() {
        for a in [0.5, 0.9] {
            let alpha = c(a, 0.0);
            let u = one_gap_potential(alpha, one_gap_bandwidth(alpha)).unwrap();
            let w = gauge(&u).unwrap();
            assert!((w.coeff(1) - c(0.0, -a)).norm() < 1e-10, "alpha {a}");
            assert!(off_mode_defect(&w, 1) < 1e-10);
        }
    }

    #[test]
    fn one_gap_coefficients_and_norm() {
        let u = one_gap_potential(c(0.5, 0.0), 60).unwrap();
        assert_eq!(u.coeff(1), c(0.5, 0.0));
        assert_eq!(u.coeff(2), c(0.25, 0.0));
        assert!((u.mean_square() - 2.0 / 3.0).abs() < 1e-15);
        assert!(matches!(one_gap_potential(c(1.0, 0.0), 4), Err(Error::AlphaOutOfRange(_))));
        let tiny = one_gap_potential(c(1e-9, 0.0), 4).unwrap();
        assert!(tiny.as_complex().max_abs() <= 1e-9);
    }

    #[test]
    fn differential_at_zero_is_minus_i_szego() {
        let h = RealField::from_positive_modes(&[c(1.0, 0.0)]).unwrap();
        let d = gauge_differential(&RealField::zero(1), &h).unwrap();
        assert!((d.coeff(1) - c(0.0, -1.0)).norm() < 1e-15);
        assert!(differential_at_zero_defect(&random_real(3, 64, 1.0)).unwrap() < 1e-14);
    }

    #[test]
    fn differential_matches_finite_differences() {
        let u = random_real(11, 6, 0.4);
        let h = random_real(12, 6, 0.4);
        assert!(differential_fd_defect(&u, &h, 1e-5).unwrap() < 1e-7);
    }

    #[test]
    fn differential_is_linear() {
        let u = random_real(21, 5, 0.3);
        let h1 = random_real(22, 5, 0.3);
        let h2 = random_real(23, 5, 0.3);
        let a = gauge_differential(&u, &h1.add(&h2)).unwrap();
        let b = gauge_differential(&u, &h1).unwrap();
        let d = gauge_differential(&u, &h2).unwrap();
        let n = a.bandwidth() as i64;
        for k in 0..=n {
            assert!((a.coeff(k) - b.coeff(k) - d.coeff(k)).norm() < 1e-12);
        }
    }

    #[test]
    fn kernel_witnesses_vanish() {
        for n in 2..=16 {
            let (w, h) = kernel_witness(n);
            assert!(kernel_residual(&w, &h) < 1e-14, "n = {n}");
        }
    }

    #[test]
    fn kernel_residual_examples() {
        let (_, h) = kernel_witness(5);
        assert!((kernel_residual(&HardyElement::zeros(3), &h) - 2f64.sqrt()).abs() < 1e-15);
        let alpha = c(0.5, 0.0);
        let w = gauge(&one_gap_potential(alpha, one_gap_bandwidth(alpha)).unwrap()).unwrap();
        let e1 = HardyElement::from_coeffs(vec![c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(kernel_residual(&w, &e1) > 0.1);
    }

    #[test]
    fn hankel_examples() {
        let op = HankelOperator::new(ComplexField::mode(2), HankelVariant::Plus);
        let out = op.apply(&ComplexField::mode(-1));
        assert!((out.coeff(1) - c(1.0, 0.0)).norm() < 1e-15);
        let out = op.apply(&ComplexField::mode(-3));
        assert!(out.max_abs() < 1e-15);
        for n in 2..=8i64 {
            let (_, h) = kernel_witness(n as usize);
            let op = HankelOperator::new(ComplexField::mode(n), HankelVariant::Antilinear);
            let out = op.apply(&h.to_field());
            assert!(out.sub(&h.to_field()).max_abs() < 1e-15);
        }
    }

    #[test]
    fn hankel_plus_matches_dense_assembly() {
        let n = 24;
        let u = probe_symbol(0.5, 1.0, n, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let f = probe_direction(&mut rng, 0.5, n);
        let got = HankelOperator::new(u.clone(), HankelVariant::Plus).apply(&f);
        for m in 0..=n as i64 {
            let mut want = c(0.0, 0.0);
            for p in 0..=n as i64 {
                want += u.coeff(m + p) * f.coeff(-p);
            }
            assert!((got.coeff(m) - want).norm() < 1e-13);
        }
    }

    #[test]
    fn hankel_minus_keeps_negative_modes() {
        let op = HankelOperator::new(ComplexField::mode(-3), HankelVariant::Minus);
        let out = op.apply(&ComplexField::mode(1));
        assert!((out.coeff(-2) - c(1.0, 0.0)).norm() < 1e-15);
        let out = op.apply(&ComplexField::mode(4));
        assert!(out.max_abs() < 1e-15);
    }

    #[test]
    fn toeplitz_examples() {
        let f = HardyElement::from_coeffs(vec![c(1.0, 0.0), c(0.5, -0.2), c(0.0, 0.3)]);
        let id = ToeplitzOperator::new(ComplexField::constant(c(1.0, 0.0))).apply(&f);
        assert!(id.sub(&f).coeffs().iter().all(|z| z.norm() < 1e-15));
        let one = HardyElement::from_coeffs(vec![c(1.0, 0.0)]);
        let out = ToeplitzOperator::new(ComplexField::mode(1)).apply(&one);
        assert!((out.coeff(1) - c(1.0, 0.0)).norm() < 1e-15 && out.coeff(0).norm() < 1e-15);
    }

    #[test]
    fn toeplitz_with_coanalytic_exponentials_inverts() {
        // v = Pi u, symbols e^{+-i D^{-1} conj(v)} are co-analytic.
        let u = random_real(31, 6, 0.5);
        let v = szego(u.as_complex()).to_field();
        let a = antiderivative(&v.conj()).scale(I);
        let plus = exp_field(&a).unwrap();
        let minus = exp_field(&a.scale(c(-1.0, 0.0))).unwrap();
        let f = HardyElement::from_coeffs((0..=20).map(|k| c(1.0 / (1.0 + k as f64), 0.1 * k as f64)).collect());
        let g = ToeplitzOperator::new(plus).apply_truncated(&f, 20);
        let back = ToeplitzOperator::new(minus).apply_truncated(&g, 20);
        for k in 0..=20 {
            assert!((back.coeff(k) - f.coeff(k)).norm() < 1e-9);
        }
    }

    #[test]
    fn case_classification() {
        assert_eq!(HankelCase::classify(1.0, 1.0).unwrap(), HankelCase::I);
        assert_eq!(HankelCase::classify(0.5, 0.0).unwrap(), HankelCase::II);
        assert_eq!(HankelCase::classify(0.0, 1.0).unwrap(), HankelCase::III);
        assert_eq!(HankelCase::classify(-0.2, 1.0).unwrap(), HankelCase::IV);
        assert!(HankelCase::classify(0.0, 0.2).is_err());
        assert!(HankelCase::classify(-0.4, 0.85).is_err());
        assert!((HankelCase::III.gain(0.0, 1.0, CASE_II_EPS) - 0.5).abs() < 1e-15);
        assert!((HankelCase::II.gain(0.5, 1.0, CASE_II_EPS) - 0.95).abs() < 1e-15);
    }

    #[test]
    fn zero_symbol_probe_is_zero() {
        let r = hankel_smoothing_probe(&ComplexField::zeros(8), 1.0, 1.0, 4, 1).unwrap();
        assert_eq!(r.max_ratio, 0.0);
    }

    #[test]
    fn probe_directions_are_unit() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f = probe_direction(&mut rng, 0.3, 40);
        assert!((sobolev_norm(&f, 0.3) - 1.0).abs() < 1e-14);
        assert!((1..=40).all(|k| f.coeff(k) == c(0.0, 0.0)));
    }
}
