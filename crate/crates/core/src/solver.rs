//! Pseudo-spectral integrator for `u_t = H u_xx - (u^2)_x` on the torus.
//!
//! The state is the vector of positive modes `1..=N`; negative modes are
//! conjugates and the mean is zero, so reality and mean conservation hold
//! by construction. Time stepping is integrating-factor RK4 with the exact
//! propagator `e^{i n|n| t}` and 3/2-rule dealiasing of the quadratic term.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::io::{csv_table, fmt_f64};
use crate::fourier::{grid_size, RealField};
use crate::lax::{assemble_lax, eigenvalues};
use crate::numeric::kahan_sum;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Growth factor of `||u||_0` treated as a numerical blow-up.
pub const BLOWUP_FACTOR: f64 = 10.0;
/// Stability policy: `dt <= STEP_POLICY / bandwidth`.
pub const STEP_POLICY: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub bandwidth: usize,
    pub dt: f64,
    pub t_final: f64,
    pub sample_times: Vec<f64>,
}

impl SolverConfig {
    /// `samples` equally spaced times on `[0, t_final]`, both ends included.
    pub fn uniform(bandwidth: usize, dt: f64, t_final: f64, samples: usize) -> Self {
        let sample_times = if samples <= 1 || t_final == 0.0 {
            vec![0.0]
        } else {
            (0..samples).map(|i| t_final * i as f64 / (samples - 1) as f64).collect()
        };
        Self { bandwidth, dt, t_final, sample_times }
    }

    pub fn step_limit(&self) -> f64 {
        STEP_POLICY / self.bandwidth.max(1) as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.bandwidth == 0 {
            return Err(Error::ParamOutOfRange("solver bandwidth must be positive".into()));
        }
        if !self.dt.is_finite() || self.dt <= 0.0 {
            return Err(Error::ParamOutOfRange(format!("dt = {} must be positive", self.dt)));
        }
        if !self.t_final.is_finite() || self.t_final < 0.0 {
            return Err(Error::ParamOutOfRange(format!("final time {} must be non-negative", self.t_final)));
        }
        if self.dt > self.step_limit() {
            return Err(Error::StepTooLarge { dt: self.dt, limit: self.step_limit() });
        }
        let mut prev = f64::NEG_INFINITY;
        for &t in &self.sample_times {
            if !(0.0..=self.t_final).contains(&t) || t <= prev {
                return Err(Error::ParamOutOfRange(format!(
                    "sample times must increase inside [0, {}], got {t}",
                    self.t_final
                )));
            }
            prev = t;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConservationRow {
    pub t: f64,
    pub mean: f64,
    pub l2sq: f64,
    /// Filled in by [`isospectral_check`].
    pub lambda_drift: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub samples: Vec<(f64, RealField)>,
    pub conservation: Vec<ConservationRow>,
    pub steps: usize,
}

impl Trajectory {
    pub fn final_state(&self) -> Option<&RealField> {
        self.samples.last().map(|(_, u)| u)
    }

    /// `max_t | ||u(t)||^2 - ||u0||^2 | / ||u0||^2` (absolute when `u0 = 0`).
    pub fn norm_drift(&self) -> f64 {
        let Some(first) = self.conservation.first() else { return 0.0 };
        let scale = if first.l2sq > 0.0 { first.l2sq } else { 1.0 };
        self.conservation.iter().map(|r| (r.l2sq - first.l2sq).abs() / scale).fold(0.0, f64::max)
    }

    pub fn conservation_csv(&self, hash: Option<&str>) -> String {
        let rows: Vec<Vec<String>> = self
            .conservation
            .iter()
            .map(|r| {
                vec![fmt_f64(r.t), fmt_f64(r.mean), fmt_f64(r.l2sq), r.lambda_drift.map(fmt_f64).unwrap_or_default()]
            })
            .collect();
        csv_table(hash, &["t", "mean", "l2sq", "maxLambdaDrift"], &rows)
    }
}

/// Quadratic term `-i n (u^2)^(n)` for modes `1..=N`, dealiased on a grid of
/// at least `3N + 1` points.
struct Nonlinearity {
    n: usize,
    grid: crate::fourier::GridTransform,
    sym: Vec<Complex64>,
    buf: Vec<Complex64>,
}

impl Nonlinearity {
    fn new(n: usize) -> Self {
        let g = grid_size(3 * n + 1);
        Self { n, grid: crate::fourier::GridTransform::new(g), sym: vec![ZERO; 2 * n + 1], buf: vec![ZERO; g] }
    }

    fn eval(&mut self, modes: &[Complex64], out: &mut [Complex64]) {
        let n = self.n;
        self.sym[n + 1..].copy_from_slice(modes);
        for (i, c) in modes.iter().enumerate() {
            self.sym[n - 1 - i] = c.conj();
        }
        self.grid.values_into(&self.sym, &mut self.buf);
        for v in self.buf.iter_mut() {
            *v = Complex64::new(v.re * v.re, 0.0);
        }
        self.grid.spectrum_in_place(&mut self.buf);
        for (i, o) in out.iter_mut().enumerate() {
            let k = (i + 1) as f64;
            *o = Complex64::new(0.0, -k) * self.buf[i + 1];
        }
    }
}

/// `i n|n| c_n - i n (u^2)^(n)` with the quadratic term dealiased.
pub fn rhs_fourier(u: &RealField) -> RealField {
    let modes = u.positive_modes();
    let mut nl = Nonlinearity::new(modes.len().max(1));
    let mut out = vec![ZERO; modes.len()];
    nl.eval(&modes, &mut out);
    for (i, o) in out.iter_mut().enumerate() {
        let k = (i + 1) as f64;
        *o += Complex64::new(0.0, k * k) * modes[i];
    }
    RealField::from_positive_modes(&out).expect("finite right-hand side")
}

struct Stepper {
    nl: Nonlinearity,
    h: f64,
    half: Vec<Complex64>,
    full: Vec<Complex64>,
    k: [Vec<Complex64>; 4],
    tmp: Vec<Complex64>,
}

impl Stepper {
    fn new(n: usize) -> Self {
        Self {
            nl: Nonlinearity::new(n),
            h: f64::NAN,
            half: vec![ZERO; n],
            full: vec![ZERO; n],
            k: [vec![ZERO; n], vec![ZERO; n], vec![ZERO; n], vec![ZERO; n]],
            tmp: vec![ZERO; n],
        }
    }

    fn set_step(&mut self, h: f64) {
        if self.h == h {
            return;
        }
        self.h = h;
        for (i, (e, e2)) in self.half.iter_mut().zip(self.full.iter_mut()).enumerate() {
            let k = (i + 1) as f64;
            *e = Complex64::from_polar(1.0, k * k * h / 2.0);
            *e2 = Complex64::from_polar(1.0, k * k * h);
        }
    }

    fn step(&mut self, u: &mut [Complex64]) {
        let h = self.h;
        let [k1, k2, k3, k4] = &mut self.k;
        let (e, e2, tmp) = (&self.half, &self.full, &mut self.tmp);
        self.nl.eval(u, k1);
        for i in 0..u.len() {
            tmp[i] = e[i] * (u[i] + k1[i] * (h / 2.0));
        }
        self.nl.eval(tmp, k2);
        for i in 0..u.len() {
            tmp[i] = e[i] * u[i] + k2[i] * (h / 2.0);
        }
        self.nl.eval(tmp, k3);
        for i in 0..u.len() {
            tmp[i] = e2[i] * u[i] + e[i] * k3[i] * h;
        }
        self.nl.eval(tmp, k4);
        for i in 0..u.len() {
            u[i] = e2[i] * u[i] + (e2[i] * k1[i] + e[i] * (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
        }
    }
}

fn l2sq(modes: &[Complex64]) -> f64 {
    2.0 * kahan_sum(modes.iter().map(|c| c.norm_sqr()))
}

fn record(t: f64, modes: &[Complex64], traj: &mut Trajectory) -> Result<()> {
    let u = RealField::from_positive_modes(modes)?;
    traj.conservation.push(ConservationRow { t, mean: u.coeff(0).re, l2sq: l2sq(modes), lambda_drift: None });
    traj.samples.push((t, u));
    Ok(())
}

/// Integrates from `u0` (padded or truncated to the configured bandwidth),
/// recording every sample time; each interval between samples is split into
/// equal steps no longer than `dt`.
pub fn evolve(u0: &RealField, cfg: &SolverConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let n = cfg.bandwidth;
    if u0.bandwidth() > n {
        log::warn!("initial datum bandwidth {} truncated to {n}", u0.bandwidth());
    }
    let mut modes = u0.with_bandwidth(n).positive_modes();
    let norm0 = l2sq(&modes).sqrt();
    let mut stepper = Stepper::new(n);
    let mut traj = Trajectory { samples: Vec::new(), conservation: Vec::new(), steps: 0 };
    let mut t = 0.0;
    for &ts in &cfg.sample_times {
        let span = ts - t;
        if span > 0.0 {
            let steps = (span / cfg.dt).ceil().max(1.0) as usize;
            stepper.set_step(span / steps as f64);
            for j in 0..steps {
                stepper.step(&mut modes);
                let norm = l2sq(&modes).sqrt();
                let growth = if norm0 > 0.0 { norm / norm0 } else { norm };
                if !norm.is_finite() || (norm0 > 0.0 && growth > BLOWUP_FACTOR) {
                    let now = t + span * (j + 1) as f64 / steps as f64;
                    return Err(Error::BlowupDetected { t: now, growth });
                }
            }
            traj.steps += steps;
        }
        t = ts;
        record(t, &modes, &mut traj)?;
    }
    Ok(traj)
}

#[derive(Clone, Debug, Serialize)]
pub struct IsospectralReport {
    pub n_max: usize,
    pub max_drift: f64,
    /// `(t, max_{n <= n_max} |lambda_n(u(t)) - lambda_n(u0)|)`.
    pub rows: Vec<(f64, f64)>,
}

/// Eigenvalues `lambda_0..=lambda_{n_max}` of the truncated Lax operator of
/// a sample; the field is trimmed to its numerically nonzero band and the
/// truncation is at least `max(m, 4 band)`.
pub fn sample_eigenvalues(u: &RealField, m: usize, n_max: usize) -> Result<Vec<f64>> {
    let trimmed = u.trimmed(1e-16);
    let m = m.max(4 * trimmed.bandwidth()).max(n_max + 1);
    let mut l = eigenvalues(&assemble_lax(&trimmed, m)?)?;
    l.truncate(n_max + 1);
    Ok(l)
}

/// Spectral drift of the trajectory against its first sample; fills the
/// `lambda_drift` column of the conservation log.
pub fn isospectral_check(traj: &mut Trajectory, n_max: usize, m: usize) -> Result<IsospectralReport> {
    let spectra: Vec<Vec<f64>> =
        traj.samples.par_iter().map(|(_, u)| sample_eigenvalues(u, m, n_max)).collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(spectra.len());
    let mut max_drift: f64 = 0.0;
    for ((row, (t, _)), l) in traj.conservation.iter_mut().zip(&traj.samples).zip(&spectra) {
        let d = l.iter().zip(&spectra[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        row.lambda_drift = Some(d);
        max_drift = max_drift.max(d);
        rows.push((*t, d));
    }
    Ok(IsospectralReport { n_max, max_drift, rows })
}

/// Observed order from runs at `dt`, `dt/2` and `dt/4` up to time `t`:
/// `log2(|u_dt - u_{dt/2}| / |u_{dt/2} - u_{dt/4}|)`.
pub fn self_convergence_order(u0: &RealField, bandwidth: usize, dt: f64, t: f64) -> Result<f64> {
    let run = |h: f64| -> Result<Vec<Complex64>> {
        let cfg = SolverConfig { bandwidth, dt: h, t_final: t, sample_times: vec![t] };
        Ok(evolve(u0, &cfg)?.final_state().expect("one sample").positive_modes())
    };
    let (a, b, c) = (run(dt)?, run(dt / 2.0)?, run(dt / 4.0)?);
    let diff = |x: &[Complex64], y: &[Complex64]| l2sq(&x.iter().zip(y).map(|(p, q)| p - q).collect::<Vec<_>>()).sqrt();
    Ok((diff(&a, &b) / diff(&b, &c)).log2())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::{one_gap_bandwidth, one_gap_potential};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rhs_of_two_cos() {
        let u = RealField::from_positive_modes(&[c(1.0, 0.0)]).unwrap().with_bandwidth(4);
        let r = rhs_fourier(&u);
        // Linear part i on mode 1; quadratic part -2i on mode 2.
        assert!((r.coeff(1) - c(0.0, 1.0)).norm() < 1e-14);
        assert!((r.coeff(2) - c(0.0, -2.0)).norm() < 1e-14);
        assert_eq!(r.coeff(0), c(0.0, 0.0));
    }

    #[test]
    fn linear_limit_rotates_mode_one() {
        let eps = 1e-9;
        let u = RealField::from_positive_modes(&[c(eps, 0.0)]).unwrap().with_bandwidth(8);
        let r = rhs_fourier(&u);
        assert!((r.coeff(1) / eps - c(0.0, 1.0)).norm() < 1e-8);
    }

    #[test]
    fn zero_stays_zero() {
        let cfg = SolverConfig::uniform(16, 0.01, 1.0, 3);
        let t = evolve(&RealField::zero(4), &cfg).unwrap();
        assert!(t.samples.iter().all(|(_, u)| u.as_complex().max_abs() == 0.0));
    }

    #[test]
    fn traveling_wave_keeps_moduli() {
        // A traveling wave: every |c_k| is constant in time.
        let a = c(0.5, 0.0);
        let u = one_gap_potential(a, one_gap_bandwidth(a)).unwrap();
        let cfg = SolverConfig::uniform(64, 5e-4, 1.0, 2);
        let t = evolve(&u, &cfg).unwrap();
        let v = t.final_state().unwrap();
        for k in 1..=20 {
            assert!(
                (v.coeff(k).norm() - u.coeff(k).norm()).abs() < 1e-9,
                "{k} {}",
                (v.coeff(k).norm() - u.coeff(k).norm()).abs()
            );
        }
    }

    #[test]
    fn large_step_is_rejected() {
        let cfg = SolverConfig::uniform(256, 0.01, 1.0, 2);
        assert!(matches!(evolve(&RealField::zero(2), &cfg), Err(Error::StepTooLarge { .. })));
    }

    #[test]
    fn bad_sample_times_are_rejected() {
        let mut cfg = SolverConfig::uniform(16, 0.01, 1.0, 3);
        cfg.sample_times = vec![0.5, 0.2];
        assert!(matches!(evolve(&RealField::zero(2), &cfg), Err(Error::ParamOutOfRange(_))));
    }

    #[test]
    fn lands_on_sample_times() {
        let cfg = SolverConfig { bandwidth: 16, dt: 0.03, t_final: 0.1, sample_times: vec![0.0, 0.05, 0.1] };
        let t = evolve(&RealField::zero(2), &cfg).unwrap();
        let times: Vec<f64> = t.samples.iter().map(|(t, _)| *t).collect();
        assert_eq!(times, vec![0.0, 0.05, 0.1]);
        assert_eq!(t.steps, 4);
    }

    #[test]
    fn conserves_norm_and_spectrum() {
        let u = RealField::from_positive_modes(&[c(0.3, 0.1), c(-0.1, 0.2), c(0.05, 0.0)]).unwrap();
        let cfg = SolverConfig::uniform(64, 2e-3, 1.0, 3);
        let mut t = evolve(&u, &cfg).unwrap();
        assert!(t.norm_drift() < 1e-10);
        let r = isospectral_check(&mut t, 8, 128).unwrap();
        assert!(r.max_drift < 1e-8, "{}", r.max_drift);
        assert!(t.conservation_csv(None).lines().nth(2).unwrap().split(',').count() == 4);
    }

    #[test]
    fn fourth_order_convergence() {
        let u = RealField::from_positive_modes(&[c(0.4, 0.0), c(0.1, -0.2)]).unwrap();
        let p = self_convergence_order(&u, 64, 7.5e-3, 1.0).unwrap();
        assert!(p > 3.7, "order {p}");
    }
}
