//! Birkhoff coordinates `zeta_n = <1|f_n> / sqrt(kappa_n)`, the auxiliary
//! map `(sqrt(n) <1|f_n>)`, the quasi-linear approximation built from
//! `g = e^{i D^{-1} u}`, BO frequencies and the two linear flows on
//! coordinates.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier::io::{csv_table, fmt_f64};
use crate::fourier::{antiderivative, exp_field, multiply_full, sobolev_norm, ComplexField, RealField, WeightedSeq};
use crate::gauge::gauge;
use crate::lax::{spectral_data, SpectralData};
use crate::numeric::{kahan_sum, KahanSum};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Agreement required between the two formulas for the quasi-linear map.
pub const PHI0_TOL: f64 = 1e-10;
/// Agreement required in the three-term decomposition.
pub const XI_TOL: f64 = 1e-9;

/// Coordinates `z_1..=z_P` of a potential with regularity `s`; the sequence
/// carries the weight exponent `s + 1/2`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BirkhoffCoords {
    zeta: WeightedSeq,
    source_s: f64,
    trusted: usize,
    gammas: Option<Vec<f64>>,
}

impl BirkhoffCoords {
    pub fn new(entries: Vec<Complex64>, source_s: f64, gammas: Option<Vec<f64>>) -> Self {
        let trusted = entries.len();
        Self { zeta: WeightedSeq::new(entries, source_s + 0.5), source_s, trusted, gammas }
    }

    pub fn zeta(&self) -> &WeightedSeq {
        &self.zeta
    }

    pub fn get(&self, n: usize) -> Complex64 {
        self.zeta.get(n)
    }

    pub fn trusted(&self) -> usize {
        self.trusted
    }

    pub fn source_regularity(&self) -> f64 {
        self.source_s
    }

    pub fn with_source_regularity(mut self, s: f64) -> Self {
        self.source_s = s;
        self.zeta = WeightedSeq::new(self.zeta.entries().to_vec(), s + 0.5);
        self
    }

    pub fn gammas(&self) -> Option<&[f64]> {
        self.gammas.as_deref()
    }

    /// `(z - other)` on the common range.
    pub fn sub(&self, other: &Self) -> Vec<Complex64> {
        let n = self.trusted.min(other.trusted);
        (1..=n).map(|k| self.get(k) - other.get(k)).collect()
    }

    /// CSV with columns `n, re, im, gamma` (gamma empty when unknown).
    pub fn to_csv(&self, hash: Option<&str>) -> String {
        let rows: Vec<Vec<String>> = (1..=self.trusted)
            .map(|n| {
                let z = self.get(n);
                let g = self.gammas.as_ref().and_then(|g| g.get(n - 1)).map(|g| fmt_f64(*g)).unwrap_or_default();
                vec![n.to_string(), fmt_f64(z.re), fmt_f64(z.im), g]
            })
            .collect();
        csv_table(hash, &["n", "re", "im", "gamma"], &rows)
    }
}

/// `<1|f_n> = conj(c_0(f_n))`.
fn pairing_with_one(data: &SpectralData, n: usize) -> Complex64 {
    data.eigvec(n)[0].conj()
}

pub fn phi(data: &SpectralData) -> BirkhoffCoords {
    let p = data.trusted();
    let z = (1..=p).map(|n| pairing_with_one(data, n) / data.kappa(n).sqrt()).collect();
    BirkhoffCoords::new(z, 0.0, Some(data.gammas()[..p].to_vec()))
}

pub fn phi1(data: &SpectralData) -> BirkhoffCoords {
    let p = data.trusted();
    let z = (1..=p).map(|n| pairing_with_one(data, n) * (n as f64).sqrt()).collect();
    BirkhoffCoords::new(z, 0.0, None)
}

/// `g = e^{i D^{-1} u}`.
pub fn gauge_factor(u: &RealField) -> Result<ComplexField> {
    exp_field(&antiderivative(u.as_complex()).scale(I))
}

/// Quasi-linear coordinates `sqrt(n) <1|g e^{inx}>`, `1 <= n <= p`,
/// cross-checked against `-(i/sqrt(n)) c_n(G(u))`. Returns the gauge-based
/// values.
pub fn phi0(u: &RealField, p: usize) -> Result<BirkhoffCoords> {
    let g = gauge_factor(u)?;
    let w = gauge(u)?;
    let mut z = Vec::with_capacity(p);
    for n in 1..=p {
        let sn = (n as f64).sqrt();
        let direct = g.coeff(-(n as i64)).conj() * sn;
        let via_gauge = -I / sn * w.coeff(n as i64);
        let scale = direct.norm().max(via_gauge.norm()).max(1.0);
        let defect = (direct - via_gauge).norm();
        if defect > PHI0_TOL * scale {
            return Err(Error::Phi0Mismatch { n, defect });
        }
        z.push(via_gauge);
    }
    Ok(BirkhoffCoords::new(z, 0.0, None))
}

/// The exact decomposition `Xi_n = T1_n + T2_n + T3_n` of
/// `Xi_n = n <1|f_n> - n <1|g e^{inx}>`.
#[derive(Clone, Debug, Serialize)]
pub struct XiDecomposition {
    pub xi: Vec<Complex64>,
    /// `(n - lambda_n) <1|f_n>`.
    pub t1: Vec<Complex64>,
    /// `<(Id - Pi) u | g e^{inx}>`.
    pub t2: Vec<Complex64>,
    /// `<Pi u | e^{inx}(g - g_n)>` with `g_n = f_n e^{-inx}`.
    pub t3: Vec<Complex64>,
    pub max_residual: f64,
}

pub fn xi_decompose(u: &RealField, data: &SpectralData) -> Result<XiDecomposition> {
    let g = gauge_factor(u)?;
    let p = data.trusted();
    let m = data.dim() as i64;
    let nb = u.bandwidth() as i64;
    let mut out = XiDecomposition {
        xi: Vec::with_capacity(p),
        t1: Vec::with_capacity(p),
        t2: Vec::with_capacity(p),
        t3: Vec::with_capacity(p),
        max_residual: 0.0,
    };
    for n in 1..=p {
        let ni = n as i64;
        let nf = n as f64;
        let f = data.eigvec(n);
        let one_f = f[0].conj();
        let xi = (one_f - g.coeff(-ni).conj()) * nf;
        let t1 = one_f * (nf - data.lambda(n));
        let mut t2 = ZERO;
        let mut t3 = ZERO;
        for k in 1..=nb {
            t2 += u.coeff(-k) * g.coeff(-k - ni).conj();
            let j = k - ni;
            let gn = if (0..m).contains(&(j + ni)) { f[(j + ni) as usize] } else { ZERO };
            t3 += u.coeff(k) * (g.coeff(j) - gn).conj();
        }
        let residual = (xi - (t1 + t2 + t3)).norm();
        if residual > XI_TOL {
            return Err(Error::DecompositionMismatch { n, residual });
        }
        out.max_residual = out.max_residual.max(residual);
        out.xi.push(xi);
        out.t1.push(t1);
        out.t2.push(t2);
        out.t3.push(t3);
    }
    Ok(out)
}

/// `L^2` norm of
/// `(Id + K_n + K'_n)[g - g_n] - <g - g_n|g> g - K_n g`, where
/// `K_n f = g D^{-1}[conj(g) Pi_{<-n}(u f)]`,
/// `K'_n f = (n - lambda_n) g D^{-1}[conj(g) f]` and `D^{-1} = i d^{-1}`.
pub fn neumann_residual(u: &RealField, data: &SpectralData, n: usize) -> Result<f64> {
    if n == 0 || n > data.trusted() {
        return Err(Error::OutsideTrustedRange { n, p: data.trusted() });
    }
    let g = gauge_factor(u)?;
    let gbar = g.conj();
    let f = data.eigvec(n);
    let ni = n as i64;
    let m = data.dim() as i64;
    let bw = ni.max(m - 1 - ni) as usize;
    let gn = ComplexField::from_fn(bw, |j| {
        let k = j + ni;
        if (0..m).contains(&k) {
            f[k as usize]
        } else {
            ZERO
        }
    });
    let d = g.sub(&gn);
    let d_inv = |h: &ComplexField| antiderivative(h).scale(I);
    let k_n = |h: &ComplexField| {
        let uh = multiply_full(u.as_complex(), h);
        let low = ComplexField::from_fn(uh.bandwidth(), |k| if k < -ni { uh.coeff(k) } else { ZERO });
        multiply_full(&g, &d_inv(&multiply_full(&gbar, &low)))
    };
    let shift = Complex64::new(n as f64 - data.lambda(n), 0.0);
    let k_prime = |h: &ComplexField| multiply_full(&g, &d_inv(&multiply_full(&gbar, h))).scale(shift);
    let lhs = d.add(&k_n(&d)).add(&k_prime(&d));
    let bwd = d.bandwidth().max(g.bandwidth());
    let overlap = crate::fourier::inner(&d.with_bandwidth(bwd), &g.with_bandwidth(bwd))?;
    let rhs = g.scale(overlap).add(&k_n(&g));
    Ok(sobolev_norm(&lhs.sub(&rhs), 0.0))
}

/// `omega_n = n^2 - <u0^2|1> + delta_n`, `delta_n = 2 sum_{k>n} (k - n) gamma_k`.
#[derive(Clone, Debug, Serialize)]
pub struct FrequencySet {
    pub omegas: Vec<f64>,
    pub mean_square: f64,
    pub deltas: Vec<f64>,
    /// `P^{-2s} sum_{k<=P} k^{1+2s} gamma_k`, the size of the dropped tail
    /// for data in `H^s`.
    pub tail_bound: f64,
}

impl FrequencySet {
    pub fn omega(&self, n: usize) -> f64 {
        self.omegas[n - 1]
    }

    pub fn delta(&self, n: usize) -> f64 {
        self.deltas[n - 1]
    }

    pub fn to_csv(&self, hash: Option<&str>) -> String {
        let rows: Vec<Vec<String>> = self
            .omegas
            .iter()
            .zip(&self.deltas)
            .enumerate()
            .map(|(i, (o, d))| vec![(i + 1).to_string(), fmt_f64(*o), fmt_f64(*d)])
            .collect();
        csv_table(hash, &["n", "omega", "delta"], &rows)
    }
}

/// `delta_n = 2 sum_{n<k<=P} (k - n) a_k` for `1 <= n <= P`, with
/// `a[k - 1] = a_k`.
pub fn delta_sums(a: &[f64]) -> Vec<f64> {
    let p = a.len();
    (1..=p)
        .map(|n| {
            let mut acc = KahanSum::new();
            for k in n + 1..=p {
                acc.add((k - n) as f64 * a[k - 1]);
            }
            2.0 * acc.value()
        })
        .collect()
}

/// Frequencies on `1..=P` from the gaps `gamma_1..=gamma_P`; gaps beyond
/// `P` are dropped.
pub fn frequencies(u0: &RealField, gammas: &[f64], s: f64) -> FrequencySet {
    let p = gammas.len();
    let mean_square = u0.mean_square();
    let deltas = delta_sums(gammas);
    let omegas = deltas
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let n = (i + 1) as f64;
            n * n - mean_square + d
        })
        .collect();
    let tail_bound = if p == 0 {
        0.0
    } else {
        kahan_sum(gammas.iter().enumerate().map(|(i, g)| ((i + 1) as f64).powf(1.0 + 2.0 * s) * g))
            / (p as f64).powf(2.0 * s)
    };
    log::debug!("frequency tail bound {tail_bound:e} at P = {p}");
    FrequencySet { omegas, mean_square, deltas, tail_bound }
}

fn rotate(z: &BirkhoffCoords, phase: impl Fn(usize) -> f64) -> BirkhoffCoords {
    let e = (1..=z.trusted()).map(|n| z.get(n) * Complex64::from_polar(1.0, phase(n))).collect();
    BirkhoffCoords {
        zeta: WeightedSeq::new(e, z.zeta.exponent()),
        source_s: z.source_s,
        trusted: z.trusted,
        gammas: z.gammas.clone(),
    }
}

/// `z_n -> e^{it(n^2 - 2||z||_{1/2}^2)} z_n`.
pub fn evolve_linear(z: &BirkhoffCoords, t: f64) -> BirkhoffCoords {
    let c = 2.0 * crate::fourier::seq_norm(z.zeta(), 0.5).powi(2);
    rotate(z, |n| t * ((n * n) as f64 - c))
}

/// `z_n -> e^{it(n^2 - 2||z||_{1/2}^2 + delta_n(z))} z_n` with
/// `delta_n(z) = 2 sum_{k>n} (k - n)|z_k|^2`.
pub fn evolve_star(z: &BirkhoffCoords, t: f64) -> BirkhoffCoords {
    let c = 2.0 * crate::fourier::seq_norm(z.zeta(), 0.5).powi(2);
    let actions: Vec<f64> = z.zeta().entries().iter().map(|x| x.norm_sqr()).collect();
    let d = delta_sums(&actions);
    rotate(z, |n| t * ((n * n) as f64 - c + d[n - 1]))
}

#[derive(Clone, Debug, Serialize)]
pub struct PhaseRow {
    pub t: f64,
    /// `max_{n<=P'} |zeta_n(u(t)) - e^{it omega_n} zeta_n(u0)|`.
    pub error: f64,
    /// `max_{n<=P'} | |zeta_n(u(t))| - |zeta_n(u0)| |`.
    pub modulus_error: f64,
}

/// Spectral data for a time sample: the field is trimmed to its numerically
/// nonzero band and the truncation is at least four times that band.
pub fn sample_spectrum(u: &RealField, m: usize) -> Result<SpectralData> {
    let trimmed = u.trimmed(1e-16);
    let m = m.max(4 * trimmed.bandwidth());
    spectral_data(&trimmed, m)
}

/// Compares coordinates along a trajectory with the exact phase law, for
/// `n <= p_check`.
pub fn birkhoff_phase_check(
    u0: &RealField,
    samples: &[(f64, RealField)],
    m: usize,
    p_check: usize,
) -> Result<Vec<PhaseRow>> {
    let d0 = sample_spectrum(u0, m)?;
    let z0 = phi(&d0);
    let p = d0.trusted();
    let p_check = p_check.min(p / 2);
    let freqs = frequencies(u0, &d0.gammas()[..p], 0.0);
    samples
        .iter()
        .map(|(t, u)| {
            let d = sample_spectrum(u, m)?;
            let z = phi(&d);
            let mut error: f64 = 0.0;
            let mut modulus_error: f64 = 0.0;
            for n in 1..=p_check {
                let want = z0.get(n) * Complex64::from_polar(1.0, t * freqs.omega(n));
                error = error.max((z.get(n) - want).norm());
                modulus_error = modulus_error.max((z.get(n).norm() - z0.get(n).norm()).abs());
            }
            Ok(PhaseRow { t: *t, error, modulus_error })
        })
        .collect()
}
