//! Run configuration: one TOML file with a `[potential]` table and one table
//! per command. Unknown keys are rejected.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::diagnostics::{
    example_potential, finite_gap_potential, ExampleKind, ExamplePotential, DEFAULT_EPS_BOUNDARY,
};
use crate::error::{Error, Result};
use crate::fourier::RealField;
use crate::gauge::{one_gap_bandwidth, one_gap_potential};

fn cplx(p: [f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase", deny_unknown_fields)]
pub enum PotentialSpec {
    Zero {
        bandwidth: usize,
    },
    /// `c_k = alpha^k`; the bandwidth defaults to the round-off cut-off.
    OneGap {
        alpha: [f64; 2],
        bandwidth: Option<usize>,
    },
    /// `Pi u = -z Q'/Q` with `Q = 1 + q_1 z + ...`.
    FiniteGap {
        q: Vec<[f64; 2]>,
        bandwidth: usize,
    },
    /// Positive modes `c_1, c_2, ...` as `[re, im]` pairs.
    Coefficients {
        modes: Vec<[f64; 2]>,
    },
    /// Seeded random coefficients rescaled to `||u||_0 = norm`.
    Random {
        bandwidth: usize,
        norm: f64,
    },
    Subhalf {
        s: f64,
        n: usize,
    },
    Half {
        alpha: f64,
        n: usize,
    },
}

impl PotentialSpec {
    pub fn build(&self, seed: u64) -> Result<RealField> {
        match self {
            PotentialSpec::Zero { bandwidth } => Ok(RealField::zero(*bandwidth)),
            PotentialSpec::OneGap { alpha, bandwidth } => {
                let a = cplx(*alpha);
                one_gap_potential(a, bandwidth.unwrap_or_else(|| one_gap_bandwidth(a)))
            }
            PotentialSpec::FiniteGap { q, bandwidth } => {
                let q: Vec<Complex64> = q.iter().copied().map(cplx).collect();
                finite_gap_potential(&q, *bandwidth)
            }
            PotentialSpec::Coefficients { modes } => {
                RealField::from_positive_modes(&modes.iter().copied().map(cplx).collect::<Vec<_>>())
            }
            PotentialSpec::Random { bandwidth, norm } => Ok(random_potential(seed, *bandwidth, *norm)),
            PotentialSpec::Subhalf { s, n } => field_of(example_potential(ExampleKind::Subhalf { s: *s }, *n)?),
            PotentialSpec::Half { alpha, n } => field_of(example_potential(ExampleKind::Half { alpha: *alpha }, *n)?),
        }
    }
}

fn field_of(e: ExamplePotential) -> Result<RealField> {
    match e {
        ExamplePotential::Field { field } => Ok(field),
        ExamplePotential::TargetGaps { .. } => Err(Error::Config("target gap sequences are not potentials".into())),
    }
}

/// Coefficients uniform in the unit square centred at 0, rescaled to
/// `||u||_0 = norm`.
pub fn random_potential(seed: u64, bandwidth: usize, norm: f64) -> RealField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes: Vec<Complex64> =
        (0..bandwidth).map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
    let u = RealField::from_positive_modes(&modes).expect("finite coefficients");
    let ms = u.mean_square();
    if ms > 0.0 {
        u.scale(norm / ms.sqrt())
    } else {
        u
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumSection {
    pub m: usize,
    pub n_max: usize,
    /// Largest accepted trace-identity residual.
    pub threshold: f64,
    /// Also write the eigenvectors of the trusted range as raw `f64` pairs.
    pub eigvecs: bool,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        Self { m: 256, n_max: 64, threshold: 1e-8, eigvecs: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BirkhoffSection {
    pub m: usize,
    /// Regularity used for the decay-slope report.
    pub s: f64,
    pub decomposition: bool,
}

impl Default for BirkhoffSection {
    fn default() -> Self {
        Self { m: 256, s: 0.25, decomposition: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSpec {
    pub s: f64,
    pub alpha: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaugeSection {
    pub witness_max: usize,
    pub d0_bandwidth: usize,
    pub fd_pairs: usize,
    pub fd_eps: f64,
    pub probes: Vec<ProbeSpec>,
    pub probe_bandwidths: Vec<usize>,
    pub trials: usize,
}

impl Default for GaugeSection {
    fn default() -> Self {
        Self {
            witness_max: 16,
            d0_bandwidth: 64,
            fd_pairs: 3,
            fd_eps: 1e-5,
            probes: vec![ProbeSpec { s: 1.0, alpha: 0.5 }, ProbeSpec { s: 0.25, alpha: 0.5 }],
            probe_bandwidths: vec![64, 128, 256, 512],
            trials: 32,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveSection {
    pub bandwidth: usize,
    pub dt: f64,
    pub t_final: f64,
    pub samples: usize,
    /// Regularity for the experiment norms.
    pub s: f64,
    /// Lax truncation for per-sample spectra.
    pub m: usize,
    pub n_max: usize,
    pub phase_n: usize,
    pub experiments: bool,
    pub snapshots: bool,
}

impl Default for EvolveSection {
    fn default() -> Self {
        Self {
            bandwidth: 64,
            dt: 1e-3,
            t_final: 1.0,
            samples: 11,
            s: 1.0,
            m: 256,
            n_max: 32,
            phase_n: 16,
            experiments: true,
            snapshots: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExponentsSection {
    pub s: Vec<f64>,
}

impl Default for ExponentsSection {
    fn default() -> Self {
        Self { s: vec![0.0, 0.25, 0.5, 1.0, 1.5, 2.0] }
    }
}

fn default_eps() -> f64 {
    DEFAULT_EPS_BOUNDARY
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_eps")]
    pub eps_boundary: f64,
    pub potential: Option<PotentialSpec>,
    #[serde(default)]
    pub spectrum: SpectrumSection,
    #[serde(default)]
    pub birkhoff: BirkhoffSection,
    #[serde(default)]
    pub gauge: GaugeSection,
    #[serde(default)]
    pub evolve: EvolveSection,
    #[serde(default)]
    pub exponents: ExponentsSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            eps_boundary: DEFAULT_EPS_BOUNDARY,
            potential: None,
            spectrum: SpectrumSection::default(),
            birkhoff: BirkhoffSection::default(),
            gauge: GaugeSection::default(),
            evolve: EvolveSection::default(),
            exponents: ExponentsSection::default(),
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn potential(&self) -> Result<RealField> {
        self.potential.as_ref().ok_or_else(|| Error::Config("missing [potential] table".into()))?.build(self.seed)
    }

    /// Canonical JSON form; the hash is taken over these bytes.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serialises")
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serialises")
    }

    pub fn sha256(&self) -> String {
        sha256_hex(self.canonical_json().as_bytes())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_defaults() {
        let c = RunConfig::parse(
            r#"
            seed = 7
            [potential]
            kind = "oneGap"
            alpha = [0.5, 0.0]
            [spectrum]
            m = 128
            "#,
        )
        .unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.spectrum.m, 128);
        assert_eq!(c.spectrum.n_max, 64);
        let u = c.potential().unwrap();
        assert!((u.coeff(2).re - 0.25).abs() < 1e-15);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_kinds() {
        assert!(RunConfig::parse("[spectrum]\nmm = 3\n").is_err());
        assert!(RunConfig::parse("[potential]\nkind = \"nope\"\n").is_err());
        assert!(matches!(RunConfig::parse("[[["), Err(Error::Config(_))));
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfig::default();
        let mut b = RunConfig::default();
        assert_eq!(a.sha256(), b.sha256());
        b.seed = 1;
        assert_ne!(a.sha256(), b.sha256());
        assert_eq!(a.sha256().len(), 64);
    }

    #[test]
    fn random_potential_is_seeded() {
        let a = random_potential(3, 8, 1.0);
        assert_eq!(a, random_potential(3, 8, 1.0));
        assert_ne!(a, random_potential(4, 8, 1.0));
        assert!((a.mean_square() - 1.0).abs() < 1e-14);
    }
}
