//! Command-line front end. Every command reads one TOML config, writes its
//! artifacts under `--out` and records them in `manifest.json`.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure or
//! failed check, 4 numerical instability.

pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::birkhoff::{birkhoff_phase_check, frequencies, phi, phi0, phi1, xi_decompose, PhaseRow};
use crate::diagnostics::{
    coordinate_flow_experiment, exact_frequency_experiment, linear_frequency_experiment, slope_report,
    ExperimentReport, ExponentTable, Provenance,
};
use crate::error::{Error, Result};
use crate::fourier::io::{csv_table, field_to_csv, fmt_f64};
use crate::gauge::{
    differential_at_zero_defect, differential_fd_defect, gauge, hankel_probe_refinement, kernel_residual,
    kernel_witness,
};
use crate::lax::{spectral_data, trace_checks};
use crate::solver::{evolve, isospectral_check, SolverConfig};
use config::{random_potential, RunConfig};
use output::{verify_manifest, OutputDir};

#[derive(Debug, Parser)]
#[command(name = "bo-spectral", version, about = "Spectral toolkit for the Benjamin-Ono equation on the torus")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,

    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,

    /// Overrides `seed` in the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Overrides `eps_boundary` in the config.
    #[arg(long, global = true)]
    pub eps_boundary: Option<f64>,

    /// Worker threads (results do not depend on it).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Re-hash the artifacts listed in a manifest and exit.
    #[arg(long, value_name = "MANIFEST")]
    pub verify_manifest: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, Subcommand)]
pub enum Command {
    /// Lax spectrum, gaps and trace identities.
    Spectrum,
    /// Birkhoff and quasi-linear coordinates, decomposition and decay slope.
    Birkhoff,
    /// Gauge image, kernel witnesses, differential checks and Hankel probes.
    Gauge,
    /// Time integration with conservation, isospectrality, phase law and
    /// smoothing experiments.
    Evolve,
    /// Table of the smoothing exponents.
    Exponents,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Birkhoff => "birkhoff",
            Command::Gauge => "gauge",
            Command::Evolve => "evolve",
            Command::Exponents => "exponents",
        }
    }
}

/// A check that failed after all artifacts were written.
#[derive(Debug)]
struct CheckFailed(String);

enum Outcome {
    Ok,
    Failed(CheckFailed),
}

/// Parses arguments, runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(&cli) {
        Ok(Outcome::Ok) => 0,
        Ok(Outcome::Failed(CheckFailed(msg))) => {
            eprintln!("check failed: {msg}");
            3
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    if let Some(n) = cli.threads {
        // A second initialisation in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    if let Some(path) = &cli.verify_manifest {
        let problems = verify_manifest(path)?;
        for p in &problems {
            eprintln!("{p}");
        }
        return Ok(if problems.is_empty() {
            println!("manifest verified");
            Outcome::Ok
        } else {
            Outcome::Failed(CheckFailed(format!("{} artifact(s) do not match", problems.len())))
        });
    }
    let command = cli
        .command
        .ok_or_else(|| Error::Config("no command given (spectrum, birkhoff, gauge, evolve, exponents)".into()))?;
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            RunConfig::parse(&text)?
        }
        None if matches!(command, Command::Exponents) => RunConfig::default(),
        None => return Err(Error::Config("--config is required".into())),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(eps) = cli.eps_boundary {
        cfg.eps_boundary = eps;
    }
    let table = ExponentTable::new(cfg.eps_boundary)?;
    let hash = cfg.sha256();
    let mut out = OutputDir::create(&cli.out, command.name(), &hash)?;
    let outcome = match command {
        Command::Spectrum => cmd_spectrum(&cfg, &mut out)?,
        Command::Birkhoff => cmd_birkhoff(&cfg, &table, &mut out)?,
        Command::Gauge => cmd_gauge(&cfg, &mut out)?,
        Command::Evolve => cmd_evolve(&cfg, &table, &mut out)?,
        Command::Exponents => cmd_exponents(&cfg, &table, &mut out)?,
    };
    out.finish()?;
    Ok(outcome)
}

fn provenance(cfg: &RunConfig, out: &OutputDir) -> Provenance {
    Provenance { config_sha256: Some(out.hash().to_owned()), config: Some(cfg.to_json_value()) }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    provenance: Provenance,
    #[serde(flatten)]
    body: &'a T,
}

fn write_report<T: Serialize>(out: &mut OutputDir, cfg: &RunConfig, rel: &str, body: &T) -> Result<()> {
    let env = Envelope { provenance: provenance(cfg, out), body };
    out.json(rel, &env)
}

fn cmd_spectrum(cfg: &RunConfig, out: &mut OutputDir) -> Result<Outcome> {
    let sec = &cfg.spectrum;
    let u = cfg.potential()?;
    let data = spectral_data(&u, sec.m)?;
    let trace = trace_checks(&u, &data, sec.n_max);
    let rows: Vec<Vec<String>> = trace
        .rows
        .iter()
        .map(|(n, r, r2)| vec![n.to_string(), fmt_f64(data.lambda(*n)), fmt_f64(*r), fmt_f64(*r2)])
        .collect();
    out.text("trace.csv", &csv_table(Some(out.hash()), &["n", "lambda", "residual", "residual_doubled"], &rows))?;
    if sec.eigvecs {
        out.binary("eigvecs.bin", &data.eigvecs_bytes())?;
    }
    let body = json!({
        "spectrum": data.to_report(),
        "kappaTailBound": data.kappa_tail_bound(),
        "eigvecs": if sec.eigvecs { json!({"file": "eigvecs.bin", "rows": data.trusted() + 1, "cols": data.dim()}) } else { json!(null) },
        "trace": {
            "nMax": trace.n_max,
            "eigenvalueResidual": trace.eigenvalue_residual,
            "eigenvalueResidualDoubled": trace.eigenvalue_residual_doubled,
            "normResidual": trace.norm_residual,
            "threshold": sec.threshold,
        },
    });
    write_report(out, cfg, "spectrum.json", &body)?;
    let worst = trace.eigenvalue_residual.max(trace.norm_residual);
    Ok(if worst < sec.threshold {
        Outcome::Ok
    } else {
        Outcome::Failed(CheckFailed(format!("trace residual {worst:e} above {:e}", sec.threshold)))
    })
}

fn cmd_birkhoff(cfg: &RunConfig, table: &ExponentTable, out: &mut OutputDir) -> Result<Outcome> {
    let sec = &cfg.birkhoff;
    let u = cfg.potential()?;
    let data = spectral_data(&u, sec.m)?;
    let p = data.trusted();
    let z = phi(&data);
    let z0 = phi0(&u, p)?;
    let z1 = phi1(&data);
    let freqs = frequencies(&u, &data.gammas()[..p], sec.s);
    out.text("phi.csv", &z.to_csv(Some(out.hash())))?;
    out.text("phi0.csv", &z0.to_csv(Some(out.hash())))?;
    out.text("phi1.csv", &z1.to_csv(Some(out.hash())))?;
    out.text("frequencies.csv", &freqs.to_csv(Some(out.hash())))?;
    let xi_residual = if sec.decomposition {
        let x = xi_decompose(&u, &data)?;
        let mut rows = Vec::with_capacity(p);
        for n in 0..p {
            let mut r = vec![(n + 1).to_string()];
            for v in [x.xi[n], x.t1[n], x.t2[n], x.t3[n]] {
                r.push(fmt_f64(v.re));
                r.push(fmt_f64(v.im));
            }
            rows.push(r);
        }
        let header = ["n", "xi_re", "xi_im", "t1_re", "t1_im", "t2_re", "t2_im", "t3_re", "t3_im"];
        out.text("decomposition.csv", &csv_table(Some(out.hash()), &header, &rows))?;
        Some(x.max_residual)
    } else {
        None
    };
    let gaps: Vec<f64> = z.sub(&z0).iter().map(|d| d.norm()).collect();
    let mut slope = slope_report(gaps, sec.s, table)?;
    slope.provenance = provenance(cfg, out);
    out.text("phi_minus_phi0.csv", &slope.gaps_csv(Some(out.hash())))?;
    out.json("slope.json", &slope)?;
    let action = (1..=p).map(|n| (z.get(n).norm_sqr() - data.gamma(n)).abs()).fold(0.0, f64::max);
    let half_norm = crate::fourier::seq_norm(z.zeta(), 0.5).powi(2);
    let body = json!({
        "M": data.dim(),
        "P": p,
        "actionResidual": action,
        "normIdentityResidual": (half_norm - u.mean_square() / 2.0).abs(),
        "decompositionResidual": xi_residual,
        "frequencyTailBound": freqs.tail_bound,
    });
    write_report(out, cfg, "birkhoff.json", &body)?;
    Ok(Outcome::Ok)
}

fn cmd_gauge(cfg: &RunConfig, out: &mut OutputDir) -> Result<Outcome> {
    let sec = &cfg.gauge;
    if sec.witness_max < 2 {
        return Err(Error::ParamOutOfRange("witness_max must be at least 2".into()));
    }
    let u = cfg.potential()?;
    let w = gauge(&u)?;
    out.text("gauge.csv", &field_to_csv(&w.to_field(), Some(out.hash())))?;

    let witness: Vec<(usize, f64)> = (2..=sec.witness_max)
        .map(|n| {
            let (w, h) = kernel_witness(n);
            (n, kernel_residual(&w, &h))
        })
        .collect();
    let rows: Vec<Vec<String>> = witness.iter().map(|(n, r)| vec![n.to_string(), fmt_f64(*r)]).collect();
    out.text("witnesses.csv", &csv_table(Some(out.hash()), &["n", "residual"], &rows))?;

    let h0 = random_potential(cfg.seed, sec.d0_bandwidth, 1.0);
    let d0_defect = differential_at_zero_defect(&h0)?;
    let fd: Vec<f64> = (0..sec.fd_pairs as u64)
        .map(|i| {
            let base = cfg.seed.wrapping_mul(1000).wrapping_add(2 * i + 1);
            differential_fd_defect(&random_potential(base, 8, 0.5), &random_potential(base + 1, 8, 1.0), sec.fd_eps)
        })
        .collect::<Result<_>>()?;

    let mut probe_rows = Vec::new();
    let mut probes = Vec::new();
    for spec in &sec.probes {
        let r = hankel_probe_refinement(spec.s, spec.alpha, &sec.probe_bandwidths, sec.trials, cfg.seed)?;
        for row in &r.rows {
            probe_rows.push(vec![
                row.case.label().to_owned(),
                fmt_f64(spec.s),
                fmt_f64(spec.alpha),
                row.bandwidth.to_string(),
                fmt_f64(row.gain),
                fmt_f64(row.max_ratio),
            ]);
        }
        probes.push(json!({"s": spec.s, "alpha": spec.alpha, "trend": r.trend}));
    }
    out.text(
        "probes.csv",
        &csv_table(Some(out.hash()), &["case", "s", "alpha", "bandwidth", "gain", "max_ratio"], &probe_rows),
    )?;
    let body = json!({
        "witnessMaxResidual": witness.iter().map(|w| w.1).fold(0.0, f64::max),
        "differentialAtZeroDefect": d0_defect,
        "finiteDifferenceDefects": fd,
        "probes": probes,
    });
    write_report(out, cfg, "gauge.json", &body)?;
    Ok(Outcome::Ok)
}

fn phase_csv(rows: &[PhaseRow], hash: &str) -> String {
    let r: Vec<Vec<String>> =
        rows.iter().map(|p| vec![fmt_f64(p.t), fmt_f64(p.error), fmt_f64(p.modulus_error)]).collect();
    csv_table(Some(hash), &["t", "error", "modulus_error"], &r)
}

fn write_experiment(out: &mut OutputDir, cfg: &RunConfig, name: &str, report: ExperimentReport) -> Result<()> {
    out.text(&format!("{name}.csv"), &report.curves_csv(Some(out.hash())))?;
    let report = report.with_provenance(provenance(cfg, out));
    out.json(&format!("{name}.json"), &report)
}

fn cmd_evolve(cfg: &RunConfig, table: &ExponentTable, out: &mut OutputDir) -> Result<Outcome> {
    let sec = &cfg.evolve;
    let u0 = cfg.potential()?;
    let solver = SolverConfig::uniform(sec.bandwidth, sec.dt, sec.t_final, sec.samples);
    let mut traj = evolve(&u0, &solver)?;
    let iso = isospectral_check(&mut traj, sec.n_max, sec.m)?;
    if sec.snapshots {
        for (i, (_, u)) in traj.samples.iter().enumerate() {
            out.text(&format!("trajectory/u_{i:04}.csv"), &field_to_csv(u.as_complex(), Some(out.hash())))?;
        }
    }
    out.text("conservation.csv", &traj.conservation_csv(Some(out.hash())))?;
    let phase = birkhoff_phase_check(&u0, &traj.samples, sec.m, sec.phase_n)?;
    out.text("phase.csv", &phase_csv(&phase, out.hash()))?;
    if sec.experiments {
        let data = spectral_data(&u0.trimmed(1e-16), sec.m.max(4 * u0.trimmed(1e-16).bandwidth()))?;
        let freqs = frequencies(&u0, &data.gammas()[..data.trusted()], sec.s);
        write_experiment(out, cfg, "linear_frequency", linear_frequency_experiment(&u0, sec.s, &traj, table)?)?;
        write_experiment(out, cfg, "exact_frequency", exact_frequency_experiment(&u0, sec.s, &traj, &freqs, table)?)?;
        write_experiment(out, cfg, "coordinate_flow", coordinate_flow_experiment(&u0, sec.s, &traj, sec.m, table)?)?;
    }
    let body = json!({
        "steps": traj.steps,
        "samples": traj.samples.len(),
        "normDrift": traj.norm_drift(),
        "isospectral": iso,
        "phaseMaxError": phase.iter().map(|p| p.error).fold(0.0, f64::max),
        "phaseMaxModulusError": phase.iter().map(|p| p.modulus_error).fold(0.0, f64::max),
    });
    write_report(out, cfg, "evolve.json", &body)?;
    Ok(Outcome::Ok)
}

fn cmd_exponents(cfg: &RunConfig, table: &ExponentTable, out: &mut OutputDir) -> Result<Outcome> {
    let csv = table.to_csv(&cfg.exponents.s, Some(out.hash()))?;
    println!("{:>8} {:>8} {:>8} {:>8}", "s", "sigma", "tau", "tau2");
    for &s in &cfg.exponents.s {
        let r = table.row(s)?;
        println!("{:>8} {:>8} {:>8} {:>8}", r.s, r.sigma, r.tau, r.tau2);
    }
    out.text("exponents.csv", &csv)?;
    Ok(Outcome::Ok)
}

/// Process entry point used by the binary.
pub fn main() -> i32 {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    run(std::env::args_os())
}
