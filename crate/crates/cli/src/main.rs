//! `qlsim`: deformation studies, single-cluster spectra and (ℓ, Δω) sweeps.
//!
//! Exit codes: 0 success, 2 configuration or usage error, 3 I/O error,
//! 4 numerical failure.

mod config;

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qlsim_core::experiments::{
    fmt_num, monte_carlo_deformation, sidecar_path, sidecar_text, sweep_coefficients, sweep_entanglement,
    write_deformation_csv, write_sweep_csv, SweepRecord, SweepSpec,
};
use qlsim_core::{
    angular, cluster_basis, deformation_closed_form, ordinary, ratio_c0_c3, recursion_coefficients, solve_cluster,
    ClusterProblem, Error, Half,
};
use serde::Serialize;

use crate::config::{RunConfig, Study};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) | Error::Unsupported(_) | Error::Truncation { .. } => CliError::Usage(e.to_string()),
            Error::Io(m) => CliError::Io(m),
            Error::DegenerateChain { .. }
            | Error::SingularRatio { .. }
            | Error::DegenerateState(_)
            | Error::Numerical(_) => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(name = "qlsim", version, about = "Quasi-lattice qubit chains coupled to a resonator")]
struct Cli {
    /// Upper bound on worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Monte Carlo deformation factor against both analytic averages.
    Deformation(DeformationArgs),
    /// Splittings, coefficient vectors and ratio check for one cluster.
    Spectrum(SpectrumArgs),
    /// Runs the sweeps named in a config file.
    Sweep(SweepArgs),
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct DeformationArgs {
    #[arg(long)]
    n_qubits: usize,
    #[arg(long)]
    ell: f64,
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, env = "QLSIM_SEED", default_value_t = 0)]
    seed: u64,
    /// CSV destination; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct SpectrumArgs {
    #[arg(long)]
    n_qubits: usize,
    /// Excitation number, e.g. `3/2` or `1.5`.
    #[arg(long)]
    u: Half,
    #[arg(long, default_value_t = 0.3)]
    ell: f64,
    /// Δω/2π in MHz.
    #[arg(long, default_value_t = 0.0)]
    detuning: f64,
    /// g/2π in MHz.
    #[arg(long, default_value_t = 54.0)]
    g: f64,
    /// Enters only through the lattice-averaged deformation factor.
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    /// Use this deformation factor instead of the lattice average.
    #[arg(long)]
    f_override: Option<f64>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides `[output] dir`.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qlsim: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot size thread pool: {e}")))?;
    }
    match cli.command {
        Command::Deformation(a) => cmd_deformation(a),
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::Sweep(a) => cmd_sweep(a),
    }
}

fn cmd_deformation(a: DeformationArgs) -> Result<(), CliError> {
    let study = monte_carlo_deformation(a.n_qubits, a.ell, a.sigma, a.samples, a.seed)?;
    let mut csv = Vec::new();
    write_deformation_csv(&[study], &mut csv)?;
    match a.out {
        Some(path) => {
            #[derive(Serialize)]
            struct Params {
                n_qubits: usize,
                ell: f64,
                sigma: f64,
                samples: usize,
                seed: u64,
            }
            let params = Params {
                n_qubits: a.n_qubits,
                ell: a.ell,
                sigma: a.sigma,
                samples: a.samples,
                seed: a.seed,
            };
            write_with_sidecar(&path, &csv, &sidecar_text("deformation", &params)?)
        }
        None => Ok(io::stdout().write_all(&csv)?),
    }
}

fn cmd_spectrum(a: SpectrumArgs) -> Result<(), CliError> {
    let r = Half::from_doubled(a.n_qubits as i32);
    if a.n_qubits == 0 {
        return Err(CliError::Usage("--n-qubits must be at least 1".into()));
    }
    let basis = cluster_basis(a.u, r)?;
    let f = match a.f_override {
        Some(f) => f,
        None => deformation_closed_form(a.n_qubits, a.ell, a.sigma)?.value,
    };
    let (dw, g) = (angular(a.detuning), angular(a.g));
    let problem = ClusterProblem::new(basis.clone(), dw, g, f)?;
    let spectrum = solve_cluster(&problem)?;
    let four_level = a.n_qubits == 3 && a.u == r;

    let mut out = String::new();
    let _ = writeln!(out, "# n_qubits={} r={r} u={} f={}", a.n_qubits, a.u, fmt_num(f));
    let _ = writeln!(
        out,
        "# detuning_mhz={} g_mhz={} dim={}",
        fmt_num(a.detuning),
        fmt_num(a.g),
        basis.dim()
    );
    let _ = writeln!(
        out,
        "k,epsilon_mhz,{}recursion_residual,ratio_residual",
        coefficient_columns(basis.dim())
    );
    for (k, (eps, c)) in spectrum.splittings.iter().zip(&spectrum.vectors).enumerate() {
        let residual = recursion_coefficients(*eps, &problem)?.boundary_residual;
        let ratio = if four_level {
            let closed = ratio_c0_c3(*eps, dw, g, f)?;
            fmt_num(((closed - c[0] / c[3]) / (c[0] / c[3])).abs())
        } else {
            "n/a".to_string()
        };
        let coeffs: String = c.iter().map(|x| format!("{},", fmt_num(*x))).collect();
        let _ = writeln!(
            out,
            "{k},{},{coeffs}{},{ratio}",
            fmt_num(ordinary(*eps)),
            fmt_num(residual)
        );
    }
    io::stdout().write_all(out.as_bytes())?;
    Ok(())
}

fn coefficient_columns(dim: usize) -> String {
    (0..dim).map(|n| format!("c{n},")).collect()
}

fn resolve_seed(cfg: &RunConfig) -> Result<u64, CliError> {
    if let Some(seed) = cfg.sweep.seed {
        return Ok(seed);
    }
    match std::env::var("QLSIM_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("QLSIM_SEED is not an integer: '{v}'"))),
        Err(_) => Ok(0),
    }
}

#[derive(Serialize)]
struct SweepMetadata<'a> {
    config: &'a RunConfig,
    resolved: &'a [SweepSpec],
}

fn cmd_sweep(a: SweepArgs) -> Result<(), CliError> {
    let mut cfg = RunConfig::load(&a.config)?;
    if let Some(dir) = a.out_dir {
        cfg.output.dir = dir;
    }
    let seed = resolve_seed(&cfg)?;
    let spec = cfg.sweep_spec(seed)?;
    let dir = cfg.output.dir.clone();
    prepare_dir(&dir)?;

    let mut specs = vec![spec.clone()];
    if spec.sigma > 0.0 && cfg.sweep.include_clean_baseline {
        specs.insert(
            0,
            SweepSpec {
                sigma: 0.0,
                mc_samples: 1,
                ..spec.clone()
            },
        );
    }

    let mut total = 0usize;
    let mut failed = 0usize;
    for study in &cfg.sweep.studies {
        let mut records = Vec::new();
        for s in &specs {
            records.extend(match study {
                Study::Coefficients => sweep_coefficients(s)?,
                Study::Entanglement => sweep_entanglement(s)?,
            });
        }
        total += records.len();
        failed += records.iter().filter(|r| !r.is_ok()).count();

        let meta = SweepMetadata {
            config: &cfg,
            resolved: &specs,
        };
        let name = match study {
            Study::Coefficients => "coefficients",
            Study::Entanglement => "entanglement",
        };
        let mut csv = Vec::new();
        write_sweep_csv(&records, &mut csv)?;
        write_with_sidecar(
            &dir.join(format!("{}{name}.csv", cfg.output.prefix)),
            &csv,
            &sidecar_text(name, &meta)?,
        )?;

        if *study == Study::Entanglement {
            for (column, title) in [(Column::Concurrence, "concurrence"), (Column::Tangle, "tangle")] {
                let text = series_table(&records, column);
                let path = dir.join(format!("{}{title}.csv", cfg.output.prefix));
                write_with_sidecar(&path, text.as_bytes(), &sidecar_text(title, &meta)?)?;
            }
        }
    }
    if failed > 0 {
        eprintln!("qlsim: {failed} of {total} rows failed; see the status column");
        if failed == total {
            return Err(CliError::Numerical("every sweep row failed".into()));
        }
    }
    Ok(())
}

type Extract = fn(&SweepRecord) -> (f64, f64);

#[derive(Clone, Copy)]
enum Column {
    Concurrence,
    Tangle,
}

/// One observable per row, grouped by (σ, Δω) series in sweep order.
fn series_table(records: &[SweepRecord], column: Column) -> String {
    let (name, get): (&str, Extract) = match column {
        Column::Concurrence => ("concurrence", |r| (r.concurrence, r.concurrence_stderr)),
        Column::Tangle => ("three_tangle", |r| (r.three_tangle, r.three_tangle_stderr)),
    };
    let mut out = format!("detuning_mhz,sigma,ell,{name},{name}_stderr,status\n");
    for r in records {
        let (v, e) = get(r);
        let status = if r.is_ok() { "ok" } else { "failed" };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{status}",
            fmt_num(r.detuning_mhz),
            fmt_num(r.sigma),
            fmt_num(r.ell),
            fmt_num(v),
            fmt_num(e)
        );
    }
    out
}

fn prepare_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    let probe = dir.join(".qlsim-write-probe");
    fs::write(&probe, b"").map_err(|e| CliError::Io(format!("{} is not writable: {e}", dir.display())))?;
    let _ = fs::remove_file(probe);
    Ok(())
}

fn write_with_sidecar(path: &Path, body: &[u8], meta: &str) -> Result<(), CliError> {
    let write = |p: &Path, bytes: &[u8]| {
        fs::write(p, bytes).map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display())))
    };
    write(path, body)?;
    write(&sidecar_path(path), meta.as_bytes())
}
