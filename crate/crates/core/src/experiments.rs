//! Parameter sweeps over (ℓ, Δω) for the three-qubit u = 3/2 cluster,
//! Monte Carlo over fabrication disorder, and CSV output.
//!
//! Frequencies in [`SweepSpec`] and [`SweepRecord`] are ordinary MHz; they
//! are converted to angular frequency before entering the solver.
//!
//! Rows are independent and may run on any number of threads. Each row
//! draws dislocation sample `i` from its own counter-based stream and
//! accumulates in sample order, so the output does not depend on the
//! execution schedule.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{cluster_basis, Half};
use crate::cluster::{ratio_c0_c3, solve_cluster, ClusterProblem};
use crate::entanglement::{
    bipartite_concurrence, multipartite_concurrence, partial_trace, qubit_state_from_cluster, three_tangle,
    PhotonPolicy,
};
use crate::error::{Error, Result};
use crate::lattice::{
    coupling_profile, deformation_closed_form, deformation_exact_gaussian, deformation_sample, dislocation_draw,
    LatticeSpec,
};
use crate::{angular, ordinary, VERSION};

/// Which split state of the cluster a sweep follows.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsilonSelector {
    #[default]
    Highest,
    Lowest,
    /// Position in the ascending list of splittings.
    Index(usize),
}

impl EpsilonSelector {
    fn pick(self, dim: usize) -> Result<usize> {
        match self {
            EpsilonSelector::Highest => Ok(dim - 1),
            EpsilonSelector::Lowest => Ok(0),
            EpsilonSelector::Index(k) if k < dim => Ok(k),
            EpsilonSelector::Index(k) => Err(Error::domain(format!("splitting index {k} out of {dim}"))),
        }
    }
}

/// Deformation factor fed to the cluster solver when σ > 0.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FSource {
    /// Realized f̃ of each dislocation draw; observables are averaged afterwards.
    #[default]
    PerSample,
    /// The published lattice-averaged closed form for every draw.
    ClosedFormMean,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub n_qubits: usize,
    pub ell_grid: Vec<f64>,
    /// Δω/2π in MHz.
    pub detunings_mhz: Vec<f64>,
    pub sigma: f64,
    pub mc_samples: usize,
    pub seed: u64,
    /// g/2π in MHz.
    pub g_mhz: f64,
    /// ω_q/2π in MHz; only enters absolute energies.
    pub omega_q_mhz: f64,
    #[serde(default)]
    pub photon_policy: PhotonPolicy,
    #[serde(default)]
    pub which_epsilon: EpsilonSelector,
    #[serde(default)]
    pub f_source: FSource,
}

/// 97 points on [0.02, 0.98].
pub fn default_ell_grid() -> Vec<f64> {
    (0..97).map(|i| (2 + i) as f64 / 100.0).collect()
}

/// Δω/2π from −150 to +150 MHz in 10 MHz steps.
pub fn default_detuning_grid_mhz() -> Vec<f64> {
    (-15..=15).map(|k| 10.0 * k as f64).collect()
}

impl SweepSpec {
    /// Placeholder circuit-QED scale parameters (g/2π = 54 MHz, ω_q/2π = 6.44 GHz).
    pub fn placeholder(detunings_mhz: Vec<f64>) -> Self {
        SweepSpec {
            n_qubits: 3,
            ell_grid: default_ell_grid(),
            detunings_mhz,
            sigma: 0.0,
            mc_samples: 1,
            seed: 0,
            g_mhz: 54.0,
            omega_q_mhz: 6440.0,
            photon_policy: PhotonPolicy::default(),
            which_epsilon: EpsilonSelector::default(),
            f_source: FSource::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits != 3 {
            return Err(Error::Unsupported(format!(
                "sweeps follow the three-qubit u = 3/2 cluster (got N = {})",
                self.n_qubits
            )));
        }
        if self.ell_grid.is_empty() || self.detunings_mhz.is_empty() {
            return Err(Error::domain("sweep grids must be nonempty"));
        }
        if self.ell_grid.iter().chain(&self.detunings_mhz).any(|x| !x.is_finite()) {
            return Err(Error::domain("sweep grids must be finite"));
        }
        if !self.sigma.is_finite() || self.sigma < 0.0 {
            return Err(Error::domain(format!("sigma must be non-negative, got {}", self.sigma)));
        }
        if self.sigma > 0.0 && self.mc_samples == 0 {
            return Err(Error::domain("mc_samples must be at least 1 when sigma > 0"));
        }
        if !self.g_mhz.is_finite() || self.g_mhz <= 0.0 || !self.omega_q_mhz.is_finite() {
            return Err(Error::domain("g must be positive and omega_q finite"));
        }
        Ok(())
    }

    fn rows(&self) -> Vec<(f64, f64)> {
        self.detunings_mhz
            .iter()
            .flat_map(|dw| self.ell_grid.iter().map(move |ell| (*ell, *dw)))
            .collect()
    }

    fn samples(&self) -> usize {
        if self.sigma > 0.0 {
            self.mc_samples
        } else {
            1
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum RowStatus {
    Ok,
    Failed(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRecord {
    pub ell: f64,
    pub detuning_mhz: f64,
    pub sigma: f64,
    pub f_mean: f64,
    /// Ascending splittings ε_k/2π in MHz (sample means when σ > 0).
    pub epsilon_mhz: Vec<f64>,
    pub c0: f64,
    pub c3: f64,
    pub concurrence: f64,
    pub three_tangle: f64,
    /// Wootters concurrence of a qubit pair after tracing out the photon.
    pub pair_concurrence_traced: f64,
    pub f_stderr: f64,
    pub c0_stderr: f64,
    pub c3_stderr: f64,
    pub concurrence_stderr: f64,
    pub three_tangle_stderr: f64,
    /// Largest relative gap between the closed-form c₀/c₃ and the eigenvector ratio.
    pub eq5_residual: f64,
    pub status: RowStatus,
}

impl SweepRecord {
    pub fn is_ok(&self) -> bool {
        self.status == RowStatus::Ok
    }

    fn failed(ell: f64, detuning_mhz: f64, sigma: f64, dim: usize, reason: String) -> Self {
        let nan = f64::NAN;
        SweepRecord {
            ell,
            detuning_mhz,
            sigma,
            f_mean: nan,
            epsilon_mhz: vec![nan; dim],
            c0: nan,
            c3: nan,
            concurrence: nan,
            three_tangle: nan,
            pair_concurrence_traced: nan,
            f_stderr: nan,
            c0_stderr: nan,
            c3_stderr: nan,
            concurrence_stderr: nan,
            three_tangle_stderr: nan,
            eq5_residual: nan,
            status: RowStatus::Failed(reason),
        }
    }
}

/// Observables of one solved cluster.
#[derive(Clone, Debug)]
struct Observation {
    f: f64,
    eps: Vec<f64>,
    c0: f64,
    c3: f64,
    concurrence: f64,
    tangle: f64,
    pair_traced: f64,
    eq5_residual: f64,
}

fn observe(spec: &SweepSpec, f: f64, detuning: f64, g: f64) -> Result<Observation> {
    let r = Half::from_doubled(3);
    let basis = cluster_basis(r, r)?;
    let problem = ClusterProblem::new(basis.clone(), detuning, g, f)?;
    let spectrum = solve_cluster(&problem)?;
    let k = spec.which_epsilon.pick(spectrum.splittings.len())?;
    let eps = spectrum.splittings[k];
    let c = &spectrum.vectors[k];

    let closed = ratio_c0_c3(eps, detuning, g, f)?;
    let numeric = c[0] / c[3];
    let eq5_residual = ((closed - numeric) / numeric).abs();

    let state = qubit_state_from_cluster(c, &basis, spec.photon_policy)?;
    let psi = state.as_pure()?;
    let traced = qubit_state_from_cluster(c, &basis, PhotonPolicy::TracePhoton)?.to_density();
    Ok(Observation {
        f,
        eps: spectrum.splittings.clone(),
        c0: c[0],
        c3: c[3],
        concurrence: multipartite_concurrence(psi)?,
        tangle: three_tangle(psi)?,
        pair_traced: bipartite_concurrence(&partial_trace(&traced, &[0, 1])?)?,
        eq5_residual,
    })
}

/// Mean and standard error in a fixed summation order.
fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn aggregate(ell: f64, detuning_mhz: f64, sigma: f64, obs: &[Observation]) -> SweepRecord {
    let col = |get: fn(&Observation) -> f64| mean_stderr(&obs.iter().map(get).collect::<Vec<_>>());
    let (f_mean, f_stderr) = col(|o| o.f);
    let (c0, c0_stderr) = col(|o| o.c0);
    let (c3, c3_stderr) = col(|o| o.c3);
    let (concurrence, concurrence_stderr) = col(|o| o.concurrence);
    let (three_tangle, three_tangle_stderr) = col(|o| o.tangle);
    let (pair_concurrence_traced, _) = col(|o| o.pair_traced);
    let dim = obs[0].eps.len();
    let epsilon_mhz = (0..dim)
        .map(|k| ordinary(obs.iter().map(|o| o.eps[k]).sum::<f64>() / obs.len() as f64))
        .collect();
    SweepRecord {
        ell,
        detuning_mhz,
        sigma,
        f_mean,
        epsilon_mhz,
        c0,
        c3,
        concurrence,
        three_tangle,
        pair_concurrence_traced,
        f_stderr,
        c0_stderr,
        c3_stderr,
        concurrence_stderr,
        three_tangle_stderr,
        eq5_residual: obs.iter().fold(0.0, |a, o| a.max(o.eq5_residual)),
        status: RowStatus::Ok,
    }
}

fn entanglement_row(spec: &SweepSpec, ell: f64, detuning_mhz: f64) -> Result<SweepRecord> {
    let n = spec.n_qubits;
    let lattice = LatticeSpec::new(n, ell, spec.sigma, angular(spec.g_mhz))?;
    let (dw, g) = (angular(detuning_mhz), angular(spec.g_mhz));
    let closed = deformation_closed_form(n, ell, spec.sigma)?.value;
    let obs = (0..spec.samples() as u64)
        .map(|i| {
            let f = match spec.f_source {
                FSource::PerSample => {
                    let x = dislocation_draw(n, spec.sigma, spec.seed, i)?;
                    deformation_sample(&coupling_profile(&lattice, &x)?).value
                }
                FSource::ClosedFormMean => closed,
            };
            observe(spec, f, dw, g)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(aggregate(ell, detuning_mhz, spec.sigma, &obs))
}

fn coefficient_row(spec: &SweepSpec, ell: f64, detuning_mhz: f64) -> Result<SweepRecord> {
    let f = deformation_closed_form(spec.n_qubits, ell, spec.sigma)?.value;
    let obs = observe(spec, f, angular(detuning_mhz), angular(spec.g_mhz))?;
    Ok(aggregate(ell, detuning_mhz, spec.sigma, &[obs]))
}

fn run_rows(spec: &SweepSpec, row: fn(&SweepSpec, f64, f64) -> Result<SweepRecord>) -> Result<Vec<SweepRecord>> {
    spec.validate()?;
    let dim = spec.n_qubits + 1;
    Ok(spec
        .rows()
        .into_par_iter()
        .map(|(ell, dw)| {
            row(spec, ell, dw).unwrap_or_else(|e| SweepRecord::failed(ell, dw, spec.sigma, dim, e.to_string()))
        })
        .collect())
}

/// c₀ and c₃ of the selected split state over the (ℓ, Δω) grid, with f from
/// the closed form. Rows are detuning-major.
pub fn sweep_coefficients(spec: &SweepSpec) -> Result<Vec<SweepRecord>> {
    run_rows(spec, coefficient_row)
}

/// Tripartite concurrence and 3-tangle over the (ℓ, Δω) grid, averaged over
/// `mc_samples` dislocation draws when σ > 0. Rows are detuning-major.
pub fn sweep_entanglement(spec: &SweepSpec) -> Result<Vec<SweepRecord>> {
    run_rows(spec, entanglement_row)
}

/// Rows of one detuning series, in grid order.
pub fn series(table: &[SweepRecord], detuning_mhz: f64) -> Vec<SweepRecord> {
    table
        .iter()
        .filter(|r| r.detuning_mhz == detuning_mhz)
        .cloned()
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeformationStudy {
    pub n_qubits: usize,
    pub ell: f64,
    pub sigma: f64,
    pub samples: usize,
    pub seed: u64,
    pub mean: f64,
    pub stderr: f64,
    pub closed_form: f64,
    pub exact_gaussian: f64,
}

impl DeformationStudy {
    /// Gap between the published closed form and the exact Gaussian expectation.
    pub fn discrepancy(&self) -> f64 {
        self.closed_form - self.exact_gaussian
    }
}

pub fn monte_carlo_deformation(
    n_qubits: usize,
    ell: f64,
    sigma: f64,
    samples: usize,
    seed: u64,
) -> Result<DeformationStudy> {
    if samples == 0 {
        return Err(Error::domain("at least one sample is required"));
    }
    if sigma > 0.0 && samples < 100 {
        return Err(Error::domain(format!(
            "{samples} samples is too few for sigma > 0 (need 100)"
        )));
    }
    let lattice = LatticeSpec::new(n_qubits, ell, sigma, 1.0)?;
    let values = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let x = dislocation_draw(n_qubits, sigma, seed, i)?;
            Ok(deformation_sample(&coupling_profile(&lattice, &x)?).value)
        })
        .collect::<Result<Vec<f64>>>()?;
    let (mean, stderr) = mean_stderr(&values);
    Ok(DeformationStudy {
        n_qubits,
        ell,
        sigma,
        samples,
        seed,
        mean,
        stderr,
        closed_form: deformation_closed_form(n_qubits, ell, sigma)?.value,
        exact_gaussian: deformation_exact_gaussian(n_qubits, ell, sigma)?.value,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnhancementReport {
    pub peak_ell: f64,
    pub peak_tau: f64,
    /// Mean τ of the grid points nearest ℓ = 0 and ℓ = 1.
    pub endpoint_tau: f64,
    pub fold_increase: f64,
    /// Set when the endpoint τ is zero and the fold is reported as infinite.
    pub infinite: bool,
}

/// Peak-to-endpoint 3-tangle enhancement of one detuning series.
pub fn enhancement_report(table: &[SweepRecord]) -> Result<EnhancementReport> {
    let rows: Vec<&SweepRecord> = table.iter().filter(|r| r.is_ok()).collect();
    let peak = rows
        .iter()
        .copied()
        .reduce(|best, r| if r.three_tangle > best.three_tangle { r } else { best })
        .ok_or_else(|| Error::domain("no successful rows to report on"))?;
    let low = rows
        .iter()
        .copied()
        .reduce(|a, r| if r.ell < a.ell { r } else { a })
        .unwrap();
    let high = rows
        .iter()
        .copied()
        .reduce(|a, r| if r.ell > a.ell { r } else { a })
        .unwrap();
    let endpoint_tau = 0.5 * (low.three_tangle + high.three_tangle);
    let (fold_increase, infinite) = if endpoint_tau == 0.0 {
        (f64::INFINITY, true)
    } else {
        (peak.three_tangle / endpoint_tau, false)
    };
    Ok(EnhancementReport {
        peak_ell: peak.ell,
        peak_tau: peak.three_tangle,
        endpoint_tau,
        fold_increase,
        infinite,
    })
}

/// Twelve significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn sweep_header(dim: usize) -> Vec<String> {
    let mut h: Vec<String> = ["ell", "detuning_mhz", "sigma", "f_mean"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    h.extend((0..dim).map(|k| format!("epsilon_{k}_mhz")));
    h.extend(
        [
            "c0",
            "c3",
            "concurrence",
            "three_tangle",
            "pair_concurrence_traced",
            "f_stderr",
            "c0_stderr",
            "c3_stderr",
            "concurrence_stderr",
            "three_tangle_stderr",
            "eq5_residual",
            "status",
        ]
        .iter()
        .map(|s| s.to_string()),
    );
    h
}

pub fn write_sweep_csv<W: Write>(records: &[SweepRecord], mut out: W) -> std::io::Result<()> {
    let dim = records.first().map_or(4, |r| r.epsilon_mhz.len());
    writeln!(out, "{}", sweep_header(dim).join(","))?;
    for r in records {
        let mut line = String::new();
        let nums = [r.ell, r.detuning_mhz, r.sigma, r.f_mean]
            .into_iter()
            .chain(r.epsilon_mhz.iter().copied())
            .chain([
                r.c0,
                r.c3,
                r.concurrence,
                r.three_tangle,
                r.pair_concurrence_traced,
                r.f_stderr,
                r.c0_stderr,
                r.c3_stderr,
                r.concurrence_stderr,
                r.three_tangle_stderr,
                r.eq5_residual,
            ]);
        for x in nums {
            let _ = write!(line, "{},", fmt_num(x));
        }
        match &r.status {
            RowStatus::Ok => line.push_str("ok"),
            RowStatus::Failed(why) => {
                let _ = write!(line, "failed: {}", why.replace([',', '\n'], ";"));
            }
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn deformation_header() -> &'static str {
    "n_qubits,ell,sigma,samples,seed,mc_mean,mc_stderr,closed_form,exact_gaussian,closed_minus_exact"
}

pub fn write_deformation_csv<W: Write>(rows: &[DeformationStudy], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{}", deformation_header())?;
    for s in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            s.n_qubits,
            fmt_num(s.ell),
            fmt_num(s.sigma),
            s.samples,
            s.seed,
            fmt_num(s.mean),
            fmt_num(s.stderr),
            fmt_num(s.closed_form),
            fmt_num(s.exact_gaussian),
            fmt_num(s.discrepancy()),
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct Sidecar<'a, T: Serialize> {
    artifact: &'static str,
    version: &'static str,
    study: &'a str,
    spec: &'a T,
}

/// Path of the metadata file written next to `csv`.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    let mut name = csv.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".meta.toml");
    csv.with_file_name(name)
}

/// Structured-text metadata recording the artifact version and the full run spec.
pub fn sidecar_text<T: Serialize>(study: &str, spec: &T) -> Result<String> {
    toml::to_string(&Sidecar {
        artifact: "qlsim",
        version: VERSION,
        study,
        spec,
    })
    .map_err(|e| Error::Io(format!("metadata serialization failed: {e}")))
}

/// Writes `records` to `csv` and its metadata sidecar.
pub fn write_sweep(csv: &Path, records: &[SweepRecord], study: &str, spec: &SweepSpec) -> Result<()> {
    let mut buf = Vec::new();
    write_sweep_csv(records, &mut buf)?;
    std::fs::write(csv, buf)?;
    std::fs::write(sidecar_path(csv), sidecar_text(study, spec)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::recursion_coefficients;

    fn small_spec(sigma: f64, samples: usize) -> SweepSpec {
        SweepSpec {
            ell_grid: vec![0.02, 0.3, 0.5, 0.7, 0.98],
            sigma,
            mc_samples: samples,
            seed: 9,
            ..SweepSpec::placeholder(vec![-92.0, 0.0])
        }
    }

    #[test]
    fn default_grids() {
        let ell = default_ell_grid();
        assert_eq!(ell.len(), 97);
        assert_eq!(ell[0], 0.02);
        assert_eq!(*ell.last().unwrap(), 0.98);
        let dw = default_detuning_grid_mhz();
        assert_eq!(dw.len(), 31);
        assert_eq!((dw[0], dw[15], dw[30]), (-150.0, 0.0, 150.0));
    }

    #[test]
    fn spec_validation() {
        assert!(small_spec(0.0, 1).validate().is_ok());
        assert!(SweepSpec {
            n_qubits: 4,
            ..small_spec(0.0, 1)
        }
        .validate()
        .is_err());
        assert!(SweepSpec {
            ell_grid: vec![],
            ..small_spec(0.0, 1)
        }
        .validate()
        .is_err());
        assert!(small_spec(0.1, 0).validate().is_err());
        assert!(small_spec(-0.1, 10).validate().is_err());
    }

    #[test]
    fn coefficient_rows_cross_check_closed_form() {
        let spec = SweepSpec {
            ell_grid: default_ell_grid(),
            ..small_spec(0.0, 1)
        };
        let rows = sweep_coefficients(&spec).unwrap();
        assert_eq!(rows.len(), 97 * 2);
        for r in &rows {
            assert!(r.is_ok(), "{:?}", r.status);
            assert!(r.eq5_residual <= 1e-9);
            assert!((r.c0 * r.c0 + r.c3 * r.c3) <= 1.0 + 1e-12);
        }
        // ordering is detuning-major
        assert!(rows[..97].iter().all(|r| r.detuning_mhz == -92.0));
    }

    #[test]
    fn spot_check_cluster_invariants() {
        let spec = SweepSpec {
            ell_grid: default_ell_grid(),
            ..small_spec(0.0, 1)
        };
        let rows = sweep_coefficients(&spec).unwrap();
        let r = Half::from_doubled(3);
        for row in rows.iter().step_by(20) {
            let f = row.f_mean;
            let p = ClusterProblem::new(
                cluster_basis(r, r).unwrap(),
                angular(row.detuning_mhz),
                angular(54.0),
                f,
            )
            .unwrap();
            let trace: f64 = row.epsilon_mhz.iter().map(|e| angular(*e)).sum();
            assert!((trace - 6.0 * angular(row.detuning_mhz)).abs() < 1e-8);
            for eps in &row.epsilon_mhz {
                assert!(recursion_coefficients(angular(*eps), &p).unwrap().boundary_residual < 1e-9);
            }
        }
    }

    #[test]
    fn trace_photon_rows_fail_softly() {
        let spec = SweepSpec {
            photon_policy: PhotonPolicy::TracePhoton,
            ..small_spec(0.0, 1)
        };
        let rows = sweep_entanglement(&spec).unwrap();
        assert!(rows.iter().all(|r| matches!(r.status, RowStatus::Failed(_))));
        let mut csv = Vec::new();
        write_sweep_csv(&rows, &mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.lines().nth(1).unwrap().contains("failed: "));
    }

    #[test]
    fn zero_sigma_is_deterministic_baseline() {
        let spec = small_spec(0.0, 500);
        let rows = sweep_entanglement(&spec).unwrap();
        for r in &rows {
            assert_eq!(r.three_tangle_stderr, 0.0);
            assert_eq!(r.f_stderr, 0.0);
        }
        // ℓ ↔ 1 − ℓ
        for k in 0..2 {
            let (a, b) = (&rows[k * 5], &rows[k * 5 + 4]);
            assert!((a.three_tangle - b.three_tangle).abs() < 1e-9);
            assert!((a.concurrence - b.concurrence).abs() < 1e-9);
        }
    }

    #[test]
    fn mc_stderr_scales_with_samples() {
        let a = monte_carlo_deformation(3, 0.3, 0.1, 1_000, 3).unwrap();
        let b = monte_carlo_deformation(3, 0.3, 0.1, 16_000, 3).unwrap();
        let ratio = a.stderr / b.stderr;
        assert!((ratio / 4.0 - 1.0).abs() < 0.2, "ratio {ratio}");

        let spec_a = SweepSpec {
            ell_grid: vec![0.3],
            detunings_mhz: vec![-92.0],
            ..small_spec(0.1, 250)
        };
        let spec_b = SweepSpec {
            mc_samples: 4_000,
            ..spec_a.clone()
        };
        let ra = &sweep_entanglement(&spec_a).unwrap()[0];
        let rb = &sweep_entanglement(&spec_b).unwrap()[0];
        let ratio = ra.c0_stderr / rb.c0_stderr;
        assert!((ratio / 4.0 - 1.0).abs() < 0.2, "ratio {ratio}");
    }

    #[test]
    fn deformation_study_examples() {
        let s = monte_carlo_deformation(3, 0.4, 0.0, 100, 1).unwrap();
        assert!(s.stderr < 1e-14);
        assert!((s.mean - s.closed_form).abs() < 1e-12);
        assert!((s.mean - s.exact_gaussian).abs() < 1e-12);

        let s = monte_carlo_deformation(3, 0.3, 0.05, 100_000, 21).unwrap();
        assert!((s.mean - s.exact_gaussian).abs() < 3.0 * s.stderr);
        assert!(s.discrepancy().abs() > 0.0);

        assert!(monte_carlo_deformation(3, 0.3, 0.05, 10, 1).is_err());
        assert!(monte_carlo_deformation(3, 0.3, 0.0, 0, 1).is_err());
    }

    fn synthetic(taus: &[f64]) -> Vec<SweepRecord> {
        let n = taus.len();
        taus.iter()
            .enumerate()
            .map(|(i, t)| {
                let ell = 0.02 + 0.96 * i as f64 / (n - 1) as f64;
                let mut r = SweepRecord::failed(ell, -92.0, 0.0, 4, String::new());
                r.status = RowStatus::Ok;
                r.three_tangle = *t;
                r
            })
            .collect()
    }

    #[test]
    fn enhancement_examples() {
        let flat = enhancement_report(&synthetic(&[0.2; 7])).unwrap();
        assert_eq!(flat.fold_increase, 1.0);
        let dec = enhancement_report(&synthetic(&[0.9, 0.7, 0.5, 0.3, 0.1])).unwrap();
        assert_eq!(dec.peak_ell, 0.02);
        assert_eq!(dec.fold_increase, 0.9 / 0.5);
        let zero = enhancement_report(&synthetic(&[0.0, 0.4, 0.0])).unwrap();
        assert!(zero.infinite && zero.fold_increase.is_infinite());
        assert!(enhancement_report(&[]).is_err());
    }

    #[test]
    fn csv_layout() {
        let rows = sweep_coefficients(&small_spec(0.0, 1)).unwrap();
        let mut buf = Vec::new();
        write_sweep_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        let header = lines.next().unwrap();
        assert!(header.starts_with("ell,detuning_mhz,sigma,f_mean,epsilon_0_mhz"));
        assert!(header.ends_with("eq5_residual,status"));
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first.len(), header.split(',').count());
        assert_eq!(first[0], "2.00000000000e-2");
        assert_eq!(text.lines().count(), rows.len() + 1);
    }

    #[test]
    fn sidecar_records_version_and_spec() {
        let spec = small_spec(0.05, 100);
        let text = sidecar_text("entanglement", &spec).unwrap();
        assert!(text.contains(&format!("version = \"{VERSION}\"")));
        let parsed: toml::Table = toml::from_str(&text).unwrap();
        let back: SweepSpec = parsed["spec"].clone().try_into().unwrap();
        assert_eq!(back, spec);
        assert_eq!(
            sidecar_path(Path::new("/tmp/x/run.csv")),
            PathBuf::from("/tmp/x/run.csv.meta.toml")
        );
    }
}
