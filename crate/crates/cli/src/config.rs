//! Run configuration for `qlsim sweep`.
//!
//! The file is TOML: `key = value` lines under `[model]`, `[sweep]` and
//! `[output]` section headers. Unknown keys are rejected. All frequencies
//! are ordinary frequencies in MHz.

use std::path::{Path, PathBuf};

use qlsim_core::entanglement::PhotonPolicy;
use qlsim_core::experiments::{default_detuning_grid_mhz, default_ell_grid, EpsilonSelector, FSource, SweepSpec};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetuningSign {
    #[default]
    Negative,
    Positive,
    /// Values are used exactly as written.
    AsGiven,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Study {
    Coefficients,
    Entanglement,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(default = "three")]
    pub n_qubits: usize,
    pub omega_q_mhz: f64,
    pub g_mhz: f64,
    /// Δω/2π values. Omitted means the default −150..150 MHz grid.
    #[serde(default)]
    pub detunings_mhz: Option<Vec<f64>>,
    #[serde(default)]
    pub detuning_sign: DetuningSign,
    /// Fock cutoff for brute-force checks; recorded in the metadata.
    #[serde(default = "ten")]
    pub n_max: usize,
}

fn three() -> usize {
    3
}

fn ten() -> usize {
    10
}

fn one() -> usize {
    1
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EllRange {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub studies: Vec<Study>,
    /// Explicit ℓ values; takes precedence over `ell_range`.
    #[serde(default)]
    pub ell_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub ell_range: Option<EllRange>,
    #[serde(default)]
    pub sigma: f64,
    #[serde(default = "one")]
    pub mc_samples: usize,
    /// Falls back to `QLSIM_SEED`, then 0.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub photon_policy: PhotonPolicy,
    #[serde(default)]
    pub which_epsilon: EpsilonSelector,
    #[serde(default)]
    pub f_source: FSource,
    /// Also run the σ = 0 chain when σ > 0.
    #[serde(default = "yes")]
    pub include_clean_baseline: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    #[serde(default)]
    pub prefix: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    pub sweep: SweepSection,
    pub output: OutputSection,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn detunings_mhz(&self) -> Vec<f64> {
        let raw = self
            .model
            .detunings_mhz
            .clone()
            .unwrap_or_else(default_detuning_grid_mhz);
        raw.into_iter()
            .map(|d| match self.model.detuning_sign {
                DetuningSign::Negative => -d.abs(),
                DetuningSign::Positive => d.abs(),
                DetuningSign::AsGiven => d,
            })
            .collect()
    }

    pub fn ell_grid(&self) -> Result<Vec<f64>, CliError> {
        match (&self.sweep.ell_grid, &self.sweep.ell_range) {
            (Some(grid), _) => Ok(grid.clone()),
            (None, Some(r)) => {
                if r.points < 2 || !r.start.is_finite() || !r.stop.is_finite() || r.stop <= r.start {
                    return Err(CliError::Usage(
                        "ell_range needs stop > start and at least 2 points".into(),
                    ));
                }
                let step = (r.stop - r.start) / (r.points - 1) as f64;
                Ok((0..r.points).map(|i| r.start + step * i as f64).collect())
            }
            (None, None) => Ok(default_ell_grid()),
        }
    }

    /// The sweep spec at the configured σ, with the seed already resolved.
    pub fn sweep_spec(&self, seed: u64) -> Result<SweepSpec, CliError> {
        let spec = SweepSpec {
            n_qubits: self.model.n_qubits,
            ell_grid: self.ell_grid()?,
            detunings_mhz: self.detunings_mhz(),
            sigma: self.sweep.sigma,
            mc_samples: self.sweep.mc_samples,
            seed,
            g_mhz: self.model.g_mhz,
            omega_q_mhz: self.model.omega_q_mhz,
            photon_policy: self.sweep.photon_policy,
            which_epsilon: self.sweep.which_epsilon,
            f_source: self.sweep.f_source,
        };
        spec.validate()?;
        if self.sweep.studies.is_empty() {
            return Err(CliError::Usage("sweep.studies must name at least one study".into()));
        }
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[model]
omega_q_mhz = 6440.0
g_mhz = 54.0
detunings_mhz = [66.0, -92.0]

[sweep]
studies = ["entanglement"]

[output]
dir = "out"
"#;

    #[test]
    fn defaults_fill_in() {
        let cfg = RunConfig::parse(MINIMAL).unwrap();
        assert_eq!(cfg.model.n_qubits, 3);
        assert_eq!(cfg.detunings_mhz(), vec![-66.0, -92.0]);
        assert_eq!(cfg.ell_grid().unwrap().len(), 97);
        let spec = cfg.sweep_spec(4).unwrap();
        assert_eq!(spec.seed, 4);
        assert_eq!(spec.sigma, 0.0);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = MINIMAL.replace("g_mhz = 54.0", "g_mhz = 54.0\ncoupling = 1.0");
        assert!(matches!(RunConfig::parse(&text), Err(CliError::Usage(_))));
        let text = format!("{MINIMAL}\n[extra]\nx = 1\n");
        assert!(RunConfig::parse(&text).is_err());
    }

    #[test]
    fn ell_range_and_sign_switch() {
        let text = MINIMAL
            .replace(
                "[sweep]",
                "[sweep]\nell_range = { start = 0.1, stop = 0.9, points = 5 }",
            )
            .replace("[model]", "[model]\ndetuning_sign = \"as_given\"");
        let cfg = RunConfig::parse(&text).unwrap();
        assert_eq!(cfg.detunings_mhz(), vec![66.0, -92.0]);
        let grid = cfg.ell_grid().unwrap();
        assert_eq!(grid.len(), 5);
        assert!((grid[2] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn invalid_physics_is_a_usage_error() {
        let text = MINIMAL.replace("[sweep]", "[sweep]\nsigma = -0.1");
        let cfg = RunConfig::parse(&text).unwrap();
        assert!(matches!(cfg.sweep_spec(0), Err(CliError::Usage(_))));
    }

    #[test]
    fn shipped_configs_parse() {
        let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
        for name in ["fig3.cfg", "fig2b.cfg"] {
            let cfg = RunConfig::load(&root.join(name)).unwrap();
            cfg.sweep_spec(0).unwrap();
        }
    }
}
