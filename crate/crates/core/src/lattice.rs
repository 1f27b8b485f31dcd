//! Quasi-lattice geometry: coupling weights of a qubit chain along a
//! resonator standing wave, and the deformation factor of the resulting
//! collective spin algebra.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this |sin(πℓ)| the Dirichlet ratio is replaced by its analytic limit.
const SINGULAR_SIN: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub n_qubits: usize,
    /// Relative spacing ℓ = 2 L_q / λ_p, folded into [0, 1].
    pub rel_spacing: f64,
    /// Standard deviation of the dimensionless dislocations.
    pub sigma: f64,
    /// Coupling amplitude g (angular frequency).
    pub g_max: f64,
    /// Explicit dislocations x_j; `None` means an ideal lattice.
    pub dislocations: Option<Vec<f64>>,
}

impl LatticeSpec {
    pub fn new(n_qubits: usize, rel_spacing: f64, sigma: f64, g_max: f64) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::domain("a lattice needs at least one qubit"));
        }
        if !sigma.is_finite() || sigma < 0.0 {
            return Err(Error::domain(format!(
                "sigma must be finite and non-negative, got {sigma}"
            )));
        }
        if !rel_spacing.is_finite() || !g_max.is_finite() {
            return Err(Error::domain("relative spacing and g must be finite"));
        }
        Ok(LatticeSpec {
            n_qubits,
            rel_spacing: fold_spacing(rel_spacing),
            sigma,
            g_max,
            dislocations: None,
        })
    }

    pub fn with_dislocations(mut self, x: Vec<f64>) -> Result<Self> {
        if x.len() != self.n_qubits {
            return Err(Error::domain(format!(
                "expected {} dislocations, got {}",
                self.n_qubits,
                x.len()
            )));
        }
        self.dislocations = Some(x);
        Ok(self)
    }

    /// Profile for the stored dislocations (zero when none are set).
    pub fn profile(&self) -> CouplingProfile {
        let zeros;
        let x = match &self.dislocations {
            Some(x) => x.as_slice(),
            None => {
                zeros = vec![0.0; self.n_qubits];
                zeros.as_slice()
            }
        };
        profile_from(self.rel_spacing, x)
    }
}

/// Maps ℓ onto [0, 1] using cos(jπ(ℓ + 2)) = cos(jπ(−ℓ)) = cos(jπℓ).
pub fn fold_spacing(ell: f64) -> f64 {
    let p = ell.rem_euclid(2.0);
    if p > 1.0 {
        2.0 - p
    } else {
        p
    }
}

/// Normalized couplings η_j = g_j / g.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingProfile {
    pub eta: Vec<f64>,
}

impl CouplingProfile {
    pub fn n_qubits(&self) -> usize {
        self.eta.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeformationMethod {
    Sample,
    ClosedForm,
    ExactGaussian,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeformationFactor {
    pub value: f64,
    pub method: DeformationMethod,
}

/// Dislocation draw `index` of a run: a pure function of `(seed, index)`.
///
/// Each draw reads its own ChaCha stream, so runs split across threads
/// reproduce the serial result exactly.
pub fn dislocation_draw(n_qubits: usize, sigma: f64, seed: u64, index: u64) -> Result<Vec<f64>> {
    if !sigma.is_finite() || sigma < 0.0 {
        return Err(Error::domain(format!(
            "sigma must be finite and non-negative, got {sigma}"
        )));
    }
    if n_qubits == 0 {
        return Err(Error::domain("a lattice needs at least one qubit"));
    }
    if sigma == 0.0 {
        return Ok(vec![0.0; n_qubits]);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::domain(e.to_string()))?;
    Ok((0..n_qubits).map(|_| normal.sample(&mut rng)).collect())
}

/// I.i.d. Gaussian dislocations with standard deviation `sigma`.
pub fn sample_dislocations(n_qubits: usize, sigma: f64, seed: u64) -> Result<Vec<f64>> {
    dislocation_draw(n_qubits, sigma, seed, 0)
}

/// η_j = cos((j + x_j) π ℓ) for j = 0..N−1.
pub fn coupling_profile(spec: &LatticeSpec, x: &[f64]) -> Result<CouplingProfile> {
    if x.len() != spec.n_qubits {
        return Err(Error::domain(format!(
            "expected {} dislocations, got {}",
            spec.n_qubits,
            x.len()
        )));
    }
    Ok(profile_from(spec.rel_spacing, x))
}

fn profile_from(ell: f64, x: &[f64]) -> CouplingProfile {
    let eta = x
        .iter()
        .enumerate()
        .map(|(j, xj)| ((j as f64 + xj) * PI * ell).cos())
        .collect();
    CouplingProfile { eta }
}

/// Realized deformation f̃ = Σ η_j² / N.
pub fn deformation_sample(profile: &CouplingProfile) -> DeformationFactor {
    let n = profile.eta.len().max(1) as f64;
    let value = profile.eta.iter().map(|e| e * e).sum::<f64>() / n;
    DeformationFactor {
        value,
        method: DeformationMethod::Sample,
    }
}

/// sin((2N−1)πℓ) / sin(πℓ), with the l'Hôpital limit where sin(πℓ) vanishes.
fn dirichlet_ratio(n_qubits: usize, ell: f64) -> f64 {
    let k = (2 * n_qubits - 1) as f64;
    let s = (PI * ell).sin();
    if s.abs() < SINGULAR_SIN {
        k * (k * PI * ell).cos() / (PI * ell).cos()
    } else {
        (k * PI * ell).sin() / s
    }
}

fn check_counts(n_qubits: usize, sigma: f64) -> Result<()> {
    if n_qubits == 0 {
        return Err(Error::domain("a lattice needs at least one qubit"));
    }
    if sigma.is_nan() || sigma < 0.0 {
        return Err(Error::domain(format!("sigma must be non-negative, got {sigma}")));
    }
    Ok(())
}

/// Lattice-averaged deformation, evaluated exactly as the published closed form:
///
/// f = (1 + (πℓσ)²)/2 + (1 − (πℓσ)²)/(4N) · (1 + sin((2N−1)πℓ)/sin(πℓ))
pub fn deformation_closed_form(n_qubits: usize, ell: f64, sigma: f64) -> Result<DeformationFactor> {
    check_counts(n_qubits, sigma)?;
    let spread = (PI * ell * sigma).powi(2);
    let value =
        (1.0 + spread) / 2.0 + (1.0 - spread) / (4.0 * n_qubits as f64) * (1.0 + dirichlet_ratio(n_qubits, ell));
    Ok(DeformationFactor {
        value,
        method: DeformationMethod::ClosedForm,
    })
}

/// Exact Gaussian expectation of f̃, from E[cos 2(j+x)πℓ] = cos(2jπℓ)·exp(−2(πℓσ)²):
///
/// f = 1/2 + exp(−2(πℓσ)²)/(4N) · (1 + sin((2N−1)πℓ)/sin(πℓ))
pub fn deformation_exact_gaussian(n_qubits: usize, ell: f64, sigma: f64) -> Result<DeformationFactor> {
    check_counts(n_qubits, sigma)?;
    let damping = (-2.0 * (PI * ell * sigma).powi(2)).exp();
    let value = 0.5 + damping / (4.0 * n_qubits as f64) * (1.0 + dirichlet_ratio(n_qubits, ell));
    Ok(DeformationFactor {
        value,
        method: DeformationMethod::ExactGaussian,
    })
}
