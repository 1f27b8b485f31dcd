//! Entanglement of the qubit part of dressed states: pure states, reduced
//! density matrices, the multipartite concurrence built from subsystem
//! purities, the three-qubit tangle (hyperdeterminant form) and the
//! two-qubit Wootters concurrence.

use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{dicke_amplitudes, ClusterBasis, Half};
use crate::error::{Error, Result};

const NORM_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PureQubitState {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl PureQubitState {
    /// Rejects vectors of the wrong length or whose norm is off by more than 1e-12.
    pub fn new(n_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_len(n_qubits, amplitudes.len())?;
        let norm = norm_sqr(&amplitudes).sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::domain(format!("state norm is {norm}, expected 1")));
        }
        Ok(PureQubitState { n_qubits, amplitudes })
    }

    pub fn normalized(n_qubits: usize, mut amplitudes: Vec<Complex64>) -> Result<Self> {
        check_len(n_qubits, amplitudes.len())?;
        let norm = norm_sqr(&amplitudes).sqrt();
        if !norm.is_finite() || norm <= 0.0 {
            return Err(Error::DegenerateState("zero-norm state vector".into()));
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Ok(PureQubitState { n_qubits, amplitudes })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        norm_sqr(&self.amplitudes).sqrt()
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &PureQubitState) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn to_density(&self) -> DensityMatrix {
        let d = self.amplitudes.len();
        let data = DMatrix::from_fn(d, d, |i, j| self.amplitudes[i] * self.amplitudes[j].conj());
        DensityMatrix {
            n_qubits: self.n_qubits,
            data,
        }
    }
}

fn check_len(n_qubits: usize, len: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits >= 30 || len != 1 << n_qubits {
        return Err(Error::domain(format!(
            "{len} amplitudes do not describe {n_qubits} qubits"
        )));
    }
    Ok(())
}

fn norm_sqr(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    data: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(n_qubits: usize, data: DMatrix<Complex64>) -> Result<Self> {
        check_len(n_qubits, data.nrows())?;
        if data.ncols() != data.nrows() {
            return Err(Error::domain("density matrix must be square"));
        }
        let asym = (&data - data.adjoint()).iter().fold(0.0f64, |a, x| a.max(x.norm()));
        if asym > NORM_TOL {
            return Err(Error::domain(format!("matrix is not Hermitian (deviation {asym})")));
        }
        let rho = DensityMatrix { n_qubits, data };
        let tr = rho.trace();
        if (tr - 1.0).abs() > NORM_TOL {
            return Err(Error::domain(format!("trace is {tr}, expected 1")));
        }
        let lowest = rho.min_eigenvalue();
        if lowest < -PSD_TOL {
            return Err(Error::domain(format!("negative eigenvalue {lowest}")));
        }
        Ok(rho)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        self.data.diagonal().iter().map(|x| x.re).sum()
    }

    /// Tr ρ²
    pub fn purity(&self) -> f64 {
        // Tr ρ² = Σ |ρ_ij|² for Hermitian ρ
        self.data.iter().map(|x| x.norm_sqr()).sum()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.data.clone())
            .eigenvalues
            .iter()
            .fold(f64::INFINITY, |a, x| a.min(*x))
    }
}

/// (|↑↑↑⟩ + |↓↓↓⟩)/√2
pub fn ghz_state() -> PureQubitState {
    let mut a = vec![c(0.0); 8];
    a[0b000] = c(std::f64::consts::FRAC_1_SQRT_2);
    a[0b111] = c(std::f64::consts::FRAC_1_SQRT_2);
    PureQubitState {
        n_qubits: 3,
        amplitudes: a,
    }
}

/// (|↑↑↓⟩ + |↑↓↑⟩ + |↓↑↑⟩)/√3
pub fn w_state() -> PureQubitState {
    let mut a = vec![c(0.0); 8];
    let w = 1.0 / 3f64.sqrt();
    for s in [0b110, 0b101, 0b011] {
        a[s] = c(w);
    }
    PureQubitState {
        n_qubits: 3,
        amplitudes: a,
    }
}

/// How the photon is removed from a dressed state Σ c_n |n⟩⊗|r, u−n⟩.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhotonPolicy {
    /// Coherent sum Σ c_n |r, u−n⟩, renormalized.
    #[default]
    ProjectQubitComponent,
    /// Partial trace over the photon: Σ |c_n|² |r, u−n⟩⟨r, u−n|.
    TracePhoton,
}

impl FromStr for PhotonPolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "project_qubit_component" => Ok(PhotonPolicy::ProjectQubitComponent),
            "trace_photon" => Ok(PhotonPolicy::TracePhoton),
            other => Err(Error::domain(format!("unknown photon policy '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum QubitState {
    Pure(PureQubitState),
    Mixed(DensityMatrix),
}

impl QubitState {
    pub fn to_density(&self) -> DensityMatrix {
        match self {
            QubitState::Pure(p) => p.to_density(),
            QubitState::Mixed(m) => m.clone(),
        }
    }

    pub fn as_pure(&self) -> Result<&PureQubitState> {
        match self {
            QubitState::Pure(p) => Ok(p),
            QubitState::Mixed(_) => Err(Error::domain("pure-state metric applied to a mixed state")),
        }
    }
}

/// Qubit state carried by the cluster coefficient vector `coefficients`.
///
/// Distinct photon numbers map to distinct Dicke components, so the
/// coherent projection is well defined.
pub fn qubit_state_from_cluster(
    coefficients: &[f64],
    basis: &ClusterBasis,
    policy: PhotonPolicy,
) -> Result<QubitState> {
    if coefficients.len() != basis.dim() {
        return Err(Error::domain(format!(
            "{} coefficients for a cluster of dimension {}",
            coefficients.len(),
            basis.dim()
        )));
    }
    let n_qubits = basis.r.doubled() as usize;
    let weight: f64 = coefficients.iter().map(|x| x * x).sum();
    if weight.is_nan() || weight <= 0.0 {
        return Err(Error::DegenerateState("cluster vector has zero norm".into()));
    }
    let components = basis
        .states
        .iter()
        .map(|st| dicke_amplitudes(basis.r, st.m, n_qubits))
        .collect::<Result<Vec<_>>>()?;

    match policy {
        PhotonPolicy::ProjectQubitComponent => {
            let mut psi = vec![c(0.0); 1 << n_qubits];
            for (cn, dicke) in coefficients.iter().zip(&components) {
                for (p, d) in psi.iter_mut().zip(dicke) {
                    *p += d * *cn;
                }
            }
            Ok(QubitState::Pure(PureQubitState::normalized(n_qubits, psi)?))
        }
        PhotonPolicy::TracePhoton => {
            let d = 1 << n_qubits;
            let mut rho = DMatrix::zeros(d, d);
            for (cn, dicke) in coefficients.iter().zip(&components) {
                let p = cn * cn / weight;
                for i in 0..d {
                    for j in 0..d {
                        rho[(i, j)] += dicke[i] * dicke[j].conj() * p;
                    }
                }
            }
            Ok(QubitState::Mixed(DensityMatrix { n_qubits, data: rho }))
        }
    }
}

/// Convenience wrapper around [`qubit_state_from_cluster`] for u = r = N/2 clusters.
pub fn top_cluster_state(coefficients: &[f64], n_qubits: usize, policy: PhotonPolicy) -> Result<QubitState> {
    let r = Half::from_doubled(n_qubits as i32);
    let basis = crate::algebra::cluster_basis(r, r)?;
    qubit_state_from_cluster(coefficients, &basis, policy)
}

fn check_keep(n_qubits: usize, keep: &[usize]) -> Result<()> {
    if keep.is_empty() {
        return Err(Error::domain("no subsystem to keep"));
    }
    for (i, q) in keep.iter().enumerate() {
        if *q >= n_qubits || keep[..i].contains(q) {
            return Err(Error::domain(format!(
                "invalid subsystem indices {keep:?} for {n_qubits} qubits"
            )));
        }
    }
    Ok(())
}

/// Splits a full basis index into (kept, traced) sub-indices, most significant kept qubit first.
fn index_maps(n_qubits: usize, keep: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let traced: Vec<usize> = (0..n_qubits).filter(|q| !keep.contains(q)).collect();
    let gather = |s: usize, qubits: &[usize]| {
        qubits
            .iter()
            .fold(0usize, |acc, q| (acc << 1) | ((s >> (n_qubits - 1 - q)) & 1))
    };
    let full = 1usize << n_qubits;
    (
        (0..full).map(|s| gather(s, keep)).collect(),
        (0..full).map(|s| gather(s, &traced)).collect(),
    )
}

/// Reduced state on the qubits `keep`, in the order given.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    check_keep(rho.n_qubits, keep)?;
    let (kept, traced) = index_maps(rho.n_qubits, keep);
    let dk = 1 << keep.len();
    let mut out = DMatrix::zeros(dk, dk);
    let full = rho.dim();
    for i in 0..full {
        for j in 0..full {
            if traced[i] == traced[j] {
                out[(kept[i], kept[j])] += rho.data[(i, j)];
            }
        }
    }
    Ok(DensityMatrix {
        n_qubits: keep.len(),
        data: out,
    })
}

/// Reduced state of a pure state, without forming the full projector.
pub fn reduce_pure(psi: &PureQubitState, keep: &[usize]) -> Result<DensityMatrix> {
    check_keep(psi.n_qubits, keep)?;
    let (kept, traced) = index_maps(psi.n_qubits, keep);
    let dk = 1 << keep.len();
    let dt = 1 << (psi.n_qubits - keep.len());
    // ψ reshaped as a dk × dt matrix
    let mut m = DMatrix::zeros(dk, dt);
    for (s, a) in psi.amplitudes.iter().enumerate() {
        m[(kept[s], traced[s])] = *a;
    }
    Ok(DensityMatrix {
        n_qubits: keep.len(),
        data: &m * m.adjoint(),
    })
}

fn require_normalized(psi: &PureQubitState) -> Result<()> {
    let norm = psi.norm();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::domain(format!("state norm is {norm}, expected 1")));
    }
    Ok(())
}

/// C_N = 2^{1−N/2} √((2^N − 2) − Σ_S Tr ρ_S²), summed over all proper nonempty subsystems S.
pub fn multipartite_concurrence(psi: &PureQubitState) -> Result<f64> {
    require_normalized(psi)?;
    let n = psi.n_qubits;
    let subsets = (1usize << n) - 2;
    let mut purity_sum = 0.0;
    for mask in 1..(1usize << n) - 1 {
        let keep: Vec<usize> = (0..n).filter(|q| mask & (1 << q) != 0).collect();
        purity_sum += reduce_pure(psi, &keep)?.purity();
    }
    let prefactor = 2f64.powf(1.0 - n as f64 / 2.0);
    Ok(prefactor * (subsets as f64 - purity_sum).max(0.0).sqrt())
}

/// Three-qubit tangle τ = 4|d₁ − 2d₂ + 4d₃| (Cayley hyperdeterminant), clamped to [0, 1].
pub fn three_tangle(psi: &PureQubitState) -> Result<f64> {
    if psi.n_qubits != 3 {
        return Err(Error::domain(format!("3-tangle needs 3 qubits, got {}", psi.n_qubits)));
    }
    require_normalized(psi)?;
    let a = |s: usize| psi.amplitudes[s];
    let d1 = a(0b000).powi(2) * a(0b111).powi(2)
        + a(0b001).powi(2) * a(0b110).powi(2)
        + a(0b010).powi(2) * a(0b101).powi(2)
        + a(0b100).powi(2) * a(0b011).powi(2);
    let d2 = a(0b000) * a(0b111) * a(0b011) * a(0b100)
        + a(0b000) * a(0b111) * a(0b101) * a(0b010)
        + a(0b000) * a(0b111) * a(0b110) * a(0b001)
        + a(0b011) * a(0b100) * a(0b101) * a(0b010)
        + a(0b011) * a(0b100) * a(0b110) * a(0b001)
        + a(0b101) * a(0b010) * a(0b110) * a(0b001);
    let d3 = a(0b000) * a(0b110) * a(0b101) * a(0b011) + a(0b111) * a(0b001) * a(0b010) * a(0b100);
    let tau = 4.0 * (d1 - 2.0 * d2 + 4.0 * d3).norm();
    Ok(tau.clamp(0.0, 1.0))
}

/// Eigenvalues of ρ below this are treated as exact zeros (floating-point rank noise).
const RANK_TOL: f64 = 1e-14;

/// Wootters concurrence max(0, λ₁−λ₂−λ₃−λ₄), λ the descending square roots
/// of the spectrum of ρ(σ_y⊗σ_y)ρ*(σ_y⊗σ_y).
///
/// Evaluated as the singular values of Xᵀ(σ_y⊗σ_y)X with ρ = XX†, X built
/// from the eigenvectors of ρ scaled by √p_i, so rank-deficient inputs do not
/// pick up √(noise) contributions.
pub fn bipartite_concurrence(rho: &DensityMatrix) -> Result<f64> {
    if rho.n_qubits != 2 {
        return Err(Error::domain(format!(
            "Wootters concurrence needs 2 qubits, got {}",
            rho.n_qubits
        )));
    }
    let rho = DensityMatrix::new(2, rho.data.clone())?;
    // σ_y ⊗ σ_y is real: anti-diagonal (−1, 1, 1, −1)
    let mut yy = DMatrix::zeros(4, 4);
    for (i, s) in [-1.0, 1.0, 1.0, -1.0].into_iter().enumerate() {
        yy[(i, 3 - i)] = c(s);
    }
    let eig = SymmetricEigen::new(rho.data.clone());
    let support: Vec<usize> = (0..4).filter(|&k| eig.eigenvalues[k] > RANK_TOL).collect();
    let x = DMatrix::from_fn(4, support.len(), |i, k| {
        eig.eigenvectors[(i, support[k])] * eig.eigenvalues[support[k]].sqrt()
    });
    let tau = x.transpose() * yy * &x;
    let mut lambdas: Vec<f64> = tau.singular_values().iter().copied().collect();
    lambdas.resize(4, 0.0);
    lambdas.sort_by(|a, b| b.total_cmp(a));
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0))
}

/// C(q | rest) = 2√det ρ_q for a pure state.
pub fn single_qubit_concurrence(psi: &PureQubitState, qubit: usize) -> Result<f64> {
    let rho = reduce_pure(psi, &[qubit])?;
    let m = rho.matrix();
    let det = (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).re;
    Ok(2.0 * det.max(0.0).sqrt())
}
