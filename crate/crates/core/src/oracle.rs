//! Brute-force reference: the full rotating-wave Hamiltonian
//! H = ω_q S_z + ω₀ a†a + Σ_j g η_j (σ_{j,+} a + σ_{j,−} a†)
//! on a truncated Fock space tensored with N qubits, diagonalized block by
//! block in the conserved excitation number.
//!
//! Product basis index: `n * 2^N + s`, where `s` is the qubit bit string
//! (see [`crate::algebra`] for the bit convention) and σ_z = ±1/2.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::algebra::{cluster_basis, dicke_amplitudes, Half};
use crate::cluster::{solve_cluster, ClusterProblem};
use crate::error::{Error, Result};
use crate::lattice::{deformation_sample, CouplingProfile, LatticeSpec};

/// Photon levels kept above the highest one a cluster needs.
pub const TRUNCATION_MARGIN: usize = 2;

#[derive(Clone, Debug, PartialEq)]
pub struct FullModel {
    pub spec: LatticeSpec,
    pub profile: CouplingProfile,
    pub omega_q: f64,
    pub omega_0: f64,
    /// Fock states 0..=n_max are kept.
    pub n_max: usize,
}

impl FullModel {
    pub fn new(spec: LatticeSpec, omega_q: f64, omega_0: f64, n_max: usize) -> Result<Self> {
        if spec.n_qubits > 12 {
            return Err(Error::domain(format!(
                "{} qubits is beyond brute-force range",
                spec.n_qubits
            )));
        }
        let profile = spec.profile();
        Ok(FullModel {
            spec,
            profile,
            omega_q,
            omega_0,
            n_max,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.spec.n_qubits
    }

    pub fn dim(&self) -> usize {
        (self.n_max + 1) << self.n_qubits()
    }

    pub fn detuning(&self) -> f64 {
        self.omega_0 - self.omega_q
    }

    /// Total spin of the symmetric sector, N/2.
    pub fn r(&self) -> Half {
        Half::from_doubled(self.n_qubits() as i32)
    }

    fn split(&self, index: usize) -> (usize, usize) {
        (index >> self.n_qubits(), index & ((1 << self.n_qubits()) - 1))
    }

    /// Excitation number u = n + m of a product-basis state.
    pub fn excitation(&self, index: usize) -> Half {
        let (n, s) = self.split(index);
        let m = Half::from_doubled(2 * s.count_ones() as i32 - self.n_qubits() as i32);
        Half::from_int(n as i32) + m
    }
}

pub fn build_full_hamiltonian(m: &FullModel) -> DMatrix<f64> {
    let nq = m.n_qubits();
    let spins = 1usize << nq;
    let dim = m.dim();
    let g = m.spec.g_max;
    let mut h = DMatrix::zeros(dim, dim);

    for n in 0..=m.n_max {
        for s in 0..spins {
            let i = n * spins + s;
            let mz = f64::from(2 * s.count_ones() as i32 - nq as i32) / 2.0;
            h[(i, i)] = m.omega_0 * n as f64 + m.omega_q * mz;
            if n == 0 {
                continue;
            }
            // σ_{j,+} a : |n, s⟩ → √n |n−1, s with qubit j raised⟩
            for (j, eta) in m.profile.eta.iter().enumerate() {
                let bit = 1 << (nq - 1 - j);
                if s & bit != 0 {
                    continue;
                }
                let k = (n - 1) * spins + (s | bit);
                let amp = g * eta * (n as f64).sqrt();
                h[(k, i)] = amp;
                h[(i, k)] = amp;
            }
        }
    }
    h
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExcitationBlock {
    pub u: Half,
    /// Product-basis indices, ascending.
    pub indices: Vec<usize>,
}

/// Partition of the truncated basis by excitation number, sorted by u.
pub fn excitation_blocks(m: &FullModel) -> Vec<ExcitationBlock> {
    let mut blocks: std::collections::BTreeMap<Half, Vec<usize>> = Default::default();
    for i in 0..m.dim() {
        blocks.entry(m.excitation(i)).or_default().push(i);
    }
    blocks
        .into_iter()
        .map(|(u, indices)| ExcitationBlock { u, indices })
        .collect()
}

/// Largest |H_ij| connecting different excitation blocks.
pub fn block_leakage(m: &FullModel, h: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.dim() {
        for j in 0..m.dim() {
            if m.excitation(i) != m.excitation(j) {
                worst = worst.max(h[(i, j)].abs());
            }
        }
    }
    worst
}

/// max |[H, a†a + Σ_j σ_{j,+}σ_{j,−}]|, zero under the rotating-wave coupling.
pub fn excitation_commutator_norm(m: &FullModel, h: &DMatrix<f64>) -> f64 {
    let number = |i: usize| {
        let (n, s) = m.split(i);
        (n + s.count_ones() as usize) as f64
    };
    let mut worst = 0.0f64;
    for i in 0..m.dim() {
        for j in 0..m.dim() {
            worst = worst.max((h[(i, j)] * (number(j) - number(i))).abs());
        }
    }
    worst
}

fn block_matrix(h: &DMatrix<f64>, indices: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(indices.len(), indices.len(), |a, b| h[(indices[a], indices[b])])
}

/// All eigenvalues of the u-block, ascending.
pub fn exact_block_spectrum(m: &FullModel, u: Half) -> Result<Vec<f64>> {
    let block = excitation_blocks(m)
        .into_iter()
        .find(|b| b.u == u)
        .ok_or_else(|| Error::domain(format!("no basis state carries u = {u}")))?;
    let h = build_full_hamiltonian(m);
    let mut e: Vec<f64> = SymmetricEigen::new(block_matrix(&h, &block.indices))
        .eigenvalues
        .iter()
        .copied()
        .collect();
    e.sort_by(f64::total_cmp);
    Ok(e)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeviationReport {
    pub u: Half,
    /// Exact eigenvalues with dominant weight in the symmetric sector, ascending.
    pub exact: Vec<f64>,
    /// Symmetric-sector weight of each selected exact eigenvector.
    pub symmetric_weight: Vec<f64>,
    /// ω_q u + ε_k from the deformed cluster, ascending.
    pub pd: Vec<f64>,
    pub max_abs_deviation: f64,
    /// `max_abs_deviation` over the largest |energy| in the comparison.
    pub max_rel_deviation: f64,
}

/// Compares the deformed-cluster energies of block `u` with the exact block.
///
/// The deformation factor used is the realized f̃ of the model's profile.
pub fn pd_vs_exact_report(m: &FullModel, u: Half) -> Result<DeviationReport> {
    let r = m.r();
    let basis = cluster_basis(u, r)?;
    let top_photon = basis.dim() - 1;
    let required = top_photon + TRUNCATION_MARGIN;
    if m.n_max < required {
        return Err(Error::Truncation {
            u,
            n_max: m.n_max,
            required,
        });
    }

    let nq = m.n_qubits();
    let spins = 1usize << nq;
    let block = excitation_blocks(m)
        .into_iter()
        .find(|b| b.u == u)
        .expect("a cluster within truncation has basis states");
    let h = build_full_hamiltonian(m);
    let eig = SymmetricEigen::new(block_matrix(&h, &block.indices));

    // symmetric-sector projector onto |n⟩⊗|r, u−n⟩ for each cluster member
    let dicke: Vec<(usize, Vec<f64>)> = basis
        .states
        .iter()
        .map(|st| {
            let amps = dicke_amplitudes(r, st.m, nq).expect("r = N/2 by construction");
            (st.n, amps.iter().map(|a| a.re).collect())
        })
        .collect();
    let position: std::collections::HashMap<usize, usize> =
        block.indices.iter().enumerate().map(|(a, &i)| (i, a)).collect();

    let mut weighted: Vec<(f64, f64)> = (0..block.indices.len())
        .map(|k| {
            let v = eig.eigenvectors.column(k);
            let w: f64 = dicke
                .iter()
                .map(|(n, amps)| {
                    let overlap: f64 = amps
                        .iter()
                        .enumerate()
                        .filter(|(_, a)| **a != 0.0)
                        .map(|(s, a)| a * v[position[&(n * spins + s)]])
                        .sum();
                    overlap * overlap
                })
                .sum();
            (w, eig.eigenvalues[k])
        })
        .collect();
    weighted.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.total_cmp(&b.1)));
    weighted.truncate(basis.dim());
    weighted.sort_by(|a, b| a.1.total_cmp(&b.1));

    let f = deformation_sample(&m.profile).value;
    let problem = ClusterProblem::new(basis, m.detuning(), m.spec.g_max, f)?;
    let pd: Vec<f64> = solve_cluster(&problem)?
        .splittings
        .iter()
        .map(|eps| m.omega_q * u.value() + eps)
        .collect();

    let exact: Vec<f64> = weighted.iter().map(|w| w.1).collect();
    let max_abs = exact.iter().zip(&pd).fold(0.0f64, |a, (e, p)| a.max((e - p).abs()));
    let scale = exact.iter().chain(&pd).fold(0.0f64, |a, x| a.max(x.abs()));
    let max_rel = if scale > 0.0 { max_abs / scale } else { 0.0 };
    Ok(DeviationReport {
        u,
        exact,
        symmetric_weight: weighted.iter().map(|w| w.0).collect(),
        pd,
        max_abs_deviation: max_abs,
        max_rel_deviation: max_rel,
    })
}
