//! Quasi-lattice qubit chains coupled to a single resonator mode.
//!
//! The chain's geometry sets inhomogeneous couplings η_j; projecting the
//! resulting spin algebra back onto SU(2) leaves a single deformation factor
//! f, and the dressed spectrum then splits into independent tridiagonal
//! clusters of fixed excitation number. The crate builds those clusters,
//! checks them against brute-force diagonalization of the full model, and
//! measures the tripartite entanglement of the dressed qubit states.

pub mod algebra;
pub mod cluster;
pub mod entanglement;
pub mod error;
pub mod experiments;
pub mod lattice;
pub mod oracle;

pub use algebra::{alpha, cluster_basis, dicke_amplitudes, ClusterBasis, ClusterState, Half, SpinQuantum};
pub use cluster::{
    build_cluster_matrix, energy, ratio_c0_c3, recursion_coefficients, solve_cluster, ClusterProblem, ClusterSpectrum,
    Recursion, Tridiagonal,
};
pub use error::{Error, Result};
pub use lattice::{
    coupling_profile, deformation_closed_form, deformation_exact_gaussian, deformation_sample, dislocation_draw,
    sample_dislocations, CouplingProfile, DeformationFactor, DeformationMethod, LatticeSpec,
};

/// Version string embedded in every output sidecar.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Converts an ordinary frequency in MHz to angular frequency (rad/µs).
pub fn angular(mhz: f64) -> f64 {
    2.0 * std::f64::consts::PI * mhz
}

/// Inverse of [`angular`].
pub fn ordinary(angular: f64) -> f64 {
    angular / (2.0 * std::f64::consts::PI)
}
