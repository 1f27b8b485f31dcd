#![allow(dead_code)]

use num_complex::Complex64;
use qlsim_core::entanglement::PureQubitState;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

type Mat2 = [[Complex64; 2]; 2];

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Haar-random pure state on `n` qubits.
pub fn random_state(rng: &mut ChaCha8Rng, n: usize) -> PureQubitState {
    let amps = (0..1usize << n)
        .map(|_| Complex64::new(gauss(rng), gauss(rng)))
        .collect();
    PureQubitState::normalized(n, amps).unwrap()
}

/// Haar-random element of SU(2) from a uniformly distributed unit quaternion.
pub fn random_su2(rng: &mut ChaCha8Rng) -> Mat2 {
    let q: [f64; 4] = std::array::from_fn(|_| gauss(rng));
    let norm = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    let a = Complex64::new(q[0], q[1]) / norm;
    let b = Complex64::new(q[2], q[3]) / norm;
    [[a, -b.conj()], [b, a.conj()]]
}

/// Applies `u` to `qubit` (qubit 0 is the most significant bit).
pub fn apply_local(psi: &PureQubitState, qubit: usize, u: &Mat2) -> PureQubitState {
    let n = psi.n_qubits();
    let bit = 1usize << (n - 1 - qubit);
    let a = psi.amplitudes();
    let mut out = a.to_vec();
    for i in (0..a.len()).filter(|i| i & bit == 0) {
        let (lo, hi) = (a[i], a[i | bit]);
        out[i] = u[0][0] * lo + u[0][1] * hi;
        out[i | bit] = u[1][0] * lo + u[1][1] * hi;
    }
    PureQubitState::new(n, out).unwrap()
}

/// Random local unitary on every qubit.
pub fn random_local_unitary(rng: &mut ChaCha8Rng, psi: &PureQubitState) -> PureQubitState {
    (0..psi.n_qubits()).fold(psi.clone(), |s, q| {
        let u = random_su2(rng);
        apply_local(&s, q, &u)
    })
}

/// Relabels qubits so that new qubit `k` is old qubit `perm[k]`.
pub fn permute_qubits(psi: &PureQubitState, perm: &[usize]) -> PureQubitState {
    let n = psi.n_qubits();
    let a = psi.amplitudes();
    let out = (0..a.len())
        .map(|new| {
            let old = (0..n).fold(0usize, |acc, k| {
                let b = (new >> (n - 1 - k)) & 1;
                acc | (b << (n - 1 - perm[k]))
            });
            a[old]
        })
        .collect();
    PureQubitState::new(n, out).unwrap()
}

pub fn random_perm(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        p.swap(i, rng.random_range(0..=i));
    }
    p
}

pub fn product_state(angles: &[(f64, f64)]) -> PureQubitState {
    let n = angles.len();
    let amps = (0..1usize << n)
        .map(|i| {
            angles
                .iter()
                .enumerate()
                .fold(Complex64::new(1.0, 0.0), |acc, (q, (theta, phi))| {
                    if (i >> (n - 1 - q)) & 1 == 1 {
                        acc * Complex64::from_polar((theta / 2.0).sin(), *phi)
                    } else {
                        acc * (theta / 2.0).cos()
                    }
                })
        })
        .collect();
    PureQubitState::new(n, amps).unwrap()
}
