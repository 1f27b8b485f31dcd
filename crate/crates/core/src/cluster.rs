//! Dressed clusters of the projection-deformed model.
//!
//! Within a cluster of fixed excitation number u the deformed Hamiltonian
//! (minus the constant ω_q·u) is the symmetric tridiagonal matrix
//!
//! ```text
//! H[n][n]   = Δω·n
//! H[n-1][n] = t_n = g·√(n·f)·α(r, u − n)
//! ```
//!
//! on the basis |n⟩⊗|r, u−n⟩. Its eigen-equations, read row by row, are the
//! three-term recursion for the coefficients c_n.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::algebra::{alpha, ClusterBasis, Half};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct ClusterProblem {
    pub basis: ClusterBasis,
    /// Δω = ω₀ − ω_q.
    pub detuning: f64,
    pub g: f64,
    pub f: f64,
}

impl ClusterProblem {
    pub fn new(basis: ClusterBasis, detuning: f64, g: f64, f: f64) -> Result<Self> {
        if !f.is_finite() || f <= 0.0 {
            return Err(Error::domain(format!("deformation factor must be positive, got {f}")));
        }
        if !detuning.is_finite() || !g.is_finite() {
            return Err(Error::domain("detuning and coupling must be finite"));
        }
        Ok(ClusterProblem { basis, detuning, g, f })
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// t_n for n = 1..d−1.
    fn hopping(&self) -> Vec<f64> {
        let ClusterBasis { u, r, .. } = self.basis;
        (1..self.dim())
            .map(|n| {
                let m = u - Half::from_int(n as i32);
                let a = alpha(r, m).expect("cluster basis keeps |u - n| <= r");
                self.g * (n as f64 * self.f).sqrt() * a
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tridiagonal {
    pub diagonal: Vec<f64>,
    /// `off_diagonal[n - 1]` couples entries n−1 and n.
    pub off_diagonal: Vec<f64>,
}

impl Tridiagonal {
    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut m = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.diagonal));
        for (i, t) in self.off_diagonal.iter().enumerate() {
            m[(i, i + 1)] = *t;
            m[(i + 1, i)] = *t;
        }
        debug_assert_eq!(m.nrows(), d);
        m
    }
}

pub fn build_cluster_matrix(p: &ClusterProblem) -> Tridiagonal {
    Tridiagonal {
        diagonal: (0..p.dim()).map(|n| p.detuning * n as f64).collect(),
        off_diagonal: p.hopping(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClusterSpectrum {
    /// Ascending.
    pub splittings: Vec<f64>,
    /// Unit-norm coefficient vectors (c_0, …, c_{d−1}), first nonzero entry positive.
    pub vectors: Vec<Vec<f64>>,
}

impl ClusterSpectrum {
    /// Index of the highest split state.
    pub fn highest(&self) -> usize {
        self.splittings.len() - 1
    }
}

fn fix_sign(v: &mut [f64]) {
    let scale = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-12 * scale).copied() {
        if first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Splittings ε_k and coefficient vectors from the tridiagonal eigenproblem.
pub fn solve_cluster(p: &ClusterProblem) -> Result<ClusterSpectrum> {
    let dense = build_cluster_matrix(p).to_dense();
    let eig = SymmetricEigen::new(dense);
    let mut order: Vec<usize> = (0..p.dim()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut splittings = Vec::with_capacity(order.len());
    let mut vectors = Vec::with_capacity(order.len());
    for k in order {
        let eps = eig.eigenvalues[k];
        if !eps.is_finite() {
            return Err(Error::Numerical("non-finite cluster eigenvalue".into()));
        }
        let mut v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        fix_sign(&mut v);
        splittings.push(eps);
        vectors.push(v);
    }
    Ok(ClusterSpectrum { splittings, vectors })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Recursion {
    /// c_0 = 1 followed by the recursion output, unnormalized.
    pub coefficients: Vec<f64>,
    /// Dimensionless mismatch of the closing boundary condition; zero iff `eps` is a splitting.
    pub boundary_residual: f64,
}

impl Recursion {
    pub fn normalized(&self) -> Vec<f64> {
        let norm = self.coefficients.iter().map(|c| c * c).sum::<f64>().sqrt();
        let mut v: Vec<f64> = self.coefficients.iter().map(|c| c / norm).collect();
        fix_sign(&mut v);
        v
    }
}

/// Runs the three-term recursion upward from c_{−1} = 0, c_0 = 1:
///
/// c_n = [(ε − Δω(n−1))·c_{n−1} − t_{n−1}·c_{n−2}] / t_n,  m = u − n inside t_n.
///
/// The boundary c_{u+r+1} = 0 is tested through the last-row equation
/// (ε − Δω(d−1))·c_{d−1} − t_{d−1}·c_{d−2}, scaled by max|c_n| and by the
/// cluster energy scale.
pub fn recursion_coefficients(eps: f64, p: &ClusterProblem) -> Result<Recursion> {
    if p.g.is_nan() || p.g <= 0.0 {
        return Err(Error::domain(format!("coupling must be positive, got {}", p.g)));
    }
    let d = p.dim();
    let t = p.hopping();
    let dw = p.detuning;

    let mut c = Vec::with_capacity(d);
    c.push(1.0);
    for n in 1..d {
        let tn = t[n - 1];
        if tn == 0.0 {
            return Err(Error::DegenerateChain { index: n });
        }
        let prev2 = if n >= 2 { t[n - 2] * c[n - 2] } else { 0.0 };
        c.push(((eps - dw * (n - 1) as f64) * c[n - 1] - prev2) / tn);
    }

    let last = d - 1;
    let tail = if last >= 1 { t[last - 1] * c[last - 1] } else { 0.0 };
    let closing = (eps - dw * last as f64) * c[last] - tail;

    let c_scale = c.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let e_scale = t
        .iter()
        .fold(eps.abs().max(dw.abs() * last as f64), |a, x| a.max(x.abs()));
    let e_scale = if e_scale > 0.0 { e_scale } else { 1.0 };

    Ok(Recursion {
        boundary_residual: closing.abs() / (c_scale * e_scale),
        coefficients: c,
    })
}

/// Closed-form c₀/c₃ for the N = 3, u = r = 3/2 cluster:
///
/// c₀/c₃ = 6√6·g³·f^{3/2} / [ε(ε−Δω)(ε−2Δω) − (11ε − 6Δω)·g²·f]
pub fn ratio_c0_c3(eps: f64, detuning: f64, g: f64, f: f64) -> Result<f64> {
    let g2f = g * g * f;
    let denominator = eps * (eps - detuning) * (eps - 2.0 * detuning) - (11.0 * eps - 6.0 * detuning) * g2f;
    if denominator == 0.0 || !denominator.is_finite() {
        return Err(Error::SingularRatio { eps });
    }
    Ok(6.0 * 6f64.sqrt() * g2f * g * f.sqrt() / denominator)
}

/// E_u = ω_q·u + ε.
pub fn energy(u: Half, omega_q: f64, eps: f64) -> f64 {
    omega_q * u.value() + eps
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::cluster_basis;
    use proptest::prelude::*;

    fn h(d: i32) -> Half {
        Half::from_doubled(d)
    }

    fn problem(u2: i32, r2: i32, dw: f64, g: f64, f: f64) -> ClusterProblem {
        ClusterProblem::new(cluster_basis(h(u2), h(r2)).unwrap(), dw, g, f).unwrap()
    }

    /// Roots of ε⁴ − 20ε² + 27, the characteristic polynomial at Δω = 0, g = f = 1.
    fn resonant_roots() -> [f64; 4] {
        let s = 73f64.sqrt();
        let (lo, hi) = ((10.0 - s).sqrt(), (10.0 + s).sqrt());
        [-hi, -lo, lo, hi]
    }

    #[test]
    fn three_halves_matrix() {
        let m = build_cluster_matrix(&problem(3, 3, 7.0, 2.0, 0.25));
        assert_eq!(m.diagonal, vec![0.0, 7.0, 14.0, 21.0]);
        let want = [3f64.sqrt(), 2.0 * 2f64.sqrt(), 3.0];
        for (got, w) in m.off_diagonal.iter().zip(want) {
            assert!((got - w * 2.0 * 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn doublet_and_singlet_matrices() {
        let m = build_cluster_matrix(&problem(1, 1, 3.0, 2.0, 0.64));
        assert_eq!(m.diagonal, vec![0.0, 3.0]);
        assert!((m.off_diagonal[0] - 2.0 * 0.8).abs() < 1e-15);
        let s = build_cluster_matrix(&problem(-3, 3, 3.0, 2.0, 0.5));
        assert_eq!(s.diagonal, vec![0.0]);
        assert!(s.off_diagonal.is_empty());
    }

    #[test]
    fn resonant_three_halves_spectrum() {
        let spec = solve_cluster(&problem(3, 3, 0.0, 1.0, 1.0)).unwrap();
        for (got, want) in spec.splittings.iter().zip(resonant_roots()) {
            assert!((got - want).abs() < 1e-10, "{got} vs {want}");
        }
    }

    #[test]
    fn doublet_closed_form() {
        for (dw, g, f) in [(0.0, 1.0, 1.0), (1.3, 0.7, 0.4), (-2.0, 0.5, 0.9)] {
            let spec = solve_cluster(&problem(1, 1, dw, g, f)).unwrap();
            let root = (dw * dw + 4.0 * g * g * f).sqrt();
            assert!((spec.splittings[0] - (dw - root) / 2.0).abs() < 1e-12);
            assert!((spec.splittings[1] - (dw + root) / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn singlet_spectrum_and_recursion() {
        let p = problem(-3, 3, 5.0, 1.0, 0.7);
        let spec = solve_cluster(&p).unwrap();
        assert_eq!(spec.splittings, vec![0.0]);
        assert_eq!(spec.vectors, vec![vec![1.0]]);
        let rec = recursion_coefficients(0.0, &p).unwrap();
        assert_eq!(rec.coefficients, vec![1.0]);
        assert_eq!(rec.boundary_residual, 0.0);
    }

    #[test]
    fn recursion_residual_vanishes_only_at_splittings() {
        let p = problem(3, 3, 0.0, 1.0, 1.0);
        for eps in resonant_roots() {
            assert!(recursion_coefficients(eps, &p).unwrap().boundary_residual <= 1e-9);
        }
        assert!(recursion_coefficients(0.0, &p).unwrap().boundary_residual > 0.1);
    }

    #[test]
    fn degenerate_chain_is_flagged() {
        let mut p = problem(3, 3, 0.0, 1.0, 1.0);
        p.g = 0.0;
        assert!(recursion_coefficients(0.0, &p).is_err());
        let p = ClusterProblem {
            f: 0.0,
            ..problem(3, 3, 0.0, 1.0, 1.0)
        };
        assert!(matches!(
            recursion_coefficients(0.0, &p),
            Err(Error::DegenerateChain { index: 1 })
        ));
    }

    #[test]
    fn problem_rejects_nonpositive_f() {
        let b = cluster_basis(h(3), h(3)).unwrap();
        assert!(ClusterProblem::new(b.clone(), 0.0, 1.0, 0.0).is_err());
        assert!(ClusterProblem::new(b, 0.0, 1.0, -0.5).is_err());
    }

    #[test]
    fn resonant_ratio() {
        let eps = (10.0 + 73f64.sqrt()).sqrt();
        let r = ratio_c0_c3(eps, 0.0, 1.0, 1.0).unwrap();
        let want = 6.0 * 6f64.sqrt() / (eps * (73f64.sqrt() - 1.0));
        assert!((r - want).abs() < 1e-14);
        assert!((r - 0.4518).abs() < 1e-3);
    }

    #[test]
    fn ratio_vanishes_in_decoupled_limit() {
        // highest splitting tends to 0 when f -> 0 at negative detuning; ratio ~ f^{3/2}
        let mut last = f64::INFINITY;
        for f in [1e-2, 1e-4, 1e-6, 1e-8] {
            let p = problem(3, 3, -1.0, 1.0, f);
            let spec = solve_cluster(&p).unwrap();
            let eps = spec.splittings[0];
            let r = ratio_c0_c3(eps, -1.0, 1.0, f).unwrap().abs();
            assert!(r < last);
            last = r;
        }
        assert!(last < 1e-10);
    }

    #[test]
    fn singular_ratio() {
        assert!(matches!(
            ratio_c0_c3(0.0, 0.0, 1.0, 1.0),
            Err(Error::SingularRatio { .. })
        ));
    }

    #[test]
    fn energies() {
        assert_eq!(energy(Half::ZERO, 3.0, 0.0), 0.0);
        let wq = 2.0 * std::f64::consts::PI * 6000.0;
        assert!((energy(h(3), wq, 0.0) - 3.0 * std::f64::consts::PI * 6000.0).abs() < 1e-9);
        let spec = solve_cluster(&problem(3, 3, 0.4, 1.0, 0.8)).unwrap();
        let e: Vec<f64> = spec.splittings.iter().map(|x| energy(h(3), wq, *x)).collect();
        for i in 0..4 {
            for j in 0..4 {
                let de = e[i] - e[j];
                let deps = spec.splittings[i] - spec.splittings[j];
                assert!((de - deps).abs() < 1e-9);
            }
        }
    }

    fn r2_u2() -> impl Strategy<Value = (i32, i32)> {
        (0i32..=8).prop_flat_map(|r2| (0..=r2).prop_map(move |k| (2 * k - r2, r2)))
    }

    proptest! {
        #[test]
        fn spectrum_invariants((u2, r2) in r2_u2(), dw in -3.0f64..3.0, g in 0.1f64..2.0, f in 0.1f64..1.0) {
            let p = problem(u2, r2, dw, g, f);
            let spec = solve_cluster(&p).unwrap();
            let d = p.dim();
            prop_assert_eq!(spec.splittings.len(), d);
            prop_assert!(spec.splittings.windows(2).all(|w| w[0] <= w[1]));
            for a in 0..d {
                for b in 0..d {
                    let dot: f64 = spec.vectors[a].iter().zip(&spec.vectors[b]).map(|(x, y)| x * y).sum();
                    let want = if a == b { 1.0 } else { 0.0 };
                    prop_assert!((dot - want).abs() < 1e-10);
                }
            }
            let trace: f64 = spec.splittings.iter().sum();
            prop_assert!((trace - dw * (d * (d - 1)) as f64 / 2.0).abs() < 1e-9);
        }

        #[test]
        fn recursion_reproduces_eigenvectors((u2, r2) in r2_u2(), dw in -2.0f64..2.0, g in 0.3f64..2.0, f in 0.2f64..1.0) {
            let p = problem(u2, r2, dw, g, f);
            let spec = solve_cluster(&p).unwrap();
            for (k, eps) in spec.splittings.iter().enumerate() {
                let rec = recursion_coefficients(*eps, &p).unwrap();
                prop_assert!(rec.boundary_residual <= 1e-9, "residual {}", rec.boundary_residual);
                for (a, b) in rec.normalized().iter().zip(&spec.vectors[k]) {
                    prop_assert!((a - b).abs() < 1e-9);
                }
            }
            for w in spec.splittings.windows(2) {
                let mid = 0.5 * (w[0] + w[1]);
                prop_assert!(recursion_coefficients(mid, &p).unwrap().boundary_residual > 1e-6);
            }
        }

        #[test]
        fn resonant_spectrum_is_mirror_symmetric(r2 in (0i32..=8).prop_filter("odd", |r| r % 2 == 1), g in 0.1f64..2.0, f in 0.1f64..1.0) {
            let spec = solve_cluster(&problem(r2, r2, 0.0, g, f)).unwrap();
            let d = spec.splittings.len();
            for k in 0..d {
                prop_assert!((spec.splittings[k] + spec.splittings[d - 1 - k]).abs() < 1e-10);
            }
        }

        #[test]
        fn only_g2f_enters((u2, r2) in r2_u2(), dw in -2.0f64..2.0, g in 0.1f64..2.0, f in 0.1f64..1.0, s in 0.2f64..5.0) {
            let a = solve_cluster(&problem(u2, r2, dw, g, f)).unwrap();
            let b = solve_cluster(&problem(u2, r2, dw, g / s.sqrt(), f * s)).unwrap();
            for (x, y) in a.splittings.iter().zip(&b.splittings) {
                prop_assert!((x - y).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn closed_form_ratio_matches_eigenvectors_on_grid() {
        let two_pi = 2.0 * std::f64::consts::PI;
        let g = 54.0 * two_pi;
        for i in 0..10 {
            let dw = (-200.0 + 400.0 * i as f64 / 9.0) * two_pi;
            for j in 0..10 {
                let f = 0.1 + 0.9 * j as f64 / 9.0;
                let p = problem(3, 3, dw, g, f);
                let spec = solve_cluster(&p).unwrap();
                for (k, eps) in spec.splittings.iter().enumerate() {
                    let v = &spec.vectors[k];
                    let numeric = v[0] / v[3];
                    let closed = ratio_c0_c3(*eps, dw, g, f).unwrap();
                    assert!(
                        ((closed - numeric) / numeric).abs() < 1e-9,
                        "dw {dw} f {f} k {k}: {closed} vs {numeric}"
                    );
                }
            }
        }
    }
}
