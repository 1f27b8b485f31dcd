//! Python bindings for `qlsim_core`.
//!
//! Frequencies follow the core conventions: the cluster, oracle and lattice
//! functions take angular units of the caller's choosing, while the sweep
//! functions take ordinary MHz. Complex amplitudes are passed as Python
//! `complex` lists in computational-basis order (qubit 0 is the most
//! significant bit, set bit = spin up).

#[pyo3::pymodule]
mod qlsim {
    use nalgebra::DMatrix;
    use num_complex::Complex64;
    use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
    use pyo3::prelude::*;

    use qlsim_core::entanglement::{self as ent, DensityMatrix, PhotonPolicy, PureQubitState};
    use qlsim_core::experiments::{self as exp, EpsilonSelector, FSource};
    use qlsim_core::oracle::{self, FullModel};
    use qlsim_core::{cluster, lattice, Error, Half};

    #[pymodule_export]
    #[allow(non_upper_case_globals)]
    const __version__: &str = qlsim_core::VERSION;

    fn py_err(e: Error) -> PyErr {
        match e {
            Error::Domain(_) | Error::Unsupported(_) | Error::Truncation { .. } => PyValueError::new_err(e.to_string()),
            Error::Io(_) => PyOSError::new_err(e.to_string()),
            _ => PyRuntimeError::new_err(e.to_string()),
        }
    }

    trait IntoPy<T> {
        fn py(self) -> PyResult<T>;
    }

    impl<T> IntoPy<T> for qlsim_core::Result<T> {
        fn py(self) -> PyResult<T> {
            self.map_err(py_err)
        }
    }

    /// Accepts `"3/2"`, `1.5` or `2`.
    fn half(value: &Bound<'_, PyAny>) -> PyResult<Half> {
        if let Ok(s) = value.extract::<String>() {
            return s.parse().py();
        }
        Half::from_f64(value.extract::<f64>()?).py()
    }

    fn pure(n_qubits: usize, amplitudes: Vec<Complex64>) -> PyResult<PureQubitState> {
        PureQubitState::new(n_qubits, amplitudes).py()
    }

    fn qubits_for(len: usize) -> PyResult<usize> {
        if len.is_power_of_two() && len > 1 {
            Ok(len.trailing_zeros() as usize)
        } else {
            Err(PyValueError::new_err(format!(
                "{len} amplitudes is not a qubit register"
            )))
        }
    }

    fn policy(name: &str) -> PyResult<PhotonPolicy> {
        name.parse().py()
    }

    // ---- lattice ----

    /// Lattice-averaged deformation factor in the published closed form.
    #[pyfunction]
    #[pyo3(signature = (n_qubits, ell, sigma=0.0))]
    fn deformation_closed_form(n_qubits: usize, ell: f64, sigma: f64) -> PyResult<f64> {
        Ok(lattice::deformation_closed_form(n_qubits, ell, sigma).py()?.value)
    }

    /// Exact Gaussian expectation of the deformation factor.
    #[pyfunction]
    #[pyo3(signature = (n_qubits, ell, sigma=0.0))]
    fn deformation_exact_gaussian(n_qubits: usize, ell: f64, sigma: f64) -> PyResult<f64> {
        Ok(lattice::deformation_exact_gaussian(n_qubits, ell, sigma).py()?.value)
    }

    /// Normalized couplings η_j for the given dislocations (zero when omitted).
    #[pyfunction]
    #[pyo3(signature = (n_qubits, ell, dislocations=None))]
    fn coupling_profile(n_qubits: usize, ell: f64, dislocations: Option<Vec<f64>>) -> PyResult<Vec<f64>> {
        let spec = lattice::LatticeSpec::new(n_qubits, ell, 0.0, 1.0).py()?;
        let x = dislocations.unwrap_or_else(|| vec![0.0; n_qubits]);
        Ok(lattice::coupling_profile(&spec, &x).py()?.eta)
    }

    /// Realized deformation factor f̃ = Σ η_j² / N of one configuration.
    #[pyfunction]
    #[pyo3(signature = (n_qubits, ell, dislocations=None))]
    fn deformation_sample(n_qubits: usize, ell: f64, dislocations: Option<Vec<f64>>) -> PyResult<f64> {
        let eta = coupling_profile(n_qubits, ell, dislocations)?;
        Ok(lattice::deformation_sample(&lattice::CouplingProfile { eta }).value)
    }

    /// Dislocation draw `index` of the stream seeded by `seed`.
    #[pyfunction]
    fn dislocation_draw(n_qubits: usize, sigma: f64, seed: u64, index: u64) -> PyResult<Vec<f64>> {
        lattice::dislocation_draw(n_qubits, sigma, seed, index).py()
    }

    // ---- cluster ----

    #[pyclass(frozen, get_all)]
    struct ClusterSpectrum {
        splittings: Vec<f64>,
        vectors: Vec<Vec<f64>>,
        photon_numbers: Vec<usize>,
    }

    #[pymethods]
    impl ClusterSpectrum {
        fn __repr__(&self) -> String {
            format!("ClusterSpectrum(splittings={:?})", self.splittings)
        }
    }

    fn problem(
        n_qubits: usize,
        u: &Bound<'_, PyAny>,
        detuning: f64,
        g: f64,
        f: f64,
    ) -> PyResult<cluster::ClusterProblem> {
        let basis = qlsim_core::cluster_basis(half(u)?, Half::from_doubled(n_qubits as i32)).py()?;
        cluster::ClusterProblem::new(basis, detuning, g, f).py()
    }

    /// Splittings ε_k (ascending) and unit coefficient vectors of cluster u.
    #[pyfunction]
    fn solve_cluster(
        n_qubits: usize,
        u: &Bound<'_, PyAny>,
        detuning: f64,
        g: f64,
        f: f64,
    ) -> PyResult<ClusterSpectrum> {
        let p = problem(n_qubits, u, detuning, g, f)?;
        let s = cluster::solve_cluster(&p).py()?;
        Ok(ClusterSpectrum {
            splittings: s.splittings,
            vectors: s.vectors,
            photon_numbers: p.basis.states.iter().map(|st| st.n).collect(),
        })
    }

    /// Coefficients from the three-term recursion at trial ε, and the boundary residual.
    #[pyfunction]
    fn recursion_coefficients(
        eps: f64,
        n_qubits: usize,
        u: &Bound<'_, PyAny>,
        detuning: f64,
        g: f64,
        f: f64,
    ) -> PyResult<(Vec<f64>, f64)> {
        let r = cluster::recursion_coefficients(eps, &problem(n_qubits, u, detuning, g, f)?).py()?;
        Ok((r.normalized(), r.boundary_residual))
    }

    /// Closed-form c₀/c₃ of the three-qubit u = 3/2 cluster.
    #[pyfunction]
    fn ratio_c0_c3(eps: f64, detuning: f64, g: f64, f: f64) -> PyResult<f64> {
        cluster::ratio_c0_c3(eps, detuning, g, f).py()
    }

    // ---- oracle ----

    #[pyclass(frozen, get_all)]
    struct DeviationReport {
        u: String,
        exact: Vec<f64>,
        symmetric_weight: Vec<f64>,
        pd: Vec<f64>,
        max_abs_deviation: f64,
        max_rel_deviation: f64,
    }

    fn model(
        n_qubits: usize,
        ell: f64,
        g: f64,
        omega_q: f64,
        omega_0: f64,
        n_max: usize,
        dislocations: Option<Vec<f64>>,
    ) -> PyResult<FullModel> {
        let mut spec = lattice::LatticeSpec::new(n_qubits, ell, 0.0, g).py()?;
        if let Some(x) = dislocations {
            spec = spec.with_dislocations(x).py()?;
        }
        FullModel::new(spec, omega_q, omega_0, n_max).py()
    }

    /// All eigenvalues of the brute-force u-block, ascending.
    #[pyfunction]
    #[pyo3(signature = (n_qubits, u, ell, g, omega_q, omega_0, n_max=10, dislocations=None))]
    #[allow(clippy::too_many_arguments)]
    fn exact_block_spectrum(
        n_qubits: usize,
        u: &Bound<'_, PyAny>,
        ell: f64,
        g: f64,
        omega_q: f64,
        omega_0: f64,
        n_max: usize,
        dislocations: Option<Vec<f64>>,
    ) -> PyResult<Vec<f64>> {
        let m = model(n_qubits, ell, g, omega_q, omega_0, n_max, dislocations)?;
        oracle::exact_block_spectrum(&m, half(u)?).py()
    }

    /// Brute-force energies of block u against the deformed cluster.
    #[pyfunction]
    #[pyo3(signature = (n_qubits, u, ell, g, omega_q, omega_0, n_max=10, dislocations=None))]
    #[allow(clippy::too_many_arguments)]
    fn pd_vs_exact(
        n_qubits: usize,
        u: &Bound<'_, PyAny>,
        ell: f64,
        g: f64,
        omega_q: f64,
        omega_0: f64,
        n_max: usize,
        dislocations: Option<Vec<f64>>,
    ) -> PyResult<DeviationReport> {
        let m = model(n_qubits, ell, g, omega_q, omega_0, n_max, dislocations)?;
        let r = oracle::pd_vs_exact_report(&m, half(u)?).py()?;
        Ok(DeviationReport {
            u: r.u.to_string(),
            exact: r.exact,
            symmetric_weight: r.symmetric_weight,
            pd: r.pd,
            max_abs_deviation: r.max_abs_deviation,
            max_rel_deviation: r.max_rel_deviation,
        })
    }

    // ---- entanglement ----

    #[pyfunction]
    fn ghz_state() -> Vec<Complex64> {
        ent::ghz_state().amplitudes().to_vec()
    }

    #[pyfunction]
    fn w_state() -> Vec<Complex64> {
        ent::w_state().amplitudes().to_vec()
    }

    /// Three-tangle of a normalized three-qubit pure state.
    #[pyfunction]
    fn three_tangle(amplitudes: Vec<Complex64>) -> PyResult<f64> {
        ent::three_tangle(&pure(3, amplitudes)?).py()
    }

    /// Multipartite concurrence of a normalized pure state.
    #[pyfunction]
    fn multipartite_concurrence(amplitudes: Vec<Complex64>) -> PyResult<f64> {
        let n = qubits_for(amplitudes.len())?;
        ent::multipartite_concurrence(&pure(n, amplitudes)?).py()
    }

    /// Wootters concurrence of a two-qubit density matrix given as rows.
    #[pyfunction]
    fn bipartite_concurrence(rho: Vec<Vec<Complex64>>) -> PyResult<f64> {
        let d = rho.len();
        if rho.iter().any(|row| row.len() != d) {
            return Err(PyValueError::new_err("density matrix must be square"));
        }
        let m = DMatrix::from_fn(d, d, |i, j| rho[i][j]);
        ent::bipartite_concurrence(&DensityMatrix::new(qubits_for(d)?, m).py()?).py()
    }

    /// Reduced density matrix of the kept qubits of a pure state.
    #[pyfunction]
    fn reduce_pure(amplitudes: Vec<Complex64>, keep: Vec<usize>) -> PyResult<Vec<Vec<Complex64>>> {
        let n = qubits_for(amplitudes.len())?;
        let rho = ent::reduce_pure(&pure(n, amplitudes)?, &keep).py()?;
        let m = rho.matrix();
        Ok((0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect())
    }

    /// Qubit state carried by the top (u = r) cluster vector.
    ///
    /// Returns amplitudes for `project_qubit_component` and density-matrix
    /// rows for `trace_photon`.
    #[pyfunction]
    #[pyo3(signature = (coefficients, n_qubits, photon_policy="project_qubit_component"))]
    fn cluster_qubit_state<'py>(
        py: Python<'py>,
        coefficients: Vec<f64>,
        n_qubits: usize,
        photon_policy: &str,
    ) -> PyResult<Bound<'py, PyAny>> {
        match ent::top_cluster_state(&coefficients, n_qubits, policy(photon_policy)?).py()? {
            ent::QubitState::Pure(psi) => psi.amplitudes().to_vec().into_pyobject(py).map(|o| o.into_any()),
            ent::QubitState::Mixed(rho) => {
                let m = rho.matrix();
                let rows: Vec<Vec<Complex64>> = (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect();
                rows.into_pyobject(py).map(|o| o.into_any())
            }
        }
    }

    // ---- experiments ----

    /// Sweep parameters; frequencies are ordinary MHz.
    #[pyclass(from_py_object, get_all, set_all)]
    #[derive(Clone)]
    struct SweepSpec {
        n_qubits: usize,
        ell_grid: Vec<f64>,
        detunings_mhz: Vec<f64>,
        sigma: f64,
        mc_samples: usize,
        seed: u64,
        g_mhz: f64,
        omega_q_mhz: f64,
        photon_policy: String,
        which_epsilon: String,
        f_source: String,
    }

    #[pymethods]
    impl SweepSpec {
        #[new]
        #[pyo3(signature = (
            detunings_mhz,
            ell_grid=None,
            sigma=0.0,
            mc_samples=1,
            seed=0,
            g_mhz=54.0,
            omega_q_mhz=6440.0,
            n_qubits=3,
            photon_policy="project_qubit_component".to_string(),
            which_epsilon="highest".to_string(),
            f_source="per_sample".to_string(),
        ))]
        #[allow(clippy::too_many_arguments)]
        fn new(
            detunings_mhz: Vec<f64>,
            ell_grid: Option<Vec<f64>>,
            sigma: f64,
            mc_samples: usize,
            seed: u64,
            g_mhz: f64,
            omega_q_mhz: f64,
            n_qubits: usize,
            photon_policy: String,
            which_epsilon: String,
            f_source: String,
        ) -> PyResult<Self> {
            let spec = SweepSpec {
                n_qubits,
                ell_grid: ell_grid.unwrap_or_else(exp::default_ell_grid),
                detunings_mhz,
                sigma,
                mc_samples,
                seed,
                g_mhz,
                omega_q_mhz,
                photon_policy,
                which_epsilon,
                f_source,
            };
            spec.to_core()?.validate().py()?;
            Ok(spec)
        }

        fn __repr__(&self) -> String {
            format!(
                "SweepSpec(detunings_mhz={:?}, points={}, sigma={}, mc_samples={}, seed={})",
                self.detunings_mhz,
                self.ell_grid.len(),
                self.sigma,
                self.mc_samples,
                self.seed
            )
        }
    }

    impl SweepSpec {
        fn to_core(&self) -> PyResult<exp::SweepSpec> {
            let which_epsilon = match self.which_epsilon.as_str() {
                "highest" => EpsilonSelector::Highest,
                "lowest" => EpsilonSelector::Lowest,
                other => EpsilonSelector::Index(
                    other
                        .parse()
                        .map_err(|_| PyValueError::new_err(format!("bad which_epsilon '{other}'")))?,
                ),
            };
            let f_source = match self.f_source.as_str() {
                "per_sample" => FSource::PerSample,
                "closed_form_mean" => FSource::ClosedFormMean,
                other => return Err(PyValueError::new_err(format!("bad f_source '{other}'"))),
            };
            Ok(exp::SweepSpec {
                n_qubits: self.n_qubits,
                ell_grid: self.ell_grid.clone(),
                detunings_mhz: self.detunings_mhz.clone(),
                sigma: self.sigma,
                mc_samples: self.mc_samples,
                seed: self.seed,
                g_mhz: self.g_mhz,
                omega_q_mhz: self.omega_q_mhz,
                photon_policy: policy(&self.photon_policy)?,
                which_epsilon,
                f_source,
            })
        }
    }

    #[pyclass(frozen, get_all, from_py_object)]
    #[derive(Clone)]
    struct SweepRecord {
        ell: f64,
        detuning_mhz: f64,
        sigma: f64,
        f_mean: f64,
        epsilon_mhz: Vec<f64>,
        c0: f64,
        c3: f64,
        concurrence: f64,
        three_tangle: f64,
        pair_concurrence_traced: f64,
        f_stderr: f64,
        c0_stderr: f64,
        c3_stderr: f64,
        concurrence_stderr: f64,
        three_tangle_stderr: f64,
        eq5_residual: f64,
        /// `None` for successful rows, otherwise the failure reason.
        error: Option<String>,
    }

    #[pymethods]
    impl SweepRecord {
        fn __repr__(&self) -> String {
            format!(
                "SweepRecord(ell={}, detuning_mhz={}, c0={:.6}, three_tangle={:.6e})",
                self.ell, self.detuning_mhz, self.c0, self.three_tangle
            )
        }
    }

    impl SweepRecord {
        fn from_core(r: exp::SweepRecord) -> Self {
            let error = match r.status {
                exp::RowStatus::Ok => None,
                exp::RowStatus::Failed(why) => Some(why),
            };
            SweepRecord {
                ell: r.ell,
                detuning_mhz: r.detuning_mhz,
                sigma: r.sigma,
                f_mean: r.f_mean,
                epsilon_mhz: r.epsilon_mhz,
                c0: r.c0,
                c3: r.c3,
                concurrence: r.concurrence,
                three_tangle: r.three_tangle,
                pair_concurrence_traced: r.pair_concurrence_traced,
                f_stderr: r.f_stderr,
                c0_stderr: r.c0_stderr,
                c3_stderr: r.c3_stderr,
                concurrence_stderr: r.concurrence_stderr,
                three_tangle_stderr: r.three_tangle_stderr,
                eq5_residual: r.eq5_residual,
                error,
            }
        }

        fn to_core(&self) -> exp::SweepRecord {
            exp::SweepRecord {
                ell: self.ell,
                detuning_mhz: self.detuning_mhz,
                sigma: self.sigma,
                f_mean: self.f_mean,
                epsilon_mhz: self.epsilon_mhz.clone(),
                c0: self.c0,
                c3: self.c3,
                concurrence: self.concurrence,
                three_tangle: self.three_tangle,
                pair_concurrence_traced: self.pair_concurrence_traced,
                f_stderr: self.f_stderr,
                c0_stderr: self.c0_stderr,
                c3_stderr: self.c3_stderr,
                concurrence_stderr: self.concurrence_stderr,
                three_tangle_stderr: self.three_tangle_stderr,
                eq5_residual: self.eq5_residual,
                status: match &self.error {
                    None => exp::RowStatus::Ok,
                    Some(why) => exp::RowStatus::Failed(why.clone()),
                },
            }
        }
    }

    fn run(
        py: Python<'_>,
        spec: &SweepSpec,
        sweep: fn(&exp::SweepSpec) -> qlsim_core::Result<Vec<exp::SweepRecord>>,
    ) -> PyResult<Vec<SweepRecord>> {
        let core = spec.to_core()?;
        let rows = py.detach(|| sweep(&core)).py()?;
        Ok(rows.into_iter().map(SweepRecord::from_core).collect())
    }

    /// c₀ and c₃ of the selected split state over the grid (closed-form f).
    #[pyfunction]
    fn sweep_coefficients(py: Python<'_>, spec: &SweepSpec) -> PyResult<Vec<SweepRecord>> {
        run(py, spec, exp::sweep_coefficients)
    }

    /// Tripartite concurrence and 3-tangle over the grid, disorder averaged.
    #[pyfunction]
    fn sweep_entanglement(py: Python<'_>, spec: &SweepSpec) -> PyResult<Vec<SweepRecord>> {
        run(py, spec, exp::sweep_entanglement)
    }

    /// CSV text of a sweep table, identical to the command-line output.
    #[pyfunction]
    fn sweep_csv(records: Vec<SweepRecord>) -> PyResult<String> {
        let core: Vec<exp::SweepRecord> = records.iter().map(SweepRecord::to_core).collect();
        let mut buf = Vec::new();
        exp::write_sweep_csv(&core, &mut buf).map_err(|e| PyOSError::new_err(e.to_string()))?;
        String::from_utf8(buf).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    #[pyclass(frozen, get_all)]
    struct EnhancementReport {
        peak_ell: f64,
        peak_tau: f64,
        endpoint_tau: f64,
        fold_increase: f64,
        infinite: bool,
    }

    /// Peak-to-endpoint 3-tangle enhancement of one detuning series.
    #[pyfunction]
    fn enhancement_report(records: Vec<SweepRecord>) -> PyResult<EnhancementReport> {
        let core: Vec<exp::SweepRecord> = records.iter().map(SweepRecord::to_core).collect();
        let r = exp::enhancement_report(&core).py()?;
        Ok(EnhancementReport {
            peak_ell: r.peak_ell,
            peak_tau: r.peak_tau,
            endpoint_tau: r.endpoint_tau,
            fold_increase: r.fold_increase,
            infinite: r.infinite,
        })
    }

    #[pyclass(frozen, get_all)]
    struct DeformationStudy {
        n_qubits: usize,
        ell: f64,
        sigma: f64,
        samples: usize,
        seed: u64,
        mean: f64,
        stderr: f64,
        closed_form: f64,
        exact_gaussian: f64,
        discrepancy: f64,
    }

    /// Monte Carlo mean and standard error of f̃ next to both analytic averages.
    #[pyfunction]
    #[pyo3(signature = (n_qubits, ell, sigma, samples, seed=0))]
    fn monte_carlo_deformation(
        py: Python<'_>,
        n_qubits: usize,
        ell: f64,
        sigma: f64,
        samples: usize,
        seed: u64,
    ) -> PyResult<DeformationStudy> {
        let s = py
            .detach(|| exp::monte_carlo_deformation(n_qubits, ell, sigma, samples, seed))
            .py()?;
        Ok(DeformationStudy {
            n_qubits: s.n_qubits,
            ell: s.ell,
            sigma: s.sigma,
            samples: s.samples,
            seed: s.seed,
            mean: s.mean,
            stderr: s.stderr,
            closed_form: s.closed_form,
            exact_gaussian: s.exact_gaussian,
            discrepancy: s.discrepancy(),
        })
    }
}
