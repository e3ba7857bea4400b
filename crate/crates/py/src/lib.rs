//! Python bindings: matrices are lists of rows, states are lists of complex numbers.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use aqae::annealer::{brute_force as brute_force_core, default_schedule};
use aqae::cli::{run_evolve, run_selftest, run_spectrum, run_sweep, Output};
use aqae::config::RunConfig;
use aqae::linalg::{eigh as eigh_core, HermMatrix, StateVector, SymMatrix};
use aqae::models::{self, ScalarFieldSpec};
use aqae::{clock, observables, qubo, solver};

fn value_error(e: aqae::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn sym(rows: Vec<Vec<f64>>) -> PyResult<SymMatrix> {
    SymMatrix::from_rows(&rows).map_err(value_error)
}

fn rows(m: &SymMatrix) -> Vec<Vec<f64>> {
    (0..m.dim()).map(|i| m.row(i).to_vec()).collect()
}

fn herm(rows: Vec<Vec<Complex64>>) -> PyResult<HermMatrix> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("matrix must be square"));
    }
    let re = rows.iter().flatten().map(|z| z.re).collect();
    let im = rows.iter().flatten().map(|z| z.im).collect();
    HermMatrix::new(n, re, im).map_err(value_error)
}

fn state(v: Vec<Complex64>) -> StateVector {
    StateVector::from_complex(&v)
}

/// Solver settings; attribute names follow the JSON configuration.
#[pyclass(name = "SolveParams", from_py_object)]
#[derive(Clone)]
struct PySolveParams {
    #[pyo3(get, set)]
    bits: usize,
    #[pyo3(get, set)]
    eta: f64,
    #[pyo3(get, set)]
    reads: usize,
    #[pyo3(get, set)]
    runs: usize,
    #[pyo3(get, set)]
    z_init: u32,
    #[pyo3(get, set)]
    z_max: u32,
    #[pyo3(get, set)]
    sweeps: usize,
    #[pyo3(get, set)]
    seed: u64,
}

#[pymethods]
impl PySolveParams {
    #[new]
    #[pyo3(signature = (bits=3, eta=0.0, reads=1000, runs=1, z_init=0, z_max=13, sweeps=solver::DEFAULT_SOLVER_SWEEPS, seed=0))]
    #[allow(clippy::too_many_arguments)]
    fn new(bits: usize, eta: f64, reads: usize, runs: usize, z_init: u32, z_max: u32, sweeps: usize, seed: u64) -> Self {
        Self { bits, eta, reads, runs, z_init, z_max, sweeps, seed }
    }
}

impl PySolveParams {
    fn core(&self) -> solver::SolveParams {
        solver::SolveParams {
            bits: self.bits,
            eta: self.eta,
            num_reads: self.reads,
            z_init: self.z_init,
            z_max: self.z_max,
            runs: self.runs,
            sweeps: self.sweeps,
            seed: self.seed,
            ..Default::default()
        }
    }
}

/// Per-run zoom histories.
#[pyclass(name = "SolveTrace", frozen)]
struct PySolveTrace(solver::SolveTrace);

#[pymethods]
impl PySolveTrace {
    /// `(zoom, min, median, lo68, hi68)` per zoom level.
    fn statistics(&self) -> Vec<(u32, f64, f64, f64, f64)> {
        self.0.statistics().iter().map(|s| (s.zoom, s.summary.min, s.summary.median, s.summary.p16, s.summary.p84)).collect()
    }

    fn final_energies(&self) -> Vec<f64> {
        self.0.final_energies()
    }

    fn best_energy(&self) -> f64 {
        self.0.best().energy
    }

    fn best_state(&self) -> Vec<Complex64> {
        self.0.best().state.to_complex()
    }

    fn to_csv(&self) -> String {
        self.0.to_csv()
    }

    #[staticmethod]
    fn from_csv(text: &str) -> PyResult<Self> {
        solver::SolveTrace::from_csv(text).map(Self).map_err(value_error)
    }
}

/// Upper-triangular QUBO instance.
#[pyclass(name = "QuboInstance", frozen)]
struct PyQubo(qubo::QuboInstance);

#[pymethods]
impl PyQubo {
    #[staticmethod]
    #[pyo3(signature = (text, n_vars=None))]
    fn from_text(text: &str, n_vars: Option<usize>) -> PyResult<Self> {
        qubo::QuboInstance::from_text(text, n_vars).map(Self).map_err(value_error)
    }

    fn to_text(&self) -> String {
        self.0.to_text()
    }

    #[getter]
    fn n_vars(&self) -> usize {
        self.0.n_vars()
    }

    fn energy(&self, bits: Vec<u8>) -> PyResult<f64> {
        if bits.len() != self.0.n_vars() {
            return Err(PyValueError::new_err("wrong number of bits"));
        }
        Ok(self.0.energy(&bits))
    }

    /// Annealed reads as `(bits, energy, multiplicity)`, lowest energy first.
    #[pyo3(signature = (reads=100, seed=0))]
    fn sample(&self, reads: usize, seed: u64) -> PyResult<Vec<(Vec<u8>, f64, usize)>> {
        let sched = default_schedule(&self.0).map_err(value_error)?;
        let out = aqae::annealer::sample(&self.0, reads, &sched, seed).map_err(value_error)?;
        Ok(out.into_iter().map(|r| (r.bits, r.energy, r.multiplicity)).collect())
    }

    fn brute_force(&self) -> PyResult<(Vec<u8>, f64)> {
        brute_force_core(&self.0).map_err(value_error)
    }
}

#[pyfunction]
fn build_eigen_qubo(h: Vec<Vec<f64>>, bits: usize, zoom: u32, centers: Vec<f64>) -> PyResult<PyQubo> {
    let enc = qubo::Encoding::new(bits, zoom, centers).map_err(value_error)?;
    qubo::build_eigen_qubo(&sym(h)?, &enc).map(PyQubo).map_err(value_error)
}

#[pyfunction]
#[pyo3(signature = (m0_sq, lam, phi_max, n_s))]
fn scalar_hamiltonian(m0_sq: f64, lam: f64, phi_max: f64, n_s: usize) -> PyResult<Vec<Vec<f64>>> {
    let spec = ScalarFieldSpec { m0_sq, lambda: lam, phi_max, n_s };
    models::scalar_site_hamiltonian(&spec).map(|h| rows(&h)).map_err(value_error)
}

/// `(H, H_E)` of the SU(3) plaquette.
#[pyfunction]
fn su3_plaquette(g: f64) -> PyResult<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let p = models::su3_plaquette_hamiltonian(g).map_err(value_error)?;
    Ok((rows(&p.hamiltonian), rows(&p.electric)))
}

#[pyfunction]
fn neutrino_hamiltonian(n_sites: usize, theta_v: f64, zeta: f64, kappa: f64) -> PyResult<Vec<Vec<f64>>> {
    let spec = models::NeutrinoSpec::monochromatic(n_sites, theta_v, zeta, kappa);
    models::neutrino_hamiltonian(&spec).map(|h| rows(&h)).map_err(value_error)
}

/// Ascending eigenvalues and eigenvectors of a real symmetric matrix.
#[pyfunction]
fn eigh(h: Vec<Vec<f64>>) -> PyResult<(Vec<f64>, Vec<Vec<f64>>)> {
    let d = eigh_core(&sym(h)?).map_err(value_error)?;
    Ok((d.values, d.vectors))
}

#[pyfunction]
fn solve_state(h: Vec<Vec<f64>>, params: PySolveParams) -> PyResult<PySolveTrace> {
    solver::solve_state(&sym(h)?, &params.core()).map(PySolveTrace).map_err(value_error)
}

#[pyfunction]
fn solve_spectrum(h: Vec<Vec<f64>>, etas: Vec<f64>, mus: Vec<f64>, params: PySolveParams) -> PyResult<Vec<PySolveTrace>> {
    let traces = solver::solve_spectrum_from(&sym(h)?, &etas, &mus, &params.core(), None).map_err(value_error)?;
    Ok(traces.into_iter().map(PySolveTrace).collect())
}

/// Annealed clock solve: the trace and each run's time slices.
#[pyfunction]
fn evolve(
    h: Vec<Vec<Complex64>>,
    dt: f64,
    n_t: usize,
    psi_in: Vec<Complex64>,
    params: PySolveParams,
) -> PyResult<(PySolveTrace, Vec<Vec<Vec<Complex64>>>)> {
    let ev = clock::evolve(&herm(h)?, dt, n_t, &state(psi_in), &params.core()).map_err(value_error)?;
    let slices = ev.slices.iter().map(|run| run.iter().map(StateVector::to_complex).collect()).collect();
    Ok((PySolveTrace(ev.trace), slices))
}

#[pyfunction]
fn exact_states(h: Vec<Vec<Complex64>>, psi_in: Vec<Complex64>, times: Vec<f64>) -> PyResult<Vec<Vec<Complex64>>> {
    let s = clock::exact_states(&herm(h)?, &state(psi_in), &times).map_err(value_error)?;
    Ok(s.iter().map(StateVector::to_complex).collect())
}

#[pyfunction]
fn persistence(psi_t: Vec<Complex64>, psi_in: Vec<Complex64>) -> PyResult<f64> {
    observables::persistence(&state(psi_t), &state(psi_in)).map_err(value_error)
}

/// Flavor-change probability of `site`; `initial` is `"e"` or `"mu"`.
#[pyfunction]
fn flavor_probability(psi_t: Vec<Complex64>, site: usize, initial: &str) -> PyResult<f64> {
    let f = match initial {
        "e" => models::Flavor::Electron,
        "mu" => models::Flavor::Muon,
        other => return Err(PyValueError::new_err(format!("unknown flavor {other:?}"))),
    };
    observables::flavor_probability(&state(psi_t), site, f).map_err(value_error)
}

#[pyfunction]
fn entanglement_entropy(psi_t: Vec<Complex64>, site: usize) -> PyResult<f64> {
    observables::entanglement_entropy(&state(psi_t), site).map_err(value_error)
}

#[pyfunction]
fn log_negativity(psi_t: Vec<Complex64>, i: usize, j: usize) -> PyResult<f64> {
    observables::log_negativity(&state(psi_t), i, j).map_err(value_error)
}

/// Runs a CLI subcommand from a JSON configuration; returns the written paths.
#[pyfunction]
#[pyo3(signature = (command, config_json="{}", out_dir=None))]
fn run_command(command: &str, config_json: &str, out_dir: Option<&str>) -> PyResult<Vec<String>> {
    let mut cfg = RunConfig::from_json(config_json).map_err(value_error)?;
    if let Some(d) = out_dir {
        cfg.output.dir = d.to_string();
    }
    let mut out = Output::new(&cfg.output.dir, cfg.output.format).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    let mut log = Vec::new();
    let result = match command {
        "spectrum" => run_spectrum(&cfg, &mut out, &mut log),
        "evolve" => run_evolve(&cfg, &mut out, &mut log),
        "sweep" => run_sweep(&cfg, &mut out, &mut log),
        "selftest" => run_selftest(&cfg, &mut out, &mut log),
        other => return Err(PyValueError::new_err(format!("unknown command {other:?}"))),
    };
    result.map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(out.written.iter().map(|p| p.display().to_string()).collect())
}

#[pymodule]
fn pyaqae(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySolveParams>()?;
    m.add_class::<PySolveTrace>()?;
    m.add_class::<PyQubo>()?;
    m.add_function(wrap_pyfunction!(build_eigen_qubo, m)?)?;
    m.add_function(wrap_pyfunction!(scalar_hamiltonian, m)?)?;
    m.add_function(wrap_pyfunction!(su3_plaquette, m)?)?;
    m.add_function(wrap_pyfunction!(neutrino_hamiltonian, m)?)?;
    m.add_function(wrap_pyfunction!(eigh, m)?)?;
    m.add_function(wrap_pyfunction!(solve_state, m)?)?;
    m.add_function(wrap_pyfunction!(solve_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(exact_states, m)?)?;
    m.add_function(wrap_pyfunction!(persistence, m)?)?;
    m.add_function(wrap_pyfunction!(flavor_probability, m)?)?;
    m.add_function(wrap_pyfunction!(entanglement_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(log_negativity, m)?)?;
    m.add_function(wrap_pyfunction!(run_command, m)?)?;
    Ok(())
}
