//! Python module `qaccord`.

use std::path::PathBuf;

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyAny;

use qaccord::experiments::{self, Experiment, ExperimentSpec, SolverChoice};
use qaccord::{measures, statefile, states, Error};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::OptimizerDidNotConverge { .. } | Error::Io(_) | Error::Table { .. } => {
            PyRuntimeError::new_err(e.to_string())
        }
        other => PyValueError::new_err(other.to_string()),
    }
}

fn json_to_py<'py>(py: Python<'py>, value: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Two-qubit density matrix.
#[pyclass(
    name = "DensityMatrix",
    module = "qaccord",
    frozen,
    skip_from_py_object
)]
#[derive(Clone)]
struct PyDensityMatrix {
    inner: states::DensityMatrix,
}

#[pymethods]
impl PyDensityMatrix {
    /// From 16 complex entries in row-major order.
    #[new]
    fn new(entries: Vec<Complex64>) -> PyResult<Self> {
        let m = qaccord::ComplexMatrix::new(4, entries).map_err(py_err)?;
        let inner = states::DensityMatrix::new(m).map_err(py_err)?;
        Ok(Self { inner })
    }

    /// Parses state-file text, in matrix or `family=...` form.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        let spec = statefile::parse_state(text).map_err(py_err)?;
        Ok(Self { inner: spec.state })
    }

    /// `cos(theta)|00> + sin(theta)|11>`.
    #[staticmethod]
    fn pure(theta: f64) -> Self {
        Self {
            inner: states::pure_schmidt(theta),
        }
    }

    #[staticmethod]
    fn werner(e: f64) -> PyResult<Self> {
        Ok(Self {
            inner: states::werner(e).map_err(py_err)?,
        })
    }

    #[staticmethod]
    fn bell_diagonal(c1: f64, c2: f64, c3: f64) -> PyResult<Self> {
        let inner =
            states::bell_diagonal(qaccord::BellDiagonalCoords::new(c1, c2, c3)).map_err(py_err)?;
        Ok(Self { inner })
    }

    /// Weights over (phi+, phi-, psi+, psi-).
    #[staticmethod]
    fn bell_mixture(p: [f64; 4]) -> PyResult<Self> {
        Ok(Self {
            inner: states::bell_mixture(p).map_err(py_err)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (seed, index, measure = "haar"))]
    fn random(seed: u64, index: u64, measure: &str) -> PyResult<Self> {
        let measure: qaccord::RandomMeasure = measure.parse().map_err(PyValueError::new_err)?;
        Ok(Self {
            inner: states::random_state_at(seed, measure, index),
        })
    }

    fn with_white_noise(&self, e: f64) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.with_white_noise(e).map_err(py_err)?,
        })
    }

    /// Row-major entries.
    fn entries(&self) -> Vec<Complex64> {
        self.inner.matrix().entries().to_vec()
    }

    /// Eigenvalues, largest first.
    fn eigenvalues(&self) -> Vec<f64> {
        self.inner.eigenvalues()
    }

    fn purity(&self) -> f64 {
        self.inner.purity()
    }

    fn __repr__(&self) -> String {
        format!("DensityMatrix(purity={:.6})", self.inner.purity())
    }
}

/// Every measure of one state.
#[pyclass(
    name = "MeasureReport",
    module = "qaccord",
    frozen,
    get_all,
    skip_from_py_object
)]
#[derive(Clone)]
struct PyMeasureReport {
    concurrence: f64,
    eof: f64,
    discord: f64,
    ea: f64,
    qmi: f64,
    /// Alice's and Bob's Bloch directions at the accord saddle.
    ea_alice: [f64; 3],
    ea_bob: [f64; 3],
    /// Bob's Bloch direction maximizing the classical correlation.
    discord_basis: [f64; 3],
}

impl From<measures::MeasureReport> for PyMeasureReport {
    fn from(r: measures::MeasureReport) -> Self {
        Self {
            concurrence: r.concurrence,
            eof: r.eof,
            discord: r.discord,
            ea: r.ea,
            qmi: r.quantum_mutual_information,
            ea_alice: r.ea_alice.direction(),
            ea_bob: r.ea_bob.direction(),
            discord_basis: r.discord_basis.direction(),
        }
    }
}

#[pymethods]
impl PyMeasureReport {
    fn __repr__(&self) -> String {
        format!(
            "MeasureReport(concurrence={:.6}, eof={:.6}, discord={:.6}, ea={:.6}, qmi={:.6})",
            self.concurrence, self.eof, self.discord, self.ea, self.qmi
        )
    }
}

fn solver(tol: Option<f64>, oracle: bool, oracle_resolution: usize) -> SolverChoice {
    if oracle {
        SolverChoice::Oracle(qaccord::GridOracle::new(oracle_resolution))
    } else {
        let mut c = qaccord::OptimizerConfig::default();
        if let Some(t) = tol {
            c.value_tolerance = t;
        }
        SolverChoice::Optimizer(c)
    }
}

/// Solver for discord and entropic accord.
#[pyclass(name = "MeasureEngine", module = "qaccord", frozen)]
struct PyMeasureEngine {
    inner: measures::MeasureEngine,
}

#[pymethods]
impl PyMeasureEngine {
    #[new]
    #[pyo3(signature = (tol = None, oracle = false, oracle_resolution = 200))]
    fn new(tol: Option<f64>, oracle: bool, oracle_resolution: usize) -> PyResult<Self> {
        let inner = solver(tol, oracle, oracle_resolution)
            .engine()
            .map_err(py_err)?;
        Ok(Self { inner })
    }

    fn report(&self, py: Python<'_>, state: &PyDensityMatrix) -> PyResult<PyMeasureReport> {
        let rho = state.inner.clone();
        let r = py.detach(|| self.inner.report(&rho)).map_err(py_err)?;
        Ok(r.into())
    }

    fn discord(&self, py: Python<'_>, state: &PyDensityMatrix) -> PyResult<f64> {
        let rho = state.inner.clone();
        py.detach(|| self.inner.discord(&rho))
            .map(|d| d.value)
            .map_err(py_err)
    }

    fn entropic_accord(&self, py: Python<'_>, state: &PyDensityMatrix) -> PyResult<f64> {
        let rho = state.inner.clone();
        py.detach(|| self.inner.entropic_accord(&rho))
            .map(|a| a.value)
            .map_err(py_err)
    }
}

#[pyfunction]
fn concurrence(state: &PyDensityMatrix) -> PyResult<f64> {
    measures::concurrence(&state.inner).map_err(py_err)
}

#[pyfunction]
fn eof(state: &PyDensityMatrix) -> PyResult<f64> {
    measures::eof(&state.inner).map_err(py_err)
}

#[pyfunction]
fn quantum_mutual_information(state: &PyDensityMatrix) -> PyResult<f64> {
    measures::quantum_mutual_information(&state.inner).map_err(py_err)
}

#[pyfunction]
fn is_ppt(state: &PyDensityMatrix) -> PyResult<bool> {
    measures::is_ppt(&state.inner).map_err(py_err)
}

#[pyfunction]
fn discord(py: Python<'_>, state: &PyDensityMatrix) -> PyResult<f64> {
    let rho = state.inner.clone();
    py.detach(|| measures::discord(&rho))
        .map(|d| d.value)
        .map_err(py_err)
}

#[pyfunction]
fn entropic_accord(py: Python<'_>, state: &PyDensityMatrix) -> PyResult<f64> {
    let rho = state.inner.clone();
    py.detach(|| measures::entropic_accord(&rho))
        .map(|a| a.value)
        .map_err(py_err)
}

#[pyfunction]
fn measure(py: Python<'_>, state: &PyDensityMatrix) -> PyResult<PyMeasureReport> {
    let rho = state.inner.clone();
    let r = py
        .detach(|| measures::measure_report(&rho))
        .map_err(py_err)?;
    Ok(r.into())
}

/// Runs an experiment, writes its files into `out` and returns the summary.
#[pyfunction]
#[pyo3(signature = (name, out, seed = 1, grid = None, count = None, measure = "haar", tol = None, oracle = false))]
#[allow(clippy::too_many_arguments)]
fn run_experiment<'py>(
    py: Python<'py>,
    name: &str,
    out: PathBuf,
    seed: u64,
    grid: Option<usize>,
    count: Option<usize>,
    measure: &str,
    tol: Option<f64>,
    oracle: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let experiment: Experiment = name.parse().map_err(PyValueError::new_err)?;
    let mut spec = ExperimentSpec::new(experiment);
    spec.seed = seed;
    spec.grid = grid.unwrap_or(spec.grid);
    spec.count = count.unwrap_or(spec.count);
    spec.measure = measure.parse().map_err(PyValueError::new_err)?;
    spec.solver = solver(tol, oracle, qaccord::GridOracle::default().resolution);
    let run = py
        .detach(|| {
            let run = experiments::run(&spec)?;
            run.write(&out)?;
            Ok(run)
        })
        .map_err(py_err)?;
    json_to_py(py, &run.summary)
}

/// Redraws the charts of a results directory; returns the written paths.
#[pyfunction]
fn regenerate_plots(dir: PathBuf) -> PyResult<Vec<PathBuf>> {
    experiments::regenerate_plots(&dir).map_err(py_err)
}

#[pymodule]
#[pyo3(name = "qaccord")]
fn qaccord_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDensityMatrix>()?;
    m.add_class::<PyMeasureReport>()?;
    m.add_class::<PyMeasureEngine>()?;
    m.add_function(wrap_pyfunction!(concurrence, m)?)?;
    m.add_function(wrap_pyfunction!(eof, m)?)?;
    m.add_function(wrap_pyfunction!(quantum_mutual_information, m)?)?;
    m.add_function(wrap_pyfunction!(is_ppt, m)?)?;
    m.add_function(wrap_pyfunction!(discord, m)?)?;
    m.add_function(wrap_pyfunction!(entropic_accord, m)?)?;
    m.add_function(wrap_pyfunction!(measure, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(regenerate_plots, m)?)?;
    Ok(())
}
