//! Python bindings: matrices, generated and hand-built problems, the four
//! solvers, spectral quantities and the benchmark table.

use gso_core::bench::{self, BenchConfig, TableSpec};
use gso_core::metrics;
use gso_core::oracle;
use gso_core::problems::{self, GeneratorSpec, LeastSquaresProblem};
use gso_core::solvers::{self, ObliqueConfig, Reference, SolveReport, StopMode, StopRule};
use gso_core::{DenseMatrix, Error, Method};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn py_err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(name = "DenseMatrix", module = "gso")]
struct PyMatrix {
    inner: DenseMatrix,
}

#[pymethods]
impl PyMatrix {
    #[new]
    fn new(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        DenseMatrix::from_rows(&rows).map(|inner| Self { inner }).map_err(py_err)
    }

    #[getter]
    fn rows(&self) -> usize {
        self.inner.rows()
    }

    #[getter]
    fn cols(&self) -> usize {
        self.inner.cols()
    }

    fn column(&self, j: usize) -> PyResult<Vec<f64>> {
        self.inner.try_column(j).map(<[f64]>::to_vec).map_err(py_err)
    }

    fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.inner.rows())
            .map(|i| (0..self.inner.cols()).map(|j| self.inner.get(i, j)).collect())
            .collect()
    }

    fn matvec(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.matvec(&x).map_err(py_err)
    }

    fn matvec_transpose(&self, r: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.matvec_transpose(&r).map_err(py_err)
    }

    fn frobenius_norm_sq(&self) -> f64 {
        self.inner.frobenius_norm_sq()
    }

    fn __repr__(&self) -> String {
        format!("DenseMatrix({}x{})", self.inner.rows(), self.inner.cols())
    }
}

#[pyclass(name = "Problem", module = "gso")]
struct PyProblem {
    inner: LeastSquaresProblem,
}

#[pymethods]
impl PyProblem {
    /// Seeded uniform `[c, 1)` problem with a planted solution.
    #[staticmethod]
    #[pyo3(signature = (m, n, c=0.0, consistent=true, seed=0))]
    fn generate(m: usize, n: usize, c: f64, consistent: bool, seed: u64) -> PyResult<Self> {
        GeneratorSpec { m, n, c, consistent, seed }
            .generate()
            .map(|inner| Self { inner })
            .map_err(py_err)
    }

    /// One of the hand-built systems: "square", "overdetermined", "inconsistent".
    #[staticmethod]
    fn fixture(name: &str) -> PyResult<Self> {
        problems::fixture(name).map(|inner| Self { inner }).map_err(py_err)
    }

    #[getter]
    fn a(&self) -> PyMatrix {
        PyMatrix { inner: self.inner.a.clone() }
    }

    #[getter]
    fn b(&self) -> Vec<f64> {
        self.inner.b.clone()
    }

    #[getter]
    fn x_planted(&self) -> Option<Vec<f64>> {
        self.inner.x_planted.clone()
    }

    #[getter]
    fn b_null(&self) -> Option<Vec<f64>> {
        self.inner.b_null.clone()
    }

    #[pyo3(signature = (method, stop_mode="rre", threshold=solvers::DEFAULT_THRESHOLD, max_iters=solvers::DEFAULT_MAX_ITERS, seed=0))]
    fn solve(&self, method: &str, stop_mode: &str, threshold: f64, max_iters: u64, seed: u64) -> PyResult<PyReport> {
        let p = &self.inner;
        run_solve(method, &p.a, &p.b, stop_mode, threshold, max_iters, seed, &p.reference())
    }
}

#[pyclass(name = "SolveReport", module = "gso", get_all)]
struct PyReport {
    x: Vec<f64>,
    r: Vec<f64>,
    iterations: u64,
    updates_applied: u64,
    skips: u64,
    converged: bool,
    final_metric: f64,
    elapsed_seconds: f64,
}

impl From<SolveReport> for PyReport {
    fn from(r: SolveReport) -> Self {
        Self {
            converged: r.converged(),
            x: r.x,
            r: r.r,
            iterations: r.iterations,
            updates_applied: r.updates_applied,
            skips: r.skips,
            final_metric: r.final_metric,
            elapsed_seconds: r.elapsed_seconds,
        }
    }
}

#[pymethods]
impl PyReport {
    fn __repr__(&self) -> String {
        format!(
            "SolveReport(iterations={}, updates_applied={}, skips={}, converged={})",
            self.iterations,
            self.updates_applied,
            self.skips,
            if self.converged { "True" } else { "False" }
        )
    }
}

#[allow(clippy::too_many_arguments)]
fn run_solve(
    method: &str,
    a: &DenseMatrix,
    b: &[f64],
    stop_mode: &str,
    threshold: f64,
    max_iters: u64,
    seed: u64,
    reference: &Reference<'_>,
) -> PyResult<PyReport> {
    let method: Method = method.parse().map_err(py_err)?;
    let stop = match stop_mode.parse::<StopMode>().map_err(py_err)? {
        StopMode::ResidualRelativeError => StopRule::rre(threshold),
        StopMode::SolutionError => StopRule::solution_error(threshold),
        StopMode::GradientRelative => StopRule::gradient(threshold, a.cols()),
    }
    .with_max_iters(max_iters);
    solvers::solve(method, a, b, None, &stop, &ObliqueConfig::default(), reference, seed)
        .map(PyReport::from)
        .map_err(py_err)
}

/// Solves `A x ~ b` without planted metadata, so the default stop rule is
/// the relative gradient.
#[pyfunction]
#[pyo3(signature = (method, a, b, stop_mode="gradient", threshold=solvers::DEFAULT_THRESHOLD, max_iters=solvers::DEFAULT_MAX_ITERS, seed=0))]
fn solve(
    method: &str,
    a: PyRef<'_, PyMatrix>,
    b: Vec<f64>,
    stop_mode: &str,
    threshold: f64,
    max_iters: u64,
    seed: u64,
) -> PyResult<PyReport> {
    run_solve(method, &a.inner, &b, stop_mode, threshold, max_iters, seed, &Reference::default())
}

/// Minimum-norm least-squares solution from pivoted QR.
#[pyfunction]
fn direct_lsq(a: PyRef<'_, PyMatrix>, b: Vec<f64>) -> PyResult<Vec<f64>> {
    oracle::direct_lsq(&a.inner, &b).map_err(py_err)
}

#[pyfunction]
fn spectral_summary<'py>(py: Python<'py>, a: PyRef<'_, PyMatrix>) -> PyResult<Bound<'py, PyDict>> {
    let s = oracle::spectral_summary(&a.inner).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("sigma_min", s.sigma_min)?;
    d.set_item("sigma_max", s.sigma_max)?;
    d.set_item("rank", s.rank)?;
    d.set_item("frob_norm_sq", s.frob_norm_sq)?;
    d.set_item("singular_values", s.singular_values)?;
    Ok(d)
}

#[pyfunction]
fn rate_bounds<'py>(py: Python<'py>, a: PyRef<'_, PyMatrix>) -> PyResult<Bound<'py, PyDict>> {
    let s = oracle::spectral_summary(&a.inner).map_err(py_err)?;
    let rb = metrics::rate_bounds(&a.inner, &s).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("kappa_f_sq", rb.kappa_f_sq)?;
    d.set_item("rcd_factor", rb.rcd_factor)?;
    d.set_item("rgso_factor", rb.rgso_factor)?;
    Ok(d)
}

/// Median iteration counts and timings as CSV text.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (m, n, c=0.0, consistent=true, methods=vec!["cd".to_string(), "gso".to_string(), "rcd".to_string(), "rgso".to_string()], repeats=50, seed=0))]
fn run_table(
    py: Python<'_>,
    m: usize,
    n: usize,
    c: f64,
    consistent: bool,
    methods: Vec<String>,
    repeats: usize,
    seed: u64,
) -> PyResult<String> {
    let methods = methods
        .iter()
        .map(|s| s.parse::<Method>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(py_err)?;
    let cfg = BenchConfig::new(methods, repeats, seed);
    let specs = [TableSpec { m, n, c, consistent }];
    py.detach(|| bench::run_table(&specs, &cfg))
        .map(|t| t.to_csv())
        .map_err(py_err)
}

#[pymodule]
fn gso(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMatrix>()?;
    m.add_class::<PyProblem>()?;
    m.add_class::<PyReport>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(direct_lsq, m)?)?;
    m.add_function(wrap_pyfunction!(spectral_summary, m)?)?;
    m.add_function(wrap_pyfunction!(rate_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(run_table, m)?)?;
    Ok(())
}
