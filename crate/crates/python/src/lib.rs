//! Python bindings. Matrices and vectors cross the boundary as nested lists
//! of Python `complex`; long computations release the interpreter lock.

use std::path::PathBuf;
use std::sync::Arc;

use eigpath::analysis::{self, SampleMethod};
use eigpath::chebyshev::{cheb_expand_all, ChebRequest};
use eigpath::problems::{jordan, spring_chain, torus_kernel, ConfigProblem};
use eigpath::taylor::{taylor_expand_all, Selector, TaylorRequest};
use eigpath::{CMatrix, CVector, EigenPairSeries, ParametricProblem, C64};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

create_exception!(pyeigpath, EigpathError, PyException, "Numerical failure (non-simple eigenvalue, no convergence, domain).");

fn to_py(e: eigpath::Error) -> PyErr {
    if e.is_numerical() {
        EigpathError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn matrix_rows(m: &CMatrix) -> Vec<Vec<C64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn vector_list(v: &CVector) -> Vec<C64> {
    v.iter().copied().collect()
}

fn selector(index: Option<usize>) -> Selector {
    index.map_or(Selector::All, Selector::Index)
}

/// A parametric matrix `A(mu)`.
#[pyclass(name = "Problem", module = "pyeigpath", frozen)]
struct PyProblem {
    inner: Arc<dyn ParametricProblem>,
}

#[pymethods]
impl PyProblem {
    /// Gaussian kernel on `n` points of the unit torus.
    #[staticmethod]
    fn example1(n: usize) -> PyResult<Self> {
        Ok(PyProblem { inner: Arc::new(torus_kernel(n).map_err(to_py)?) })
    }

    /// Chain of `n` masses with parameter-dependent springs.
    #[staticmethod]
    fn example2(n: usize) -> PyResult<Self> {
        Ok(PyProblem { inner: Arc::new(spring_chain(n).map_err(to_py)?) })
    }

    /// Jordan block perturbed in the corner; defective at `mu = 0`.
    #[staticmethod]
    fn example3(n: usize) -> PyResult<Self> {
        Ok(PyProblem { inner: Arc::new(jordan(n).map_err(to_py)?) })
    }

    #[staticmethod]
    fn from_config(path: PathBuf) -> PyResult<Self> {
        let p = eigpath::problems::problem_from_config(&path).map_err(to_py)?;
        Ok(PyProblem { inner: Arc::new(p) })
    }

    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        Ok(PyProblem { inner: Arc::new(ConfigProblem::from_toml_str(text).map_err(to_py)?) })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name().to_string()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn hermitian(&self) -> bool {
        self.inner.hermitian()
    }

    fn matrix(&self, mu: f64) -> PyResult<Vec<Vec<C64>>> {
        Ok(matrix_rows(&self.inner.eval(mu).map_err(to_py)?))
    }

    /// `[A(mu0), A'(mu0), ..., A^(order)(mu0)]`.
    fn derivatives(&self, mu0: f64, order: usize) -> PyResult<Vec<Vec<Vec<C64>>>> {
        Ok(self.inner.derivatives(mu0, order).map_err(to_py)?.iter().map(matrix_rows).collect())
    }

    /// Eigenvalues of `A(mu)`.
    fn eigenvalues(&self, py: Python<'_>, mu: f64) -> PyResult<Vec<C64>> {
        let p = &self.inner;
        py.detach(|| {
            let a = p.eval(mu)?;
            eigpath::linalg::eigenvalues(&a, p.hermitian())
        })
        .map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("Problem(name={:?}, n={})", self.inner.name(), self.inner.dim())
    }
}

/// Truncated series for one eigenvalue path and its eigenvector path.
#[pyclass(name = "EigenPairSeries", module = "pyeigpath", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySeries {
    inner: EigenPairSeries,
}

#[pymethods]
impl PySeries {
    /// `"taylor"` or `"chebyshev"`.
    #[getter]
    fn basis(&self) -> &'static str {
        if self.inner.basis().is_taylor() {
            "taylor"
        } else {
            "chebyshev"
        }
    }

    #[getter]
    fn order(&self) -> usize {
        self.inner.order()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.dim()
    }

    /// Position of the seed pair in the sorted spectrum.
    #[getter]
    fn index(&self) -> Option<usize> {
        self.inner.diagnostics.index
    }

    #[getter]
    fn residual_norm(&self) -> f64 {
        self.inner.diagnostics.residual_norm
    }

    #[getter]
    fn newton_iterations(&self) -> Option<usize> {
        self.inner.diagnostics.newton_iterations
    }

    /// Raw coefficients of the eigenvalue series.
    #[getter]
    fn eigenvalue_coeffs(&self) -> Vec<C64> {
        self.inner.eigenvalue.coeffs().to_vec()
    }

    /// `(lambda, v)` at `mu`.
    fn eval(&self, mu: f64) -> PyResult<(C64, Vec<C64>)> {
        let (l, v) = analysis::eigpath_eval(&self.inner, mu).map_err(to_py)?;
        Ok((l, vector_list(&v)))
    }

    fn eigenvalue(&self, mu: f64) -> PyResult<C64> {
        self.inner.eigenvalue.eval(mu).map_err(to_py)
    }

    /// Eigenvector estimate, not normalized.
    fn eigenvector(&self, mu: f64) -> PyResult<Vec<C64>> {
        Ok(vector_list(&self.inner.eigenvector.eval(mu).map_err(to_py)?))
    }

    /// Rayleigh quotient of `A(mu)` at the series eigenvector.
    fn rayleigh(&self, problem: &PyProblem, mu: f64) -> PyResult<C64> {
        analysis::rayleigh_refine(problem.inner.as_ref(), &self.inner, mu).map_err(to_py)
    }

    fn to_json(&self) -> String {
        self.inner.to_json().to_string()
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let v: serde_json::Value = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(PySeries { inner: EigenPairSeries::from_json(&v).map_err(to_py)? })
    }

    fn __repr__(&self) -> String {
        format!("EigenPairSeries(basis={:?}, order={}, n={}, index={:?})", self.basis(), self.order(), self.n(), self.index())
    }
}

fn wrap_all(results: Vec<eigpath::Result<EigenPairSeries>>) -> Vec<Option<PySeries>> {
    results.into_iter().map(|r| r.ok().map(|inner| PySeries { inner })).collect()
}

/// Expands one pair (`index` given) or every pair about `mu0`. With
/// `index=None`, failed pairs appear as `None`.
#[pyfunction]
#[pyo3(signature = (problem, mu0, order, index=None, single_precision_e=false))]
fn taylor_expand(
    py: Python<'_>,
    problem: &PyProblem,
    mu0: f64,
    order: usize,
    index: Option<usize>,
    single_precision_e: bool,
) -> PyResult<Py<PyAny>> {
    let req = TaylorRequest { single_precision_e, ..TaylorRequest::new(mu0, order, selector(index)) };
    let p = problem.inner.as_ref();
    let results = py.detach(|| taylor_expand_all(p, &req)).map_err(to_py)?;
    finish(py, index, results)
}

/// Chebyshev expansion on `[lo, hi]`, refined by Newton's method.
#[pyfunction]
#[pyo3(signature = (problem, lo, hi, order, index=None, quad_m=None, newton_tol=None, newton_max_iter=None))]
#[allow(clippy::too_many_arguments)]
fn chebyshev_expand(
    py: Python<'_>,
    problem: &PyProblem,
    lo: f64,
    hi: f64,
    order: usize,
    index: Option<usize>,
    quad_m: Option<usize>,
    newton_tol: Option<f64>,
    newton_max_iter: Option<usize>,
) -> PyResult<Py<PyAny>> {
    let mut req = ChebRequest::new(lo, hi, order, selector(index));
    req.quad_m = quad_m;
    if let Some(t) = newton_tol {
        req.newton_tol = t;
    }
    if let Some(k) = newton_max_iter {
        req.newton_max_iter = k;
    }
    let p = problem.inner.as_ref();
    let results = py.detach(|| cheb_expand_all(p, &req)).map_err(to_py)?;
    finish(py, index, results)
}

fn finish(py: Python<'_>, index: Option<usize>, mut results: Vec<eigpath::Result<EigenPairSeries>>) -> PyResult<Py<PyAny>> {
    if index.is_some() {
        let inner = results.pop().expect("one result per selected pair").map_err(to_py)?;
        return Ok(Py::new(py, PySeries { inner })?.into_any());
    }
    Ok(wrap_all(results).into_pyobject(py)?.into_any().unbind())
}

fn unwrap_series(series: &[PyRef<'_, PySeries>]) -> Vec<EigenPairSeries> {
    series.iter().map(|s| s.inner.clone()).collect()
}

/// Compares series with direct eigensolves on `grid`. Returns a dict with
/// summary statistics and the per-point CSV.
#[pyfunction]
#[pyo3(signature = (problem, series, grid, rayleigh=false))]
fn error_report<'py>(
    py: Python<'py>,
    problem: &PyProblem,
    series: Vec<PyRef<'py, PySeries>>,
    grid: Vec<f64>,
    rayleigh: bool,
) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
    let series = unwrap_series(&series);
    let p = problem.inner.as_ref();
    let report = py.detach(|| analysis::error_report(p, &series, &grid, rayleigh)).map_err(to_py)?;
    let d = pyo3::types::PyDict::new(py);
    d.set_item("max_abs_err_lambda", report.max_eig_error())?;
    d.set_item("median_abs_err_lambda", report.median_eig_error())?;
    d.set_item("max_vec_deviation", report.max_vec_deviation())?;
    d.set_item("median_abs_err_rayleigh", report.median_rayleigh_error())?;
    d.set_item("eig_errors", &report.eig_errors)?;
    d.set_item("vec_deviation", &report.vec_deviation)?;
    d.set_item("rayleigh_errors", &report.rayleigh_errors)?;
    d.set_item("csv", report.to_csv())?;
    Ok(d)
}

/// Draws `count` values of `mu ~ N(mean, std_dev^2)` and evaluates the
/// tracked eigenvalues with `method` (`taylor-eval`, `cheb-eval`,
/// `rayleigh` or `direct`). `values[i][k]` belongs to sample `i`, series `k`.
#[pyfunction]
#[pyo3(signature = (problem, series, mean, std_dev, count, seed=0, method="taylor-eval"))]
#[allow(clippy::too_many_arguments)]
fn sample_eigenvalues<'py>(
    py: Python<'py>,
    problem: &PyProblem,
    series: Vec<PyRef<'py, PySeries>>,
    mean: f64,
    std_dev: f64,
    count: usize,
    seed: u64,
    method: &str,
) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
    let method = SampleMethod::parse(method)
        .ok_or_else(|| PyValueError::new_err(format!("unknown sampling method '{method}'")))?;
    let series = unwrap_series(&series);
    let p = problem.inner.as_ref();
    let set = py
        .detach(|| analysis::sample_eigenvalues(p, &series, mean, std_dev, count, seed, method))
        .map_err(to_py)?;
    let d = pyo3::types::PyDict::new(py);
    d.set_item("mus", &set.mus)?;
    d.set_item("values", &set.values)?;
    d.set_item("setup_seconds", set.setup_seconds)?;
    d.set_item("eval_seconds", set.eval_seconds)?;
    Ok(d)
}

#[pymodule]
fn pyeigpath(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyProblem>()?;
    m.add_class::<PySeries>()?;
    m.add("EigpathError", m.py().get_type::<EigpathError>())?;
    m.add_function(wrap_pyfunction!(taylor_expand, m)?)?;
    m.add_function(wrap_pyfunction!(chebyshev_expand, m)?)?;
    m.add_function(wrap_pyfunction!(error_report, m)?)?;
    m.add_function(wrap_pyfunction!(sample_eigenvalues, m)?)?;
    Ok(())
}
