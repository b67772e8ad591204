//! Python bindings: benchmark problems, the GP surrogate, acquisition
//! functions, designs, the three drivers and the campaign harness.

use std::path::PathBuf;

use ecibo::engine::{self, order_from_maxima, RunRecord};
use ecibo::harness::{self, wilcoxon_signed_rank, ExperimentConfig};
use ecibo::{Algorithm, BoConfig, Bounds, Dataset, Error, Incumbent, ProblemId, RngStream};
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyOSError::new_err(e.to_string()),
        Error::ModelSingular { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn json_err(e: serde_json::Error) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn parse_bounds(bounds: Vec<(f64, f64)>) -> PyResult<Bounds> {
    Bounds::new(bounds).map_err(to_py)
}

fn parse_algorithm(name: &str) -> PyResult<Algorithm> {
    name.parse().map_err(to_py)
}

/// A built-in benchmark function on its default box.
#[pyclass(name = "Problem", frozen)]
struct PyProblem {
    inner: ecibo::Problem,
}

#[pymethods]
impl PyProblem {
    #[new]
    fn new(name: &str, dim: usize) -> PyResult<Self> {
        let id: ProblemId = name.parse().map_err(to_py)?;
        Ok(Self {
            inner: ecibo::Problem::new(id, dim).map_err(to_py)?,
        })
    }

    fn __call__(&self, x: Vec<f64>) -> PyResult<f64> {
        self.evaluate(x)
    }

    fn evaluate(&self, x: Vec<f64>) -> PyResult<f64> {
        if !self.inner.bounds().contains(&x) {
            return Err(PyValueError::new_err("point outside the problem bounds"));
        }
        self.inner.evaluate(&x).map_err(to_py)
    }

    #[getter]
    fn name(&self) -> &str {
        self.inner.name()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn bounds(&self) -> Vec<(f64, f64)> {
        self.inner.bounds().pairs().to_vec()
    }

    /// Number of objective calls made through this object.
    #[getter]
    fn evaluations(&self) -> u64 {
        self.inner.evaluations()
    }

    fn __repr__(&self) -> String {
        format!("Problem('{}', {})", self.inner.name(), self.inner.dim())
    }
}

/// Gaussian process surrogate with a fitted isotropic length-scale.
#[pyclass(name = "GpModel", frozen)]
struct PyGpModel {
    inner: ecibo::GpModel,
    incumbent: Incumbent,
}

#[pymethods]
impl PyGpModel {
    /// Fit to samples `xs` (list of points) with values `ys` inside `bounds`.
    #[staticmethod]
    #[pyo3(signature = (xs, ys, bounds, nugget = ecibo::gp::DEFAULT_NUGGET, restarts = 1))]
    fn fit(
        py: Python<'_>,
        xs: Vec<Vec<f64>>,
        ys: Vec<f64>,
        bounds: Vec<(f64, f64)>,
        nugget: f64,
        restarts: usize,
    ) -> PyResult<Self> {
        let bounds = parse_bounds(bounds)?;
        let data = Dataset::from_samples(bounds, &xs, &ys).map_err(to_py)?;
        let inner = py
            .detach(|| ecibo::GpModel::fit(&data, nugget, restarts))
            .map_err(to_py)?;
        let incumbent = Incumbent::from_dataset(&data).expect("fit needs samples");
        Ok(Self { inner, incumbent })
    }

    /// Posterior `(mean, std)` at `x`.
    fn predict(&self, x: Vec<f64>) -> PyResult<(f64, f64)> {
        let p = self.inner.predict(&x).map_err(to_py)?;
        Ok((p.mean, p.std))
    }

    /// Expected improvement over the best training value.
    fn ei(&self, x: Vec<f64>) -> PyResult<f64> {
        ecibo::acquisition::ei_at(&self.inner, &x, self.incumbent.f).map_err(to_py)
    }

    /// Expected coordinate improvement along coordinate `coord` (0-based)
    /// through the best training point.
    fn eci(&self, coord: usize, t: f64) -> PyResult<f64> {
        ecibo::eci(&self.inner, &self.incumbent, coord, t).map_err(to_py)
    }

    #[getter]
    fn incumbent(&self) -> (Vec<f64>, f64) {
        (self.incumbent.x.clone(), self.incumbent.f)
    }

    #[getter]
    fn length_scale(&self) -> f64 {
        self.inner.length_scale()
    }

    #[getter]
    fn log_likelihood(&self) -> f64 {
        self.inner.log_likelihood()
    }

    #[getter]
    fn nugget(&self) -> f64 {
        self.inner.nugget()
    }

    #[getter]
    fn prior_mean(&self) -> f64 {
        self.inner.prior_mean()
    }

    #[getter]
    fn prior_std(&self) -> f64 {
        self.inner.prior_std()
    }

    fn __repr__(&self) -> String {
        format!(
            "GpModel(n={}, d={}, length_scale={:.4})",
            self.inner.len(),
            self.inner.dim(),
            self.inner.length_scale()
        )
    }
}

/// Outcome of one optimization run.
#[pyclass(name = "RunResult", frozen)]
struct PyRunResult {
    inner: RunRecord,
}

#[pymethods]
impl PyRunResult {
    #[getter]
    fn algorithm(&self) -> &'static str {
        self.inner.algorithm.as_str()
    }

    #[getter]
    fn completed(&self) -> bool {
        self.inner.is_completed()
    }

    /// Failure message, `None` for completed runs.
    #[getter]
    fn error(&self) -> Option<String> {
        match &self.inner.status {
            engine::RunStatus::Completed => None,
            engine::RunStatus::Failed { message } => Some(message.clone()),
        }
    }

    #[getter]
    fn xs(&self) -> Vec<Vec<f64>> {
        self.inner.entries.iter().map(|e| e.x.clone()).collect()
    }

    #[getter]
    fn fs(&self) -> Vec<f64> {
        self.inner.entries.iter().map(|e| e.f).collect()
    }

    #[getter]
    fn best_curve(&self) -> Vec<f64> {
        self.inner.best_curve()
    }

    #[getter]
    fn final_best(&self) -> Option<f64> {
        self.inner.final_best()
    }

    #[getter]
    fn best_x(&self) -> Option<Vec<f64>> {
        self.inner.incumbent().map(|(x, _)| x.to_vec())
    }

    /// Coordinate moved by each infill (`None` for standard BO).
    #[getter]
    fn coordinates(&self) -> Vec<Option<usize>> {
        self.inner.infills.iter().map(|i| i.coordinate).collect()
    }

    /// ECI-BO sweep orders (0-based coordinates).
    #[getter]
    fn orders(&self) -> Vec<Vec<usize>> {
        self.inner.orders.iter().map(|o| o.order.clone()).collect()
    }

    #[getter]
    fn acquisition_evaluations(&self) -> u64 {
        self.inner.acquisition_evaluations
    }

    #[getter]
    fn wall_time_secs(&self) -> f64 {
        self.inner.wall_time_secs
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(json_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "RunResult(algorithm='{}', evaluations={}, final_best={:?})",
            self.inner.algorithm,
            self.inner.entries.len(),
            self.inner.final_best()
        )
    }
}

/// Closed-form expected improvement of `N(mu, sigma²)` below `f_best`.
#[pyfunction]
fn expected_improvement(mu: f64, sigma: f64, f_best: f64) -> f64 {
    ecibo::expected_improvement(mu, sigma, f_best)
}

/// Latin hypercube design of `n` points inside `bounds`.
#[pyfunction]
fn latin_hypercube(n: usize, bounds: Vec<(f64, f64)>, seed: u64) -> PyResult<Vec<Vec<f64>>> {
    let bounds = parse_bounds(bounds)?;
    let design = ecibo::latin_hypercube(n, &bounds, &mut RngStream::new(seed)).map_err(to_py)?;
    Ok(design.points)
}

/// Coordinates (0-based) sorted by descending value, lower index on ties.
#[pyfunction]
fn coordinate_order(maxima: Vec<f64>) -> Vec<usize> {
    order_from_maxima(&maxima).order
}

/// Paired two-sided signed-rank test. Returns a dict with `statistic`,
/// `p_value`, `verdict` ("better" means `a` is smaller), `n_effective` and
/// `method`.
#[pyfunction]
fn wilcoxon(py: Python<'_>, a: Vec<f64>, b: Vec<f64>) -> PyResult<Py<PyAny>> {
    let r = wilcoxon_signed_rank(&a, &b).map_err(to_py)?;
    let json = serde_json::to_string(&r).map_err(json_err)?;
    loads(py, &json)
}

fn loads(py: Python<'_>, json: &str) -> PyResult<Py<PyAny>> {
    Ok(py.import("json")?.call_method1("loads", (json,))?.unbind())
}

/// Run one optimizer on a built-in problem.
#[pyfunction]
#[pyo3(signature = (algorithm, problem, dim, n_init, n_max, seed = 0, doe_seed = None))]
#[allow(clippy::too_many_arguments)]
fn optimize(
    py: Python<'_>,
    algorithm: &str,
    problem: &str,
    dim: usize,
    n_init: usize,
    n_max: usize,
    seed: u64,
    doe_seed: Option<u64>,
) -> PyResult<PyRunResult> {
    let algorithm = parse_algorithm(algorithm)?;
    let id: ProblemId = problem.parse().map_err(to_py)?;
    let problem = ecibo::Problem::new(id, dim).map_err(to_py)?;
    let mut cfg = BoConfig::new(dim, n_init, n_max, seed);
    if let Some(s) = doe_seed {
        cfg = cfg.with_doe_seed(s);
    }
    let inner = py
        .detach(|| engine::run(algorithm, &problem, &cfg))
        .map_err(to_py)?;
    Ok(PyRunResult { inner })
}

/// Run a campaign, writing CSVs and `summary.json` to `out`. Returns the
/// summary as a dict.
#[pyfunction]
#[pyo3(signature = (problem, dim, algorithms, n_init, n_max, runs, seed, out, threads = 1))]
#[allow(clippy::too_many_arguments)]
fn run_experiment(
    py: Python<'_>,
    problem: &str,
    dim: usize,
    algorithms: Vec<String>,
    n_init: usize,
    n_max: usize,
    runs: usize,
    seed: u64,
    out: PathBuf,
    threads: usize,
) -> PyResult<Py<PyAny>> {
    let cfg = ExperimentConfig {
        problem: problem.parse().map_err(to_py)?,
        dim,
        algorithms: algorithms
            .iter()
            .map(|a| parse_algorithm(a))
            .collect::<PyResult<_>>()?,
        n_init,
        n_max,
        runs,
        seed,
        out,
        threads,
    };
    let summary = py.detach(|| ecibo::run_experiment(&cfg)).map_err(to_py)?;
    let json = serde_json::to_string(&summary).map_err(json_err)?;
    loads(py, &json)
}

/// Per-algorithm statistics recomputed from the CSVs in `directory`.
#[pyfunction]
fn summarize(py: Python<'_>, directory: PathBuf) -> PyResult<Py<PyAny>> {
    let stats = harness::summarize_dir(&directory).map_err(to_py)?;
    let json = serde_json::to_string(&stats).map_err(json_err)?;
    loads(py, &json)
}

/// Signed-rank comparison of every algorithm in `directory` against
/// `baseline`, as a list of dicts.
#[pyfunction]
fn compare(py: Python<'_>, directory: PathBuf, baseline: &str) -> PyResult<Py<PyAny>> {
    let rows = harness::compare_dir(&directory, parse_algorithm(baseline)?).map_err(to_py)?;
    let json = serde_json::to_string(&rows).map_err(json_err)?;
    loads(py, &json)
}

#[pymodule]
fn ecibo_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyProblem>()?;
    m.add_class::<PyGpModel>()?;
    m.add_class::<PyRunResult>()?;
    m.add_function(wrap_pyfunction!(expected_improvement, m)?)?;
    m.add_function(wrap_pyfunction!(latin_hypercube, m)?)?;
    m.add_function(wrap_pyfunction!(coordinate_order, m)?)?;
    m.add_function(wrap_pyfunction!(wilcoxon, m)?)?;
    m.add_function(wrap_pyfunction!(optimize, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(summarize, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add(
        "PROBLEMS",
        ProblemId::ALL
            .iter()
            .map(|p| p.as_str())
            .collect::<Vec<_>>(),
    )?;
    m.add(
        "ALGORITHMS",
        Algorithm::ALL
            .iter()
            .map(|a| a.as_str())
            .collect::<Vec<_>>(),
    )?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
