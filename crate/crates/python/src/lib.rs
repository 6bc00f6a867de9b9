//! Python bindings for `ffrestrict`.
//!
//! Structured results (reports, sweep documents) cross the boundary as JSON
//! and come back as plain `dict`s.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use ffrestrict::experiments::{self, ExperimentConfig, Mode, ResultsDocument};
use ffrestrict::measures::{self, PointSet};
use ffrestrict::restriction::{self, IterOptions};
use ffrestrict::{stein_tomas, Error, Exponent};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Invariant(_) => PyRuntimeError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for ffrestrict::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

fn exponent(q: f64) -> PyResult<Exponent> {
    if q.is_infinite() && q > 0.0 {
        Ok(Exponent::Infinite)
    } else {
        Exponent::lebesgue(q).py()
    }
}

fn json_obj<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

#[pyfunction]
fn is_prime(m: u64) -> bool {
    ffrestrict::is_prime(m)
}

/// Forward transform of a flat value list in canonical index order.
#[pyfunction]
fn dft(p: u64, n: usize, values: Vec<Complex64>) -> PyResult<Vec<Complex64>> {
    let field = ffrestrict::Field::new(p).py()?;
    let f = ffrestrict::GridFn::from_values(&field, n, values).py()?;
    Ok(f.dft().values().to_vec())
}

#[pyfunction]
fn idft(p: u64, n: usize, values: Vec<Complex64>) -> PyResult<Vec<Complex64>> {
    let field = ffrestrict::Field::new(p).py()?;
    let f = ffrestrict::GridFn::from_values(&field, n, values).py()?;
    Ok(f.idft().values().to_vec())
}

#[pyfunction]
fn point_to_index(p: u64, coords: Vec<u64>) -> PyResult<usize> {
    let field = ffrestrict::Field::new(p).py()?;
    let pt = ffrestrict::Point::new(coords, &field).py()?;
    field.point_to_index(&pt).py()
}

#[pyfunction]
fn index_to_point(p: u64, n: usize, index: usize) -> PyResult<Vec<u64>> {
    let field = ffrestrict::Field::new(p).py()?;
    Ok(field.index_to_point(index, n).py()?.coords().to_vec())
}

#[pyfunction]
fn critical_q(n: usize, alpha: f64, beta: f64) -> PyResult<f64> {
    restriction::critical_q(n, alpha, beta).py()
}

#[pyfunction]
fn sharpness_tau(n: usize, alpha: f64, beta: f64, q: f64) -> PyResult<f64> {
    restriction::sharpness_tau(n, alpha, beta, q).py()
}

/// `float('inf')` is accepted for `p_exp` and returned for the `p = 1` case.
#[pyfunction]
fn necessary_q(p_exp: f64, n: usize, alpha: f64, beta: f64) -> PyResult<f64> {
    Ok(restriction::necessary_q(exponent(p_exp)?, n, alpha, beta).py()?.as_f64())
}

#[pyfunction]
fn corollary_q_bound(beta: f64, n: usize) -> PyResult<f64> {
    restriction::corollary_q_bound(beta, n).py()
}

#[pyfunction]
fn primes_in_range(lo: u64, hi: u64, count: usize) -> PyResult<Vec<u64>> {
    experiments::primes_in_range(lo, hi, count).py()
}

/// `(slope, intercept, r_squared)` of a log-log fit.
#[pyfunction]
fn fit_loglog_slope(points: Vec<(f64, f64)>) -> PyResult<(f64, f64, f64)> {
    let fit = experiments::fit_loglog_slope(&points).py()?;
    Ok((fit.slope, fit.intercept, fit.r_squared))
}

/// Runs a sharpness or boundedness sweep from a JSON config and returns the
/// results document.
#[pyfunction]
fn run_sweep<'py>(py: Python<'py>, config_json: &str) -> PyResult<Bound<'py, PyAny>> {
    let config: ExperimentConfig =
        serde_json::from_str(config_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let start = std::time::Instant::now();
    let report = py
        .detach(|| match config.mode {
            Mode::Sharpness => experiments::run_sharpness(&config),
            Mode::Boundedness => experiments::run_boundedness(&config),
            other => Err(Error::Config(format!("run_sweep handles sharpness and boundedness, not {other:?}"))),
        })
        .py()?;
    let doc = ResultsDocument::new(&config, report, start.elapsed().as_secs_f64());
    json_obj(py, &doc)
}

/// CSV text for a results document produced by `run_sweep`.
#[pyfunction]
fn sweep_csv(py: Python<'_>, doc: &Bound<'_, PyAny>) -> PyResult<String> {
    let text: String = py.import("json")?.call_method1("dumps", (doc,))?.extract()?;
    let doc = experiments::parse_results(&text).py()?;
    Ok(experiments::sweep_csv(&doc.report))
}

/// A set of points of `F_p^n`, stored as sorted canonical indices.
#[pyclass(name = "PointSet", frozen)]
struct PyPointSet {
    inner: PointSet,
}

#[pymethods]
impl PyPointSet {
    #[staticmethod]
    fn cube(p: u64, n: usize, alpha: f64, beta: f64) -> PyResult<Self> {
        let field = ffrestrict::Field::new(p).py()?;
        Ok(PyPointSet {
            inner: measures::cube_set(&field, n, alpha, beta).py()?,
        })
    }

    #[staticmethod]
    fn random(p: u64, n: usize, alpha: f64, seed: u64) -> PyResult<Self> {
        let field = ffrestrict::Field::new(p).py()?;
        Ok(PyPointSet {
            inner: measures::random_set(&field, n, alpha, seed).py()?,
        })
    }

    #[staticmethod]
    fn paraboloid(p: u64, n: usize) -> PyResult<Self> {
        let field = ffrestrict::Field::new(p).py()?;
        Ok(PyPointSet {
            inner: measures::paraboloid_set(&field, n).py()?,
        })
    }

    #[pyo3(signature = (threshold_ratio = measures::DEFAULT_BOHR_RATIO))]
    fn bohr(&self, threshold_ratio: f64) -> PyResult<Self> {
        Ok(PyPointSet {
            inner: measures::bohr_set(&self.inner, threshold_ratio).py()?,
        })
    }

    #[getter]
    fn p(&self) -> u64 {
        self.inner.p()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn members(&self) -> Vec<usize> {
        self.inner.members().to_vec()
    }

    /// `1̂_S` in canonical index order.
    fn spectrum(&self) -> Vec<Complex64> {
        self.inner.indicator().dft().values().to_vec()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __contains__(&self, index: usize) -> bool {
        self.inner.contains(index)
    }

    fn __repr__(&self) -> String {
        format!("PointSet(p={}, n={}, size={})", self.inner.p(), self.inner.dim(), self.inner.len())
    }
}

/// A nonnegative measure on `F_p^n`.
#[pyclass(name = "Measure", frozen)]
struct PyMeasure {
    inner: measures::Measure,
}

#[pymethods]
impl PyMeasure {
    #[staticmethod]
    fn uniform(p: u64, n: usize) -> PyResult<Self> {
        let field = ffrestrict::Field::new(p).py()?;
        Ok(PyMeasure {
            inner: measures::uniform_measure(&field, n).py()?,
        })
    }

    #[staticmethod]
    fn atom(p: u64, n: usize, index: usize) -> PyResult<Self> {
        let field = ffrestrict::Field::new(p).py()?;
        Ok(PyMeasure {
            inner: measures::atom_measure(&field, n, index).py()?,
        })
    }

    #[staticmethod]
    fn indicator(set: &PyPointSet) -> PyResult<Self> {
        Ok(PyMeasure {
            inner: measures::indicator_measure(&set.inner).py()?,
        })
    }

    /// `(1_E + 1_A)/(|E| + |A|)` with `A` the cube and `E` a random set.
    #[staticmethod]
    fn combined(p: u64, n: usize, alpha: f64, beta: f64, seed: u64) -> PyResult<Self> {
        let field = ffrestrict::Field::new(p).py()?;
        let a = measures::cube_set(&field, n, alpha, beta).py()?;
        let e = measures::random_set(&field, n, alpha, seed).py()?;
        Ok(PyMeasure {
            inner: measures::combined_measure(&a, &e).py()?,
        })
    }

    #[getter]
    fn p(&self) -> u64 {
        self.inner.p()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.inner.weights().to_vec()
    }

    #[getter]
    fn support_size(&self) -> usize {
        self.inner.support_size()
    }

    #[getter]
    fn meta<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        json_obj(py, self.inner.meta())
    }

    fn fourier(&self) -> Vec<Complex64> {
        self.inner.fourier().values().to_vec()
    }

    fn spectral_report<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        json_obj(py, &measures::spectral_report(&self.inner).py()?)
    }

    fn kernel_bounds<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let report = measures::spectral_report(&self.inner).py()?;
        json_obj(py, &stein_tomas::kernel_bounds(&self.inner, &report).py()?)
    }

    /// `‖(fμ)^‖_q / ‖f‖_{L^p(μ)}` for `f` given in canonical index order.
    fn extension_ratio(&self, f: Vec<Complex64>, p_exp: f64, q: f64) -> PyResult<f64> {
        let g = ffrestrict::GridFn::from_values(self.inner.field(), self.inner.dim(), f).py()?;
        restriction::extension_ratio(&g, &self.inner, exponent(p_exp)?, exponent(q)?).py()
    }

    fn rstar_2_2_exact<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let est = py.detach(|| restriction::rstar_2_2_exact(&self.inner)).py()?;
        json_obj(py, &est.summary())
    }

    #[pyo3(signature = (q, restarts = 8, seed = 0, max_iterations = 500, tolerance = 1e-10))]
    fn rstar_lower_iterate<'py>(
        &self,
        py: Python<'py>,
        q: f64,
        restarts: usize,
        seed: u64,
        max_iterations: usize,
        tolerance: f64,
    ) -> PyResult<Bound<'py, PyAny>> {
        let q = exponent(q)?;
        let opts = IterOptions {
            max_iterations,
            tolerance,
            restarts,
            seed,
        };
        let est = py
            .detach(|| restriction::rstar_lower_iterate_with(&self.inner, q, &opts))
            .py()?;
        json_obj(py, &est.summary())
    }

    fn rstar_witness_cube<'py>(&self, py: Python<'py>, q: f64) -> PyResult<Bound<'py, PyAny>> {
        let est = restriction::rstar_witness_cube(&self.inner, exponent(q)?).py()?;
        json_obj(py, &est.summary())
    }

    fn __repr__(&self) -> String {
        format!(
            "Measure(p={}, n={}, support={}, kind={:?})",
            self.inner.p(),
            self.inner.dim(),
            self.inner.support_size(),
            self.inner.meta().kind
        )
    }
}

#[pymodule]
fn pyffrestrict(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyPointSet>()?;
    m.add_class::<PyMeasure>()?;
    m.add_function(wrap_pyfunction!(is_prime, m)?)?;
    m.add_function(wrap_pyfunction!(dft, m)?)?;
    m.add_function(wrap_pyfunction!(idft, m)?)?;
    m.add_function(wrap_pyfunction!(point_to_index, m)?)?;
    m.add_function(wrap_pyfunction!(index_to_point, m)?)?;
    m.add_function(wrap_pyfunction!(critical_q, m)?)?;
    m.add_function(wrap_pyfunction!(sharpness_tau, m)?)?;
    m.add_function(wrap_pyfunction!(necessary_q, m)?)?;
    m.add_function(wrap_pyfunction!(corollary_q_bound, m)?)?;
    m.add_function(wrap_pyfunction!(primes_in_range, m)?)?;
    m.add_function(wrap_pyfunction!(fit_loglog_slope, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_csv, m)?)?;
    Ok(())
}
