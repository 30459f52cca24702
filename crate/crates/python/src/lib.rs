//! Python bindings for `knn-nmi`.
//!
//! Samples cross the boundary as lists of rows (`list[list[float]]`);
//! NumPy arrays convert through `.tolist()`.

use pyo3::exceptions::{PyOSError, PyOverflowError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use knn_nmi::harness;
use knn_nmi::scaling;
use knn_nmi::special;
use knn_nmi::{Backend, Dataset, Error, GaussianSpec, NmiValue, StudentTSpec};

fn to_py(err: Error) -> PyErr {
    match err {
        Error::NonFiniteNormalization { .. } => PyOverflowError::new_err(err.to_string()),
        Error::Io(_) => PyOSError::new_err(err.to_string()),
        Error::Invariant(_) => PyRuntimeError::new_err(err.to_string()),
        _ => PyValueError::new_err(err.to_string()),
    }
}

fn backend(name: &str) -> PyResult<Backend> {
    name.parse().map_err(to_py)
}

fn dataset(x: Vec<Vec<f64>>, y: Vec<Vec<f64>>) -> PyResult<Dataset> {
    Dataset::from_rows(&x, &y).map_err(to_py)
}

type Rows = Vec<Vec<f64>>;

fn rows(data: &Dataset) -> (Rows, Rows) {
    let x = (0..data.n()).map(|i| data.x_row(i).to_vec()).collect();
    let y = (0..data.n()).map(|i| data.y_row(i).to_vec()).collect();
    (x, y)
}

/// Estimates for one dataset and backend, in nats. `nmi` is `None` when the
/// marginal entropy product is not positive.
#[pyclass(name = "EstimateReport", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
pub struct PyEstimateReport {
    mi_ksg: f64,
    h_x: f64,
    h_y: f64,
    h_xy: f64,
    mi_from_entropies: f64,
    nmi: Option<f64>,
    ln_v: f64,
    backend: String,
    n_samples: usize,
    k: usize,
}

#[pymethods]
impl PyEstimateReport {
    fn __repr__(&self) -> String {
        format!(
            "EstimateReport(backend='{}', mi_ksg={}, h_x={}, h_y={}, h_xy={}, nmi={})",
            self.backend,
            self.mi_ksg,
            self.h_x,
            self.h_y,
            self.h_xy,
            self.nmi.map_or("None".to_string(), |v| v.to_string())
        )
    }
}

/// `ln V` from one backend.
#[pyclass(name = "NormalizationResult", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
pub struct PyNormalizationResult {
    ln_v: f64,
    backend: String,
    finite: bool,
    epsilon_max: f64,
    d_joint: usize,
}

#[pymethods]
impl PyNormalizationResult {
    fn __repr__(&self) -> String {
        format!(
            "NormalizationResult(backend='{}', ln_v={}, finite={})",
            self.backend, self.ln_v, self.finite
        )
    }
}

#[pyclass(name = "TruthRecord", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
pub struct PyTruthRecord {
    mi_true: f64,
    h_marginal_true: f64,
    nmi_true: Option<f64>,
}

impl From<knn_nmi::TruthRecord> for PyTruthRecord {
    fn from(t: knn_nmi::TruthRecord) -> Self {
        PyTruthRecord {
            mi_true: t.mi_true,
            h_marginal_true: t.h_marginal_true,
            nmi_true: t.nmi_true,
        }
    }
}

#[pyfunction]
fn digamma(x: f64) -> PyResult<f64> {
    special::digamma(x).map_err(to_py)
}

#[pyfunction]
fn ln_gamma(x: f64) -> PyResult<f64> {
    special::ln_gamma(x).map_err(to_py)
}

/// Returns `(epsilon, n_x, n_y)`.
#[pyfunction]
fn knn_radii(
    x: Vec<Vec<f64>>,
    y: Vec<Vec<f64>>,
    k: usize,
) -> PyResult<(Vec<f64>, Vec<usize>, Vec<usize>)> {
    let r = knn_nmi::compute_knn_radii(&dataset(x, y)?, k).map_err(to_py)?;
    Ok((r.epsilon, r.n_x, r.n_y))
}

#[pyfunction]
#[pyo3(signature = (epsilon, d_joint, backend = "proposed"))]
fn ln_v(epsilon: Vec<f64>, d_joint: usize, backend: &str) -> PyResult<PyNormalizationResult> {
    let r = scaling::normalize(self::backend(backend)?, &epsilon, d_joint).map_err(to_py)?;
    Ok(PyNormalizationResult {
        ln_v: r.ln_v,
        backend: r.backend.to_string(),
        finite: r.finite,
        epsilon_max: r.epsilon_max,
        d_joint: r.d_joint,
    })
}

/// Returns `(epsilon_tilde, mean_ln_epsilon_tilde)`; raises `OverflowError`
/// when the backend's `ln V` is not finite.
#[pyfunction]
#[pyo3(signature = (epsilon, d_joint, backend = "proposed"))]
fn scale_radii(epsilon: Vec<f64>, d_joint: usize, backend: &str) -> PyResult<(Vec<f64>, f64)> {
    let norm = scaling::normalize(self::backend(backend)?, &epsilon, d_joint).map_err(to_py)?;
    let s = scaling::scale_radii(&epsilon, &norm).map_err(to_py)?;
    Ok((s.epsilon_tilde, s.mean_ln_epsilon_tilde))
}

#[pyfunction]
#[pyo3(signature = (x, y, k = 5, backend = "proposed"))]
fn estimate(
    py: Python<'_>,
    x: Vec<Vec<f64>>,
    y: Vec<Vec<f64>>,
    k: usize,
    backend: &str,
) -> PyResult<PyEstimateReport> {
    let backend = self::backend(backend)?;
    let data = dataset(x, y)?;
    let rep = py
        .detach(|| knn_nmi::estimate(&data, k, backend))
        .map_err(to_py)?;
    Ok(PyEstimateReport {
        mi_ksg: rep.mi_ksg,
        h_x: rep.h_x,
        h_y: rep.h_y,
        h_xy: rep.h_xy,
        mi_from_entropies: rep.mi_from_entropies,
        nmi: match rep.nmi {
            NmiValue::Defined(v) => Some(v),
            NmiValue::Undefined { .. } => None,
        },
        ln_v: rep.ln_v,
        backend: rep.backend.to_string(),
        n_samples: rep.n_samples,
        k: rep.k,
    })
}

/// Returns `(x, y)` as lists of rows.
#[pyfunction]
#[pyo3(signature = (d, rho, n = 10_000, seed = 0))]
fn generate_gaussian(d: usize, rho: f64, n: usize, seed: u64) -> PyResult<(Rows, Rows)> {
    let data = knn_nmi::generate_gaussian(&GaussianSpec { d, rho, n, seed }).map_err(to_py)?;
    Ok(rows(&data))
}

#[pyfunction]
#[pyo3(signature = (d, nu, n = 10_000, seed = 0))]
fn generate_student_t(d: usize, nu: f64, n: usize, seed: u64) -> PyResult<(Rows, Rows)> {
    let data = knn_nmi::generate_student_t(&StudentTSpec { d, nu, n, seed }).map_err(to_py)?;
    Ok(rows(&data))
}

#[pyfunction]
fn gaussian_truth(d: usize, rho: f64) -> PyResult<PyTruthRecord> {
    knn_nmi::gaussian_truth(d, rho)
        .map(Into::into)
        .map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (d, nu, latent_mi = 0.0))]
fn student_t_truth(d: usize, nu: f64, latent_mi: f64) -> PyResult<PyTruthRecord> {
    knn_nmi::student_t_truth(d, nu, latent_mi)
        .map(Into::into)
        .map_err(to_py)
}

type StabilityTuple = (usize, String, Option<f64>, bool);

/// Rows of `(d_joint, backend, ln_v or None, finite)`.
#[pyfunction]
fn stability_profile(epsilon: Vec<f64>, dims: Vec<usize>) -> PyResult<Vec<StabilityTuple>> {
    let rows = harness::stability_profile(&epsilon, &dims).map_err(to_py)?;
    Ok(rows
        .into_iter()
        .map(|r| (r.d_joint, r.backend.to_string(), r.ln_v, r.finite))
        .collect())
}

#[pymodule]
#[pyo3(name = "knn_nmi")]
pub fn knn_nmi_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyEstimateReport>()?;
    m.add_class::<PyNormalizationResult>()?;
    m.add_class::<PyTruthRecord>()?;
    m.add_function(wrap_pyfunction!(digamma, m)?)?;
    m.add_function(wrap_pyfunction!(ln_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(knn_radii, m)?)?;
    m.add_function(wrap_pyfunction!(ln_v, m)?)?;
    m.add_function(wrap_pyfunction!(scale_radii, m)?)?;
    m.add_function(wrap_pyfunction!(estimate, m)?)?;
    m.add_function(wrap_pyfunction!(generate_gaussian, m)?)?;
    m.add_function(wrap_pyfunction!(generate_student_t, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_truth, m)?)?;
    m.add_function(wrap_pyfunction!(student_t_truth, m)?)?;
    m.add_function(wrap_pyfunction!(stability_profile, m)?)?;
    Ok(())
}
