//! Python bindings: datasets, training, prediction, margin statistics and
//! leave-one-out bounds.

use std::collections::BTreeMap;
use std::path::PathBuf;

use odm::analysis::{margin_report, model_loo_bound, BoundTerms};
use odm::boxqp::SolverOptions;
use odm::data::{self, parse_libsvm, split};
use odm::kernel::{avg_pairwise_distance, KernelSpec, DEFAULT_DISTANCE_CAP};
use odm::model::{Classifier, Model};
use odm::odm_dual::{FeatureMap, OdmParams, OdmlParams, Params, Variant};
use odm::odm_linear::{lipschitz_estimate, SvrgOptions};
use odm::selection::{accuracy, cv_train, fit_model, FitConfig, GridSpec, SolverChoice};
use odm::{OdmError, SparseVector};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(odm_py, TrainingError, PyException);

fn to_py(e: OdmError) -> PyErr {
    match e {
        OdmError::Io(io) => PyIOError::new_err(io.to_string()),
        e @ (OdmError::InvalidParameter(_)
        | OdmError::Parse { .. }
        | OdmError::InvalidDataset(_)
        | OdmError::DimensionMismatch { .. }
        | OdmError::ModelFormat(_)
        | OdmError::MissingDualSolution) => PyValueError::new_err(e.to_string()),
        e => TrainingError::new_err(e.to_string()),
    }
}

/// A feature row: dense list (feature 1 first) or `{index: value}` with
/// 1-based indices.
#[derive(FromPyObject)]
enum Row {
    Sparse(BTreeMap<usize, f64>),
    Dense(Vec<f64>),
}

impl Row {
    fn into_sparse(self) -> PyResult<SparseVector> {
        match self {
            Row::Dense(v) => {
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(PyValueError::new_err("feature values must be finite"));
                }
                Ok(SparseVector::from_dense(&v))
            }
            Row::Sparse(m) => SparseVector::new(m.into_iter().filter(|e| e.1 != 0.0).collect()).map_err(to_py),
        }
    }
}

fn rows_to_sparse(rows: Vec<Row>) -> PyResult<Vec<SparseVector>> {
    rows.into_iter().map(Row::into_sparse).collect()
}

/// Labelled instances in LIBSVM's sparse representation.
#[pyclass(module = "odm_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct Dataset {
    inner: data::Dataset,
}

#[pymethods]
impl Dataset {
    /// Rows are dense lists or `{index: value}` dicts; labels are ±1 (0 reads as −1).
    #[new]
    fn new(rows: Vec<Row>, labels: Vec<f64>) -> PyResult<Self> {
        let labels = labels.into_iter().map(|y| if y > 0.0 { 1.0 } else { -1.0 }).collect();
        let inner = data::Dataset::new(rows_to_sparse(rows)?, labels).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_libsvm(text: &str) -> PyResult<Self> {
        Ok(Self { inner: parse_libsvm(text).map_err(to_py)? })
    }

    fn to_libsvm(&self) -> String {
        self.inner.to_libsvm()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn labels(&self) -> Vec<f64> {
        self.inner.labels().to_vec()
    }

    /// `(train, test)` with `round(fraction * m)` training instances.
    #[pyo3(signature = (fraction = 0.5, seed = 0))]
    fn split(&self, fraction: f64, seed: u64) -> PyResult<(Dataset, Dataset)> {
        let s = split(&self.inner, fraction, seed).map_err(to_py)?;
        Ok((Dataset { inner: s.train }, Dataset { inner: s.test }))
    }

    /// Mean pairwise distance, the reference scale for RBF widths.
    #[pyo3(signature = (normalize = true, seed = 0))]
    fn mean_pairwise_distance(&self, normalize: bool, seed: u64) -> PyResult<f64> {
        let d = FeatureMap::fit(&self.inner, normalize, None).apply(&self.inner);
        avg_pairwise_distance(&d, DEFAULT_DISTANCE_CAP, seed).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        let (pos, neg) = self.inner.class_counts();
        format!("Dataset(m={}, dim={}, positive={pos}, negative={neg})", self.inner.len(), self.inner.dim())
    }
}

/// A trained classifier (kernel or linear).
#[pyclass(name = "Model", module = "odm_py", frozen)]
struct PyModel {
    inner: Model,
}

#[pymethods]
impl PyModel {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self { inner: Model::load(path).map_err(to_py)? })
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(Self { inner: Model::from_text(text).map_err(to_py)? })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.inner.save(path).map_err(to_py)
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    #[getter]
    fn variant(&self) -> &'static str {
        self.inner.variant().name()
    }

    #[getter]
    fn kernel(&self) -> &'static str {
        self.inner.kernel().name()
    }

    #[getter]
    fn width(&self) -> Option<f64> {
        match self.inner.kernel() {
            KernelSpec::Rbf { width } => Some(width),
            KernelSpec::Linear => None,
        }
    }

    #[getter]
    fn params<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        for (k, v) in self.inner.params().named_values() {
            d.set_item(k, v)?;
        }
        Ok(d)
    }

    #[getter]
    fn objective(&self) -> f64 {
        self.inner.objective()
    }

    #[getter]
    fn support_count(&self) -> usize {
        self.inner.support_count()
    }

    /// Kernel models only; linear (SVRG) models report `None`.
    #[getter]
    fn converged(&self) -> Option<bool> {
        match &self.inner {
            Model::Kernel(k) => Some(k.summary.converged),
            Model::Linear(_) => None,
        }
    }

    #[getter]
    fn weight_norm(&self) -> f64 {
        self.inner.weight_norm()
    }

    fn decision(&self, row: Row) -> PyResult<f64> {
        Ok(self.inner.decision(&row.into_sparse()?))
    }

    fn decision_values(&self, py: Python<'_>, data: &Dataset) -> Vec<f64> {
        py.detach(|| data.inner.instances().iter().map(|x| self.inner.decision(x)).collect())
    }

    /// ±1 labels; a decision of exactly 0 predicts +1.
    fn predict(&self, py: Python<'_>, data: &Dataset) -> Vec<f64> {
        py.detach(|| data.inner.instances().iter().map(|x| self.inner.predict_label(x)).collect())
    }

    fn predict_rows(&self, rows: Vec<Row>) -> PyResult<Vec<f64>> {
        Ok(rows_to_sparse(rows)?.iter().map(|x| self.inner.predict_label(x)).collect())
    }

    fn accuracy(&self, py: Python<'_>, data: &Dataset) -> f64 {
        py.detach(|| accuracy(&self.inner, &data.inner))
    }

    /// Margin mean and variance plus the cumulative curve of normalized
    /// margins as `[(margin, fraction), ...]`.
    fn margins<'py>(&self, py: Python<'py>, data: &Dataset) -> PyResult<Bound<'py, PyDict>> {
        let r = margin_report(&self.inner, &data.inner).map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("margins", r.margins)?;
        d.set_item("normalized_margins", r.normalized_margins)?;
        d.set_item("mean", r.mean)?;
        d.set_item("variance", r.variance)?;
        d.set_item("weight_norm", r.weight_norm)?;
        d.set_item("zero_norm", r.zero_norm)?;
        d.set_item("curve", r.curve)?;
        Ok(d)
    }

    /// Leave-one-out bound from the stored dual solution (train with
    /// `keep_alpha=True`).
    fn loo_bound<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let r = model_loo_bound(&self.inner).map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("variant", r.variant.name())?;
        d.set_item("m", r.m)?;
        d.set_item("bound", r.bound_value)?;
        match r.terms {
            BoundTerms::Odml { free_sum, free_count, bounded_count } => {
                d.set_item("free_sum", free_sum)?;
                d.set_item("free_count", free_count)?;
                d.set_item("bounded_count", bounded_count)?;
            }
            BoundTerms::Odm { zeta_sum, beta_sum, zeta_count, beta_count, band_term } => {
                d.set_item("zeta_sum", zeta_sum)?;
                d.set_item("beta_sum", beta_sum)?;
                d.set_item("zeta_count", zeta_count)?;
                d.set_item("beta_count", beta_count)?;
                d.set_item("band_term", band_term)?;
            }
        }
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!("Model(variant={}, kernel={}, support={})", self.variant(), self.kernel(), self.support_count())
    }
}

fn parse_variant(s: &str) -> PyResult<Variant> {
    s.parse().map_err(to_py)
}

fn params_for(
    variant: Variant,
    c: Option<f64>,
    lambda1: Option<f64>,
    lambda2: Option<f64>,
    c1: Option<f64>,
    c2: Option<f64>,
    d: Option<f64>,
) -> PyResult<Params> {
    let need = |name: &str, v: Option<f64>| v.ok_or_else(|| PyValueError::new_err(format!("{} needs {name}", variant.name())));
    let p = match variant {
        Variant::Svm => Params::Svm { c: need("c", c)? },
        Variant::Odml => Params::Odml(OdmlParams::new(need("c", c)?, need("lambda1", lambda1)?, need("lambda2", lambda2)?).map_err(to_py)?),
        Variant::Odm => Params::Odm(OdmParams::new(need("c1", c1)?, need("c2", c2)?, need("d", d)?).map_err(to_py)?),
    };
    p.validate().map_err(to_py)?;
    Ok(p)
}

struct SolverSettings {
    solver: String,
    tol: f64,
    max_passes: usize,
    eta: Option<f64>,
    stages: usize,
    seed: u64,
    normalize: bool,
    bias: Option<f64>,
    keep_alpha: bool,
}

fn fit_config(s: &SolverSettings, d: &data::Dataset, params: &[Params]) -> PyResult<FitConfig> {
    let solver = match s.solver.as_str() {
        "dcd" => SolverChoice::Dcd(SolverOptions { tolerance: s.tol, max_passes: s.max_passes, seed: s.seed, shuffle: true }),
        "svrg" => {
            if s.keep_alpha {
                return Err(PyValueError::new_err("keep_alpha needs the dcd solver"));
            }
            let eta = s.eta.unwrap_or_else(|| {
                let mapped = FeatureMap::fit(d, s.normalize, s.bias).apply(d);
                0.1 / params.iter().map(|p| lipschitz_estimate(&mapped, p)).fold(1.0, f64::max)
            });
            SolverChoice::Svrg(SvrgOptions { eta, stages: s.stages, seed: s.seed, ..Default::default() })
        }
        other => return Err(PyValueError::new_err(format!("unknown solver '{other}' (dcd or svrg)"))),
    };
    Ok(FitConfig { solver, normalize: s.normalize, bias: s.bias, keep_alpha: s.keep_alpha })
}

/// Train one model. `width=None` with `kernel="rbf"` uses the mean pairwise
/// distance of the (normalized) training set.
#[pyfunction]
#[pyo3(signature = (
    data, variant, kernel = "linear", *, c = None, lambda1 = None, lambda2 = None, c1 = None, c2 = None, d = None,
    width = None, solver = "dcd", tol = 1e-6, max_passes = 5000, eta = None, stages = 30, seed = 0,
    normalize = true, bias = None, keep_alpha = false
))]
#[allow(clippy::too_many_arguments)]
fn train(
    py: Python<'_>,
    data: &Dataset,
    variant: &str,
    kernel: &str,
    c: Option<f64>,
    lambda1: Option<f64>,
    lambda2: Option<f64>,
    c1: Option<f64>,
    c2: Option<f64>,
    d: Option<f64>,
    width: Option<f64>,
    solver: &str,
    tol: f64,
    max_passes: usize,
    eta: Option<f64>,
    stages: usize,
    seed: u64,
    normalize: bool,
    bias: Option<f64>,
    keep_alpha: bool,
) -> PyResult<PyModel> {
    let variant = parse_variant(variant)?;
    let params = params_for(variant, c, lambda1, lambda2, c1, c2, d)?;
    let ds = &data.inner;
    let spec = match (kernel, width) {
        ("linear", None) => KernelSpec::Linear,
        ("linear", Some(_)) => return Err(PyValueError::new_err("width applies to the rbf kernel only")),
        ("rbf", Some(w)) => KernelSpec::rbf(w).map_err(to_py)?,
        ("rbf", None) => {
            let mapped = FeatureMap::fit(ds, normalize, None).apply(ds);
            KernelSpec::rbf(avg_pairwise_distance(&mapped, DEFAULT_DISTANCE_CAP, seed).map_err(to_py)?).map_err(to_py)?
        }
        (other, _) => return Err(PyValueError::new_err(format!("unknown kernel '{other}' (linear or rbf)"))),
    };
    let settings = SolverSettings { solver: solver.to_string(), tol, max_passes, eta, stages, seed, normalize, bias, keep_alpha };
    let cfg = fit_config(&settings, ds, &[params])?;
    let model = py.detach(|| fit_model(ds, &params, spec, &cfg)).map_err(to_py)?;
    Ok(PyModel { inner: model })
}

/// Grid search by k-fold cross-validation on `data`, then refit of the
/// winner. Returns `(model, best_mean_accuracy)`.
#[pyfunction]
#[pyo3(signature = (data, variant, kernel = "linear", *, grid = "coarse", folds = 5, seed = 0, solver = "dcd", tol = 1e-6, max_passes = 5000, normalize = true, bias = None))]
#[allow(clippy::too_many_arguments)]
fn cross_validate(
    py: Python<'_>,
    data: &Dataset,
    variant: &str,
    kernel: &str,
    grid: &str,
    folds: usize,
    seed: u64,
    solver: &str,
    tol: f64,
    max_passes: usize,
    normalize: bool,
    bias: Option<f64>,
) -> PyResult<(PyModel, f64)> {
    let variant = parse_variant(variant)?;
    let rbf = match kernel {
        "linear" => false,
        "rbf" => true,
        other => return Err(PyValueError::new_err(format!("unknown kernel '{other}' (linear or rbf)"))),
    };
    let spec = match grid {
        "coarse" => GridSpec::coarse(),
        "paper" => GridSpec::paper(),
        other => return Err(PyValueError::new_err(format!("unknown grid '{other}' (coarse or paper)"))),
    };
    let candidates = spec.params(variant).map_err(to_py)?;
    let settings = SolverSettings {
        solver: solver.to_string(),
        tol,
        max_passes,
        eta: None,
        stages: 30,
        seed,
        normalize,
        bias,
        keep_alpha: false,
    };
    let cfg = fit_config(&settings, &data.inner, &candidates)?;
    let (cv, model) = py.detach(|| cv_train(&data.inner, variant, rbf, &spec, folds, seed, &cfg)).map_err(to_py)?;
    Ok((PyModel { inner: model }, cv.best_score().mean_accuracy))
}

#[pyfunction]
fn read_libsvm(path: PathBuf) -> PyResult<Dataset> {
    Ok(Dataset { inner: data::read_libsvm(path).map_err(to_py)? })
}

#[pymodule]
fn odm_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Dataset>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    m.add_function(wrap_pyfunction!(cross_validate, m)?)?;
    m.add_function(wrap_pyfunction!(read_libsvm, m)?)?;
    m.add("TrainingError", m.py().get_type::<TrainingError>())?;
    Ok(())
}
