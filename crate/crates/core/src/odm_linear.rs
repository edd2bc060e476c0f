//! Linear-kernel primal objectives, exact and stochastic gradients, and the
//! SVRG trainer.
//!
//! `f_L(w) = ½‖w‖² + (λ₁/m) Σ(wᵀx_i)² − (λ₁/m²)(Σ y_i wᵀx_i)² − (λ₂/m) Σ y_i wᵀx_i
//!          + (C/m) Σ max(0, 1 − y_i wᵀx_i)`
//!
//! `f_O(w) = ½‖w‖² + (C₁/m) Σ max(0, 1 − D − y_i wᵀx_i)² + (C₂/m) Σ max(0, y_i wᵀx_i − 1 − D)²`
//!
//! The hinge subgradient uses the strict set `{i : y_i wᵀx_i < 1}`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::{Dataset, SparseVector};
use crate::error::{OdmError, Result};
use crate::odm_dual::{FeatureMap, OdmParams, OdmlParams, Params, Variant};

fn check_dim(w: &[f64], d: &Dataset) -> Result<()> {
    if w.len() < d.dim() {
        return Err(OdmError::DimensionMismatch { expected: d.dim(), found: w.len() });
    }
    Ok(())
}

fn as_odml(params: &Params) -> Option<OdmlParams> {
    match *params {
        Params::Svm { c } => Some(OdmlParams { c, lambda1: 0.0, lambda2: 0.0 }),
        Params::Odml(p) => Some(p),
        Params::Odm(_) => None,
    }
}

fn norm_sq(w: &[f64]) -> f64 {
    w.iter().map(|v| v * v).sum()
}

/// `Xy = Σ y_i x_i` as a dense vector of length `dim`.
fn label_weighted_sum(d: &Dataset, dim: usize) -> Vec<f64> {
    let mut xy = vec![0.0; dim];
    for (x, y) in d.iter() {
        x.axpy_into(y, &mut xy);
    }
    xy
}

pub fn objective_odml_linear(w: &[f64], d: &Dataset, p: &OdmlParams) -> Result<f64> {
    check_dim(w, d)?;
    let m = d.len() as f64;
    let (mut sq, mut mean_sum, mut hinge) = (0.0, 0.0, 0.0);
    for (x, y) in d.iter() {
        let s = x.dot_dense(w);
        sq += s * s;
        mean_sum += y * s;
        hinge += (1.0 - y * s).max(0.0);
    }
    Ok(0.5 * norm_sq(w) + p.lambda1 / m * sq - p.lambda1 / (m * m) * mean_sum * mean_sum - p.lambda2 / m * mean_sum
        + p.c / m * hinge)
}

pub fn objective_odm_linear(w: &[f64], d: &Dataset, p: &OdmParams) -> Result<f64> {
    check_dim(w, d)?;
    let m = d.len() as f64;
    let (mut below, mut above) = (0.0, 0.0);
    for (x, y) in d.iter() {
        let margin = y * x.dot_dense(w);
        let lo = (1.0 - p.d - margin).max(0.0);
        let hi = (margin - 1.0 - p.d).max(0.0);
        below += lo * lo;
        above += hi * hi;
    }
    Ok(0.5 * norm_sq(w) + p.c1 / m * below + p.c2 / m * above)
}

pub fn full_gradient_odml(w: &[f64], d: &Dataset, p: &OdmlParams) -> Result<Vec<f64>> {
    check_dim(w, d)?;
    let m = d.len() as f64;
    let dim = w.len();
    let mut grad = w.to_vec();
    // XXᵀw and the hinge term accumulate per instance
    let mut mean_sum = 0.0;
    for (x, y) in d.iter() {
        let s = x.dot_dense(w);
        mean_sum += y * s;
        let mut coef = 2.0 * p.lambda1 / m * s;
        if y * s < 1.0 {
            coef -= p.c / m * y;
        }
        x.axpy_into(coef, &mut grad);
    }
    let xy = label_weighted_sum(d, dim);
    let scale = -2.0 * p.lambda1 / (m * m) * mean_sum - p.lambda2 / m;
    for (g, v) in grad.iter_mut().zip(&xy) {
        *g += scale * v;
    }
    Ok(grad)
}

/// Per-instance loss derivative w.r.t. the margin, times 1 (not divided by m):
/// `2C₁(γ + D − 1)` below the band, `2C₂(γ − D − 1)` above it, else 0.
fn odm_margin_coef(margin: f64, p: &OdmParams) -> f64 {
    if margin < 1.0 - p.d {
        2.0 * p.c1 * (margin + p.d - 1.0)
    } else if margin > 1.0 + p.d {
        2.0 * p.c2 * (margin - p.d - 1.0)
    } else {
        0.0
    }
}

pub fn full_gradient_odm(w: &[f64], d: &Dataset, p: &OdmParams) -> Result<Vec<f64>> {
    check_dim(w, d)?;
    let m = d.len() as f64;
    let mut grad = w.to_vec();
    for (x, y) in d.iter() {
        let c = odm_margin_coef(y * x.dot_dense(w), p);
        if c != 0.0 {
            x.axpy_into(c * y / m, &mut grad);
        }
    }
    Ok(grad)
}

/// Two-sample estimate
/// `w + 2λ₁x_i x_iᵀw − 2λ₁y_i y_j x_i x_jᵀw − λ₂y_i x_i − C y_i x_i 1(y_i wᵀx_i < 1)`.
pub fn stoch_grad_odml(w: &[f64], (xi, yi): (&SparseVector, f64), (xj, yj): (&SparseVector, f64), p: &OdmlParams) -> Vec<f64> {
    let mut g = w.to_vec();
    let si = xi.dot_dense(w);
    let sj = xj.dot_dense(w);
    let mut coef = 2.0 * p.lambda1 * si - 2.0 * p.lambda1 * yi * yj * sj - p.lambda2 * yi;
    if yi * si < 1.0 {
        coef -= p.c * yi;
    }
    xi.axpy_into(coef, &mut g);
    g
}

/// One-sample estimate `w + c(γ_i) y_i x_i` with the band-dependent `c`.
pub fn stoch_grad_odm(w: &[f64], (xi, yi): (&SparseVector, f64), p: &OdmParams) -> Vec<f64> {
    let mut g = w.to_vec();
    let c = odm_margin_coef(yi * xi.dot_dense(w), p);
    if c != 0.0 {
        xi.axpy_into(c * yi, &mut g);
    }
    g
}

/// Primal objective for any variant; SVM is ODMᴸ with λ₁ = λ₂ = 0.
pub fn linear_objective(w: &[f64], d: &Dataset, params: &Params) -> Result<f64> {
    match (as_odml(params), params) {
        (Some(p), _) => objective_odml_linear(w, d, &p),
        (None, Params::Odm(p)) => objective_odm_linear(w, d, p),
        _ => unreachable!(),
    }
}

pub fn linear_full_gradient(w: &[f64], d: &Dataset, params: &Params) -> Result<Vec<f64>> {
    match (as_odml(params), params) {
        (Some(p), _) => full_gradient_odml(w, d, &p),
        (None, Params::Odm(p)) => full_gradient_odm(w, d, p),
        _ => unreachable!(),
    }
}

/// How the next snapshot is chosen at the end of an epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnapshotRule {
    /// The iterate after a uniformly drawn inner step.
    RandomIterate,
    /// The iterate after the final inner step.
    LastIterate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvrgOptions {
    pub eta: f64,
    pub stages: usize,
    /// Inner steps per stage; `None` means m.
    pub epoch_length: Option<usize>,
    pub seed: u64,
    pub snapshot_rule: SnapshotRule,
}

impl Default for SvrgOptions {
    fn default() -> Self {
        Self { eta: 0.01, stages: 30, epoch_length: None, seed: 0, snapshot_rule: SnapshotRule::RandomIterate }
    }
}

impl SvrgOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(OdmError::InvalidParameter(format!("eta must be positive, got {}", self.eta)));
        }
        if self.stages == 0 {
            return Err(OdmError::InvalidParameter("SVRG needs at least one stage".into()));
        }
        if self.epoch_length == Some(0) {
            return Err(OdmError::InvalidParameter("epoch length must be positive".into()));
        }
        Ok(())
    }
}

/// Upper estimate of the gradient's Lipschitz constant, useful for picking
/// `eta` (SVRG theory asks for `eta < 1/(4L)`).
pub fn lipschitz_estimate(d: &Dataset, params: &Params) -> f64 {
    let r2 = d.instances().iter().map(SparseVector::norm_sq).fold(0.0, f64::max);
    match params {
        Params::Svm { .. } => 1.0,
        Params::Odml(p) => 1.0 + 4.0 * p.lambda1 * r2,
        Params::Odm(p) => 1.0 + 2.0 * p.c1.max(p.c2) * r2,
    }
}

/// The scalar `s` with `g(w, ·) − g(w̄, ·) = (w − w̄) + s·x_i`.
fn vr_scalar(w: &[f64], w_bar: &[f64], (xi, yi): (&SparseVector, f64), xj: Option<(&SparseVector, f64)>, params: &Params) -> f64 {
    let si = xi.dot_dense(w);
    let si_bar = xi.dot_dense(w_bar);
    match (as_odml(params), params) {
        (Some(p), _) => {
            let (xj, yj) = xj.expect("ODML steps sample a second index");
            let sj = xj.dot_dense(w);
            let sj_bar = xj.dot_dense(w_bar);
            let mut s = 2.0 * p.lambda1 * (si - si_bar) - 2.0 * p.lambda1 * yi * yj * (sj - sj_bar);
            let active = f64::from(u8::from(yi * si < 1.0)) - f64::from(u8::from(yi * si_bar < 1.0));
            s -= p.c * yi * active;
            s
        }
        (None, Params::Odm(p)) => (odm_margin_coef(yi * si, p) - odm_margin_coef(yi * si_bar, p)) * yi,
        _ => unreachable!(),
    }
}

/// Variance-reduced direction `g(w, ·) − g(w̄, ·) + μ̄`.
pub fn variance_reduced_direction(
    w: &[f64],
    w_bar: &[f64],
    mu: &[f64],
    sample_i: (&SparseVector, f64),
    sample_j: Option<(&SparseVector, f64)>,
    params: &Params,
) -> Vec<f64> {
    let s = vr_scalar(w, w_bar, sample_i, sample_j, params);
    let mut dir: Vec<f64> = w.iter().zip(w_bar).zip(mu).map(|((a, b), m)| (a - b) + m).collect();
    sample_i.0.axpy_into(s, &mut dir);
    dir
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSummary {
    pub m_train: usize,
    pub objective: f64,
    pub stages: usize,
}

/// Dense-weight model `f(z) = wᵀz`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub w: Vec<f64>,
    pub params: Params,
    pub features: FeatureMap,
    pub summary: LinearSummary,
}

impl LinearModel {
    pub fn variant(&self) -> Variant {
        self.params.variant()
    }

    pub fn dim(&self) -> usize {
        self.w.len()
    }

    /// Features beyond the model dimension are ignored.
    pub fn decision(&self, z: &SparseVector) -> f64 {
        self.features.apply_vector(z).dot_dense(&self.w)
    }

    pub fn predict(&self, z: &SparseVector) -> (f64, f64) {
        let f = self.decision(z);
        (if f >= 0.0 { 1.0 } else { -1.0 }, f)
    }

    pub fn weight_norm(&self) -> f64 {
        norm_sq(&self.w).sqrt()
    }
}

/// SVRG on the primal of `params` over `d` as given (no feature mapping).
/// Starts at `w = 0`; each stage takes the full gradient at the snapshot,
/// runs `epoch_length` variance-reduced steps and picks the next snapshot.
pub fn svrg_train(d: &Dataset, params: &Params, opts: &SvrgOptions) -> Result<LinearModel> {
    d.ensure_trainable()?;
    params.validate()?;
    opts.validate()?;
    let m = d.len();
    let dim = d.dim();
    let epoch = opts.epoch_length.unwrap_or(m);
    let two_samples = as_odml(params).is_some();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let xs = d.instances();
    let ys = d.labels();

    let mut snapshot = vec![0.0; dim];
    let f0 = linear_objective(&snapshot, d, params)?;
    let limit = 1e6 * f0.abs().max(1.0);
    let mut w = vec![0.0; dim];
    let mut objective = f0;

    for stage in 1..=opts.stages {
        let mu = linear_full_gradient(&snapshot, d, params)?;
        w.copy_from_slice(&snapshot);
        let keep_at = match opts.snapshot_rule {
            SnapshotRule::RandomIterate => rng.random_range(1..=epoch),
            SnapshotRule::LastIterate => epoch,
        };
        let mut next = None;
        for t in 1..=epoch {
            let i = rng.random_range(0..m);
            let j = if two_samples { Some(rng.random_range(0..m)) } else { None };
            let s = vr_scalar(&w, &snapshot, (&xs[i], ys[i]), j.map(|j| (&xs[j], ys[j])), params);
            for ((wk, bk), mk) in w.iter_mut().zip(&snapshot).zip(&mu) {
                *wk -= opts.eta * ((*wk - bk) + mk);
            }
            xs[i].axpy_into(-opts.eta * s, &mut w);
            if t == keep_at {
                next = Some(w.clone());
            }
        }
        snapshot = next.expect("keep_at lies within the epoch");
        objective = linear_objective(&snapshot, d, params)?;
        if !objective.is_finite() || objective > limit || snapshot.iter().any(|v| !v.is_finite()) {
            return Err(OdmError::Diverged { stage, objective });
        }
        log::trace!("svrg stage {stage}: objective {objective:.10e}");
    }
    Ok(LinearModel {
        w: snapshot,
        params: *params,
        features: FeatureMap::default(),
        summary: LinearSummary { m_train: m, objective, stages: opts.stages },
    })
}

/// Fits the feature map on `d`, then runs [`svrg_train`] on mapped data.
pub fn train_linear(d: &Dataset, params: &Params, opts: &SvrgOptions, normalize: bool, bias: Option<f64>) -> Result<LinearModel> {
    let features = FeatureMap::fit(d, normalize, bias);
    let mut model = svrg_train(&features.apply(d), params, opts)?;
    model.features = features;
    Ok(model)
}
