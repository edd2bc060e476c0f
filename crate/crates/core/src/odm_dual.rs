//! Dual problems for the SVM baseline, ODMᴸ and ODM, recovery of the
//! kernel-expansion coefficients θ, and the end-to-end kernel trainer.

use nalgebra::{DMatrix, DVector};

use crate::boxqp::{dcd_solve, BoxQpProblem, QpSolution, SolverOptions};
use crate::data::{Dataset, Normalizer, SparseVector};
use crate::error::{OdmError, Result};
use crate::kernel::{build_odml_h, gram, identity_plus_ag, solve_linear_system, GramMatrix, KernelSpec, OdmlDualMatrix};

/// Coefficients with magnitude at or below this are dropped from models.
pub const SUPPORT_THRESHOLD: f64 = 1e-10;

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(OdmError::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

fn check_nonnegative(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(OdmError::InvalidParameter(format!("{name} must be non-negative, got {v}")))
    }
}

/// Soft-margin ODMᴸ: hinge weight `c`, margin-variance weight `lambda1`,
/// margin-mean weight `lambda2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdmlParams {
    pub c: f64,
    pub lambda1: f64,
    pub lambda2: f64,
}

impl OdmlParams {
    pub fn new(c: f64, lambda1: f64, lambda2: f64) -> Result<Self> {
        let p = Self { c, lambda1, lambda2 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("C", self.c)?;
        check_nonnegative("lambda1", self.lambda1)?;
        check_nonnegative("lambda2", self.lambda2)
    }
}

/// ODM: weights `c1` (margins below the band) and `c2` (above), band
/// half-width `d` around margin 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdmParams {
    pub c1: f64,
    pub c2: f64,
    pub d: f64,
}

impl OdmParams {
    pub fn new(c1: f64, c2: f64, d: f64) -> Result<Self> {
        let p = Self { c1, c2, d };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("C1", self.c1)?;
        check_positive("C2", self.c2)?;
        check_nonnegative("D", self.d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    Svm,
    Odml,
    Odm,
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::Svm => "svm",
            Variant::Odml => "odml",
            Variant::Odm => "odm",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = OdmError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "svm" => Ok(Variant::Svm),
            "odml" => Ok(Variant::Odml),
            "odm" => Ok(Variant::Odm),
            other => Err(OdmError::InvalidParameter(format!("unknown variant '{other}'"))),
        }
    }
}

/// Hyperparameters for one of the three formulations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Params {
    Svm { c: f64 },
    Odml(OdmlParams),
    Odm(OdmParams),
}

impl Params {
    pub fn variant(&self) -> Variant {
        match self {
            Params::Svm { .. } => Variant::Svm,
            Params::Odml(_) => Variant::Odml,
            Params::Odm(_) => Variant::Odm,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Params::Svm { c } => check_positive("C", *c),
            Params::Odml(p) => p.validate(),
            Params::Odm(p) => p.validate(),
        }
    }

    /// The regularisation-strength parameter used to break CV ties.
    pub fn primary_strength(&self) -> f64 {
        match self {
            Params::Svm { c } => *c,
            Params::Odml(p) => p.c,
            Params::Odm(p) => p.c1,
        }
    }

    /// `(name, value)` pairs in a fixed order.
    pub fn named_values(&self) -> Vec<(&'static str, f64)> {
        match *self {
            Params::Svm { c } => vec![("c", c)],
            Params::Odml(p) => vec![("c", p.c), ("lambda1", p.lambda1), ("lambda2", p.lambda2)],
            Params::Odm(p) => vec![("c1", p.c1), ("c2", p.c2), ("d", p.d)],
        }
    }
}

fn check_labels(g: &GramMatrix, y: &[f64]) -> Result<()> {
    if y.len() != g.size() {
        return Err(OdmError::DimensionMismatch { expected: g.size(), found: y.len() });
    }
    if g.size() == 0 {
        return Err(OdmError::InvalidDataset("empty training set".into()));
    }
    Ok(())
}

/// Baseline soft-margin SVM without bias: `H = YGY`, `q = −e`, `u = (C/m)e`.
pub fn build_svm_dual(g: &GramMatrix, y: &[f64], c: f64) -> Result<BoxQpProblem> {
    check_labels(g, y)?;
    check_positive("C", c)?;
    let gm = g.matrix();
    let m = y.len();
    let h = DMatrix::from_fn(m, m, |i, j| y[i] * gm[(i, j)] * y[j]);
    BoxQpProblem::new(h, vec![-1.0; m], vec![c / m as f64; m])
}

/// ODMᴸ dual from a precomputed `H`: `q = (λ₂/m)He − e`, `u = (C/m)e`.
pub fn odml_dual_from_h(h: &OdmlDualMatrix, p: &OdmlParams) -> Result<BoxQpProblem> {
    p.validate()?;
    let m = h.h.nrows();
    let mf = m as f64;
    let scale = p.lambda2 / mf;
    let q = (0..m).map(|i| scale * h.h.row(i).sum() - 1.0).collect();
    BoxQpProblem::new(h.h.clone(), q, vec![p.c / mf; m])
}

pub fn build_odml_dual(g: &GramMatrix, y: &[f64], p: &OdmlParams) -> Result<BoxQpProblem> {
    check_labels(g, y)?;
    p.validate()?;
    odml_dual_from_h(&build_odml_h(g, y, p.lambda1)?, p)
}

/// ODM dual over `α = [ζ; β]` (length 2m):
/// `H = [[Q + m/(2C₁)I, −Q], [−Q, Q + m/(2C₂)I]]` with `Q = YGY`,
/// `q = [(D−1)e; (D+1)e]`, no upper bounds.
pub fn build_odm_dual(g: &GramMatrix, y: &[f64], p: &OdmParams) -> Result<BoxQpProblem> {
    check_labels(g, y)?;
    p.validate()?;
    let gm = g.matrix();
    let m = y.len();
    let mf = m as f64;
    let shift1 = mf / (2.0 * p.c1);
    let shift2 = mf / (2.0 * p.c2);
    let mut h = DMatrix::zeros(2 * m, 2 * m);
    for j in 0..m {
        for i in 0..m {
            let qij = y[i] * gm[(i, j)] * y[j];
            h[(i, j)] = qij;
            h[(i + m, j + m)] = qij;
            h[(i, j + m)] = -qij;
            h[(i + m, j)] = -qij;
        }
        h[(j, j)] += shift1;
        h[(j + m, j + m)] += shift2;
    }
    let mut q = vec![p.d - 1.0; m];
    q.extend(std::iter::repeat_n(p.d + 1.0, m));
    BoxQpProblem::new(h, q, vec![f64::INFINITY; 2 * m])
}

/// `θ = (I + AG)^{-1} Y ((λ₂/m)e + α)`; with `λ₁ = 0` no solve is needed.
pub fn recover_theta_odml(alpha: &[f64], g: &GramMatrix, y: &[f64], p: &OdmlParams) -> Result<Vec<f64>> {
    check_labels(g, y)?;
    if alpha.len() != y.len() {
        return Err(OdmError::DimensionMismatch { expected: y.len(), found: alpha.len() });
    }
    let shift = p.lambda2 / y.len() as f64;
    let rhs: Vec<f64> = y.iter().zip(alpha).map(|(yi, a)| yi * (shift + a)).collect();
    if p.lambda1 == 0.0 {
        return Ok(rhs);
    }
    let system = identity_plus_ag(g, y, p.lambda1);
    let theta = solve_linear_system(&system, &DMatrix::from_column_slice(rhs.len(), 1, &rhs))?;
    Ok(theta.as_slice().to_vec())
}

/// `θ_i = y_i (ζ_i − β_i)` for `α = [ζ; β]`.
pub fn recover_theta_odm(alpha: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    let m = y.len();
    if alpha.len() != 2 * m {
        return Err(OdmError::DimensionMismatch { expected: 2 * m, found: alpha.len() });
    }
    Ok((0..m).map(|i| y[i] * (alpha[i] - alpha[i + m])).collect())
}

/// Primal slacks from an ODM dual solution: `ξ = m/(2C₁) ζ`, `ε = m/(2C₂) β`.
pub fn odm_slacks(alpha: &[f64], p: &OdmParams) -> (Vec<f64>, Vec<f64>) {
    let m = alpha.len() / 2;
    let mf = m as f64;
    let xi = alpha[..m].iter().map(|z| mf / (2.0 * p.c1) * z).collect();
    let eps = alpha[m..].iter().map(|b| mf / (2.0 * p.c2) * b).collect();
    (xi, eps)
}

/// Decision values `Gθ` on the training instances.
pub fn training_decisions(g: &GramMatrix, theta: &[f64]) -> Vec<f64> {
    (g.matrix() * DVector::from_column_slice(theta)).as_slice().to_vec()
}

/// A solved dual with its expansion coefficients.
#[derive(Debug, Clone)]
pub struct DualFit {
    pub problem: BoxQpProblem,
    pub solution: QpSolution,
    pub theta: Vec<f64>,
}

/// Builds and solves the dual for `params` on a precomputed Gram matrix.
pub fn fit_dual(g: &GramMatrix, y: &[f64], params: &Params, opts: SolverOptions) -> Result<DualFit> {
    params.validate()?;
    match params {
        Params::Svm { c } => {
            let problem = build_svm_dual(g, y, *c)?;
            let solution = dcd_solve(&problem, opts)?;
            let theta = y.iter().zip(&solution.alpha).map(|(yi, a)| yi * a).collect();
            Ok(DualFit { problem, solution, theta })
        }
        Params::Odml(p) => {
            let problem = build_odml_dual(g, y, p)?;
            let solution = dcd_solve(&problem, opts)?;
            let theta = recover_theta_odml(&solution.alpha, g, y, p)?;
            Ok(DualFit { problem, solution, theta })
        }
        Params::Odm(p) => {
            let problem = build_odm_dual(g, y, p)?;
            let solution = dcd_solve(&problem, opts)?;
            let theta = recover_theta_odm(&solution.alpha, y)?;
            Ok(DualFit { problem, solution, theta })
        }
    }
}

/// Dual quantities kept on a model for the leave-one-out bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundData {
    /// Raw dual solution (length m, or 2m for ODM).
    pub alpha: Vec<f64>,
    /// Per-instance curvature: `h_ii` of the dual for SVM/ODMᴸ, `k(x_i, x_i)`
    /// for ODM.
    pub curvature: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainSummary {
    pub m_train: usize,
    pub objective: f64,
    pub passes: usize,
    pub converged: bool,
}

/// Appends (or overwrites) the constant bias feature at `index`.
pub(crate) fn set_feature(x: &SparseVector, index: usize, value: f64) -> SparseVector {
    let mut entries: Vec<(usize, f64)> = x.entries().iter().copied().filter(|e| e.0 != index).collect();
    let pos = entries.partition_point(|e| e.0 < index);
    if value != 0.0 {
        entries.insert(pos, (index, value));
    }
    SparseVector::new(entries).expect("sorted finite entries")
}

/// Input transformation shared by kernel and linear models: optional
/// min-max normalisation followed by an optional constant feature.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureMap {
    pub normalizer: Option<Normalizer>,
    /// `(index, value)` of the appended constant feature.
    pub bias: Option<(usize, f64)>,
}

impl FeatureMap {
    pub fn fit(d: &Dataset, normalize: bool, bias: Option<f64>) -> FeatureMap {
        let normalizer = normalize.then(|| Normalizer::fit(d));
        let bias = bias.map(|v| (d.dim() + 1, v));
        FeatureMap { normalizer, bias }
    }

    pub fn apply_vector(&self, x: &SparseVector) -> SparseVector {
        let x = match &self.normalizer {
            Some(n) => n.apply_vector(x),
            None => x.clone(),
        };
        match self.bias {
            Some((idx, v)) => set_feature(&x, idx, v),
            None => x,
        }
    }

    pub fn apply(&self, d: &Dataset) -> Dataset {
        if self.normalizer.is_none() && self.bias.is_none() {
            return d.clone();
        }
        let xs = d.instances().iter().map(|x| self.apply_vector(x)).collect();
        Dataset::new(xs, d.labels().to_vec()).expect("labels already validated")
    }
}

/// Options for [`train_kernel`] beyond the solver settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainOptions {
    pub solver: SolverOptions,
    /// Fit a min-max normalizer on the training set and bake it into the model.
    pub normalize: bool,
    /// Value of an appended constant feature, emulating an intercept.
    pub bias: Option<f64>,
    /// Keep the raw dual solution for bound computation.
    pub keep_alpha: bool,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self { solver: SolverOptions::default(), normalize: true, bias: None, keep_alpha: false }
    }
}

/// Decision function `Σ θ_i k(x_i, z)` over the retained support set.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub params: Params,
    pub kernel: KernelSpec,
    /// Support instances in the transformed feature space, with θ_i.
    pub support: Vec<(SparseVector, f64)>,
    pub features: FeatureMap,
    pub summary: TrainSummary,
    pub bound_data: Option<BoundData>,
}

impl TrainedModel {
    pub fn variant(&self) -> Variant {
        self.params.variant()
    }

    /// Decision value for an instance already in the model's feature space.
    pub fn decision_transformed(&self, z: &SparseVector) -> f64 {
        self.support.iter().map(|(x, t)| t * self.kernel.eval(x, z)).sum()
    }

    /// Decision value for a raw instance; the stored feature map is applied.
    pub fn decision(&self, z: &SparseVector) -> f64 {
        self.decision_transformed(&self.features.apply_vector(z))
    }

    /// `(label, decision)`; a zero decision predicts +1.
    pub fn predict(&self, z: &SparseVector) -> (f64, f64) {
        let f = self.decision(z);
        (if f >= 0.0 { 1.0 } else { -1.0 }, f)
    }

    /// `‖w‖ = sqrt(θᵀGθ)` over the support set.
    pub fn weight_norm(&self) -> f64 {
        let s = &self.support;
        let mut sq = 0.0;
        for (i, (xi, ti)) in s.iter().enumerate() {
            sq += ti * ti * self.kernel.eval(xi, xi);
            for (xj, tj) in &s[..i] {
                sq += 2.0 * ti * tj * self.kernel.eval(xi, xj);
            }
        }
        sq.max(0.0).sqrt()
    }
}

pub fn predict(model: &TrainedModel, z: &SparseVector) -> (f64, f64) {
    model.predict(z)
}

/// Normalize → Gram → dual → DCD → θ → model.
pub fn train_kernel(d: &Dataset, params: &Params, kernel: KernelSpec, opts: &TrainOptions) -> Result<TrainedModel> {
    d.ensure_trainable()?;
    params.validate()?;
    let features = FeatureMap::fit(d, opts.normalize, opts.bias);
    let data = features.apply(d);
    let g = gram(kernel, &data);
    let y = data.labels();
    let fit = fit_dual(&g, y, params, opts.solver)?;
    if !fit.solution.converged {
        log::debug!(
            "{} dual did not converge in {} passes (max projected gradient {:.3e})",
            params.variant().name(),
            fit.solution.passes_used,
            fit.solution.max_projected_gradient
        );
    }
    let support = data
        .instances()
        .iter()
        .zip(&fit.theta)
        .filter(|(_, t)| t.abs() > SUPPORT_THRESHOLD)
        .map(|(x, &t)| (x.clone(), t))
        .collect();
    let bound_data = opts.keep_alpha.then(|| BoundData {
        curvature: match params {
            Params::Odm(_) => g.diagonal(),
            _ => (0..y.len()).map(|i| fit.problem.h()[(i, i)]).collect(),
        },
        alpha: fit.solution.alpha.clone(),
    });
    Ok(TrainedModel {
        params: *params,
        kernel,
        support,
        features,
        summary: TrainSummary {
            m_train: y.len(),
            objective: fit.solution.objective,
            passes: fit.solution.passes_used,
            converged: fit.solution.converged,
        },
        bound_data,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::parse_libsvm;
    use approx::assert_abs_diff_eq;

    fn two_point() -> (GramMatrix, Vec<f64>) {
        let g = GramMatrix::from_matrix(DMatrix::from_row_slice(2, 2, &[4.0, -2.0, -2.0, 1.0])).unwrap();
        (g, vec![1.0, -1.0])
    }

    fn raw_opts() -> TrainOptions {
        TrainOptions { normalize: false, ..Default::default() }
    }

    #[test]
    fn params_validation() {
        assert!(OdmlParams::new(0.0, 0.0, 0.0).is_err());
        assert!(OdmlParams::new(1.0, -0.1, 0.0).is_err());
        assert!(OdmParams::new(1.0, 1.0, -0.5).is_err());
        assert!(OdmParams::new(1.0, 0.0, 0.5).is_err());
        assert!(Params::Svm { c: f64::NAN }.validate().is_err());
    }

    #[test]
    fn svm_dual_matches_zero_lambda_odml() {
        let (g, y) = two_point();
        let svm = build_svm_dual(&g, &y, 1.0).unwrap();
        let odml = build_odml_dual(&g, &y, &OdmlParams::new(1.0, 0.0, 0.0).unwrap()).unwrap();
        assert_eq!(svm, odml);
        assert_eq!(svm.q(), &[-1.0, -1.0]);
        assert_eq!(svm.u(), &[0.5, 0.5]);
    }

    #[test]
    fn odml_q_without_mean_term() {
        let (g, y) = two_point();
        let p = build_odml_dual(&g, &y, &OdmlParams::new(2.0, 0.3, 0.0).unwrap()).unwrap();
        assert_eq!(p.q(), &[-1.0, -1.0]);
    }

    #[test]
    fn odm_dual_structure() {
        let (g, y) = two_point();
        let p = build_odm_dual(&g, &y, &OdmParams::new(1.0, 4.0, 0.0).unwrap()).unwrap();
        assert_eq!(p.len(), 4);
        assert_eq!(p.q(), &[-1.0, -1.0, 1.0, 1.0]);
        assert!(p.u().iter().all(|u| u.is_infinite()));
        // Q = [[4,2],[2,1]]; shifts m/(2C1) = 1, m/(2C2) = 0.25
        assert_eq!(p.h()[(0, 0)], 5.0);
        assert_eq!(p.h()[(3, 3)], 1.25);
        assert_eq!(p.h()[(0, 3)], -2.0);
        assert!(p.h().clone().cholesky().is_some());
    }

    #[test]
    fn theta_recovery_examples() {
        let (g, y) = two_point();
        let t = recover_theta_odml(&[0.1, 0.3], &g, &y, &OdmlParams::new(1.0, 0.0, 0.0).unwrap()).unwrap();
        assert_eq!(t, vec![0.1, -0.3]);
        let p = OdmlParams::new(1.0, 0.5, 0.2).unwrap();
        let t = recover_theta_odml(&[0.0, 0.0], &g, &y, &p).unwrap();
        assert!(t.iter().any(|v| v.abs() > 1e-3));
        let t = recover_theta_odm(&[0.2, 0.0, 0.0, 0.1], &y).unwrap();
        assert_eq!(t, vec![0.2, 0.1]);
        assert_eq!(recover_theta_odm(&[0.0; 4], &y).unwrap(), vec![0.0, 0.0]);
        let flipped = recover_theta_odm(&[0.2, 0.0, 0.0, 0.1], &[-1.0, 1.0]).unwrap();
        assert_eq!(flipped, vec![-0.2, -0.1]);
    }

    #[test]
    fn svm_two_point_model_and_prediction() {
        let d = parse_libsvm("+1 1:2\n-1 1:-1").unwrap();
        let model = train_kernel(&d, &Params::Svm { c: 1.0 }, KernelSpec::Linear, &raw_opts()).unwrap();
        assert!(model.summary.converged);
        // α = (0, 0.5) → θ = (0, −0.5): only the second point is a support vector
        assert_eq!(model.support.len(), 1);
        assert_abs_diff_eq!(model.support[0].1, -0.5, epsilon = 1e-6);
        let (label, f) = model.predict(&SparseVector::from_dense(&[2.0, 0.0]));
        assert_eq!(label, 1.0);
        assert_abs_diff_eq!(f, 1.0, epsilon = 1e-6);
        let (label, f) = model.predict(&SparseVector::from_dense(&[-1.0, 0.0]));
        assert_eq!(label, -1.0);
        assert_abs_diff_eq!(f, -0.5, epsilon = 1e-6);
    }

    #[test]
    fn zero_theta_predicts_positive() {
        let d = parse_libsvm("+1 1:2\n-1 1:-1").unwrap();
        let mut model = train_kernel(&d, &Params::Svm { c: 1.0 }, KernelSpec::Linear, &raw_opts()).unwrap();
        model.support.clear();
        assert_eq!(model.predict(&SparseVector::from_dense(&[3.0])), (1.0, 0.0));
    }

    #[test]
    fn doubling_theta_doubles_decision() {
        let d = parse_libsvm("+1 1:2 2:1\n-1 1:-1\n+1 2:3\n-1 1:-2 2:-1").unwrap();
        let model = train_kernel(&d, &Params::Svm { c: 5.0 }, KernelSpec::rbf(1.0).unwrap(), &raw_opts()).unwrap();
        let mut doubled = model.clone();
        doubled.support.iter_mut().for_each(|s| s.1 *= 2.0);
        let z = SparseVector::from_dense(&[0.3, -0.7]);
        assert_abs_diff_eq!(doubled.decision(&z), 2.0 * model.decision(&z), epsilon = 1e-14);
        assert_eq!(doubled.predict(&z).0, model.predict(&z).0);
    }

    #[test]
    fn separable_pair_large_c() {
        let d = parse_libsvm("+1 1:1 2:1\n-1 1:-1 2:-1").unwrap();
        let model = train_kernel(&d, &Params::Svm { c: 1000.0 }, KernelSpec::Linear, &raw_opts()).unwrap();
        for (x, y) in d.iter() {
            assert!(y * model.decision(x) >= 1.0 - 1e-6);
        }
    }

    #[test]
    fn rejects_single_class() {
        let d = parse_libsvm("+1 1:1\n+1 1:2").unwrap();
        assert!(train_kernel(&d, &Params::Svm { c: 1.0 }, KernelSpec::Linear, &raw_opts()).is_err());
    }

    #[test]
    fn bias_feature_handles_unseen_indices() {
        let fm = FeatureMap { normalizer: None, bias: Some((3, 1.0)) };
        let z = SparseVector::new(vec![(1, 2.0), (3, 7.0), (5, 1.0)]).unwrap();
        assert_eq!(fm.apply_vector(&z).entries(), &[(1, 2.0), (3, 1.0), (5, 1.0)]);
    }

    #[test]
    fn keep_alpha_records_curvature() {
        let d = parse_libsvm("+1 1:2\n-1 1:-1").unwrap();
        let opts = TrainOptions { keep_alpha: true, ..raw_opts() };
        let m = train_kernel(&d, &Params::Svm { c: 1.0 }, KernelSpec::Linear, &opts).unwrap();
        assert_eq!(m.bound_data.as_ref().unwrap().curvature, vec![4.0, 1.0]);
        let m = train_kernel(&d, &Params::Odm(OdmParams::new(1.0, 1.0, 0.1).unwrap()), KernelSpec::Linear, &opts).unwrap();
        let bd = m.bound_data.unwrap();
        assert_eq!(bd.alpha.len(), 4);
        assert_eq!(bd.curvature, vec![4.0, 1.0]);
    }
}
