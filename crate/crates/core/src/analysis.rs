//! Margin statistics, leave-one-out bounds computed from a dual solution,
//! and a brute-force leave-one-out counter used to check them.

use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{OdmError, Result};
use crate::model::{Classifier, Model};
use crate::odm_dual::{OdmParams, OdmlParams, Params, Variant};

/// Relative tolerance for deciding that `α_i` sits on a bound of the
/// ODMᴸ/SVM box `[0, C/m]`.
pub const BOUND_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct MarginReport {
    /// Functional margins `y_i f(x_i)`.
    pub margins: Vec<f64>,
    /// `margins / ‖w‖`; equal to `margins` when `zero_norm` is set.
    pub normalized_margins: Vec<f64>,
    pub weight_norm: f64,
    /// ‖w‖ = 0, so geometric margins are undefined.
    pub zero_norm: bool,
    pub mean: f64,
    pub variance: f64,
    /// Empirical CDF of the normalized margins: ascending unique values with
    /// the fraction of instances at or below each.
    pub curve: Vec<(f64, f64)>,
}

/// Ascending unique values with their cumulative fractions.
pub fn empirical_cdf(values: &[f64]) -> Vec<(f64, f64)> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len() as f64;
    let mut curve: Vec<(f64, f64)> = Vec::new();
    for (k, v) in sorted.iter().enumerate() {
        let frac = (k + 1) as f64 / m;
        match curve.last_mut() {
            Some(last) if last.0 == *v => last.1 = frac,
            _ => curve.push((*v, frac)),
        }
    }
    curve
}

pub fn margin_report<C: Classifier + ?Sized>(model: &C, d: &Dataset) -> Result<MarginReport> {
    if d.is_empty() {
        return Err(OdmError::InvalidDataset("margin report needs at least one instance".into()));
    }
    let margins: Vec<f64> = d.iter().map(|(x, y)| y * model.decision(x)).collect();
    let m = margins.len() as f64;
    let mean = margins.iter().sum::<f64>() / m;
    let variance = margins.iter().map(|g| (g - mean) * (g - mean)).sum::<f64>() / m;
    let weight_norm = model.weight_norm();
    let zero_norm = !(weight_norm > 0.0);
    let normalized_margins = if zero_norm {
        margins.clone()
    } else {
        margins.iter().map(|g| g / weight_norm).collect()
    };
    let curve = empirical_cdf(&normalized_margins);
    Ok(MarginReport { margins, normalized_margins, weight_norm, zero_norm, mean, variance, curve })
}

/// `%g`-style formatting with `digits` significant digits.
pub fn format_significant(v: f64, digits: usize) -> String {
    if v == 0.0 || !v.is_finite() {
        return if v == 0.0 { "0".into() } else { format!("{v}") };
    }
    let exp = v.abs().log10().floor() as i32;
    if exp < -5 || exp >= digits as i32 {
        let s = format!("{:.*e}", digits - 1, v);
        let (mant, e) = s.split_once('e').expect("scientific form");
        let mant = if mant.contains('.') { mant.trim_end_matches('0').trim_end_matches('.') } else { mant };
        format!("{mant}e{e}")
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    }
}

/// CSV with header `margin,cumulative_frequency`, one row per unique margin
/// at 12 significant digits.
pub fn margin_curve_csv(report: &MarginReport) -> String {
    let mut rows: Vec<(String, f64)> = Vec::new();
    for &(v, frac) in &report.curve {
        let key = format_significant(v, 12);
        match rows.last_mut() {
            Some(last) if last.0 == key => last.1 = frac,
            _ => rows.push((key, frac)),
        }
    }
    let mut out = String::from("margin,cumulative_frequency\n");
    for (key, frac) in rows {
        out.push_str(&key);
        out.push(',');
        out.push_str(&format_significant(frac, 12));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundTerms {
    /// `Σ_{I₁} α_i h_ii` over free coordinates plus `|I₂|` at the upper bound.
    Odml { free_sum: f64, free_count: usize, bounded_count: usize },
    /// Per-block sums `Σ α_i (k_ii + m/(2C))` and `D(|I₁| − |I₂|)`.
    Odm { zeta_sum: f64, beta_sum: f64, zeta_count: usize, beta_count: usize, band_term: f64 },
}

impl BoundTerms {
    pub fn total(&self) -> f64 {
        match *self {
            BoundTerms::Odml { free_sum, bounded_count, .. } => free_sum + bounded_count as f64,
            BoundTerms::Odm { zeta_sum, beta_sum, band_term, .. } => zeta_sum + beta_sum + band_term,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LooBoundReport {
    pub variant: Variant,
    pub m: usize,
    /// Bound on the leave-one-out error rate; `m * bound_value` bounds the count.
    pub bound_value: f64,
    pub terms: BoundTerms,
}

/// Leave-one-out bound for the ODMᴸ (and SVM) dual:
/// `(Σ_{0<α_i<C/m} α_i h_ii + |{α_i = C/m}|) / m`. Bound membership uses
/// [`BOUND_TOLERANCE`] relative to `C/m`.
pub fn loo_bound_odml(alpha: &[f64], h_diag: &[f64], c: f64, m: usize) -> Result<LooBoundReport> {
    if alpha.len() != m || h_diag.len() != m {
        return Err(OdmError::DimensionMismatch { expected: m, found: alpha.len().min(h_diag.len()) });
    }
    let upper = c / m as f64;
    let (mut free_sum, mut free_count, mut bounded_count) = (0.0, 0, 0);
    for (&a, &h) in alpha.iter().zip(h_diag) {
        if a >= upper * (1.0 - BOUND_TOLERANCE) {
            bounded_count += 1;
        } else if a > upper * BOUND_TOLERANCE {
            free_sum += a * h;
            free_count += 1;
        }
    }
    let terms = BoundTerms::Odml { free_sum, free_count, bounded_count };
    Ok(LooBoundReport { variant: Variant::Odml, m, bound_value: terms.total() / m as f64, terms })
}

/// Leave-one-out bound for the ODM dual `α = [ζ; β]`:
/// `[Σ_{ζ_i>0} ζ_i(k_ii + m/(2C₁)) + Σ_{β_i>0} β_i(k_ii + m/(2C₂)) + D(|I₁| − |I₂|)] / m`,
/// where `k_ii = ‖x_i‖²` in the linear case.
pub fn loo_bound_odm(alpha: &[f64], self_kernel: &[f64], p: &OdmParams, m: usize) -> Result<LooBoundReport> {
    if alpha.len() != 2 * m {
        return Err(OdmError::DimensionMismatch { expected: 2 * m, found: alpha.len() });
    }
    if self_kernel.len() != m {
        return Err(OdmError::DimensionMismatch { expected: m, found: self_kernel.len() });
    }
    let mf = m as f64;
    let (shift1, shift2) = (mf / (2.0 * p.c1), mf / (2.0 * p.c2));
    let (mut zeta_sum, mut beta_sum, mut zeta_count, mut beta_count) = (0.0, 0.0, 0, 0);
    for i in 0..m {
        let (z, b) = (alpha[i], alpha[i + m]);
        if z > 0.0 {
            zeta_sum += z * (self_kernel[i] + shift1);
            zeta_count += 1;
        }
        if b > 0.0 {
            beta_sum += b * (self_kernel[i] + shift2);
            beta_count += 1;
        }
    }
    let band_term = p.d * (zeta_count as f64 - beta_count as f64);
    let terms = BoundTerms::Odm { zeta_sum, beta_sum, zeta_count, beta_count, band_term };
    Ok(LooBoundReport { variant: Variant::Odm, m, bound_value: terms.total() / mf, terms })
}

/// The bound matching a kernel model's formulation, from its stored dual
/// solution.
pub fn model_loo_bound(model: &Model) -> Result<LooBoundReport> {
    let Model::Kernel(km) = model else {
        return Err(OdmError::MissingDualSolution);
    };
    let bd = km.bound_data.as_ref().ok_or(OdmError::MissingDualSolution)?;
    let m = km.summary.m_train;
    let mut report = match km.params {
        Params::Svm { c } | Params::Odml(OdmlParams { c, .. }) => loo_bound_odml(&bd.alpha, &bd.curvature, c, m)?,
        Params::Odm(p) => loo_bound_odm(&bd.alpha, &bd.curvature, &p, m)?,
    };
    report.variant = km.params.variant();
    Ok(report)
}

/// Retrains once per held-out instance and counts misclassified hold-outs.
/// Retrainings run in parallel; the first failing index (lowest) is reported.
pub fn loo_exact<M, F>(d: &Dataset, trainer: F) -> Result<usize>
where
    M: Classifier,
    F: Fn(&Dataset) -> Result<M> + Sync,
{
    let m = d.len();
    if m < 2 {
        return Err(OdmError::InvalidDataset("leave-one-out needs at least two instances".into()));
    }
    let outcomes: Vec<Result<bool>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let keep: Vec<usize> = (0..m).filter(|&j| j != i).collect();
            let model = trainer(&d.subset(&keep))
                .map_err(|e| OdmError::LooFailure { index: i, source: Box::new(e) })?;
            let (x, y) = (&d.instances()[i], d.labels()[i]);
            Ok(model.predict_label(x) != y)
        })
        .collect();
    let mut errors = 0;
    for outcome in outcomes {
        errors += usize::from(outcome?);
    }
    Ok(errors)
}
