//! Hyperparameter grids, k-fold model selection and the repeated
//! half/half evaluation protocol.
//!
//! Everything here is deterministic for a fixed seed: grid points and folds
//! may run in parallel, but results are collected in canonical order.

use std::time::Instant;

use rayon::prelude::*;

use crate::boxqp::SolverOptions;
use crate::data::{kfold, split, Dataset, Normalizer, Split};
use crate::error::{OdmError, Result};
use crate::kernel::{avg_pairwise_distance, KernelSpec, DEFAULT_DISTANCE_CAP};
use crate::model::{Classifier, Model};
use crate::odm_dual::{train_kernel, OdmParams, OdmlParams, Params, TrainOptions, Variant};
use crate::odm_linear::{train_linear, SvrgOptions};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolverChoice {
    Dcd(SolverOptions),
    Svrg(SvrgOptions),
}

/// Everything besides hyperparameters that a training run needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    pub solver: SolverChoice,
    pub normalize: bool,
    pub bias: Option<f64>,
    pub keep_alpha: bool,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self { solver: SolverChoice::Dcd(SolverOptions::default()), normalize: true, bias: None, keep_alpha: false }
    }
}

/// Trains a kernel model by DCD or a linear model by SVRG.
pub fn fit_model(d: &Dataset, params: &Params, kernel: KernelSpec, cfg: &FitConfig) -> Result<Model> {
    match cfg.solver {
        SolverChoice::Dcd(solver) => {
            let opts = TrainOptions { solver, normalize: cfg.normalize, bias: cfg.bias, keep_alpha: cfg.keep_alpha };
            Ok(Model::Kernel(train_kernel(d, params, kernel, &opts)?))
        }
        SolverChoice::Svrg(svrg) => {
            if kernel != KernelSpec::Linear {
                return Err(OdmError::InvalidParameter("SVRG trains linear-kernel models only".into()));
            }
            Ok(Model::Linear(train_linear(d, params, &svrg, cfg.normalize, cfg.bias)?))
        }
    }
}

pub fn accuracy<C: Classifier + ?Sized>(model: &C, d: &Dataset) -> f64 {
    if d.is_empty() {
        return 0.0;
    }
    let hits = d.iter().filter(|(x, y)| model.predict_label(x) == *y).count();
    hits as f64 / d.len() as f64
}

fn powers_of_two(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|e| 2f64.powi(e)).collect()
}

/// Candidate values per hyperparameter. RBF widths are multiples of the
/// average pairwise distance δ of the training set.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub c: Vec<f64>,
    pub lambda1: Vec<f64>,
    pub lambda2: Vec<f64>,
    pub c1: Vec<f64>,
    pub c2: Vec<f64>,
    pub d: Vec<f64>,
    pub width_factors: Vec<f64>,
}

impl GridSpec {
    /// C ∈ {10, 50, 100}; λ₁, λ₂ ∈ {2⁻⁸..2⁻²}; C₁, C₂ ∈ {2⁰..2¹⁰};
    /// D ∈ {0, 0.1, .., 0.5}; width ∈ {2⁻²δ..2²δ}.
    pub fn paper() -> Self {
        Self {
            c: vec![10.0, 50.0, 100.0],
            lambda1: powers_of_two(-8, -2),
            lambda2: powers_of_two(-8, -2),
            c1: powers_of_two(0, 10),
            c2: powers_of_two(0, 10),
            d: vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5],
            width_factors: powers_of_two(-2, 2),
        }
    }

    /// Three values per axis drawn from [`GridSpec::paper`].
    pub fn coarse() -> Self {
        Self {
            c: vec![10.0, 50.0, 100.0],
            lambda1: vec![2f64.powi(-8), 2f64.powi(-5), 2f64.powi(-2)],
            lambda2: vec![2f64.powi(-8), 2f64.powi(-5), 2f64.powi(-2)],
            c1: vec![1.0, 32.0, 1024.0],
            c2: vec![1.0, 32.0, 1024.0],
            d: vec![0.0, 0.2, 0.4],
            width_factors: vec![0.25, 1.0, 4.0],
        }
    }

    pub fn validate(&self, variant: Variant) -> Result<()> {
        let axes: Vec<(&str, &Vec<f64>)> = match variant {
            Variant::Svm => vec![("C", &self.c)],
            Variant::Odml => vec![("C", &self.c), ("lambda1", &self.lambda1), ("lambda2", &self.lambda2)],
            Variant::Odm => vec![("C1", &self.c1), ("C2", &self.c2), ("D", &self.d)],
        };
        for (name, values) in axes {
            if values.is_empty() {
                return Err(OdmError::InvalidParameter(format!("grid for {name} is empty")));
            }
        }
        Ok(())
    }

    /// Parameter combinations in listing order (first axis outermost).
    pub fn params(&self, variant: Variant) -> Result<Vec<Params>> {
        self.validate(variant)?;
        let mut out = Vec::new();
        match variant {
            Variant::Svm => {
                for &c in &self.c {
                    out.push(Params::Svm { c });
                }
            }
            Variant::Odml => {
                for &c in &self.c {
                    for &l1 in &self.lambda1 {
                        for &l2 in &self.lambda2 {
                            out.push(Params::Odml(OdmlParams::new(c, l1, l2)?));
                        }
                    }
                }
            }
            Variant::Odm => {
                for &c1 in &self.c1 {
                    for &c2 in &self.c2 {
                        for &d in &self.d {
                            out.push(Params::Odm(OdmParams::new(c1, c2, d)?));
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Full candidate list: parameters × kernels. For RBF, δ is computed once
    /// on the normalized training set.
    pub fn candidates(&self, variant: Variant, rbf: bool, train: &Dataset, cfg: &FitConfig, seed: u64) -> Result<Vec<(Params, KernelSpec)>> {
        let params = self.params(variant)?;
        let kernels = if rbf {
            if self.width_factors.is_empty() {
                return Err(OdmError::InvalidParameter("grid for RBF width is empty".into()));
            }
            let data = if cfg.normalize { Normalizer::fit(train).apply(train) } else { train.clone() };
            let delta = avg_pairwise_distance(&data, DEFAULT_DISTANCE_CAP, seed)?;
            if !(delta > 0.0) {
                return Err(OdmError::InvalidDataset("all training instances coincide; RBF width undefined".into()));
            }
            self.width_factors.iter().map(|f| KernelSpec::rbf(f * delta)).collect::<Result<Vec<_>>>()?
        } else {
            vec![KernelSpec::Linear]
        };
        let mut out = Vec::with_capacity(params.len() * kernels.len());
        for p in &params {
            for k in &kernels {
                out.push((*p, *k));
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvScore {
    pub params: Params,
    pub kernel: KernelSpec,
    pub mean_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    pub scores: Vec<CvScore>,
    pub best: usize,
}

impl CvResult {
    pub fn best_score(&self) -> &CvScore {
        &self.scores[self.best]
    }
}

/// Index of the highest accuracy; ties go to the smaller primary strength
/// (C, or C₁ for ODM), then to the earlier candidate.
pub fn select_best(scores: &[CvScore]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (k, s) in scores.iter().enumerate() {
        best = match best {
            None => Some(k),
            Some(b) => {
                let cur = &scores[b];
                let better = s.mean_accuracy > cur.mean_accuracy
                    || (s.mean_accuracy == cur.mean_accuracy
                        && s.params.primary_strength() < cur.params.primary_strength());
                Some(if better { k } else { b })
            }
        };
    }
    best
}

/// Mean validation accuracy of every candidate over `folds` folds of `train`.
pub fn cross_validate(train: &Dataset, candidates: &[(Params, KernelSpec)], folds: usize, seed: u64, cfg: &FitConfig) -> Result<CvResult> {
    if candidates.is_empty() {
        return Err(OdmError::InvalidParameter("empty hyperparameter grid".into()));
    }
    let splits = kfold(train, folds, seed)?;
    let fold_cfg = FitConfig { keep_alpha: false, ..*cfg };
    let jobs: Vec<(usize, usize)> = (0..candidates.len()).flat_map(|c| (0..splits.len()).map(move |f| (c, f))).collect();
    let accs: Vec<Result<f64>> = jobs
        .par_iter()
        .map(|&(c, f)| {
            let (p, k) = &candidates[c];
            let (tr, va) = &splits[f];
            let model = fit_model(tr, p, *k, &fold_cfg)?;
            Ok(accuracy(&model, va))
        })
        .collect();
    let mut scores = Vec::with_capacity(candidates.len());
    let mut it = accs.into_iter();
    for (p, k) in candidates {
        let mut sum = 0.0;
        for _ in 0..splits.len() {
            sum += it.next().expect("one result per job")?;
        }
        scores.push(CvScore { params: *p, kernel: *k, mean_accuracy: sum / splits.len() as f64 });
    }
    let best = select_best(&scores).expect("nonempty scores");
    Ok(CvResult { scores, best })
}

/// Grid search on `train` followed by a refit of the winner on all of it.
pub fn cv_train(
    train: &Dataset,
    variant: Variant,
    rbf: bool,
    grid: &GridSpec,
    folds: usize,
    seed: u64,
    cfg: &FitConfig,
) -> Result<(CvResult, Model)> {
    train.ensure_trainable()?;
    let candidates = grid.candidates(variant, rbf, train, cfg, seed)?;
    let cv = cross_validate(train, &candidates, folds, seed, cfg)?;
    let best = cv.best_score();
    let model = fit_model(train, &best.params, best.kernel, cfg)?;
    Ok((cv, model))
}

/// Protocol settings for [`bench_dataset`].
#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub methods: Vec<Variant>,
    pub rbf: bool,
    pub repeats: usize,
    pub seed: u64,
    pub folds: usize,
    pub train_fraction: f64,
    pub grid: GridSpec,
    pub fit: FitConfig,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            methods: vec![Variant::Svm, Variant::Odml, Variant::Odm],
            rbf: false,
            repeats: 30,
            seed: 0,
            folds: 5,
            train_fraction: 0.5,
            grid: GridSpec::coarse(),
            fit: FitConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub dataset: String,
    pub method: Variant,
    pub kernel: &'static str,
    pub accuracies: Vec<f64>,
    pub mean_acc: f64,
    pub std_acc: f64,
    /// Mean wall-clock seconds per repeat, including model selection.
    pub seconds: f64,
}

pub const BENCH_CSV_HEADER: &str = "dataset,method,kernel,mean_acc,std_acc,seconds";

impl BenchRow {
    /// One CSV row; `timing = false` writes `NA` for seconds so that output
    /// depends only on the inputs and seed.
    pub fn csv_line(&self, timing: bool) -> String {
        let secs = if timing { format!("{:.3}", self.seconds) } else { "NA".to_string() };
        format!("{},{},{},{:.6},{:.6},{}", self.dataset, self.method.name(), self.kernel, self.mean_acc, self.std_acc, secs)
    }
}

/// Mean and sample standard deviation (0 for a single value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Called with each split and the exact dataset handed to model selection.
pub type SelectionProbe<'a> = &'a (dyn Fn(&Split, &Dataset) + Sync);

/// Repeats {half/half split, CV on the training half, test accuracy} for
/// each method. Repeat `r` uses split seed `seed + r` for every method, so
/// methods are compared on identical partitions.
pub fn bench_dataset(name: &str, d: &Dataset, cfg: &BenchConfig, probe: Option<SelectionProbe<'_>>) -> Result<Vec<BenchRow>> {
    if cfg.repeats == 0 {
        return Err(OdmError::InvalidParameter("repeats must be at least 1".into()));
    }
    let splits: Vec<Split> = (0..cfg.repeats)
        .map(|r| split(d, cfg.train_fraction, cfg.seed.wrapping_add(r as u64)))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for &method in &cfg.methods {
        let start = Instant::now();
        let mut accuracies = Vec::with_capacity(cfg.repeats);
        for (r, s) in splits.iter().enumerate() {
            if let Some(probe) = probe {
                probe(s, &s.train);
            }
            let seed = cfg.seed.wrapping_add(r as u64);
            let (_, model) = cv_train(&s.train, method, cfg.rbf, &cfg.grid, cfg.folds, seed, &cfg.fit)?;
            accuracies.push(accuracy(&model, &s.test));
        }
        let seconds = start.elapsed().as_secs_f64() / cfg.repeats as f64;
        let (mean_acc, std_acc) = mean_std(&accuracies);
        log::info!("{name} {}: {mean_acc:.4} ± {std_acc:.4} ({seconds:.2}s/repeat)", method.name());
        rows.push(BenchRow {
            dataset: name.to_string(),
            method,
            kernel: if cfg.rbf { "rbf" } else { "linear" },
            accuracies,
            mean_acc,
            std_acc,
            seconds,
        });
    }
    Ok(rows)
}
