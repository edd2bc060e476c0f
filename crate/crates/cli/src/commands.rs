use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use odm::analysis::{loo_exact, margin_curve_csv, margin_report, model_loo_bound, BoundTerms};
use odm::boxqp::SolverOptions;
use odm::data::{parse_prediction_input, read_libsvm, Dataset};
use odm::kernel::{avg_pairwise_distance, KernelSpec, DEFAULT_DISTANCE_CAP};
use odm::model::{Classifier, Model};
use odm::odm_dual::{train_kernel, FeatureMap, OdmParams, OdmlParams, Params, TrainOptions, Variant};
use odm::odm_linear::{lipschitz_estimate, SnapshotRule, SvrgOptions};
use odm::selection::{bench_dataset, cv_train, fit_model, BenchConfig, BenchRow, FitConfig, GridSpec, SolverChoice, BENCH_CSV_HEADER};
use odm::OdmError;

use crate::{
    BenchArgs, CvArgs, GridArg, GridArgs, HyperArgs, KernelArg, LooBoundArgs, MarginsArgs, PredictArgs, SnapshotArg,
    SolverArg, SolverArgs, TrainArgs, VariantArg,
};

#[derive(Debug)]
pub enum CliError {
    /// Bad or inconsistent flags; exit code 2.
    Usage(String),
    /// Anything that fails while running; exit code 1.
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::from(2),
            CliError::Runtime(_) => ExitCode::from(1),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

impl From<OdmError> for CliError {
    fn from(e: OdmError) -> Self {
        match e {
            OdmError::InvalidParameter(m) => CliError::Usage(m),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

fn with_path<T>(path: &Path, r: odm::Result<T>) -> CliResult<T> {
    r.map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> CliResult {
    fs::write(path, contents).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

fn variant_of(v: VariantArg) -> Variant {
    match v {
        VariantArg::Svm => Variant::Svm,
        VariantArg::Odml => Variant::Odml,
        VariantArg::Odm => Variant::Odm,
    }
}

fn params_from_flags(variant: Variant, h: &HyperArgs) -> CliResult<Params> {
    let given = [("c", h.c), ("lambda1", h.lambda1), ("lambda2", h.lambda2), ("c1", h.c1), ("c2", h.c2), ("d", h.d)];
    let wanted: &[&str] = match variant {
        Variant::Svm => &["c"],
        Variant::Odml => &["c", "lambda1", "lambda2"],
        Variant::Odm => &["c1", "c2", "d"],
    };
    let missing: Vec<String> = wanted
        .iter()
        .filter(|n| given.iter().any(|(g, v)| g == *n && v.is_none()))
        .map(|n| format!("--{n}"))
        .collect();
    if !missing.is_empty() {
        return usage(format!("{} needs {} (or --cv)", variant.name(), missing.join(", ")));
    }
    if let Some((n, _)) = given.iter().find(|(n, v)| v.is_some() && !wanted.contains(n)) {
        return usage(format!("--{n} does not apply to {}", variant.name()));
    }
    let params = match variant {
        Variant::Svm => Params::Svm { c: h.c.unwrap() },
        Variant::Odml => Params::Odml(OdmlParams { c: h.c.unwrap(), lambda1: h.lambda1.unwrap(), lambda2: h.lambda2.unwrap() }),
        Variant::Odm => Params::Odm(OdmParams { c1: h.c1.unwrap(), c2: h.c2.unwrap(), d: h.d.unwrap() }),
    };
    params.validate()?;
    Ok(params)
}

fn grid_from_flags(g: &GridArgs) -> GridSpec {
    let mut grid = match g.grid {
        GridArg::Coarse => GridSpec::coarse(),
        GridArg::Paper => GridSpec::paper(),
    };
    let over = |dst: &mut Vec<f64>, src: &Option<Vec<f64>>| {
        if let Some(v) = src {
            dst.clone_from(v);
        }
    };
    over(&mut grid.c, &g.c_values);
    over(&mut grid.lambda1, &g.lambda1_values);
    over(&mut grid.lambda2, &g.lambda2_values);
    over(&mut grid.c1, &g.c1_values);
    over(&mut grid.c2, &g.c2_values);
    over(&mut grid.d, &g.d_values);
    over(&mut grid.width_factors, &g.width_factors);
    grid
}

fn check_solver(s: &SolverArgs, kernel: KernelArg) -> CliResult {
    if s.solver == SolverArg::Svrg && kernel == KernelArg::Rbf {
        return usage("the svrg solver trains linear-kernel models only; use --solver dcd with --kernel rbf");
    }
    if s.solver == SolverArg::Dcd && s.eta.is_some() {
        return usage("--eta applies to --solver svrg only");
    }
    Ok(())
}

/// Solver settings; SVRG without `--eta` uses `0.1 / L` for the largest
/// Lipschitz estimate among `params` on the mapped data.
fn fit_config(s: &SolverArgs, keep_alpha: bool, d: &Dataset, params: &[Params]) -> CliResult<FitConfig> {
    let normalize = !s.no_normalize;
    let solver = match s.solver {
        SolverArg::Dcd => SolverChoice::Dcd(SolverOptions { tolerance: s.tol, max_passes: s.max_passes, seed: s.seed, shuffle: true }),
        SolverArg::Svrg => {
            let eta = match s.eta {
                Some(eta) => eta,
                None => {
                    let mapped = FeatureMap::fit(d, normalize, s.bias).apply(d);
                    let lip = params.iter().map(|p| lipschitz_estimate(&mapped, p)).fold(1.0, f64::max);
                    0.1 / lip
                }
            };
            let snapshot_rule = match s.snapshot {
                SnapshotArg::Random => SnapshotRule::RandomIterate,
                SnapshotArg::Last => SnapshotRule::LastIterate,
            };
            let opts = SvrgOptions { eta, stages: s.stages, epoch_length: None, seed: s.seed, snapshot_rule };
            opts.validate()?;
            SolverChoice::Svrg(opts)
        }
    };
    if keep_alpha && s.solver == SolverArg::Svrg {
        return usage("--keep-alpha needs the dcd solver");
    }
    if let SolverChoice::Dcd(o) = solver {
        o.validate()?;
    }
    Ok(FitConfig { solver, normalize, bias: s.bias, keep_alpha })
}

fn default_width(d: &Dataset, normalize: bool, seed: u64) -> CliResult<f64> {
    let data = if normalize { FeatureMap::fit(d, true, None).apply(d) } else { d.clone() };
    let delta = avg_pairwise_distance(&data, DEFAULT_DISTANCE_CAP, seed)?;
    if !(delta > 0.0) {
        return Err(CliError::Runtime("all training instances coincide; pass --width".into()));
    }
    Ok(delta)
}

fn describe(model: &Model) -> String {
    let mut out = String::new();
    let params: Vec<String> = model.params().named_values().iter().map(|(n, v)| format!("{n}={v}")).collect();
    out.push_str(&format!("variant {} ({})\n", model.variant().name(), params.join(", ")));
    match model.kernel() {
        KernelSpec::Linear => out.push_str("kernel linear\n"),
        KernelSpec::Rbf { width } => out.push_str(&format!("kernel rbf (width {width})\n")),
    }
    out.push_str(&format!("objective {:.10}\n", model.objective()));
    match model {
        Model::Kernel(k) => {
            out.push_str(&format!("support vectors {} of {}\n", model.support_count(), k.summary.m_train));
            let status = if k.summary.converged { "converged" } else { "NOT converged" };
            out.push_str(&format!("{status} after {} passes\n", k.summary.passes));
        }
        Model::Linear(l) => {
            out.push_str(&format!("nonzero weights {} of {}\n", model.support_count(), l.dim()));
            out.push_str(&format!("svrg finished {} stages (no convergence test)\n", l.summary.stages));
        }
    }
    out
}

fn run_cv(
    d: &Dataset,
    variant: Variant,
    kernel: KernelArg,
    solver: &SolverArgs,
    grid_args: &GridArgs,
    keep_alpha: bool,
) -> CliResult<Model> {
    check_solver(solver, kernel)?;
    let grid = grid_from_flags(grid_args);
    if let Err(e) = grid.validate(variant) {
        return usage(e.to_string());
    }
    if kernel == KernelArg::Rbf && grid.width_factors.is_empty() {
        return usage("grid for RBF width is empty");
    }
    let candidates = grid.params(variant)?;
    let cfg = fit_config(solver, keep_alpha, d, &candidates)?;
    let (cv, model) = cv_train(d, variant, kernel == KernelArg::Rbf, &grid, grid_args.folds, solver.seed, &cfg)?;
    let best = cv.best_score();
    println!("grid points {} x {} folds", cv.scores.len(), grid_args.folds);
    println!("best mean cv accuracy {:.6}", best.mean_accuracy);
    Ok(model)
}

pub fn train(a: TrainArgs) -> CliResult {
    let d = with_path(&a.input, read_libsvm(&a.input))?;
    let variant = variant_of(a.variant);
    let model = if a.cv {
        let h = &a.hyper;
        if [h.c, h.lambda1, h.lambda2, h.c1, h.c2, h.d, h.width].iter().any(Option::is_some) {
            return usage("hyperparameter flags cannot be combined with --cv; use the --*-values grid flags");
        }
        run_cv(&d, variant, a.kernel, &a.solver, &a.grid, a.keep_alpha)?
    } else {
        check_solver(&a.solver, a.kernel)?;
        let params = params_from_flags(variant, &a.hyper)?;
        let kernel = match (a.kernel, a.hyper.width) {
            (KernelArg::Linear, Some(_)) => return usage("--width applies to --kernel rbf only"),
            (KernelArg::Linear, None) => KernelSpec::Linear,
            (KernelArg::Rbf, Some(w)) => KernelSpec::rbf(w)?,
            (KernelArg::Rbf, None) => KernelSpec::rbf(default_width(&d, !a.solver.no_normalize, a.solver.seed)?)?,
        };
        let cfg = fit_config(&a.solver, a.keep_alpha, &d, &[params])?;
        fit_model(&d, &params, kernel, &cfg)?
    };
    with_path(&a.model_out, model.save(&a.model_out))?;
    print!("{}", describe(&model));
    Ok(())
}

pub fn cv(a: CvArgs) -> CliResult {
    let d = with_path(&a.input, read_libsvm(&a.input))?;
    let model = run_cv(&d, variant_of(a.variant), a.kernel, &a.solver, &a.grid, a.keep_alpha)?;
    print!("{}", describe(&model));
    if let Some(path) = &a.model_out {
        with_path(path, model.save(path))?;
    }
    Ok(())
}

fn load_model(path: &Path) -> CliResult<Model> {
    with_path(path, Model::load(path))
}

pub fn predict(a: PredictArgs) -> CliResult {
    let model = load_model(&a.model)?;
    let text = fs::read_to_string(&a.input).map_err(|e| CliError::Runtime(format!("{}: {e}", a.input.display())))?;
    let input = with_path(&a.input, parse_prediction_input(&text))?;
    let predictions: Vec<f64> = input.instances.iter().map(|x| model.predict_label(x)).collect();
    let mut out = String::new();
    for p in &predictions {
        out.push_str(if *p > 0.0 { "+1\n" } else { "-1\n" });
    }
    write_file(&a.output, &out)?;
    if let Some(labels) = &input.labels {
        if !labels.is_empty() {
            let hits = predictions.iter().zip(labels).filter(|(p, y)| p == y).count();
            println!("accuracy {:.6} ({hits}/{})", hits as f64 / labels.len() as f64, labels.len());
        }
    }
    Ok(())
}

pub fn margins(a: MarginsArgs) -> CliResult {
    let model = load_model(&a.model)?;
    let d = with_path(&a.input, read_libsvm(&a.input))?;
    let report = margin_report(&model, &d)?;
    if report.zero_norm {
        return Err(CliError::Runtime("model has zero weight norm; geometric margins are undefined".into()));
    }
    write_file(&a.output, &margin_curve_csv(&report))?;
    println!("margin mean {:.10}", report.mean);
    println!("margin variance {:.10}", report.variance);
    println!("weight norm {:.10}", report.weight_norm);
    Ok(())
}

pub fn loo_bound(a: LooBoundArgs) -> CliResult {
    let model = load_model(&a.model)?;
    let report = match model_loo_bound(&model) {
        Err(OdmError::MissingDualSolution) => {
            return Err(CliError::Runtime(
                "model file has no dual solution; retrain with `odm train --keep-alpha` (dcd solver)".into(),
            ))
        }
        r => r?,
    };
    let m = report.m;
    println!("variant {}", report.variant.name());
    println!("m {m}");
    match report.terms {
        BoundTerms::Odml { free_sum, free_count, bounded_count } => {
            println!("free coefficients {free_count} (weighted sum {free_sum:.10})");
            println!("coefficients at the upper bound {bounded_count}");
        }
        BoundTerms::Odm { zeta_sum, beta_sum, zeta_count, beta_count, band_term } => {
            println!("positive zeta {zeta_count} (weighted sum {zeta_sum:.10})");
            println!("positive beta {beta_count} (weighted sum {beta_sum:.10})");
            println!("band term {band_term:.10}");
        }
    }
    println!("bound {:.10} (error count bound {:.4})", report.bound_value, report.bound_value * m as f64);
    if !a.exact {
        if a.input.is_some() {
            return usage("--input is only used with --exact");
        }
        return Ok(());
    }
    let Some(input) = &a.input else {
        return usage("--exact needs --input with the training set");
    };
    let d = with_path(input, read_libsvm(input))?;
    if d.len() > a.max_m {
        return usage(format!("--exact retrains {} times; refusing above --max-m {}", d.len(), a.max_m));
    }
    if d.len() != m {
        return Err(CliError::Runtime(format!("model was trained on {m} instances but {} has {}", input.display(), d.len())));
    }
    let Model::Kernel(km) = &model else { unreachable!("bound needs a kernel model") };
    let opts = TrainOptions {
        solver: SolverOptions { tolerance: a.tol, max_passes: a.max_passes, ..Default::default() },
        normalize: km.features.normalizer.is_some(),
        bias: km.features.bias.map(|(_, v)| v),
        keep_alpha: false,
    };
    let errors = loo_exact(&d, |sub| train_kernel(sub, &km.params, km.kernel, &opts))?;
    let rate = errors as f64 / m as f64;
    println!("exact leave-one-out errors {errors} (rate {rate:.10})");
    if errors > 0 {
        println!("bound / exact {:.6}", report.bound_value / rate);
    } else {
        println!("bound / exact inf");
    }
    Ok(())
}

fn dataset_files(dir: &Path) -> CliResult<Vec<std::path::PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| CliError::Runtime(format!("{}: {e}", dir.display())))?;
    let mut files: Vec<_> = entries.filter_map(|e| e.ok()).map(|e| e.path()).filter(|p| p.is_file()).collect();
    files.sort();
    Ok(files)
}

pub fn bench(a: BenchArgs) -> CliResult {
    check_solver(&a.solver, a.kernel)?;
    let grid = grid_from_flags(&a.grid);
    let methods: Vec<Variant> = a.methods.iter().map(|m| variant_of(*m)).collect();
    if methods.is_empty() {
        return usage("--methods is empty");
    }
    for v in &methods {
        if let Err(e) = grid.validate(*v) {
            return usage(e.to_string());
        }
    }
    let mut rows: Vec<BenchRow> = Vec::new();
    let mut skipped = 0;
    let files = dataset_files(&a.datasets)?;
    for path in &files {
        let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let d = match read_libsvm(path) {
            Ok(d) => d,
            Err(e) => {
                log::warn!("skipping {}: {e}", path.display());
                skipped += 1;
                continue;
            }
        };
        let mut candidates = Vec::new();
        for v in &methods {
            candidates.extend(grid.params(*v)?);
        }
        let fit = fit_config(&a.solver, false, &d, &candidates)?;
        let cfg = BenchConfig {
            methods: methods.clone(),
            rbf: a.kernel == KernelArg::Rbf,
            repeats: a.repeats,
            seed: a.solver.seed,
            folds: a.grid.folds,
            train_fraction: 0.5,
            grid: grid.clone(),
            fit,
        };
        match bench_dataset(&name, &d, &cfg, None) {
            Ok(r) => {
                for row in &r {
                    eprintln!(
                        "{:<16} {:<5} {:<6} {:.4} ± {:.4}  {:.2}s/repeat",
                        row.dataset,
                        row.method.name(),
                        row.kernel,
                        row.mean_acc,
                        row.std_acc,
                        row.seconds
                    );
                }
                rows.extend(r);
            }
            Err(OdmError::InvalidParameter(m)) => return usage(m),
            Err(e) => {
                log::warn!("skipping {}: {e}", path.display());
                skipped += 1;
            }
        }
    }
    if rows.is_empty() {
        return Err(CliError::Runtime(format!(
            "no dataset in {} could be evaluated ({skipped} skipped)",
            a.datasets.display()
        )));
    }
    let mut csv = String::from(BENCH_CSV_HEADER);
    csv.push('\n');
    for row in &rows {
        csv.push_str(&row.csv_line(!a.no_timing));
        csv.push('\n');
    }
    match &a.output {
        Some(path) => write_file(path, &csv)?,
        None => std::io::stdout()
            .write_all(csv.as_bytes())
            .map_err(|e| CliError::Runtime(e.to_string()))?,
    }
    Ok(())
}
