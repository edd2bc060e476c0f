//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criterion 8 needs externally supplied LIBSVM files (heart, australian,
//! german, fourclass) in `$ODM_UCI_DIR` (default `data/uci` under the
//! workspace root). Without them it reports NOT RUN and does not fail the
//! target.

mod common;

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use common::*;
use nalgebra::DMatrix;
use odm::analysis::{loo_exact, margin_report, model_loo_bound};
use odm::boxqp::{dcd_solve, BoxQpProblem, SolverOptions};
use odm::data::read_libsvm;
use odm::kernel::{gram, low_rank_update_inverse, KernelSpec};
use odm::model::Model;
use odm::odm_dual::{
    build_odml_dual, build_svm_dual, fit_dual, odm_slacks, train_kernel, training_decisions, FeatureMap,
    OdmParams, OdmlParams, Params, TrainOptions, Variant,
};
use odm::odm_linear::{
    full_gradient_odm, full_gradient_odml, lipschitz_estimate, objective_odm_linear, objective_odml_linear,
    stoch_grad_odm, stoch_grad_odml, svrg_train, LinearModel, LinearSummary, SnapshotRule, SvrgOptions,
};
use odm::selection::{bench_dataset, BenchConfig, FitConfig, SolverChoice};
use rand::Rng;

enum Outcome {
    Pass(String),
    Fail(String),
    NotRun(String),
}

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_budget(start: Instant, budget: Duration) -> Result<(), String> {
    ensure(start.elapsed() < budget, || format!("took {:.1?}, budget {budget:?}", start.elapsed()))
}

fn lemma_identity() -> Check {
    let start = Instant::now();
    let mut r = rng(101);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let d = r.random_range(1..=30);
        let k = r.random_range(1..=6);
        let x = DMatrix::from_fn(d, k, |_, _| r.random_range(-1.0..1.0));
        let a = random_spd(&mut r, k, 0.1);
        let lhs = gauss_jordan_inverse(&(DMatrix::identity(d, d) + &x * &a * x.transpose()));
        let rhs = low_rank_update_inverse(&x, &a).map_err(|e| e.to_string())?;
        worst = worst.max((lhs - rhs).amax());
    }
    ensure(worst <= 1e-8, || format!("max elementwise gap {worst:.3e}"))?;
    within_budget(start, Duration::from_secs(5))?;
    Ok(format!("max gap {worst:.2e}"))
}

fn solver_oracle() -> Check {
    let start = Instant::now();
    let h = DMatrix::from_row_slice(2, 2, &[4.0, 2.0, 2.0, 1.0]);
    let p = BoxQpProblem::new(h.clone(), vec![-1.0; 2], vec![0.5; 2]).unwrap();
    let s = dcd_solve(&p, SolverOptions { tolerance: 1e-12, ..Default::default() }).map_err(|e| e.to_string())?;
    // grid-search oracle over [0, 0.5]² in steps of 1/200
    let mut best = (f64::INFINITY, [0.0; 2]);
    for i in 0..=100 {
        for j in 0..=100 {
            let a = [i as f64 / 200.0, j as f64 / 200.0];
            let v = qp_value(&h, &[-1.0, -1.0], &a);
            if v < best.0 {
                best = (v, a);
            }
        }
    }
    ensure(best.1 == [0.0, 0.5] && best.0 == -0.375, || format!("grid oracle found {:?}", best))?;
    ensure(max_abs_diff(&s.alpha, &best.1) <= 1e-12 && (s.objective + 0.375).abs() <= 1e-12, || {
        format!("hand instance gave α={:?}, objective {}", s.alpha, s.objective)
    })?;

    let mut r = rng(202);
    let mut worst = 0.0f64;
    for case in 0..50 {
        let n = r.random_range(1..=6);
        let b = DMatrix::from_fn(n, n, |_, _| r.random_range(-1.0..1.0));
        let h = b.transpose() * &b + DMatrix::identity(n, n) * r.random_range(0.05..1.0);
        let q: Vec<f64> = (0..n).map(|_| r.random_range(-2.0..1.0)).collect();
        let u: Vec<f64> = (0..n).map(|_| if r.random_bool(0.2) { f64::INFINITY } else { r.random_range(0.1..2.0) }).collect();
        let p = BoxQpProblem::new(h.clone(), q.clone(), u.clone()).unwrap();
        let s = dcd_solve(&p, SolverOptions { tolerance: 1e-10, seed: case, ..Default::default() })
            .map_err(|e| e.to_string())?;
        ensure(s.converged && p.is_feasible(&s.alpha), || format!("case {case}: not converged or infeasible"))?;
        let oracle = projected_gradient_oracle(&h, &q, &u, 1e-10);
        let gap = (s.objective - qp_value(&h, &q, &oracle)).abs();
        worst = worst.max(gap);
        ensure(gap <= 1e-6, || format!("case {case}: objective gap {gap:.3e}"))?;
    }
    within_budget(start, Duration::from_secs(30))?;
    Ok(format!("hand instance exact, max objective gap {worst:.2e}"))
}

fn svm_reduction() -> Check {
    let mut r = rng(303);
    let mut worst = 0.0f64;
    for case in 0..20 {
        let m = r.random_range(2..=100);
        let dim = r.random_range(1..=8);
        let d = random_dataset(&mut r, m, dim, 0.8);
        let kernel = if case % 2 == 0 { KernelSpec::Linear } else { KernelSpec::rbf(r.random_range(0.5..3.0)).unwrap() };
        let g = gram(kernel, &d);
        let c = r.random_range(0.5..100.0);
        let svm = build_svm_dual(&g, d.labels(), c).map_err(|e| e.to_string())?;
        let odml = build_odml_dual(&g, d.labels(), &OdmlParams::new(c, 0.0, 0.0).unwrap()).map_err(|e| e.to_string())?;
        ensure(svm == odml, || format!("case {case}: dual problems differ"))?;
        let opts = SolverOptions { tolerance: 1e-10, seed: case, ..Default::default() };
        let a = fit_dual(&g, d.labels(), &Params::Svm { c }, opts).map_err(|e| e.to_string())?;
        let b = fit_dual(&g, d.labels(), &Params::Odml(OdmlParams::new(c, 0.0, 0.0).unwrap()), opts)
            .map_err(|e| e.to_string())?;
        let gap = max_abs_diff(&a.theta, &b.theta);
        worst = worst.max(gap);
        ensure(gap <= 1e-8, || format!("case {case}: θ gap {gap:.3e}"))?;
    }
    Ok(format!("20 identical duals, max θ gap {worst:.2e}"))
}

fn relative_gap(a: &[f64], b: &[f64]) -> f64 {
    max_abs_diff(a, b) / max_abs(b).max(1.0)
}

fn unbiased_gradients() -> Check {
    let mut r = rng(404);
    let mut worst_mean = 0.0f64;
    for case in 0..20 {
        let m = r.random_range(2..=20);
        let dim = r.random_range(1..=6);
        let d = random_dataset(&mut r, m, dim, 0.5);
        let w: Vec<f64> = (0..dim).map(|_| r.random_range(-2.0..2.0)).collect();
        let po = OdmParams::new(r.random_range(0.1..10.0), r.random_range(0.1..10.0), r.random_range(0.0..0.5)).unwrap();
        let pl = OdmlParams::new(r.random_range(0.1..10.0), r.random_range(0.0..1.0), r.random_range(0.0..1.0)).unwrap();
        let samples: Vec<_> = d.iter().collect();

        let mut avg = vec![0.0; dim];
        for &s in &samples {
            for (a, g) in avg.iter_mut().zip(stoch_grad_odm(&w, s, &po)) {
                *a += g / m as f64;
            }
        }
        let full = full_gradient_odm(&w, &d, &po).map_err(|e| e.to_string())?;
        let gap = relative_gap(&avg, &full);
        worst_mean = worst_mean.max(gap);
        ensure(gap <= 1e-10, || format!("case {case}: ODM average gap {gap:.3e}"))?;

        let mut avg = vec![0.0; dim];
        for &si in &samples {
            for &sj in &samples {
                for (a, g) in avg.iter_mut().zip(stoch_grad_odml(&w, si, sj, &pl)) {
                    *a += g / (m * m) as f64;
                }
            }
        }
        let full = full_gradient_odml(&w, &d, &pl).map_err(|e| e.to_string())?;
        let gap = relative_gap(&avg, &full);
        worst_mean = worst_mean.max(gap);
        ensure(gap <= 1e-10, || format!("case {case}: ODMᴸ average gap {gap:.3e}"))?;
    }

    let mut worst_fd = 0.0f64;
    let mut points = 0;
    while points < 100 {
        let m = r.random_range(2..=20);
        let dim = r.random_range(1..=6);
        let d = random_dataset(&mut r, m, dim, 0.5);
        let w: Vec<f64> = (0..dim).map(|_| r.random_range(-2.0..2.0)).collect();
        let margins: Vec<f64> = d.iter().map(|(x, y)| y * x.dot_dense(&w)).collect();
        if margins.iter().any(|g| (g - 1.0).abs() < 1e-3) {
            continue;
        }
        let (fd, grad) = if points % 2 == 0 {
            let p = OdmParams::new(r.random_range(0.1..10.0), r.random_range(0.1..10.0), r.random_range(0.0..0.5)).unwrap();
            let fd = finite_difference(|v| objective_odm_linear(v, &d, &p).unwrap(), &w, 1e-6);
            (fd, full_gradient_odm(&w, &d, &p).unwrap())
        } else {
            let p = OdmlParams::new(r.random_range(0.1..10.0), r.random_range(0.0..1.0), r.random_range(0.0..1.0)).unwrap();
            let fd = finite_difference(|v| objective_odml_linear(v, &d, &p).unwrap(), &w, 1e-6);
            (fd, full_gradient_odml(&w, &d, &p).unwrap())
        };
        let gap = relative_gap(&fd, &grad);
        worst_fd = worst_fd.max(gap);
        ensure(gap <= 1e-4, || format!("finite-difference gap {gap:.3e} at point {points}"))?;
        points += 1;
    }
    Ok(format!("max average gap {worst_mean:.2e}, max finite-difference gap {worst_fd:.2e}"))
}

fn svrg_vs_dcd() -> Check {
    let start = Instant::now();
    let mut r = rng(505);
    let d = random_dataset(&mut r, 400, 10, 0.6);
    let scale = d.instances().iter().map(|x| x.norm_sq()).fold(0.0, f64::max).sqrt();
    let xs = d.instances().iter().map(|x| {
        let mut v = odm::SparseVector::zero();
        for &(j, val) in x.entries() {
            v.push(j, val / scale);
        }
        v
    });
    let d = odm::Dataset::new(xs.collect(), d.labels().to_vec()).unwrap();
    let p = OdmParams::new(4.0, 4.0, 0.2).unwrap();
    let params = Params::Odm(p);

    let g = gram(KernelSpec::Linear, &d);
    let fit = fit_dual(&g, d.labels(), &params, SolverOptions { tolerance: 1e-10, max_passes: 100_000, ..Default::default() })
        .map_err(|e| e.to_string())?;
    ensure(fit.solution.converged, || "DCD reference did not converge".into())?;
    let mut w_ref = vec![0.0; d.dim()];
    for (x, t) in d.instances().iter().zip(&fit.theta) {
        x.axpy_into(*t, &mut w_ref);
    }
    let f_ref = objective_odm_linear(&w_ref, &d, &p).unwrap();

    let eta = 0.1 / lipschitz_estimate(&d, &params);
    let opts = SvrgOptions { eta, stages: 50, epoch_length: None, seed: 7, snapshot_rule: SnapshotRule::LastIterate };
    let model = svrg_train(&d, &params, &opts).map_err(|e| e.to_string())?;
    let rel = (model.summary.objective - f_ref).abs() / f_ref.abs();
    ensure(rel <= 1e-3, || format!("relative objective gap {rel:.3e} (SVRG {}, DCD {f_ref})", model.summary.objective))?;
    within_budget(start, Duration::from_secs(60))?;
    Ok(format!("relative objective gap {rel:.2e} after 50 stages, objective {f_ref:.6}"))
}

fn kkt_geometry() -> Check {
    let mut r = rng(606);
    let mut solutions = 0;
    for case in 0..30 {
        let m = r.random_range(4..=60);
        let dim = r.random_range(1..=6);
        let d = random_dataset(&mut r, m, dim, 0.7);
        let kernel = if case % 2 == 0 { KernelSpec::Linear } else { KernelSpec::rbf(r.random_range(0.5..3.0)).unwrap() };
        let p = OdmParams::new(2f64.powi(r.random_range(0..=10)), 2f64.powi(r.random_range(0..=10)), r.random_range(0.0..0.5)).unwrap();
        let g = gram(kernel, &d);
        let fit = fit_dual(&g, d.labels(), &Params::Odm(p), SolverOptions { tolerance: 1e-9, max_passes: 200_000, seed: case, ..Default::default() })
            .map_err(|e| e.to_string())?;
        if !fit.solution.converged {
            continue;
        }
        solutions += 1;
        let (zeta, beta) = fit.solution.alpha.split_at(m);
        if let Some(i) = (0..m).find(|&i| zeta[i] > 1e-6 && beta[i] > 1e-6) {
            return Err(format!("case {case}: ζ_{i}={} and β_{i}={} both positive", zeta[i], beta[i]));
        }
        let (xi, eps) = odm_slacks(&fit.solution.alpha, &p);
        let f = training_decisions(&g, &fit.theta);
        for i in 0..m {
            let margin = d.labels()[i] * f[i];
            ensure(margin >= 1.0 - p.d - xi[i] - 1e-6, || format!("case {case}: lower constraint violated at {i}"))?;
            ensure(margin <= 1.0 + p.d + eps[i] + 1e-6, || format!("case {case}: upper constraint violated at {i}"))?;
        }
    }
    ensure(solutions >= 25, || format!("only {solutions} of 30 solves converged"))?;
    Ok(format!("{solutions} converged solutions checked"))
}

fn loo_validity() -> Check {
    let start = Instant::now();
    let mut r = rng(707);
    let solver = SolverOptions { tolerance: 1e-10, max_passes: 200_000, ..Default::default() };
    let mut violations = Vec::new();
    let mut cases = 0;
    let (mut errors_total, mut bound_total, mut vacuous) = (0usize, 0.0, 0);
    for case in 0..20 {
        let m = r.random_range(10..=40);
        let dim = r.random_range(1..=5);
        let d = random_dataset(&mut r, m, dim, 0.5);
        let kernel = if case % 2 == 0 { KernelSpec::Linear } else { KernelSpec::rbf(r.random_range(0.5..3.0)).unwrap() };
        let odml = Params::Odml(OdmlParams::new([10.0, 50.0, 100.0][case % 3], 2f64.powi(r.random_range(-8..=-2)), 2f64.powi(r.random_range(-8..=-2))).unwrap());
        let odm = Params::Odm(OdmParams::new(2f64.powi(r.random_range(0..=10)), 2f64.powi(r.random_range(0..=10)), r.random_range(0..=5) as f64 / 10.0).unwrap());
        for params in [odml, odm] {
            let opts = TrainOptions { solver, normalize: false, bias: None, keep_alpha: true };
            let model = train_kernel(&d, &params, kernel, &opts).map_err(|e| e.to_string())?;
            let bound = model_loo_bound(&Model::Kernel(model)).map_err(|e| e.to_string())?;
            let exact = loo_exact(&d, |sub| train_kernel(sub, &params, kernel, &TrainOptions { keep_alpha: false, ..opts }))
                .map_err(|e| e.to_string())?;
            cases += 1;
            let lhs = m as f64 * bound.bound_value;
            errors_total += exact;
            bound_total += lhs;
            vacuous += usize::from(bound.bound_value >= 1.0);
            if lhs < exact as f64 {
                violations.push(format!("case {case} {}: m·bound {lhs:.3} < {exact}", params.variant().name()));
            }
        }
    }
    within_budget(start, Duration::from_secs(600))?;
    ensure(violations.is_empty(), || format!("{} of {cases} violated: {}", violations.len(), violations.join("; ")))?;
    Ok(format!("{cases} dataset/formulation pairs, no violations; {errors_total} LOO errors vs summed bound {bound_total:.1}, {vacuous} vacuous"))
}

fn uci_dir() -> PathBuf {
    match std::env::var_os("ODM_UCI_DIR") {
        Some(dir) => PathBuf::from(dir),
        None => Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/uci"),
    }
}

fn find_dataset(dir: &Path, names: &[&str]) -> Option<PathBuf> {
    names.iter().map(|n| dir.join(n)).find(|p| p.is_file())
}

fn uci_reproduction() -> Outcome {
    let dir = uci_dir();
    let linear = [
        ("australian", 0.867, &["australian", "australian_scale", "australian.txt"][..]),
        ("german", 0.743, &["german", "german.numer", "german.numer_scale", "german.txt"][..]),
        ("heart", 0.801, &["heart", "heart_scale", "heart.txt"][..]),
    ];
    let fourclass = find_dataset(&dir, &["fourclass", "fourclass_scale", "fourclass.txt"]);
    let found: Vec<_> = linear.iter().filter_map(|(n, t, files)| find_dataset(&dir, files).map(|p| (*n, *t, p))).collect();
    if found.len() < linear.len() || fourclass.is_none() {
        return Outcome::NotRun(format!("datasets not provided in {}", dir.display()));
    }
    let run = || -> Check {
        let mut notes = Vec::new();
        for (name, target, path) in &found {
            let d = read_libsvm(path).map_err(|e| e.to_string())?;
            let cfg = BenchConfig { methods: vec![Variant::Svm, Variant::Odm], repeats: 30, seed: 1, ..Default::default() };
            let rows = bench_dataset(name, &d, &cfg, None).map_err(|e| e.to_string())?;
            let (svm, odm) = (rows[0].mean_acc, rows[1].mean_acc);
            ensure((odm - target).abs() <= 0.03, || format!("{name}: ODM {odm:.3} vs {target}"))?;
            ensure(odm >= svm - 0.005, || format!("{name}: ODM {odm:.3} below SVM {svm:.3}"))?;
            notes.push(format!("{name} odm {odm:.3} svm {svm:.3}"));
        }
        let d = read_libsvm(fourclass.as_ref().unwrap()).map_err(|e| e.to_string())?;
        let cfg = BenchConfig { methods: vec![Variant::Odm], rbf: true, repeats: 30, seed: 1, ..Default::default() };
        let rows = bench_dataset("fourclass", &d, &cfg, None).map_err(|e| e.to_string())?;
        ensure((rows[0].mean_acc - 1.0).abs() <= 0.01, || format!("fourclass RBF ODM {:.3}", rows[0].mean_acc))?;
        notes.push(format!("fourclass rbf odm {:.3}", rows[0].mean_acc));
        Ok(notes.join(", "))
    };
    match run() {
        Ok(s) => Outcome::Pass(s),
        Err(s) => Outcome::Fail(s),
    }
}

fn margin_identities() -> Check {
    let mut r = rng(909);
    for case in 0..50 {
        let m = r.random_range(1..=60);
        let dim = r.random_range(1..=8);
        let d = random_dataset(&mut r, m, dim, 0.5);
        let w: Vec<f64> = (0..dim).map(|_| r.random_range(-2.0..2.0)).collect();
        let model = LinearModel {
            w: w.clone(),
            params: Params::Svm { c: 1.0 },
            features: FeatureMap::default(),
            summary: LinearSummary { m_train: m, objective: 0.0, stages: 0 },
        };
        let rep = margin_report(&model, &d).map_err(|e| e.to_string())?;
        let x = design_matrix(&d, dim);
        let y = nalgebra::DVector::from_column_slice(d.labels());
        let wv = nalgebra::DVector::from_column_slice(&w);
        let mf = m as f64;
        let mean = (x.transpose() * &y).dot(&wv) / mf;
        let center = (DMatrix::identity(m, m) * mf - &y * y.transpose()) / (mf * mf);
        let xw = &x * &wv;
        let var = xw.dot(&(&center * &xw));
        let tol = |v: f64| 1e-10 * v.abs().max(1.0);
        ensure((rep.mean - mean).abs() <= tol(mean), || format!("case {case}: mean {} vs {mean}", rep.mean))?;
        ensure((rep.variance - var).abs() <= tol(var), || format!("case {case}: variance {} vs {var}", rep.variance))?;
        ensure(rep.curve.windows(2).all(|p| p[0].0 < p[1].0 && p[0].1 < p[1].1), || format!("case {case}: curve not monotone"))?;
        ensure(rep.curve.last().map(|p| p.1) == Some(1.0), || format!("case {case}: curve does not end at 1"))?;
    }
    Ok("50 models".into())
}

fn determinism_round_trip() -> Check {
    let mut r = rng(1010);
    let d = random_dataset(&mut r, 60, 4, 0.6);
    let cfg = BenchConfig { repeats: 2, seed: 3, folds: 3, ..Default::default() };
    let csv = |rows: Vec<odm::selection::BenchRow>| rows.iter().map(|row| row.csv_line(false) + "\n").collect::<String>();
    let a = csv(bench_dataset("synthetic", &d, &cfg, None).map_err(|e| e.to_string())?);
    let b = csv(bench_dataset("synthetic", &d, &cfg, None).map_err(|e| e.to_string())?);
    ensure(a == b, || "bench CSV differs between runs".into())?;

    let fits = [
        (Params::Odm(OdmParams::new(8.0, 2.0, 0.3).unwrap()), KernelSpec::rbf(1.3).unwrap(), FitConfig { keep_alpha: true, ..Default::default() }),
        (Params::Odml(OdmlParams::new(10.0, 0.25, 0.0625).unwrap()), KernelSpec::Linear, FitConfig { bias: Some(1.0), ..Default::default() }),
        (
            Params::Odm(OdmParams::new(4.0, 4.0, 0.1).unwrap()),
            KernelSpec::Linear,
            FitConfig { solver: SolverChoice::Svrg(SvrgOptions { eta: 0.05, ..Default::default() }), ..Default::default() },
        ),
    ];
    let probe = random_dataset(&mut r, 40, 6, 0.6);
    let mut worst = 0.0f64;
    for (params, kernel, cfg) in fits {
        let model = odm::selection::fit_model(&d, &params, kernel, &cfg).map_err(|e| e.to_string())?;
        let back = Model::from_text(&model.to_text()).map_err(|e| e.to_string())?;
        for (x, _) in probe.iter().chain(d.iter()) {
            use odm::Classifier;
            worst = worst.max((model.decision(x) - back.decision(x)).abs());
        }
    }
    ensure(worst <= 1e-12, || format!("decision drift {worst:.3e} after reload"))?;
    Ok(format!("CSV identical ({} bytes), max reload drift {worst:.1e}", a.len()))
}

fn main() {
    let checks: Vec<(u32, &str, Box<dyn Fn() -> Outcome>)> = vec![
        (1, "low-rank inverse identity", Box::new(|| wrap(lemma_identity()))),
        (2, "DCD matches QP oracles", Box::new(|| wrap(solver_oracle()))),
        (3, "ODMᴸ with zero lambdas reduces to SVM", Box::new(|| wrap(svm_reduction()))),
        (4, "stochastic gradients unbiased, gradients match finite differences", Box::new(|| wrap(unbiased_gradients()))),
        (5, "SVRG agrees with DCD on linear ODM", Box::new(|| wrap(svrg_vs_dcd()))),
        (6, "ODM complementarity and slack feasibility", Box::new(|| wrap(kkt_geometry()))),
        (7, "leave-one-out bounds dominate exact LOO errors", Box::new(|| wrap(loo_validity()))),
        (8, "benchmark accuracies on UCI datasets", Box::new(uci_reproduction)),
        (9, "margin statistics identities", Box::new(|| wrap(margin_identities()))),
        (10, "determinism and model round-trip", Box::new(|| wrap(determinism_round_trip()))),
    ];
    let mut failed = 0;
    for (id, name, check) in checks {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Outcome::Pass(detail) => println!("PASS criterion {id}: {name} ({detail}; {secs:.2}s)"),
            Outcome::Fail(detail) => {
                failed += 1;
                println!("FAIL criterion {id}: {name} ({detail}; {secs:.2}s)");
            }
            Outcome::NotRun(detail) => println!("NOT RUN criterion {id}: {name} ({detail})"),
        }
    }
    if failed > 0 {
        eprintln!("{failed} criteria failed");
        std::process::exit(1);
    }
}

fn wrap(c: Check) -> Outcome {
    match c {
        Ok(s) => Outcome::Pass(s),
        Err(s) => Outcome::Fail(s),
    }
}
