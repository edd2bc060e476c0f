mod common;

use common::*;
use nalgebra::{DMatrix, DVector};
use odm::data::Dataset;
use odm::kernel::{avg_pairwise_distance, build_odml_h, gram, KernelSpec};
use odm::odm_dual::{fit_dual, recover_theta_odml, OdmParams, OdmlParams, Params};
use odm::odm_linear::{
    full_gradient_odm, full_gradient_odml, objective_odm_linear, objective_odml_linear, stoch_grad_odm, stoch_grad_odml,
};
use odm::boxqp::SolverOptions;
use rand::Rng;

fn tight() -> SolverOptions {
    SolverOptions { tolerance: 1e-11, max_passes: 500_000, ..Default::default() }
}

fn primal_weights(d: &Dataset, theta: &[f64]) -> Vec<f64> {
    let mut w = vec![0.0; d.dim()];
    for (x, t) in d.instances().iter().zip(theta) {
        x.axpy_into(*t, &mut w);
    }
    w
}

/// `A = 2λ₁(mI − yyᵀ)/m²` and `YG(I + AG)⁻¹Y` via explicit inversion.
fn explicit_odml_h(g: &DMatrix<f64>, y: &[f64], l1: f64) -> DMatrix<f64> {
    let m = y.len();
    let mf = m as f64;
    let yv = DVector::from_column_slice(y);
    let a = (DMatrix::identity(m, m) * mf - &yv * yv.transpose()) * (2.0 * l1 / (mf * mf));
    let inv = gauss_jordan_inverse(&(DMatrix::identity(m, m) + &a * g));
    let b = g * inv;
    DMatrix::from_fn(m, m, |i, j| y[i] * b[(i, j)] * y[j])
}

#[test]
fn odml_h_matches_explicit_inverse() {
    let mut r = rng(11);
    for _ in 0..20 {
        let m = r.random_range(2..40);
        let d = random_dataset(&mut r, m, 4, 0.5);
        let kernel = if r.random_bool(0.5) { KernelSpec::Linear } else { KernelSpec::rbf(r.random_range(0.3..3.0)).unwrap() };
        let g = gram(kernel, &d);
        let l1 = 2f64.powi(r.random_range(-8..=2));
        let h = build_odml_h(&g, d.labels(), l1).unwrap();
        let oracle = explicit_odml_h(g.matrix(), d.labels(), l1);
        assert!((&h.h - &oracle).amax() <= 1e-9 * oracle.amax().max(1.0));
    }
}

#[test]
fn odml_theta_matches_explicit_inverse() {
    let mut r = rng(12);
    let m = 25;
    let d = random_dataset(&mut r, m, 3, 0.5);
    let g = gram(KernelSpec::rbf(1.2).unwrap(), &d);
    let p = OdmlParams::new(50.0, 0.25, 0.125).unwrap();
    let alpha: Vec<f64> = (0..m).map(|_| r.random_range(0.0..p.c / m as f64)).collect();
    let theta = recover_theta_odml(&alpha, &g, d.labels(), &p).unwrap();
    let y = d.labels();
    let mf = m as f64;
    let yv = DVector::from_column_slice(y);
    let a = (DMatrix::identity(m, m) * mf - &yv * yv.transpose()) * (2.0 * p.lambda1 / (mf * mf));
    let inv = gauss_jordan_inverse(&(DMatrix::identity(m, m) + &a * g.matrix()));
    let rhs = DVector::from_fn(m, |i, _| y[i] * (p.lambda2 / mf + alpha[i]));
    let oracle = inv * rhs;
    assert!(max_abs_diff(&theta, oracle.as_slice()) <= 1e-10);
}

#[test]
fn linear_objectives_match_naive_loops() {
    let mut r = rng(13);
    for _ in 0..50 {
        let m = r.random_range(1..30);
        let dim = r.random_range(1..6);
        let d = random_dataset(&mut r, m, dim, 0.5);
        let rows = dense_rows(&d, dim);
        let w: Vec<f64> = (0..dim).map(|_| r.random_range(-2.0..2.0)).collect();
        let (c, l1, l2) = (r.random_range(0.1..100.0), r.random_range(0.0..1.0), r.random_range(0.0..1.0));
        let lib = objective_odml_linear(&w, &d, &OdmlParams::new(c, l1, l2).unwrap()).unwrap();
        let naive = naive_odml_objective(&w, &rows, d.labels(), c, l1, l2);
        assert!((lib - naive).abs() <= 1e-10 * naive.abs().max(1.0), "{lib} vs {naive}");
        let (c1, c2, dd) = (r.random_range(0.1..100.0), r.random_range(0.1..100.0), r.random_range(0.0..0.5));
        let lib = objective_odm_linear(&w, &d, &OdmParams::new(c1, c2, dd).unwrap()).unwrap();
        let naive = naive_odm_objective(&w, &rows, d.labels(), c1, c2, dd);
        assert!((lib - naive).abs() <= 1e-10 * naive.abs().max(1.0), "{lib} vs {naive}");
    }
}

#[test]
fn stochastic_gradients_match_finite_differences_of_their_terms() {
    let mut r = rng(14);
    let d = random_dataset(&mut r, 12, 3, 0.5);
    let rows = dense_rows(&d, 3);
    let y = d.labels();
    let p = OdmParams::new(3.0, 5.0, 0.2).unwrap();
    for i in 0..12 {
        let w: Vec<f64> = (0..3).map(|_| r.random_range(-1.0..1.0)).collect();
        let term = |v: &[f64]| naive_odm_objective(v, &rows[i..=i], &y[i..=i], p.c1, p.c2, p.d);
        let fd = finite_difference(term, &w, 1e-6);
        let g = stoch_grad_odm(&w, (&d.instances()[i], y[i]), &p);
        assert!(max_abs_diff(&fd, &g) <= 1e-5);
    }
    let pl = OdmlParams::new(10.0, 0.5, 0.25).unwrap();
    let w: Vec<f64> = (0..3).map(|_| r.random_range(-1.0..1.0)).collect();
    // pairwise terms are centred: their FD average over all pairs is the full gradient
    let full = full_gradient_odml(&w, &d, &pl).unwrap();
    let fd = finite_difference(
        |v| naive_odml_objective(v, &rows, y, pl.c, pl.lambda1, pl.lambda2),
        &w,
        1e-6,
    );
    let margins_off_kink = d.iter().all(|(x, yi)| (yi * x.dot_dense(&w) - 1.0).abs() > 1e-3);
    if margins_off_kink {
        assert!(max_abs_diff(&fd, &full) <= 1e-5);
    }
    let mut avg = vec![0.0; 3];
    for si in d.iter() {
        for sj in d.iter() {
            for (a, g) in avg.iter_mut().zip(stoch_grad_odml(&w, si, sj, &pl)) {
                *a += g / 144.0;
            }
        }
    }
    assert!(max_abs_diff(&avg, &full) <= 1e-12);
}

#[test]
fn avg_distance_matches_brute_force() {
    let mut r = rng(15);
    let d = random_dataset(&mut r, 37, 5, 0.5);
    let rows = dense_rows(&d, 5);
    let mut sum = 0.0;
    let mut pairs = 0;
    for i in 0..rows.len() {
        for j in 0..i {
            let sq: f64 = rows[i].iter().zip(&rows[j]).map(|(a, b)| (a - b) * (a - b)).sum();
            sum += sq.sqrt();
            pairs += 1;
        }
    }
    let lib = avg_pairwise_distance(&d, 1000, 0).unwrap();
    assert!((lib - sum / pairs as f64).abs() <= 1e-12);
}

#[test]
fn svm_and_odm_strong_duality() {
    let mut r = rng(16);
    for _ in 0..10 {
        let m = r.random_range(5..40);
        let d = random_dataset(&mut r, m, 3, 0.7);
        let g = gram(KernelSpec::Linear, &d);
        let c = r.random_range(1.0..100.0);
        let fit = fit_dual(&g, d.labels(), &Params::Svm { c }, tight()).unwrap();
        let w = primal_weights(&d, &fit.theta);
        let primal = objective_odml_linear(&w, &d, &OdmlParams::new(c, 0.0, 0.0).unwrap()).unwrap();
        assert!((primal + fit.solution.objective).abs() <= 1e-6 * primal.max(1.0), "{primal} vs {}", fit.solution.objective);

        let p = OdmParams::new(2f64.powi(r.random_range(0..=6)), 2f64.powi(r.random_range(0..=6)), r.random_range(0.0..0.5)).unwrap();
        let fit = fit_dual(&g, d.labels(), &Params::Odm(p), tight()).unwrap();
        let w = primal_weights(&d, &fit.theta);
        let primal = objective_odm_linear(&w, &d, &p).unwrap();
        assert!((primal + fit.solution.objective).abs() <= 1e-6 * primal.max(1.0), "{primal} vs {}", fit.solution.objective);
        let grad = full_gradient_odm(&w, &d, &p).unwrap();
        assert!(max_abs(&grad) <= 1e-5, "primal gradient {grad:?}");
    }
}

#[test]
fn odml_dual_solution_minimizes_primal() {
    let mut r = rng(17);
    for _ in 0..10 {
        let m = r.random_range(5..40);
        let dim = 3;
        let d = random_dataset(&mut r, m, dim, 0.7);
        let g = gram(KernelSpec::Linear, &d);
        let p = OdmlParams::new([10.0, 50.0, 100.0][r.random_range(0..3)], 2f64.powi(r.random_range(-8..=-1)), 2f64.powi(r.random_range(-8..=-1))).unwrap();
        let fit = fit_dual(&g, d.labels(), &Params::Odml(p), tight()).unwrap();
        let w = primal_weights(&d, &fit.theta);
        let f0 = objective_odml_linear(&w, &d, &p).unwrap();
        for _ in 0..200 {
            let step: Vec<f64> = w.iter().map(|v| v + r.random_range(-1e-3..1e-3)).collect();
            let f = objective_odml_linear(&step, &d, &p).unwrap();
            assert!(f >= f0 - 1e-8 * f0.abs().max(1.0), "perturbation lowered objective {f0} -> {f}");
        }
    }
}
