//! Random instance generators and independent reference implementations
//! shared by the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use odm::{Dataset, SparseVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Two noisy clusters at ±`shift` along a random direction, labels
/// alternating so both classes are present. Roughly a fifth of entries are
/// exactly zero (and so absent from the sparse representation).
pub fn random_dataset(r: &mut ChaCha8Rng, m: usize, dim: usize, shift: f64) -> Dataset {
    let dir: Vec<f64> = (0..dim).map(|_| r.random_range(-1.0..1.0)).collect();
    let mut xs = Vec::with_capacity(m);
    let mut ys = Vec::with_capacity(m);
    for i in 0..m {
        let y = if i % 2 == 0 { 1.0 } else { -1.0 };
        let v: Vec<f64> = dir
            .iter()
            .map(|d| if r.random_bool(0.2) { 0.0 } else { y * shift * d + r.random_range(-1.0..1.0) })
            .collect();
        xs.push(SparseVector::from_dense(&v));
        ys.push(y);
    }
    Dataset::new(xs, ys).unwrap()
}

pub fn dense_rows(d: &Dataset, dim: usize) -> Vec<Vec<f64>> {
    d.instances()
        .iter()
        .map(|x| {
            let mut row = vec![0.0; dim];
            for &(j, v) in x.entries() {
                row[j - 1] = v;
            }
            row
        })
        .collect()
}

/// `m × dim` dense design matrix.
pub fn design_matrix(d: &Dataset, dim: usize) -> DMatrix<f64> {
    let rows = dense_rows(d, dim);
    DMatrix::from_fn(d.len(), dim, |i, j| rows[i][j])
}

/// Gauss-Jordan inversion with partial pivoting.
pub fn gauss_jordan_inverse(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let mut m = a.clone();
    let mut inv = DMatrix::<f64>::identity(n, n);
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| m[(i, col)].abs().total_cmp(&m[(j, col)].abs())).unwrap();
        assert!(m[(pivot, col)].abs() > 1e-300, "singular matrix");
        m.swap_rows(col, pivot);
        inv.swap_rows(col, pivot);
        let p = m[(col, col)];
        for j in 0..n {
            m[(col, j)] /= p;
            inv[(col, j)] /= p;
        }
        for i in 0..n {
            if i != col {
                let f = m[(i, col)];
                if f != 0.0 {
                    for j in 0..n {
                        m[(i, j)] -= f * m[(col, j)];
                        inv[(i, j)] -= f * inv[(col, j)];
                    }
                }
            }
        }
    }
    inv
}

pub fn random_spd(r: &mut ChaCha8Rng, k: usize, ridge: f64) -> DMatrix<f64> {
    let b = DMatrix::from_fn(k, k, |_, _| r.random_range(-1.0..1.0));
    &b * b.transpose() + DMatrix::identity(k, k) * ridge
}

/// Dense QP objective `½αᵀHα + qᵀα`, written as plain loops.
pub fn qp_value(h: &DMatrix<f64>, q: &[f64], a: &[f64]) -> f64 {
    let n = q.len();
    let mut v = 0.0;
    for i in 0..n {
        for j in 0..n {
            v += 0.5 * a[i] * h[(i, j)] * a[j];
        }
        v += q[i] * a[i];
    }
    v
}

/// Projected gradient descent with step `1/L` (`L` = max absolute row sum)
/// until the projected step moves no coordinate by more than `tol`.
pub fn projected_gradient_oracle(h: &DMatrix<f64>, q: &[f64], u: &[f64], tol: f64) -> Vec<f64> {
    let n = q.len();
    let lip = (0..n).map(|i| (0..n).map(|j| h[(i, j)].abs()).sum::<f64>()).fold(0.0, f64::max);
    let step = 1.0 / lip;
    let mut a = vec![0.0; n];
    for _ in 0..10_000_000 {
        let mut moved = 0.0f64;
        let g: Vec<f64> = (0..n).map(|i| (0..n).map(|j| h[(i, j)] * a[j]).sum::<f64>() + q[i]).collect();
        for i in 0..n {
            let next = (a[i] - step * g[i]).clamp(0.0, u[i]);
            moved = moved.max((next - a[i]).abs());
            a[i] = next;
        }
        if moved <= tol * step {
            return a;
        }
    }
    panic!("projected gradient oracle did not converge");
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// ODMᴸ primal over dense rows, margin statistics computed in two passes.
pub fn naive_odml_objective(w: &[f64], rows: &[Vec<f64>], y: &[f64], c: f64, l1: f64, l2: f64) -> f64 {
    let m = rows.len() as f64;
    let margins: Vec<f64> = rows.iter().zip(y).map(|(x, yi)| yi * dot(w, x)).collect();
    let mean = margins.iter().sum::<f64>() / m;
    let var = margins.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / m;
    let hinge: f64 = margins.iter().map(|g| (1.0 - g).max(0.0)).sum();
    0.5 * dot(w, w) + l1 * var - l2 * mean + c / m * hinge
}

pub fn naive_odm_objective(w: &[f64], rows: &[Vec<f64>], y: &[f64], c1: f64, c2: f64, dband: f64) -> f64 {
    let m = rows.len() as f64;
    let mut loss = 0.0;
    for (x, yi) in rows.iter().zip(y) {
        let g = yi * dot(w, x);
        if g < 1.0 - dband {
            loss += c1 * (1.0 - dband - g).powi(2);
        } else if g > 1.0 + dband {
            loss += c2 * (g - 1.0 - dband).powi(2);
        }
    }
    0.5 * dot(w, w) + loss / m
}

/// Central finite-difference gradient.
pub fn finite_difference<F: Fn(&[f64]) -> f64>(f: F, w: &[f64], h: f64) -> Vec<f64> {
    let mut probe = w.to_vec();
    (0..w.len())
        .map(|k| {
            probe[k] = w[k] + h;
            let up = f(&probe);
            probe[k] = w[k] - h;
            let down = f(&probe);
            probe[k] = w[k];
            (up - down) / (2.0 * h)
        })
        .collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).fold(0.0, f64::max)
}
