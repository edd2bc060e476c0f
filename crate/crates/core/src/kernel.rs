//! Kernel evaluation, Gram matrices and the ODMᴸ dual matrix
//! `H = Y G (I + A G)^{-1} Y` with `A = 2λ₁(mI − yyᵀ)/m²`.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::data::{Dataset, SparseVector};
use crate::error::{OdmError, Result};

/// Default subsample size for [`avg_pairwise_distance`].
pub const DEFAULT_DISTANCE_CAP: usize = 1000;

/// Pivot ratio below which an LU factor is treated as singular.
const SINGULAR_PIVOT_RATIO: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelSpec {
    Linear,
    /// `exp(-‖x − z‖² / (2 width²))`
    Rbf { width: f64 },
}

impl KernelSpec {
    pub fn rbf(width: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(OdmError::InvalidParameter(format!("RBF width must be positive, got {width}")));
        }
        Ok(KernelSpec::Rbf { width })
    }

    pub fn name(&self) -> &'static str {
        match self {
            KernelSpec::Linear => "linear",
            KernelSpec::Rbf { .. } => "rbf",
        }
    }

    pub fn eval(&self, x: &SparseVector, z: &SparseVector) -> f64 {
        match *self {
            KernelSpec::Linear => x.dot(z),
            KernelSpec::Rbf { width } => (-x.dist_sq(z) / (2.0 * width * width)).exp(),
        }
    }
}

pub fn kernel_eval(spec: KernelSpec, x: &SparseVector, z: &SparseVector) -> f64 {
    spec.eval(x, z)
}

/// Dense symmetric kernel matrix `G_ij = k(x_i, x_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix(DMatrix<f64>);

impl GramMatrix {
    /// Wraps a matrix, checking squareness and symmetry to 1e-12 (relative).
    pub fn from_matrix(g: DMatrix<f64>) -> Result<Self> {
        if !g.is_square() {
            return Err(OdmError::DimensionMismatch { expected: g.nrows(), found: g.ncols() });
        }
        let scale = g.amax().max(1.0);
        for i in 0..g.nrows() {
            for j in 0..i {
                if (g[(i, j)] - g[(j, i)]).abs() > 1e-12 * scale {
                    return Err(OdmError::InvalidParameter(format!("Gram matrix asymmetric at ({i}, {j})")));
                }
            }
        }
        Ok(GramMatrix(g))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn size(&self) -> usize {
        self.0.nrows()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.0.diagonal().iter().copied().collect()
    }
}

/// Builds the Gram matrix from the upper triangle; rows run in parallel.
pub fn gram(spec: KernelSpec, d: &Dataset) -> GramMatrix {
    let xs = d.instances();
    let m = xs.len();
    let rows: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|i| (i..m).map(|j| spec.eval(&xs[i], &xs[j])).collect())
        .collect();
    let mut g = DMatrix::zeros(m, m);
    for (i, row) in rows.into_iter().enumerate() {
        for (off, v) in row.into_iter().enumerate() {
            g[(i, i + off)] = v;
            g[(i + off, i)] = v;
        }
    }
    GramMatrix(g)
}

/// Mean Euclidean distance over all unordered pairs of a seeded subsample of
/// `min(m, cap)` instances. When `cap >= m` every instance is used in order.
pub fn avg_pairwise_distance(d: &Dataset, cap: usize, seed: u64) -> Result<f64> {
    let m = d.len();
    if m < 2 {
        return Err(OdmError::InvalidDataset("need at least two instances for pairwise distances".into()));
    }
    let xs = d.instances();
    let sample: Vec<&SparseVector> = if cap >= m {
        xs.iter().collect()
    } else {
        let mut idx: Vec<usize> = (0..m).collect();
        idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        idx.truncate(cap.max(2));
        idx.sort_unstable();
        idx.into_iter().map(|i| &xs[i]).collect()
    };
    let n = sample.len();
    let total: f64 = (0..n)
        .into_par_iter()
        .map(|i| ((i + 1)..n).map(|j| sample[i].dist_sq(sample[j]).sqrt()).sum::<f64>())
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    Ok(total / (n * (n - 1) / 2) as f64)
}

/// Solves `M X = B` by LU with partial pivoting.
pub fn solve_linear_system(m: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !m.is_square() {
        return Err(OdmError::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
    }
    if b.nrows() != m.nrows() {
        return Err(OdmError::DimensionMismatch { expected: m.nrows(), found: b.nrows() });
    }
    let lu = m.clone().lu();
    let diag = lu.u().diagonal();
    let (lo, hi) = diag.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v.abs()), hi.max(v.abs())));
    let pivot_ratio = if hi > 0.0 { lo / hi } else { 0.0 };
    if !(pivot_ratio > SINGULAR_PIVOT_RATIO) {
        return Err(OdmError::SingularSystem { pivot_ratio });
    }
    lu.solve(b).ok_or(OdmError::SingularSystem { pivot_ratio })
}

/// `I + A G` with `A = 2λ₁(mI − yyᵀ)/m²`, formed without materialising `A`.
pub fn identity_plus_ag(g: &GramMatrix, y: &[f64], lambda1: f64) -> DMatrix<f64> {
    let gm = g.matrix();
    let m = gm.nrows();
    let mf = m as f64;
    let yv = DVector::from_column_slice(y);
    // yᵀG as a row
    let ytg = yv.transpose() * gm;
    let scale = 2.0 * lambda1 / (mf * mf);
    let mut out = DMatrix::identity(m, m);
    for j in 0..m {
        for i in 0..m {
            out[(i, j)] += scale * (mf * gm[(i, j)] - y[i] * ytg[j]);
        }
    }
    out
}

/// The ODMᴸ dual quadratic form together with its construction inputs.
#[derive(Debug, Clone)]
pub struct OdmlDualMatrix {
    pub h: DMatrix<f64>,
    pub lambda1: f64,
    pub gram: GramMatrix,
    pub labels: Vec<f64>,
}

impl OdmlDualMatrix {
    pub fn diagonal(&self) -> Vec<f64> {
        self.h.diagonal().iter().copied().collect()
    }
}

fn conjugate_by_labels(b: &DMatrix<f64>, y: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(b.nrows(), b.ncols(), |i, j| y[i] * b[(i, j)] * y[j])
}

/// `H = Y G (I + A G)^{-1} Y`, symmetrised as `(H + Hᵀ)/2`.
///
/// `B = G (I + AG)^{-1}` is obtained from `(I + AG)ᵀ Bᵀ = Gᵀ`. With `λ₁ = 0`
/// the solve is skipped and `H = YGY` exactly.
pub fn build_odml_h(g: &GramMatrix, y: &[f64], lambda1: f64) -> Result<OdmlDualMatrix> {
    let m = g.size();
    if y.len() != m {
        return Err(OdmError::DimensionMismatch { expected: m, found: y.len() });
    }
    if !(lambda1 >= 0.0 && lambda1.is_finite()) {
        return Err(OdmError::InvalidParameter(format!("lambda1 must be >= 0, got {lambda1}")));
    }
    let h = if lambda1 == 0.0 {
        conjugate_by_labels(g.matrix(), y)
    } else {
        let system = identity_plus_ag(g, y, lambda1);
        let bt = solve_linear_system(&system.transpose(), &g.matrix().transpose())?;
        let h = conjugate_by_labels(&bt.transpose(), y);
        (&h + h.transpose()) * 0.5
    };
    Ok(OdmlDualMatrix { h, lambda1, gram: g.clone(), labels: y.to_vec() })
}

/// `(I + X A Xᵀ)^{-1}` evaluated as `I − X (A^{-1} + XᵀX)^{-1} Xᵀ`, which
/// only inverts k×k matrices when `X` is d×k.
pub fn low_rank_update_inverse(x: &DMatrix<f64>, a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let k = x.ncols();
    if a.nrows() != k || a.ncols() != k {
        return Err(OdmError::DimensionMismatch { expected: k, found: a.nrows() });
    }
    let a_inv = solve_linear_system(a, &DMatrix::identity(k, k))?;
    let inner = a_inv + x.transpose() * x;
    let solved = solve_linear_system(&inner, &x.transpose())?;
    Ok(DMatrix::identity(x.nrows(), x.nrows()) - x * solved)
}
