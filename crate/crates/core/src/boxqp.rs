//! Dual coordinate descent for `min ½αᵀHα + qᵀα` subject to `0 ≤ α ≤ u`.
//!
//! Each step minimises the objective exactly along one coordinate and clips
//! to the box. The gradient `Hα + q` is kept up to date incrementally; a run
//! is declared converged when the largest projected-gradient magnitude at
//! the end of a pass is within tolerance, confirmed against a freshly
//! recomputed gradient.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{OdmError, Result};

/// Curvature at or below this is treated as zero by [`coordinate_update`].
pub const MIN_CURVATURE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct BoxQpProblem {
    h: DMatrix<f64>,
    q: Vec<f64>,
    u: Vec<f64>,
}

impl BoxQpProblem {
    /// `u` entries must be positive; `f64::INFINITY` means no upper bound.
    pub fn new(h: DMatrix<f64>, q: Vec<f64>, u: Vec<f64>) -> Result<Self> {
        let n = q.len();
        if h.nrows() != n || h.ncols() != n {
            return Err(OdmError::DimensionMismatch { expected: n, found: h.nrows() });
        }
        if u.len() != n {
            return Err(OdmError::DimensionMismatch { expected: n, found: u.len() });
        }
        if let Some(b) = u.iter().find(|&&b| !(b > 0.0)) {
            return Err(OdmError::InvalidParameter(format!("upper bound {b} must be positive")));
        }
        if q.iter().any(|v| !v.is_finite()) || h.iter().any(|v| !v.is_finite()) {
            return Err(OdmError::InvalidParameter("non-finite entries in H or q".into()));
        }
        let scale = h.amax().max(1.0);
        for i in 0..n {
            for j in 0..i {
                if (h[(i, j)] - h[(j, i)]).abs() > 1e-12 * scale {
                    return Err(OdmError::InvalidParameter(format!("H is not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self { h, q, u })
    }

    pub fn h(&self) -> &DMatrix<f64> {
        &self.h
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn objective(&self, alpha: &[f64]) -> f64 {
        qp_objective(self, alpha)
    }

    /// `Hα + q`
    pub fn gradient(&self, alpha: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut g = self.q.clone();
        for (j, &a) in alpha.iter().enumerate() {
            if a != 0.0 {
                let col = self.h.column(j);
                for i in 0..n {
                    g[i] += a * col[i];
                }
            }
        }
        g
    }

    pub fn is_feasible(&self, alpha: &[f64]) -> bool {
        alpha.len() == self.len() && alpha.iter().zip(&self.u).all(|(&a, &b)| a >= 0.0 && a <= b)
    }
}

/// `½αᵀHα + qᵀα`
pub fn qp_objective(p: &BoxQpProblem, alpha: &[f64]) -> f64 {
    let n = p.len();
    let mut quad = 0.0;
    for j in 0..n {
        if alpha[j] == 0.0 {
            continue;
        }
        let col = p.h.column(j);
        let hj: f64 = (0..n).map(|i| alpha[i] * col[i]).sum();
        quad += alpha[j] * hj;
    }
    0.5 * quad + p.q.iter().zip(alpha).map(|(q, a)| q * a).sum::<f64>()
}

/// Projected gradient: the part of `g` that a feasible move could follow.
pub fn projected_gradient(alpha: f64, g: f64, upper: f64) -> f64 {
    if alpha <= 0.0 {
        g.min(0.0)
    } else if alpha >= upper {
        g.max(0.0)
    } else {
        g
    }
}

/// Exact minimiser of the one-dimensional restriction,
/// `min(max(α − g/h, 0), u)`. With curvature at or below [`MIN_CURVATURE`]
/// the restriction is linear and the sign of `g` picks the bound.
pub fn coordinate_update(alpha: f64, g: f64, h_ii: f64, upper: f64) -> Result<f64> {
    if h_ii > MIN_CURVATURE {
        return Ok((alpha - g / h_ii).max(0.0).min(upper));
    }
    if g > 0.0 {
        Ok(0.0)
    } else if g < 0.0 {
        if upper.is_finite() {
            Ok(upper)
        } else {
            Err(OdmError::Unbounded { index: None })
        }
    } else {
        Ok(alpha)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tolerance: f64,
    pub max_passes: usize,
    pub seed: u64,
    /// Visit coordinates in a fresh seeded permutation each pass; otherwise
    /// in index order.
    pub shuffle: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tolerance: 1e-6, max_passes: 5000, seed: 0, shuffle: true }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(OdmError::InvalidParameter("solver tolerance must be positive".into()));
        }
        if self.max_passes == 0 {
            return Err(OdmError::InvalidParameter("max_passes must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpSolution {
    pub alpha: Vec<f64>,
    pub objective: f64,
    pub passes_used: usize,
    pub converged: bool,
    /// Largest projected-gradient magnitude at the returned iterate.
    pub max_projected_gradient: f64,
}

/// Coordinate descent state, exposed so callers can step through updates.
pub struct DcdSolver<'a> {
    problem: &'a BoxQpProblem,
    opts: SolverOptions,
    alpha: Vec<f64>,
    grad: Vec<f64>,
    order: Vec<usize>,
    rng: ChaCha8Rng,
    passes: usize,
}

impl<'a> DcdSolver<'a> {
    /// Starts from `α = 0`, where the gradient is `q`.
    pub fn new(problem: &'a BoxQpProblem, opts: SolverOptions) -> Result<Self> {
        opts.validate()?;
        Ok(Self {
            problem,
            opts,
            alpha: vec![0.0; problem.len()],
            grad: problem.q.clone(),
            order: (0..problem.len()).collect(),
            rng: ChaCha8Rng::seed_from_u64(opts.seed),
            passes: 0,
        })
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn gradient(&self) -> &[f64] {
        &self.grad
    }

    pub fn passes(&self) -> usize {
        self.passes
    }

    /// Minimises along coordinate `i`; returns the change in `α_i`.
    pub fn update_coordinate(&mut self, i: usize) -> Result<f64> {
        let p = self.problem;
        let old = self.alpha[i];
        let new = coordinate_update(old, self.grad[i], p.h[(i, i)], p.u[i])
            .map_err(|_| OdmError::Unbounded { index: Some(i) })?;
        let delta = new - old;
        if delta != 0.0 {
            self.alpha[i] = new;
            let col = p.h.column(i);
            for (g, &h) in self.grad.iter_mut().zip(col.iter()) {
                *g += delta * h;
            }
        }
        Ok(delta)
    }

    /// One sweep over every coordinate.
    pub fn run_pass(&mut self) -> Result<()> {
        if self.opts.shuffle {
            self.order.shuffle(&mut self.rng);
        }
        for k in 0..self.order.len() {
            let i = self.order[k];
            self.update_coordinate(i)?;
        }
        self.passes += 1;
        Ok(())
    }

    pub fn max_projected_gradient(&self) -> f64 {
        self.alpha
            .iter()
            .zip(&self.grad)
            .zip(&self.problem.u)
            .map(|((&a, &g), &u)| projected_gradient(a, g, u).abs())
            .fold(0.0, f64::max)
    }

    fn refresh_gradient(&mut self) {
        self.grad = self.problem.gradient(&self.alpha);
    }

    /// Runs passes until convergence or the pass budget is exhausted.
    pub fn solve(mut self) -> Result<QpSolution> {
        let tol = self.opts.tolerance;
        let mut converged = false;
        while self.passes < self.opts.max_passes {
            self.run_pass()?;
            if self.max_projected_gradient() <= tol {
                self.refresh_gradient();
                if self.max_projected_gradient() <= tol {
                    converged = true;
                    break;
                }
            }
        }
        if !converged {
            self.refresh_gradient();
            log::debug!(
                "DCD stopped after {} passes without converging (max projected gradient {:.3e})",
                self.passes,
                self.max_projected_gradient()
            );
        }
        Ok(QpSolution {
            objective: qp_objective(self.problem, &self.alpha),
            max_projected_gradient: self.max_projected_gradient(),
            passes_used: self.passes,
            converged,
            alpha: self.alpha,
        })
    }
}

pub fn dcd_solve(p: &BoxQpProblem, opts: SolverOptions) -> Result<QpSolution> {
    DcdSolver::new(p, opts)?.solve()
}
