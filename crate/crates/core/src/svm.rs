//! Binary soft-margin SVM dual solved by sequential minimal optimization.
//!
//! The dual is
//!
//! ```text
//! max  Σ α_i − ½ Σ_ij α_i α_j y_i y_j K_ij
//! s.t. Σ α_i y_i = 0,  0 ≤ α_i ≤ C
//! ```
//!
//! Each iteration picks the maximal violating pair and solves the resulting
//! two-variable problem analytically.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dataset::{Label, LabelVector};
use crate::error::{Error, Result};
use crate::kernels::GramMatrix;

/// `α_i` above this value marks a support vector.
pub const SUPPORT_EPS: f64 = 1e-8;
/// Default KKT violation tolerance.
pub const DEFAULT_TOL: f64 = 1e-3;
/// Cap on pair updates.
pub const MAX_UPDATES: usize = 1_000_000;

const TAU: f64 = 1e-12;

/// Solver settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmParams {
    pub c: f64,
    pub tol: f64,
    pub max_updates: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            tol: DEFAULT_TOL,
            max_updates: MAX_UPDATES,
        }
    }
}

impl SvmParams {
    pub fn with_c(c: f64) -> Self {
        Self { c, ..Self::default() }
    }
}

/// Optimal dual variables and bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmSolution {
    pub alpha: Vec<f64>,
    pub bias: f64,
    /// Dual objective value `Σ α − ½ αᵀQα`.
    pub objective: f64,
    /// Indices with `α_i > 1e−8`.
    pub support: Vec<usize>,
    pub iterations: usize,
    /// Final maximal KKT violation.
    pub violation: f64,
}

/// Solve the dual for Gram matrix `k` and labels `y`.
pub fn solve_dual(k: &GramMatrix, y: &LabelVector, params: &SvmParams) -> Result<SvmSolution> {
    if k.n() != y.len() {
        return Err(Error::validation(format!(
            "Gram matrix is {}x{} but there are {} labels",
            k.n(),
            k.n(),
            y.len()
        )));
    }
    check_symmetric(&k.values)?;
    solve_dual_signs(&k.values, &y.signs(), params)
}

fn check_symmetric(k: &DMatrix<f64>) -> Result<()> {
    if !k.is_square() {
        return Err(Error::validation("kernel matrix must be square"));
    }
    let n = k.nrows();
    for i in 0..n {
        for j in 0..i {
            let (a, b) = (k[(i, j)], k[(j, i)]);
            if (a - b).abs() > 1e-12 * (1.0 + a.abs().max(b.abs())) {
                return Err(Error::validation(format!(
                    "kernel matrix is not symmetric at ({i}, {j}): {a} vs {b}"
                )));
            }
        }
    }
    Ok(())
}

/// Solve the dual with labels given as `±1.0`. `k` must be symmetric.
pub fn solve_dual_signs(k: &DMatrix<f64>, y: &[f64], params: &SvmParams) -> Result<SvmSolution> {
    let n = y.len();
    let c = params.c;
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::validation(format!("C must be positive, got {c}")));
    }
    if k.nrows() != n || k.ncols() != n {
        return Err(Error::validation("kernel and label sizes differ"));
    }
    if y.iter().any(|&v| v != 1.0 && v != -1.0) {
        return Err(Error::validation("labels must be +1 or -1"));
    }
    if !(y.contains(&1.0) && y.contains(&-1.0)) {
        return Err(Error::validation("SVM training needs both classes"));
    }

    let q = DMatrix::from_fn(n, n, |i, j| y[i] * y[j] * k[(i, j)]);
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let mut iterations = 0;
    let mut violation;

    loop {
        let (pair, gap) = select_pair(&alpha, &grad, y, c);
        violation = gap;
        let Some((i, j)) = pair else { break };
        if gap < params.tol {
            break;
        }
        if iterations >= params.max_updates {
            return Err(Error::NonConvergence {
                iterations,
                violation,
                context: String::new(),
            });
        }
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        update_pair(&mut alpha, &grad, &q, y, c, i, j);
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        debug_assert!({
            let change = grad[i] * di
                + grad[j] * dj
                + 0.5 * (q[(i, i)] * di * di + q[(j, j)] * dj * dj)
                + q[(i, j)] * di * dj;
            change <= 1e-9 * (1.0 + q[(i, i)].abs() + q[(j, j)].abs())
        }, "dual objective decreased");
        if di != 0.0 || dj != 0.0 {
            for t in 0..n {
                grad[t] += q[(t, i)] * di + q[(t, j)] * dj;
            }
        }
    }

    let objective = -alpha.iter().zip(&grad).map(|(a, g)| a * (g - 1.0)).sum::<f64>() / 2.0;
    let bias = compute_bias(&alpha, &grad, y, c);
    let support = (0..n).filter(|&i| alpha[i] > SUPPORT_EPS).collect();
    Ok(SvmSolution {
        alpha,
        bias,
        objective,
        support,
        iterations,
        violation,
    })
}

fn in_up(a: f64, y: f64, c: f64) -> bool {
    (y > 0.0 && a < c) || (y < 0.0 && a > 0.0)
}

fn in_low(a: f64, y: f64, c: f64) -> bool {
    (y > 0.0 && a > 0.0) || (y < 0.0 && a < c)
}

/// Maximal violating pair and the violation `m(α) − M(α)`.
fn select_pair(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> (Option<(usize, usize)>, f64) {
    let mut best_up = f64::NEG_INFINITY;
    let mut i_up = None;
    let mut best_low = f64::INFINITY;
    let mut i_low = None;
    for t in 0..y.len() {
        let v = -y[t] * grad[t];
        if in_up(alpha[t], y[t], c) && v > best_up {
            best_up = v;
            i_up = Some(t);
        }
        if in_low(alpha[t], y[t], c) && v < best_low {
            best_low = v;
            i_low = Some(t);
        }
    }
    match (i_up, i_low) {
        (Some(i), Some(j)) => (Some((i, j)), best_up - best_low),
        _ => (None, 0.0),
    }
}

/// Two-variable analytic update with box clipping.
fn update_pair(alpha: &mut [f64], grad: &[f64], q: &DMatrix<f64>, y: &[f64], c: f64, i: usize, j: usize) {
    let (qii, qjj, qij) = (q[(i, i)], q[(j, j)], q[(i, j)]);
    if y[i] != y[j] {
        let mut quad = qii + qjj + 2.0 * qij;
        if quad <= 0.0 {
            quad = TAU;
        }
        let delta = (-grad[i] - grad[j]) / quad;
        let diff = alpha[i] - alpha[j];
        alpha[i] += delta;
        alpha[j] += delta;
        if diff > 0.0 {
            if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = diff;
            }
        } else if alpha[i] < 0.0 {
            alpha[i] = 0.0;
            alpha[j] = -diff;
        }
        if diff > 0.0 {
            if alpha[i] > c {
                alpha[i] = c;
                alpha[j] = c - diff;
            }
        } else if alpha[j] > c {
            alpha[j] = c;
            alpha[i] = c + diff;
        }
    } else {
        let mut quad = qii + qjj - 2.0 * qij;
        if quad <= 0.0 {
            quad = TAU;
        }
        let delta = (grad[i] - grad[j]) / quad;
        let sum = alpha[i] + alpha[j];
        alpha[i] -= delta;
        alpha[j] += delta;
        if sum > c {
            if alpha[i] > c {
                alpha[i] = c;
                alpha[j] = sum - c;
            }
        } else if alpha[j] < 0.0 {
            alpha[j] = 0.0;
            alpha[i] = sum;
        }
        if sum > c {
            if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = sum - c;
            }
        } else if alpha[i] < 0.0 {
            alpha[i] = 0.0;
            alpha[j] = sum;
        }
    }
}

/// Bias averaged over free support vectors, or the midpoint of the feasible
/// interval when every `α` sits at a bound.
fn compute_bias(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> f64 {
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut sum_free = 0.0;
    let mut n_free = 0usize;
    for t in 0..y.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    let r = if n_free > 0 {
        sum_free / n_free as f64
    } else {
        (ub + lb) / 2.0
    };
    -r
}

/// `f(x_t) = Σ_i α_i y_i K(x_t, x_i) + b` for each row of `k_cross`.
pub fn decision_values(alpha: &[f64], bias: f64, y_train: &[f64], k_cross: &DMatrix<f64>) -> Result<Vec<f64>> {
    if alpha.len() != y_train.len() || k_cross.ncols() != alpha.len() {
        return Err(Error::validation(format!(
            "decision values: {} coefficients, {} labels, cross kernel {}x{}",
            alpha.len(),
            y_train.len(),
            k_cross.nrows(),
            k_cross.ncols()
        )));
    }
    let coef: Vec<f64> = alpha.iter().zip(y_train).map(|(a, y)| a * y).collect();
    Ok((0..k_cross.nrows())
        .map(|t| {
            let mut f = 0.0;
            for (i, c) in coef.iter().enumerate() {
                f += c * k_cross[(t, i)];
            }
            f + bias
        })
        .collect())
}

/// Sign rule with ties mapped to the positive class.
pub fn predict_labels(values: &[f64]) -> Vec<Label> {
    values.iter().map(|&f| Label::from_score(f)).collect()
}
