//! SimpleMKL: learn simplex weights `d` of a kernel combination jointly with
//! the SVM dual.
//!
//! The outer problem minimizes `J(d)`, the optimal SVM dual value for the
//! combined kernel `Σ d_m K_m`, over the probability simplex. For fixed `d`
//! the inner problem is a plain SVM ([`crate::svm`]). Its solution gives the
//! gradient `∂J/∂d_m = −½ Σ_ij α_i α_j y_i y_j K_m(x_i, x_j)`, which drives a
//! reduced-gradient descent with Armijo backtracking on the simplex.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dataset::{FeatureSet, Label, LabelVector, Normalizer};
use crate::error::{Error, Result};
use crate::kernels::{self, GramMatrix, KernelSpec};
use crate::svm::{self, SvmParams, SvmSolution};

/// Weights below this value are snapped to zero.
pub const WEIGHT_SNAP: f64 = 1e-8;

/// Outer-loop settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MklParams {
    pub svm: SvmParams,
    /// Stop when no weight moves more than this.
    pub outer_tol: f64,
    /// Stop when the duality gap relative to `|J|` drops below this.
    pub gap_tol: f64,
    pub max_outer: usize,
    pub armijo_c: f64,
    pub backtrack: f64,
    pub max_backtracks: usize,
}

impl Default for MklParams {
    fn default() -> Self {
        Self {
            svm: SvmParams::default(),
            outer_tol: 1e-4,
            gap_tol: 1e-2,
            max_outer: 200,
            armijo_c: 1e-4,
            backtrack: 0.5,
            max_backtracks: 30,
        }
    }
}

/// `J(d)` and the SVM solution attaining it.
pub fn objective(d: &[f64], grams: &[GramMatrix], y: &LabelVector, svm: &SvmParams) -> Result<(f64, SvmSolution)> {
    let mats: Vec<&DMatrix<f64>> = grams.iter().map(|g| &g.values).collect();
    objective_signs(d, &mats, &y.signs(), svm)
}

fn objective_signs(d: &[f64], grams: &[&DMatrix<f64>], y: &[f64], svm: &SvmParams) -> Result<(f64, SvmSolution)> {
    let k = kernels::combine_matrices(grams, d)?;
    let sol = svm::solve_dual_signs(&k, y, svm)?;
    Ok((sol.objective, sol))
}

/// `αᵀ Q_m α` for each kernel.
fn quadratic_terms(alpha: &[f64], grams: &[&DMatrix<f64>], y: &[f64]) -> Vec<f64> {
    let active: Vec<usize> = (0..alpha.len()).filter(|&i| alpha[i] != 0.0).collect();
    grams
        .iter()
        .map(|k| {
            let mut s = 0.0;
            for &i in &active {
                let ai = alpha[i] * y[i];
                for &j in &active {
                    s += ai * alpha[j] * y[j] * k[(i, j)];
                }
            }
            s
        })
        .collect()
}

/// `g_m = −½ Σ_ij α_i α_j y_i y_j K_m(x_i, x_j)`.
pub fn gradient(sol: &SvmSolution, grams: &[GramMatrix], y: &LabelVector) -> Vec<f64> {
    let mats: Vec<&DMatrix<f64>> = grams.iter().map(|g| &g.values).collect();
    quadratic_terms(&sol.alpha, &mats, &y.signs())
        .into_iter()
        .map(|q| -0.5 * q)
        .collect()
}

/// Result of the weight-learning loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MklFit {
    pub weights: Vec<f64>,
    pub solution: SvmSolution,
    /// `J(d)` at the start and after every accepted step.
    pub objective_trace: Vec<f64>,
    /// `d` at the start and after every accepted step.
    pub weight_trace: Vec<Vec<f64>>,
    pub outer_iterations: usize,
    /// Relative duality gap at the final `d`.
    pub duality_gap: f64,
}

/// Reduced-gradient descent direction relative to the largest weight.
fn descent_direction(d: &[f64], g: &[f64]) -> Vec<f64> {
    let mut mu = 0;
    for m in 1..d.len() {
        if d[m] > d[mu] {
            mu = m;
        }
    }
    let mut dir = vec![0.0; d.len()];
    let mut total = 0.0;
    for m in 0..d.len() {
        if m == mu {
            continue;
        }
        let reduced = g[m] - g[mu];
        if d[m] <= 0.0 && reduced > 0.0 {
            continue;
        }
        dir[m] = -reduced;
        total += dir[m];
    }
    dir[mu] = -total;
    dir
}

/// Project onto the simplex after a step: clip, snap tiny weights, renormalize.
fn clean_weights(d: &mut [f64]) {
    for w in d.iter_mut() {
        if *w < WEIGHT_SNAP {
            *w = 0.0;
        }
    }
    let s: f64 = d.iter().sum();
    for w in d.iter_mut() {
        *w /= s;
    }
}

/// Run SimpleMKL on precomputed training Gram matrices.
pub fn train(grams: &[GramMatrix], y: &LabelVector, params: &MklParams) -> Result<MklFit> {
    if grams.is_empty() {
        return Err(Error::validation("MKL needs at least one kernel"));
    }
    let n = y.len();
    if grams.iter().any(|g| g.n() != n) {
        return Err(Error::validation("Gram matrices must match the number of labels"));
    }
    let mats: Vec<&DMatrix<f64>> = grams.iter().map(|g| &g.values).collect();
    train_matrices(&mats, &y.signs(), params)
}

fn train_matrices(grams: &[&DMatrix<f64>], y: &[f64], params: &MklParams) -> Result<MklFit> {
    let m = grams.len();
    let stage = |it: usize| move |e: Error| e.in_stage(&format!("MKL outer iteration {it}"));
    let mut d = vec![1.0 / m as f64; m];
    let (mut j, mut sol) = objective_signs(&d, grams, y, &params.svm).map_err(stage(0))?;
    let mut objective_trace = vec![j];
    let mut weight_trace = vec![d.clone()];
    let mut outer = 0;
    let mut gap;

    loop {
        let quad = quadratic_terms(&sol.alpha, grams, y);
        let g: Vec<f64> = quad.iter().map(|q| -0.5 * q).collect();
        let max_q = quad.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let weighted: f64 = quad.iter().zip(&d).map(|(q, w)| q * w).sum();
        gap = 0.5 * (max_q - weighted) / j.abs().max(f64::MIN_POSITIVE);
        if m == 1 || gap < params.gap_tol || outer >= params.max_outer {
            break;
        }
        let dir = descent_direction(&d, &g);
        let slope: f64 = g.iter().zip(&dir).map(|(a, b)| a * b).sum();
        if !(slope < 0.0) {
            break;
        }
        // largest step keeping every weight non-negative
        let mut step_max = f64::INFINITY;
        let mut hit = None;
        for k in 0..m {
            if dir[k] < 0.0 {
                let s = -d[k] / dir[k];
                if s < step_max {
                    step_max = s;
                    hit = Some(k);
                }
            }
        }
        if !step_max.is_finite() || step_max <= 0.0 {
            break;
        }

        outer += 1;
        let mut step = step_max;
        let mut accepted = None;
        for _ in 0..=params.max_backtracks {
            let mut cand: Vec<f64> = d.iter().zip(&dir).map(|(w, v)| w + step * v).collect();
            if step == step_max {
                if let Some(k) = hit {
                    cand[k] = 0.0;
                }
            }
            clean_weights(&mut cand);
            let (jc, sc) = objective_signs(&cand, grams, y, &params.svm).map_err(stage(outer))?;
            if jc <= j + params.armijo_c * step * slope {
                accepted = Some((cand, jc, sc));
                break;
            }
            step *= params.backtrack;
        }
        let Some((cand, jc, sc)) = accepted else { break };
        let moved = cand.iter().zip(&d).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        d = cand;
        j = jc;
        sol = sc;
        objective_trace.push(j);
        weight_trace.push(d.clone());
        if moved < params.outer_tol {
            let quad = quadratic_terms(&sol.alpha, grams, y);
            let max_q = quad.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let weighted: f64 = quad.iter().zip(&d).map(|(q, w)| q * w).sum();
            gap = 0.5 * (max_q - weighted) / j.abs().max(f64::MIN_POSITIVE);
            break;
        }
    }

    Ok(MklFit {
        weights: d,
        solution: sol,
        objective_trace,
        weight_trace,
        outer_iterations: outer,
        duality_gap: gap,
    })
}

/// A trained multi-kernel classifier over several feature groups.
///
/// Only support samples are retained: `alpha`, `y_support` and each entry of
/// `support_features` are restricted to samples with `α > 1e−8`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MklModel {
    pub kernels: Vec<KernelSpec>,
    pub weights: Vec<f64>,
    pub alpha: Vec<f64>,
    pub bias: f64,
    pub y_support: Vec<f64>,
    /// Normalized training features of the support samples, one per group.
    pub support_features: Vec<FeatureSet>,
    pub normalizers: Vec<Normalizer>,
    pub objective_trace: Vec<f64>,
    pub weight_trace: Vec<Vec<f64>>,
    pub dual_objective: f64,
    pub duality_gap: f64,
}

/// Kernel for one feature group; an RBF without bandwidth uses the median
/// heuristic on the normalized training data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KernelChoice {
    Rbf {
        #[serde(default)]
        sigma: Option<f64>,
    },
    Polynomial {
        degree: u32,
        #[serde(default = "one")]
        scale: f64,
        #[serde(default = "one")]
        offset: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl KernelChoice {
    pub fn poly(degree: u32) -> Self {
        KernelChoice::Polynomial {
            degree,
            scale: 1.0,
            offset: 1.0,
        }
    }

    pub fn resolve(&self, train: &FeatureSet) -> Result<KernelSpec> {
        let spec = match *self {
            KernelChoice::Rbf { sigma: Some(s) } => KernelSpec::Rbf { sigma: s },
            KernelChoice::Rbf { sigma: None } => KernelSpec::Rbf {
                sigma: kernels::median_sigma(train)?,
            },
            KernelChoice::Polynomial { degree, scale, offset } => KernelSpec::Polynomial { degree, scale, offset },
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl MklModel {
    /// Normalize each group on the training data, build one Gram per group
    /// and run SimpleMKL.
    pub fn fit(groups: &[FeatureSet], choices: &[KernelChoice], labels: &LabelVector, params: &MklParams) -> Result<MklModel> {
        if groups.is_empty() || groups.len() != choices.len() {
            return Err(Error::validation(format!(
                "{} feature groups for {} kernels",
                groups.len(),
                choices.len()
            )));
        }
        labels.require_both_classes()?;
        let mut normalizers = Vec::with_capacity(groups.len());
        let mut normalized = Vec::with_capacity(groups.len());
        let mut specs = Vec::with_capacity(groups.len());
        let mut grams = Vec::with_capacity(groups.len());
        for (g, choice) in groups.iter().zip(choices) {
            labels.check_aligned(g)?;
            let norm = Normalizer::fit(g)?;
            let x = norm.apply(g)?;
            let spec = choice.resolve(&x)?;
            grams.push(kernels::gram(&spec, &x)?);
            specs.push(spec);
            normalizers.push(norm);
            normalized.push(x);
        }
        let fit = train(&grams, labels, params)?;
        Ok(Self::from_fit(fit, specs, normalized, normalizers, &labels.signs()))
    }

    fn from_fit(fit: MklFit, kernels: Vec<KernelSpec>, normalized: Vec<FeatureSet>, normalizers: Vec<Normalizer>, y: &[f64]) -> MklModel {
        let support = &fit.solution.support;
        MklModel {
            kernels,
            weights: fit.weights,
            alpha: support.iter().map(|&i| fit.solution.alpha[i]).collect(),
            bias: fit.solution.bias,
            y_support: support.iter().map(|&i| y[i]).collect(),
            support_features: normalized.iter().map(|x| x.select_columns(support)).collect(),
            normalizers,
            objective_trace: fit.objective_trace,
            weight_trace: fit.weight_trace,
            dual_objective: fit.solution.objective,
            duality_gap: fit.duality_gap,
        }
    }

    /// Decision values and labels for raw (un-normalized) test groups.
    pub fn predict(&self, groups: &[FeatureSet]) -> Result<(Vec<Label>, Vec<f64>)> {
        if groups.len() != self.kernels.len() {
            return Err(Error::validation(format!(
                "model has {} feature groups, got {}",
                self.kernels.len(),
                groups.len()
            )));
        }
        let mut crosses = Vec::with_capacity(groups.len());
        for (k, g) in groups.iter().enumerate() {
            if g.dim() != self.normalizers[k].dim() {
                return Err(Error::validation(format!(
                    "group {k} (`{}`) has {} features, model expects {}",
                    g.name(),
                    g.dim(),
                    self.normalizers[k].dim()
                )));
            }
            if k > 0 && g.sample_ids() != groups[0].sample_ids() {
                return Err(Error::validation("test groups are not aligned"));
            }
            let x = self.normalizers[k].apply(g)?;
            crosses.push(kernels::gram_cross(&self.kernels[k], &self.support_features[k], &x)?);
        }
        let refs: Vec<&DMatrix<f64>> = crosses.iter().collect();
        let combined = kernels::combine_matrices(&refs, &self.weights)?;
        let values = svm::decision_values(&self.alpha, self.bias, &self.y_support, &combined)?;
        Ok((svm::predict_labels(&values), values))
    }
}
