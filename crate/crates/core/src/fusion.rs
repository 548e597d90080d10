//! Discriminant correlation analysis (DCA) and its multi-set chaining (MDCA).
//!
//! DCA fuses two feature sets `X (p × n)` and `Y (q × n)` in two steps:
//!
//! 1. Each set is projected so that its between-class scatter becomes the
//!    identity ([`between_class_scatter`], [`unitize_scatter`]).
//! 2. The between-set covariance of the projected sets is diagonalized by an
//!    SVD and whitened, so that `X̂ Ŷᵀ = I`.
//!
//! The transformed sets are then concatenated or summed ([`fuse`]). For more
//! than two sets, [`fit_mdca`] applies DCA pairwise in descending order of
//! numerical rank, chaining the running fused result with the next set.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dataset::{FeatureSet, Label, LabelVector};
use crate::error::{Error, Result};
use crate::linalg::{self, matrix_serde};

/// Relative eigenvalue cutoff used when unitizing between-class scatter.
pub const SCATTER_TOL: f64 = 1e-10;
/// Relative singular-value cutoff for the between-set covariance.
pub const SVD_TOL: f64 = 1e-10;

/// Class-mean deviations of one feature set and, once unitized, the
/// projection that maps its between-class scatter to the identity.
#[derive(Debug, Clone)]
pub struct ScatterDecomposition {
    /// `p × c`; column `i` is `√n_i (x̄_i − x̄)`.
    pub phi: DMatrix<f64>,
    /// `p × r` unitizing projection, present after [`unitize_scatter`].
    pub w_b: Option<DMatrix<f64>>,
    /// Eigenvalues of `phiᵀ phi` retained by unitization.
    pub eigenvalues: Vec<f64>,
}

impl ScatterDecomposition {
    /// `S_b = phi · phiᵀ`.
    pub fn scatter(&self) -> DMatrix<f64> {
        &self.phi * self.phi.transpose()
    }

    pub fn r(&self) -> usize {
        self.w_b.as_ref().map_or(0, |w| w.ncols())
    }
}

/// Class index per sample: positives are class 0, negatives class 1.
pub fn class_indices(labels: &LabelVector) -> Vec<usize> {
    labels
        .labels()
        .iter()
        .map(|l| usize::from(*l == Label::Negative))
        .collect()
}

/// Between-class scatter factor for arbitrary class indices.
///
/// Classes without members are skipped, so `phi` has one column per
/// non-empty class.
pub fn between_class_scatter_classes(x: &DMatrix<f64>, classes: &[usize]) -> Result<ScatterDecomposition> {
    let n = x.ncols();
    if classes.len() != n {
        return Err(Error::validation(format!(
            "{} class indices for {n} samples",
            classes.len()
        )));
    }
    let c_max = classes.iter().copied().max().unwrap_or(0) + 1;
    let mut counts = vec![0usize; c_max];
    let mut sums = DMatrix::<f64>::zeros(x.nrows(), c_max);
    for (j, &c) in classes.iter().enumerate() {
        counts[c] += 1;
        let mut col = sums.column_mut(c);
        col += x.column(j);
    }
    let present: Vec<usize> = (0..c_max).filter(|&c| counts[c] > 0).collect();
    if present.len() < 2 {
        return Err(Error::validation(
            "between-class scatter needs at least two classes",
        ));
    }
    let global: DVector<f64> = x.column_sum() / n as f64;
    let mut phi = DMatrix::zeros(x.nrows(), present.len());
    for (k, &c) in present.iter().enumerate() {
        let ni = counts[c] as f64;
        let mean = sums.column(c) / ni;
        phi.set_column(k, &((mean - &global) * ni.sqrt()));
    }
    Ok(ScatterDecomposition {
        phi,
        w_b: None,
        eigenvalues: Vec::new(),
    })
}

/// Between-class scatter factor of a labeled binary feature set.
pub fn between_class_scatter(x: &FeatureSet, labels: &LabelVector) -> Result<ScatterDecomposition> {
    labels.check_aligned(x)?;
    labels.require_both_classes()?;
    between_class_scatter_classes(x.values(), &class_indices(labels))
}

/// Compute `w_b` with `w_bᵀ S_b w_b = I(r)`.
///
/// Uses the small `c × c` eigenproblem of `phiᵀ phi = Q Λ Qᵀ`. Eigenvalues
/// above `tol · λ_max` are kept and `w_b = phi Q_r Λ_r⁻¹`.
pub fn unitize_scatter(decomp: &ScatterDecomposition, tol: f64) -> Result<ScatterDecomposition> {
    let gram = decomp.phi.transpose() * &decomp.phi;
    let (vals, vecs) = linalg::sym_eigen_desc(&gram);
    let lmax = vals.first().copied().unwrap_or(0.0);
    if !(lmax > f64::MIN_POSITIVE) {
        return Err(Error::DegenerateFusion(
            "between-class scatter is zero".into(),
        ));
    }
    let r = vals.iter().take_while(|&&v| v > tol * lmax).count();
    let q = vecs.columns(0, r).into_owned();
    let inv = DMatrix::from_diagonal(&DVector::from_iterator(r, vals[..r].iter().map(|v| 1.0 / v)));
    let w_b = &decomp.phi * q * inv;
    Ok(ScatterDecomposition {
        phi: decomp.phi.clone(),
        w_b: Some(w_b),
        eigenvalues: vals[..r].to_vec(),
    })
}

/// A fitted pair of DCA projections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DcaTransform {
    /// `r × p`
    #[serde(with = "matrix_serde")]
    pub w_x: DMatrix<f64>,
    /// `r × q`
    #[serde(with = "matrix_serde")]
    pub w_y: DMatrix<f64>,
    /// Retained singular values of the projected between-set covariance.
    pub sigma: Vec<f64>,
}

impl DcaTransform {
    pub fn r(&self) -> usize {
        self.w_x.nrows()
    }
}

/// Fit DCA on raw matrices with arbitrary class indices.
pub fn fit_dca_classes(x: &DMatrix<f64>, y: &DMatrix<f64>, classes: &[usize]) -> Result<DcaTransform> {
    if x.ncols() != y.ncols() {
        return Err(Error::validation(format!(
            "DCA inputs have {} and {} samples",
            x.ncols(),
            y.ncols()
        )));
    }
    let sx = unitize_scatter(&between_class_scatter_classes(x, classes)?, SCATTER_TOL)?;
    let sy = unitize_scatter(&between_class_scatter_classes(y, classes)?, SCATTER_TOL)?;
    let r = sx.r().min(sy.r());
    let wbx = sx.w_b.expect("unitized").columns(0, r).into_owned();
    let wby = sy.w_b.expect("unitized").columns(0, r).into_owned();

    let xp = wbx.transpose() * x;
    let yp = wby.transpose() * y;
    let sxy = &xp * yp.transpose();
    let (u, s, v) = linalg::svd_desc(&sxy);
    let smax = s.first().copied().unwrap_or(0.0);
    if !(smax > f64::MIN_POSITIVE) {
        return Err(Error::DegenerateFusion(
            "between-set covariance is zero".into(),
        ));
    }
    let k = s.iter().take_while(|&&v| v > SVD_TOL * smax).count();
    let inv_sqrt = DMatrix::from_diagonal(&DVector::from_iterator(k, s[..k].iter().map(|v| 1.0 / v.sqrt())));
    let wcx = u.columns(0, k) * &inv_sqrt;
    let wcy = v.columns(0, k) * &inv_sqrt;
    Ok(DcaTransform {
        w_x: wcx.transpose() * wbx.transpose(),
        w_y: wcy.transpose() * wby.transpose(),
        sigma: s[..k].to_vec(),
    })
}

/// Fit DCA on two aligned binary-labeled feature sets.
pub fn fit_dca(x: &FeatureSet, y: &FeatureSet, labels: &LabelVector) -> Result<DcaTransform> {
    labels.check_aligned(x)?;
    labels.check_aligned(y)?;
    labels.require_both_classes()?;
    fit_dca_classes(x.values(), y.values(), &class_indices(labels))
}

fn project(w: &DMatrix<f64>, set: &FeatureSet, tag: &str) -> Result<FeatureSet> {
    if w.ncols() != set.dim() {
        return Err(Error::validation(format!(
            "transform expects {} features, `{}` has {}",
            w.ncols(),
            set.name(),
            set.dim()
        )));
    }
    let names = (0..w.nrows()).map(|i| format!("{}_{tag}{i}", set.name())).collect();
    FeatureSet::new(set.name(), w * set.values(), set.sample_ids().to_vec(), names)
}

/// `(X̂, Ŷ) = (w_x X, w_y Y)`.
pub fn transform_pair(t: &DcaTransform, x: &FeatureSet, y: &FeatureSet) -> Result<(FeatureSet, FeatureSet)> {
    Ok((project(&t.w_x, x, "dcf")?, project(&t.w_y, y, "dcf")?))
}

/// How two transformed sets are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FusionMode {
    #[default]
    Concat,
    Sum,
}

/// Combine two transformed sets by stacking or elementwise summation.
pub fn fuse(xh: &FeatureSet, yh: &FeatureSet, mode: FusionMode, name: &str) -> Result<FeatureSet> {
    if xh.sample_ids() != yh.sample_ids() {
        return Err(Error::validation(format!(
            "cannot fuse `{}` and `{}`: samples differ",
            xh.name(),
            yh.name()
        )));
    }
    match mode {
        FusionMode::Concat => Ok(FeatureSet::vstack(name, &[xh, yh])?),
        FusionMode::Sum => {
            if xh.dim() != yh.dim() {
                return Err(Error::validation(format!(
                    "summation fusion needs equal dimensions, got {} and {}",
                    xh.dim(),
                    yh.dim()
                )));
            }
            let names = (0..xh.dim()).map(|i| format!("{name}_{i}")).collect();
            FeatureSet::new(name, xh.values() + yh.values(), xh.sample_ids().to_vec(), names)
        }
    }
}

/// Numerical rank of a feature matrix.
pub fn numerical_rank(x: &FeatureSet) -> usize {
    linalg::numerical_rank(x.values())
}

/// One pairwise DCA step of an MDCA chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MdcaStep {
    pub left: String,
    pub right: String,
    pub transform: DcaTransform,
    pub output: String,
}

/// A replayable chain of DCA fusions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MdcaPlan {
    pub mode: FusionMode,
    /// Input names in fusion order (descending rank).
    pub order: Vec<String>,
    pub ranks: Vec<usize>,
    pub steps: Vec<MdcaStep>,
}

impl MdcaPlan {
    /// Name of the final fused set.
    pub fn output_name(&self) -> &str {
        self.steps.last().map_or("", |s| s.output.as_str())
    }

    /// Apply the fitted chain to new data. Sets are looked up by name.
    pub fn replay(&self, sets: &[FeatureSet]) -> Result<FeatureSet> {
        let find = |name: &str| {
            sets.iter().find(|s| s.name() == name).ok_or_else(|| {
                Error::validation(format!("fusion plan needs feature set `{name}`"))
            })
        };
        let mut running: Option<FeatureSet> = None;
        for step in &self.steps {
            let left = match running.take() {
                Some(r) => r,
                None => find(&step.left)?.clone(),
            };
            let right = find(&step.right)?;
            let (xh, yh) = transform_pair(&step.transform, &left, right)?;
            running = Some(fuse(&xh, &yh, self.mode, &step.output)?);
        }
        running.ok_or_else(|| Error::validation("empty fusion plan"))
    }
}

/// Fit an MDCA chain over `m ≥ 2` aligned sets.
///
/// Sets are ordered by descending numerical rank with ties kept in input
/// order. The two leading sets are fused first; each further set is fused
/// with the running result.
pub fn fit_mdca(sets: &[FeatureSet], labels: &LabelVector, mode: FusionMode) -> Result<(MdcaPlan, FeatureSet)> {
    if sets.len() < 2 {
        return Err(Error::validation(format!(
            "MDCA needs at least two feature sets, got {}",
            sets.len()
        )));
    }
    for s in sets {
        labels.check_aligned(s)?;
    }
    labels.require_both_classes()?;
    let classes = class_indices(labels);
    let ranks: Vec<usize> = sets.iter().map(numerical_rank).collect();
    let mut order: Vec<usize> = (0..sets.len()).collect();
    order.sort_by(|&a, &b| ranks[b].cmp(&ranks[a]));

    let mut steps = Vec::with_capacity(sets.len() - 1);
    let mut running = sets[order[0]].clone();
    for (k, &idx) in order.iter().enumerate().skip(1) {
        let next = &sets[idx];
        let transform = fit_dca_classes(running.values(), next.values(), &classes).map_err(|e| match e {
            Error::DegenerateFusion(m) => Error::DegenerateFusion(format!(
                "step {k} fusing `{}` with `{}`: {m}",
                running.name(),
                next.name()
            )),
            other => other,
        })?;
        let output = format!("dca({}+{})", running.name(), next.name());
        let (xh, yh) = transform_pair(&transform, &running, next)?;
        let fused = fuse(&xh, &yh, mode, &output)?;
        steps.push(MdcaStep {
            left: running.name().to_string(),
            right: next.name().to_string(),
            transform,
            output,
        });
        running = fused;
    }
    let plan = MdcaPlan {
        mode,
        order: order.iter().map(|&i| sets[i].name().to_string()).collect(),
        ranks: order.iter().map(|&i| ranks[i]).collect(),
        steps,
    };
    Ok((plan, running))
}
