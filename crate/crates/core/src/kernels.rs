//! Kernel functions, Gram matrices and their convex combinations.

use nalgebra::{DMatrix, DVectorView};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::FeatureSet;
use crate::error::{Error, Result};
use crate::linalg::matrix_serde;

/// Floor for the median-distance bandwidth.
pub const SIGMA_FLOOR: f64 = 1e-6;
/// Tolerance for simplex membership of kernel weights.
pub const SIMPLEX_TOL: f64 = 1e-8;

/// A positive semidefinite kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KernelSpec {
    /// `exp(−‖u − v‖² / 2σ²)`
    Rbf { sigma: f64 },
    /// `(scale · uᵀv + offset)^degree`
    Polynomial { degree: u32, scale: f64, offset: f64 },
}

impl KernelSpec {
    pub fn rbf(sigma: f64) -> Self {
        KernelSpec::Rbf { sigma }
    }

    /// `(uᵀv + 1)^degree`
    pub fn poly(degree: u32) -> Self {
        KernelSpec::Polynomial {
            degree,
            scale: 1.0,
            offset: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Rbf { sigma } if !(sigma > 0.0 && sigma.is_finite()) => {
                Err(Error::validation(format!("rbf sigma must be positive, got {sigma}")))
            }
            KernelSpec::Polynomial { degree, scale, offset } => {
                if degree < 1 {
                    Err(Error::validation("polynomial degree must be at least 1"))
                } else if !(scale > 0.0 && scale.is_finite()) {
                    Err(Error::validation(format!("polynomial scale must be positive, got {scale}")))
                } else if !(offset >= 0.0 && offset.is_finite()) {
                    Err(Error::validation(format!("polynomial offset must be non-negative, got {offset}")))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    fn eval_unchecked(&self, u: DVectorView<'_, f64>, v: DVectorView<'_, f64>) -> f64 {
        match *self {
            KernelSpec::Rbf { sigma } => {
                let d2: f64 = u.iter().zip(v.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
                (-d2 / (2.0 * sigma * sigma)).exp()
            }
            KernelSpec::Polynomial { degree, scale, offset } => {
                (scale * u.dot(&v) + offset).powi(degree as i32)
            }
        }
    }
}

/// Evaluate a kernel on two vectors of equal length.
pub fn kernel_eval(spec: &KernelSpec, u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::validation(format!(
            "kernel inputs have lengths {} and {}",
            u.len(),
            v.len()
        )));
    }
    Ok(spec.eval_unchecked(DVectorView::from_slice(u, u.len()), DVectorView::from_slice(v, v.len())))
}

/// Symmetric `n × n` kernel matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramMatrix {
    #[serde(with = "matrix_serde")]
    pub values: DMatrix<f64>,
    /// Kernel that produced the matrix; `None` for combinations.
    pub spec: Option<KernelSpec>,
}

impl GramMatrix {
    /// Wrap a precomputed matrix after checking symmetry.
    pub fn from_values(values: DMatrix<f64>) -> Result<Self> {
        if !values.is_square() {
            return Err(Error::validation("Gram matrix must be square"));
        }
        let n = values.nrows();
        for i in 0..n {
            for j in 0..i {
                let (a, b) = (values[(i, j)], values[(j, i)]);
                if (a - b).abs() > 1e-12 * (1.0 + a.abs().max(b.abs())) {
                    return Err(Error::validation(format!(
                        "Gram matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(GramMatrix { values, spec: None })
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }
}

/// Gram matrix over the columns of `x`. The upper triangle is computed and
/// mirrored, so the result is exactly symmetric.
pub fn gram(spec: &KernelSpec, x: &FeatureSet) -> Result<GramMatrix> {
    spec.validate()?;
    let m = x.values();
    let n = m.ncols();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| (i..n).map(|j| spec.eval_unchecked(m.column(i), m.column(j))).collect())
        .collect();
    let mut values = DMatrix::zeros(n, n);
    for (i, row) in rows.into_iter().enumerate() {
        for (k, v) in row.into_iter().enumerate() {
            values[(i, i + k)] = v;
            values[(i + k, i)] = v;
        }
    }
    Ok(GramMatrix {
        values,
        spec: Some(*spec),
    })
}

/// `n_test × n_train` matrix of kernel values between test and train columns.
pub fn gram_cross(spec: &KernelSpec, train: &FeatureSet, test: &FeatureSet) -> Result<DMatrix<f64>> {
    spec.validate()?;
    if train.dim() != test.dim() {
        return Err(Error::validation(format!(
            "train `{}` has {} features, test `{}` has {}",
            train.name(),
            train.dim(),
            test.name(),
            test.dim()
        )));
    }
    let (a, b) = (train.values(), test.values());
    let rows: Vec<Vec<f64>> = (0..b.ncols())
        .into_par_iter()
        .map(|t| (0..a.ncols()).map(|i| spec.eval_unchecked(b.column(t), a.column(i))).collect())
        .collect();
    Ok(DMatrix::from_fn(b.ncols(), a.ncols(), |t, i| rows[t][i]))
}

/// Check that `d` lies on the probability simplex within [`SIMPLEX_TOL`].
pub fn check_simplex(d: &[f64]) -> Result<()> {
    if d.is_empty() {
        return Err(Error::validation("empty kernel weight vector"));
    }
    if let Some(w) = d.iter().find(|w| !(**w >= -SIMPLEX_TOL) || !w.is_finite()) {
        return Err(Error::validation(format!("kernel weight {w} is negative")));
    }
    let s: f64 = d.iter().sum();
    if (s - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::validation(format!("kernel weights sum to {s}, not 1")));
    }
    Ok(())
}

/// Weighted sum of matrices with simplex weights (works for Gram and cross
/// matrices alike).
pub fn combine_matrices(mats: &[&DMatrix<f64>], d: &[f64]) -> Result<DMatrix<f64>> {
    check_simplex(d)?;
    if mats.len() != d.len() {
        return Err(Error::validation(format!(
            "{} kernels for {} weights",
            mats.len(),
            d.len()
        )));
    }
    let shape = mats[0].shape();
    if mats.iter().any(|m| m.shape() != shape) {
        return Err(Error::validation("kernel matrices differ in shape"));
    }
    let mut out = DMatrix::zeros(shape.0, shape.1);
    for (m, &w) in mats.iter().zip(d) {
        if w != 0.0 {
            out += *m * w;
        }
    }
    Ok(out)
}

/// `Σ d_m K_m` with `d` on the simplex.
pub fn combine(grams: &[GramMatrix], d: &[f64]) -> Result<GramMatrix> {
    let mats: Vec<&DMatrix<f64>> = grams.iter().map(|g| &g.values).collect();
    let values = combine_matrices(&mats, d)?;
    let spec = match d.iter().filter(|&&w| w != 0.0).count() {
        1 => grams[d.iter().position(|&w| w != 0.0).unwrap()].spec,
        _ => None,
    };
    Ok(GramMatrix { values, spec })
}

/// Median pairwise Euclidean distance divided by `√2`, floored at
/// [`SIGMA_FLOOR`].
pub fn median_sigma(x: &FeatureSet) -> Result<f64> {
    let m = x.values();
    let n = m.ncols();
    if n < 2 {
        return Err(Error::validation("median sigma needs at least 2 samples"));
    }
    let mut dists = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            dists.push((m.column(i) - m.column(j)).norm());
        }
    }
    dists.sort_by(f64::total_cmp);
    let k = dists.len();
    let median = if k % 2 == 1 {
        dists[k / 2]
    } else {
        0.5 * (dists[k / 2 - 1] + dists[k / 2])
    };
    Ok((median / std::f64::consts::SQRT_2).max(SIGMA_FLOOR))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn set(m: DMatrix<f64>) -> FeatureSet {
        let ids = (0..m.ncols()).map(|i| format!("s{i}")).collect();
        FeatureSet::from_matrix("x", m, ids).unwrap()
    }

    fn random(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn eval_plug_ins() {
        let rbf = KernelSpec::rbf(1.5);
        assert_eq!(kernel_eval(&rbf, &[1.0, 2.0], &[1.0, 2.0]).unwrap(), 1.0);
        // ‖u − v‖² = 2σ²
        let s = 1.5f64;
        let v = kernel_eval(&rbf, &[0.0], &[(2.0 * s * s).sqrt()]).unwrap();
        assert!((v - (-1f64).exp()).abs() < 1e-12);
        assert_eq!(kernel_eval(&KernelSpec::poly(2), &[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
        assert_eq!(kernel_eval(&KernelSpec::poly(3), &[1.0], &[1.0]).unwrap(), 8.0);
        assert!(kernel_eval(&rbf, &[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(KernelSpec::rbf(0.0).validate().is_err());
        assert!(KernelSpec::Polynomial { degree: 0, scale: 1.0, offset: 1.0 }.validate().is_err());
        assert!(KernelSpec::Polynomial { degree: 2, scale: 1.0, offset: -1.0 }.validate().is_err());
        assert!(KernelSpec::Polynomial { degree: 3, scale: 32.0, offset: 0.0 }.validate().is_ok());
    }

    #[test]
    fn gram_matches_double_loop() {
        let x = set(random(4, 20, 1));
        for spec in [KernelSpec::rbf(0.7), KernelSpec::poly(2), KernelSpec::poly(3)] {
            let g = gram(&spec, &x).unwrap();
            for i in 0..20 {
                for j in 0..20 {
                    let u: Vec<f64> = x.values().column(i).iter().copied().collect();
                    let v: Vec<f64> = x.values().column(j).iter().copied().collect();
                    let want = kernel_eval(&spec, &u, &v).unwrap();
                    assert!((g.values[(i, j)] - want).abs() <= 1e-12);
                }
            }
            assert_eq!(g.values, g.values.transpose());
        }
        let g = gram(&KernelSpec::rbf(0.7), &x).unwrap();
        assert!(g.values.diagonal().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn poly_gram_of_duplicate_points() {
        let x = set(DMatrix::from_column_slice(1, 2, &[1.0, 1.0]));
        let g = gram(&KernelSpec::poly(2), &x).unwrap();
        assert!(g.values.iter().all(|&v| v == 4.0));
    }

    #[test]
    fn cross_gram_consistency() {
        let x = set(random(3, 12, 2));
        let spec = KernelSpec::rbf(0.9);
        let g = gram(&spec, &x).unwrap();
        let c = gram_cross(&spec, &x, &x).unwrap();
        assert!((c - &g.values).abs().max() <= 1e-12);
        let one = set(random(3, 1, 3));
        let row = gram_cross(&spec, &x, &one).unwrap();
        assert_eq!(row.shape(), (1, 12));
        for i in 0..12 {
            let u: Vec<f64> = one.values().column(0).iter().copied().collect();
            let v: Vec<f64> = x.values().column(i).iter().copied().collect();
            assert!((row[(0, i)] - kernel_eval(&spec, &u, &v).unwrap()).abs() <= 1e-12);
        }
        let wrong = set(random(2, 4, 4));
        assert!(gram_cross(&spec, &x, &wrong).is_err());
    }

    #[test]
    fn grams_are_psd_up_to_roundoff() {
        let x = set(random(5, 30, 6));
        for spec in [KernelSpec::rbf(1.0), KernelSpec::poly(2), KernelSpec::poly(3)] {
            let g = gram(&spec, &x).unwrap();
            let min = g.values.clone().symmetric_eigenvalues().min();
            assert!(min >= -1e-8 * 30.0 * g.values.abs().max().max(1.0), "{spec:?}: {min}");
        }
    }

    #[test]
    fn combine_rules() {
        let x = set(random(3, 8, 7));
        let grams = vec![
            gram(&KernelSpec::rbf(1.0), &x).unwrap(),
            gram(&KernelSpec::poly(2), &x).unwrap(),
            gram(&KernelSpec::poly(3), &x).unwrap(),
        ];
        assert_eq!(combine(&grams, &[0.0, 1.0, 0.0]).unwrap().values, grams[1].values);
        let same = combine(&[grams[0].clone(), grams[0].clone()], &[0.5, 0.5]).unwrap();
        assert!((same.values - &grams[0].values).abs().max() < 1e-15);
        let d = [0.1126, 0.2751, 0.6123];
        let k = combine(&grams, &d).unwrap();
        let manual = &grams[0].values * d[0] + &grams[1].values * d[1] + &grams[2].values * d[2];
        assert!((k.values.clone() - manual).abs().max() < 1e-9);
        assert_eq!(k.values, k.values.transpose());
        assert!(combine(&grams, &[0.5, 0.5, 0.5]).is_err());
        assert!(combine(&grams, &[1.5, -0.5, 0.0]).is_err());
    }

    #[test]
    fn median_sigma_cases() {
        let two = set(DMatrix::from_column_slice(2, 2, &[0.0, 0.0, 1.0, 1.0]));
        assert!((median_sigma(&two).unwrap() - 1.0).abs() < 1e-12);
        let same = set(DMatrix::from_element(2, 3, 4.0));
        assert_eq!(median_sigma(&same).unwrap(), SIGMA_FLOOR);
        let x = set(random(3, 10, 9));
        // exhaustive oracle over ordered pairs
        let mut all = Vec::new();
        for i in 0..10 {
            for j in 0..10 {
                if i < j {
                    let mut s = 0.0;
                    for k in 0..3 {
                        s += (x.values()[(k, i)] - x.values()[(k, j)]).powi(2);
                    }
                    all.push(s.sqrt());
                }
            }
        }
        all.sort_by(f64::total_cmp);
        // 45 pairs: odd count, single middle element
        let med = all[22];
        assert!((median_sigma(&x).unwrap() - med / 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rbf_range() {
        let x = set(random(2, 10, 10));
        let g = gram(&KernelSpec::rbf(0.5), &x).unwrap();
        for i in 0..10 {
            for j in 0..10 {
                let v = g.values[(i, j)];
                assert!(v > 0.0 && v <= 1.0);
                assert_eq!(v == 1.0, i == j);
            }
        }
    }
}
