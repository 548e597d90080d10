//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use dcamkl::dataset::{FeatureSet, Label, LabelVector};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn ids(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i:03}")).collect()
}

pub fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

pub fn set_from_matrix(name: &str, m: DMatrix<f64>) -> FeatureSet {
    let n = m.ncols();
    FeatureSet::from_matrix(name, m, ids("s", n)).unwrap()
}

pub fn labels_from_signs(signs: &[f64]) -> LabelVector {
    LabelVector::new(signs.iter().map(|&s| Label::from_score(s)).collect(), ids("s", signs.len())).unwrap()
}

/// Euclidean projection onto `{0 ≤ α ≤ C, yᵀα = 0}` by bisection on the
/// multiplier of the equality constraint.
pub fn project_box_hyperplane(v: &[f64], y: &[f64], c: f64) -> Vec<f64> {
    let at = |lam: f64| -> Vec<f64> { v.iter().zip(y).map(|(vi, yi)| (vi - lam * yi).clamp(0.0, c)).collect() };
    let h = |lam: f64| -> f64 { at(lam).iter().zip(y).map(|(a, yi)| a * yi).sum() };
    // h is non-increasing in λ
    let mut lo = -1.0;
    let mut hi = 1.0;
    while h(lo) < 0.0 {
        lo *= 2.0;
    }
    while h(hi) > 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(0.5 * (lo + hi))
}

/// Dense SVM dual oracle: accelerated projected gradient on
/// `min ½ αᵀQα − Σα` over the feasible set. Returns `(α, dual objective)`.
pub fn qp_oracle(k: &DMatrix<f64>, y: &[f64], c: f64, iters: usize) -> (Vec<f64>, f64) {
    let n = y.len();
    let q = DMatrix::from_fn(n, n, |i, j| y[i] * y[j] * k[(i, j)]);
    let lmax = q.clone().symmetric_eigenvalues().max().max(1e-12);
    let step = 1.0 / lmax;
    let mut x = vec![0.0; n];
    let mut z = x.clone();
    let mut t = 1.0f64;
    for _ in 0..iters {
        let g: Vec<f64> = (0..n).map(|i| (0..n).map(|j| q[(i, j)] * z[j]).sum::<f64>() - 1.0).collect();
        let v: Vec<f64> = z.iter().zip(&g).map(|(zi, gi)| zi - step * gi).collect();
        let xn = project_box_hyperplane(&v, y, c);
        let tn = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        z = xn.iter().zip(&x).map(|(a, b)| a + (t - 1.0) / tn * (a - b)).collect();
        x = xn;
        t = tn;
    }
    (x.clone(), dual_objective(&q, &x))
}

/// `Σα − ½ αᵀQα`.
pub fn dual_objective(q: &DMatrix<f64>, a: &[f64]) -> f64 {
    let n = a.len();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += a[i] * a[j] * q[(i, j)];
        }
    }
    a.iter().sum::<f64>() - 0.5 * quad
}

/// Bias from the KKT conditions: mean over free vectors, else the midpoint
/// of the interval allowed by the bound vectors.
pub fn kkt_bias(k: &DMatrix<f64>, y: &[f64], a: &[f64], c: f64) -> f64 {
    let n = y.len();
    let eps = 1e-6 * c;
    let f = |i: usize| (0..n).map(|j| a[j] * y[j] * k[(i, j)]).sum::<f64>();
    let free: Vec<usize> = (0..n).filter(|&i| a[i] > eps && a[i] < c - eps).collect();
    if !free.is_empty() {
        return free.iter().map(|&i| y[i] - f(i)).sum::<f64>() / free.len() as f64;
    }
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for i in 0..n {
        let r = y[i] - f(i);
        let at_upper = a[i] >= c - eps;
        // α = 0 needs y f ≥ 1, α = C needs y f ≤ 1
        if (y[i] > 0.0) != at_upper {
            lo = lo.max(r);
        } else {
            hi = hi.min(r);
        }
    }
    0.5 * (lo + hi)
}

/// AUC by counting positive/negative pairs, ties counted as ½.
pub fn pair_auc(scores: &[f64], labels: &[Label]) -> f64 {
    let mut num = 0.0;
    let mut pairs = 0.0;
    for (i, &li) in labels.iter().enumerate() {
        if li != Label::Positive {
            continue;
        }
        for (j, &lj) in labels.iter().enumerate() {
            if lj != Label::Negative {
                continue;
            }
            pairs += 1.0;
            if scores[i] > scores[j] {
                num += 1.0;
            } else if scores[i] == scores[j] {
                num += 0.5;
            }
        }
    }
    num / pairs
}

/// Between-class scatter `Σ_i n_i (m_i − m)(m_i − m)ᵀ` of the columns of `x`.
pub fn between_class_scatter(x: &DMatrix<f64>, classes: &[usize]) -> DMatrix<f64> {
    let c = classes.iter().max().unwrap() + 1;
    let p = x.nrows();
    let mean = x.column_mean();
    let mut s = DMatrix::zeros(p, p);
    for k in 0..c {
        let cols: Vec<usize> = (0..x.ncols()).filter(|&j| classes[j] == k).collect();
        let mut mk = nalgebra::DVector::zeros(p);
        for &j in &cols {
            mk += x.column(j);
        }
        mk /= cols.len() as f64;
        let d = mk - &mean;
        s += &d * d.transpose() * cols.len() as f64;
    }
    s
}

pub fn rank(m: &DMatrix<f64>) -> usize {
    let sv = m.clone().svd(false, false).singular_values;
    let smax = sv.max();
    let tol = smax * (m.nrows().max(m.ncols()) as f64) * f64::EPSILON;
    sv.iter().filter(|&&s| s > tol).count()
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// LOF straight from the definitions: k-distance, k-neighbourhood with ties,
/// reachability distance, local reachability density and the density ratio.
pub fn lof_oracle(pts: &[Vec<f64>], k: usize) -> Vec<f64> {
    let n = pts.len();
    let dist = |a: usize, b: usize| euclid(&pts[a], &pts[b]);
    let kdist = |p: usize| {
        let mut d: Vec<f64> = (0..n).filter(|&o| o != p).map(|o| dist(p, o)).collect();
        d.sort_by(f64::total_cmp);
        d[k - 1]
    };
    let hood = |p: usize| -> Vec<usize> { (0..n).filter(|&o| o != p && dist(p, o) <= kdist(p)).collect() };
    let lrd = |p: usize| {
        let h = hood(p);
        let reach: f64 = h.iter().map(|&o| kdist(o).max(dist(p, o))).sum::<f64>() / h.len() as f64;
        1.0 / reach.max(1e-12)
    };
    (0..n)
        .map(|p| {
            let h = hood(p);
            h.iter().map(|&o| lrd(o) / lrd(p)).sum::<f64>() / h.len() as f64
        })
        .collect()
}

/// Mean chi-squared distance to the `k` closest references, by full sort.
pub fn familiarity_oracle(targets: &[Vec<f64>], refs: &[Vec<f64>], k: usize) -> Vec<f64> {
    let chi = |a: &[f64], b: &[f64]| {
        0.5 * a
            .iter()
            .zip(b)
            .filter(|(x, y)| *x + *y != 0.0)
            .map(|(x, y)| (x - y).powi(2) / (x + y))
            .sum::<f64>()
    };
    targets
        .iter()
        .map(|t| {
            let mut d: Vec<f64> = refs.iter().map(|r| chi(t, r)).collect();
            d.sort_by(f64::total_cmp);
            d.iter().take(k).sum::<f64>() / k as f64
        })
        .collect()
}

pub fn random_histograms(n: usize, d: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| {
            let v: Vec<f64> = (0..d).map(|_| if rng.random_bool(0.2) { 0.0 } else { rng.random_range(0.0..1.0) }).collect();
            let s: f64 = v.iter().sum::<f64>().max(1e-12);
            v.into_iter().map(|x| x / s).collect()
        })
        .collect()
}

pub fn columns_to_set(name: &str, cols: &[Vec<f64>]) -> FeatureSet {
    let d = cols[0].len();
    set_from_matrix(name, DMatrix::from_fn(d, cols.len(), |i, j| cols[j][i]))
}

/// Median of a non-empty slice.
pub fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}
