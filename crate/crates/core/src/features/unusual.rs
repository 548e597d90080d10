//! Corpus-level unusualness scores: familiarity and local outlier factor.

use crate::dataset::FeatureSet;
use crate::error::{Error, Result};

/// Floor on the mean reachability distance, so duplicate points give a
/// finite density.
const REACH_FLOOR: f64 = 1e-12;

/// `½ Σ (a − b)² / (a + b)`, skipping terms with `a + b = 0`.
pub fn chi_squared(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        let t = x + y;
        if t != 0.0 {
            s += (x - y) * (x - y) / t;
        }
    }
    0.5 * s
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn columns(set: &FeatureSet) -> Vec<Vec<f64>> {
    set.values().column_iter().map(|c| c.iter().copied().collect()).collect()
}

fn check_dims(a: &FeatureSet, b: &FeatureSet) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::validation(format!(
            "'{}' has dimension {} but '{}' has {}",
            a.name(),
            a.dim(),
            b.name(),
            b.dim()
        )));
    }
    Ok(())
}

/// Mean chi-squared distance from each target to its `k` nearest reference
/// columns. A reference column with the same sample id as the target is
/// skipped.
pub fn familiarity(targets: &FeatureSet, reference: &FeatureSet, k: usize) -> Result<Vec<f64>> {
    check_dims(targets, reference)?;
    if k == 0 {
        return Err(Error::validation("familiarity needs k ≥ 1"));
    }
    let refs = columns(reference);
    let mut out = Vec::with_capacity(targets.len());
    for (t, id) in columns(targets).iter().zip(targets.sample_ids()) {
        let mut d: Vec<f64> = refs
            .iter()
            .zip(reference.sample_ids())
            .filter(|(_, rid)| *rid != id)
            .map(|(r, _)| chi_squared(t, r))
            .collect();
        if d.len() < k {
            return Err(Error::validation(format!(
                "familiarity k = {k} but only {} reference samples are usable for '{id}'",
                d.len()
            )));
        }
        d.sort_by(f64::total_cmp);
        out.push(d[..k].iter().sum::<f64>() / k as f64);
    }
    Ok(out)
}

/// k-distance and k-neighbourhood (ties at the k-distance included) from
/// `(index, distance)` candidates.
fn neighbourhood(mut cand: Vec<(usize, f64)>, k: usize) -> (f64, Vec<(usize, f64)>) {
    cand.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    let kdist = cand[k - 1].1;
    cand.retain(|c| c.1 <= kdist);
    (kdist, cand)
}

fn lrd(neigh: &[(usize, f64)], kdist: &[f64]) -> f64 {
    let mean = neigh.iter().map(|&(o, d)| kdist[o].max(d)).sum::<f64>() / neigh.len() as f64;
    1.0 / mean.max(REACH_FLOOR)
}

struct LofReference {
    points: Vec<Vec<f64>>,
    kdist: Vec<f64>,
    lrd: Vec<f64>,
}

impl LofReference {
    fn fit(set: &FeatureSet, k: usize) -> Result<Self> {
        if k == 0 || set.len() <= k {
            return Err(Error::validation(format!(
                "LOF needs 1 ≤ k < n; got k = {k} with n = {}",
                set.len()
            )));
        }
        let points = columns(set);
        let n = points.len();
        let hoods: Vec<(f64, Vec<(usize, f64)>)> = (0..n)
            .map(|p| {
                let cand = (0..n).filter(|&o| o != p).map(|o| (o, euclidean(&points[p], &points[o]))).collect();
                neighbourhood(cand, k)
            })
            .collect();
        let kdist: Vec<f64> = hoods.iter().map(|h| h.0).collect();
        let lrd = hoods.iter().map(|h| lrd(&h.1, &kdist)).collect();
        Ok(Self { points, kdist, lrd })
    }

    fn score(&self, neigh: &[(usize, f64)]) -> f64 {
        let own = lrd(neigh, &self.kdist);
        neigh.iter().map(|&(o, _)| self.lrd[o] / own).sum::<f64>() / neigh.len() as f64
    }
}

/// Local outlier factor of every column of `points` with Euclidean distance.
pub fn lof_scores(points: &FeatureSet, k: usize) -> Result<Vec<f64>> {
    let r = LofReference::fit(points, k)?;
    let n = r.points.len();
    Ok((0..n)
        .map(|p| {
            let cand = (0..n).filter(|&o| o != p).map(|o| (o, euclidean(&r.points[p], &r.points[o]))).collect();
            r.score(&neighbourhood(cand, k).1)
        })
        .collect())
}

/// LOF of each query column relative to a fixed reference set. Reference
/// columns sharing the query's sample id are skipped, so scoring the
/// reference against itself reproduces [`lof_scores`].
pub fn lof_query(queries: &FeatureSet, reference: &FeatureSet, k: usize) -> Result<Vec<f64>> {
    check_dims(queries, reference)?;
    let r = LofReference::fit(reference, k)?;
    let mut out = Vec::with_capacity(queries.len());
    for (q, id) in columns(queries).iter().zip(queries.sample_ids()) {
        let cand: Vec<(usize, f64)> = r
            .points
            .iter()
            .enumerate()
            .filter(|(o, _)| &reference.sample_ids()[*o] != id)
            .map(|(o, p)| (o, euclidean(q, p)))
            .collect();
        if cand.len() < k {
            return Err(Error::validation(format!("LOF query '{id}' has fewer than {k} reference neighbours")));
        }
        out.push(r.score(&neighbourhood(cand, k).1));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn set(name: &str, cols: &[Vec<f64>]) -> FeatureSet {
        let d = cols[0].len();
        let m = DMatrix::from_fn(d, cols.len(), |i, j| cols[j][i]);
        FeatureSet::from_matrix(name, m, (0..cols.len()).map(|i| format!("{name}{i}")).collect()).unwrap()
    }

    fn random_hists(n: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let v: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..1.0)).collect();
                let s: f64 = v.iter().sum();
                v.into_iter().map(|x| x / s).collect()
            })
            .collect()
    }

    /// Definition-level LOF: explicit k-distance, neighbourhood, reach-dist,
    /// lrd and ratio, recomputed from scratch for every point.
    fn lof_oracle(pts: &[Vec<f64>], k: usize) -> Vec<f64> {
        let n = pts.len();
        let dist = |a: usize, b: usize| -> f64 {
            let mut s = 0.0;
            for i in 0..pts[a].len() {
                s += (pts[a][i] - pts[b][i]) * (pts[a][i] - pts[b][i]);
            }
            s.sqrt()
        };
        let kdist = |p: usize| -> f64 {
            let mut d: Vec<f64> = (0..n).filter(|&o| o != p).map(|o| dist(p, o)).collect();
            d.sort_by(|a, b| a.partial_cmp(b).unwrap());
            d[k - 1]
        };
        let hood = |p: usize| -> Vec<usize> {
            let kd = kdist(p);
            let mut h: Vec<usize> = (0..n).filter(|&o| o != p && dist(p, o) <= kd).collect();
            h.sort_by(|&a, &b| dist(p, a).partial_cmp(&dist(p, b)).unwrap().then(a.cmp(&b)));
            h
        };
        let lrd = |p: usize| -> f64 {
            let h = hood(p);
            let mut s = 0.0;
            for &o in &h {
                s += kdist(o).max(dist(p, o));
            }
            1.0 / (s / h.len() as f64).max(1e-12)
        };
        (0..n)
            .map(|p| {
                let h = hood(p);
                let lp = lrd(p);
                let mut s = 0.0;
                for &o in &h {
                    s += lrd(o) / lp;
                }
                s / h.len() as f64
            })
            .collect()
    }

    #[test]
    fn chi_squared_plug_ins() {
        assert_eq!(chi_squared(&[0.5, 0.5, 0.0], &[0.5, 0.5, 0.0]), 0.0);
        assert_eq!(chi_squared(&[1.0, 0.0], &[0.0, 1.0]), 1.0);
        assert!((chi_squared(&[0.2, 0.8], &[0.4, 0.6]) - 0.5 * (0.04 / 0.6 + 0.04 / 1.4)).abs() < 1e-15);
    }

    #[test]
    fn familiarity_of_duplicates_is_zero() {
        let h = vec![0.25, 0.25, 0.5];
        let reference = set("r", &[h.clone(), h.clone(), h.clone()]);
        let target = FeatureSet::from_matrix("t", DMatrix::from_column_slice(3, 1, &h), vec!["x".into()]).unwrap();
        assert_eq!(familiarity(&target, &reference, 3).unwrap(), vec![0.0]);
    }

    #[test]
    fn familiarity_k1_is_the_distance() {
        let reference = set("r", &[vec![1.0, 0.0]]);
        let target = set("t", &[vec![0.5, 0.5]]);
        let f = familiarity(&target, &reference, 1).unwrap();
        assert_eq!(f[0], chi_squared(&[0.5, 0.5], &[1.0, 0.0]));
    }

    #[test]
    fn familiarity_matches_sort_and_average() {
        let refs = random_hists(10, 8, 1);
        let targets = random_hists(4, 8, 2);
        let f = familiarity(&set("t", &targets), &set("r", &refs), 3).unwrap();
        for (t, got) in targets.iter().zip(&f) {
            let mut d: Vec<f64> = refs.iter().map(|r| chi_squared(t, r)).collect();
            d.sort_by(|a, b| a.partial_cmp(b).unwrap());
            assert_eq!(*got, (d[0] + d[1] + d[2]) / 3.0);
        }
    }

    #[test]
    fn familiarity_skips_self_and_validates_k() {
        let refs = random_hists(5, 4, 3);
        let s = set("r", &refs);
        let f = familiarity(&s, &s, 4).unwrap();
        assert!(f.iter().all(|&v| v > 0.0));
        assert!(familiarity(&s, &s, 5).is_err());
        assert!(familiarity(&s, &s, 0).is_err());
    }

    #[test]
    fn lof_lattice_interior() {
        let pts: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64]).collect();
        let lof = lof_scores(&set("p", &pts), 4).unwrap();
        for v in &lof[6..34] {
            assert!((0.9..=1.1).contains(v), "{v}");
        }
    }

    #[test]
    fn lof_flags_the_outlier() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut pts: Vec<Vec<f64>> = (0..25)
            .map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
            .collect();
        pts.push(vec![12.0, 12.0]);
        let lof = lof_scores(&set("p", &pts), 10).unwrap();
        let max = lof.iter().cloned().fold(f64::MIN, f64::max);
        assert_eq!(lof[25], max);
        assert!(lof[25] > 1.5);
    }

    #[test]
    fn lof_matches_definition_oracle() {
        for seed in 0..6 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.random_range(12..=30);
            // integer grid coordinates create distance ties
            let pts: Vec<Vec<f64>> = (0..n)
                .map(|_| vec![rng.random_range(0..5) as f64, rng.random_range(0..5) as f64, rng.random_range(0..3) as f64])
                .collect();
            let k = rng.random_range(2..=10);
            let got = lof_scores(&set("p", &pts), k).unwrap();
            let want = lof_oracle(&pts, k);
            for (a, b) in got.iter().zip(&want) {
                assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0), "seed {seed}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn lof_duplicates_stay_finite() {
        let pts = vec![vec![0.0]; 12];
        let lof = lof_scores(&set("p", &pts), 3).unwrap();
        assert!(lof.iter().all(|v| v.is_finite()));
        assert!(lof_scores(&set("p", &pts[..3]), 3).is_err());
    }

    #[test]
    fn lof_query_against_self_reproduces_scores() {
        let pts = random_hists(20, 3, 11);
        let s = set("p", &pts);
        assert_eq!(lof_query(&s, &s, 5).unwrap(), lof_scores(&s, 5).unwrap());
        let q = set("q", &[vec![10.0, 10.0, 10.0]]);
        assert!(lof_query(&q, &s, 5).unwrap()[0] > 1.5);
    }
}
