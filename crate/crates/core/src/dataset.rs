//! Labeled feature matrices: CSV loading, stratified splitting and
//! standardization.
//!
//! A [`FeatureSet`] stores features as rows and samples as columns, so a set
//! with `d` features over `n` samples is a `d × n` matrix. All sets that take
//! part in one experiment share the same ordered `sample_ids`.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::MatrixData;

/// Floor applied to per-feature standard deviations.
pub const STD_FLOOR: f64 = 1e-8;

/// A named `d × n` real matrix with one column per sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FeatureSetData", into = "FeatureSetData")]
pub struct FeatureSet {
    name: String,
    values: DMatrix<f64>,
    sample_ids: Vec<String>,
    feature_names: Vec<String>,
}

/// Serialized form of [`FeatureSet`], validated on load.
#[derive(Serialize, Deserialize)]
struct FeatureSetData {
    name: String,
    sample_ids: Vec<String>,
    feature_names: Vec<String>,
    values: MatrixData,
}

impl From<FeatureSet> for FeatureSetData {
    fn from(s: FeatureSet) -> Self {
        FeatureSetData {
            values: MatrixData::from(&s.values),
            name: s.name,
            sample_ids: s.sample_ids,
            feature_names: s.feature_names,
        }
    }
}

impl TryFrom<FeatureSetData> for FeatureSet {
    type Error = Error;

    fn try_from(d: FeatureSetData) -> Result<Self> {
        FeatureSet::new(d.name, d.values.to_matrix()?, d.sample_ids, d.feature_names)
    }
}

impl FeatureSet {
    /// Build a set, checking finiteness, id uniqueness and shape agreement.
    pub fn new(
        name: impl Into<String>,
        values: DMatrix<f64>,
        sample_ids: Vec<String>,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        let name = name.into();
        if values.ncols() != sample_ids.len() {
            return Err(Error::validation(format!(
                "feature set `{name}`: {} sample ids for {} columns",
                sample_ids.len(),
                values.ncols()
            )));
        }
        if values.nrows() != feature_names.len() {
            return Err(Error::validation(format!(
                "feature set `{name}`: {} feature names for {} rows",
                feature_names.len(),
                values.nrows()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            let (r, c) = (pos % values.nrows(), pos / values.nrows());
            return Err(Error::validation(format!(
                "feature set `{name}`: non-finite value at feature {r}, sample `{}`",
                sample_ids[c]
            )));
        }
        let mut seen = HashSet::with_capacity(sample_ids.len());
        for id in &sample_ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::validation(format!(
                    "feature set `{name}`: duplicate sample id `{id}`"
                )));
            }
        }
        Ok(Self {
            name,
            values,
            sample_ids,
            feature_names,
        })
    }

    /// Like [`FeatureSet::new`] with generated feature names `<name>_<i>`.
    pub fn from_matrix(
        name: impl Into<String>,
        values: DMatrix<f64>,
        sample_ids: Vec<String>,
    ) -> Result<Self> {
        let name = name.into();
        let feature_names = (0..values.nrows()).map(|i| format!("{name}_{i}")).collect();
        Self::new(name, values, sample_ids, feature_names)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// Number of features (rows).
    pub fn dim(&self) -> usize {
        self.values.nrows()
    }

    /// Number of samples (columns).
    pub fn len(&self) -> usize {
        self.values.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.values.ncols() == 0
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Keep only the given columns, in the given order.
    pub fn select_columns(&self, columns: &[usize]) -> FeatureSet {
        let values = self.values.select_columns(columns);
        let sample_ids = columns.iter().map(|&c| self.sample_ids[c].clone()).collect();
        FeatureSet {
            name: self.name.clone(),
            values,
            sample_ids,
            feature_names: self.feature_names.clone(),
        }
    }

    /// Reorder/subset columns to follow `ids`.
    pub fn select_ids(&self, ids: &[String]) -> Result<FeatureSet> {
        let index: HashMap<&str, usize> = self
            .sample_ids
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        let columns = ids
            .iter()
            .map(|id| {
                index.get(id.as_str()).copied().ok_or_else(|| {
                    Error::validation(format!(
                        "feature set `{}` has no sample `{id}`",
                        self.name
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self.select_columns(&columns))
    }

    /// Stack sets vertically. All sets must share sample ids in the same order.
    pub fn vstack(name: impl Into<String>, sets: &[&FeatureSet]) -> Result<FeatureSet> {
        let name = name.into();
        let first = sets
            .first()
            .ok_or_else(|| Error::validation(format!("`{name}`: nothing to stack")))?;
        let n = first.len();
        let mut rows = 0;
        for s in sets {
            if s.sample_ids != first.sample_ids {
                return Err(Error::validation(format!(
                    "`{name}`: set `{}` is not aligned with `{}`",
                    s.name, first.name
                )));
            }
            rows += s.dim();
        }
        let mut values = DMatrix::zeros(rows, n);
        let mut feature_names = Vec::with_capacity(rows);
        let mut r0 = 0;
        for s in sets {
            values.rows_mut(r0, s.dim()).copy_from(&s.values);
            feature_names.extend(s.feature_names.iter().cloned());
            r0 += s.dim();
        }
        FeatureSet::new(name, values, first.sample_ids.clone(), feature_names)
    }

    /// Write as `id,<feature names...>` with one row per sample.
    ///
    /// Values use the shortest representation that parses back to the same
    /// `f64`, so a load after write is exact.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv_string()).map_err(|e| Error::io(path, e))
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("id");
        for f in &self.feature_names {
            out.push(',');
            out.push_str(f);
        }
        out.push('\n');
        for (j, id) in self.sample_ids.iter().enumerate() {
            out.push_str(id);
            for i in 0..self.dim() {
                let _ = write!(out, ",{}", self.values[(i, j)]);
            }
            out.push('\n');
        }
        out
    }

    /// Load a feature CSV. The set is named after the file stem.
    pub fn load_csv(path: impl AsRef<Path>) -> Result<FeatureSet> {
        let path = path.as_ref();
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_csv(&name, &path.display().to_string(), &text)
    }

    /// Parse feature CSV text; `origin` is used in error messages.
    pub fn parse_csv(name: &str, origin: &str, text: &str) -> Result<FeatureSet> {
        let parse_err = |line: usize, message: String| Error::Parse {
            path: origin.to_string(),
            line,
            message,
        };
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(text.as_bytes());
        let mut records = reader.records();
        let header = match records.next() {
            Some(r) => r.map_err(|e| parse_err(1, e.to_string()))?,
            None => return Err(parse_err(1, "empty file".into())),
        };
        if header.get(0).map(str::trim) != Some("id") {
            return Err(parse_err(1, "header must start with `id`".into()));
        }
        let feature_names: Vec<String> = header.iter().skip(1).map(|s| s.trim().to_string()).collect();
        let d = feature_names.len();
        let mut ids = Vec::new();
        let mut data = Vec::new();
        for (k, rec) in records.enumerate() {
            let line = k + 2;
            let rec = rec.map_err(|e| parse_err(line, e.to_string()))?;
            if rec.len() == 1 && rec.get(0).is_some_and(|s| s.trim().is_empty()) {
                continue;
            }
            if rec.len() != d + 1 {
                return Err(parse_err(
                    line,
                    format!("expected {} fields, found {}", d + 1, rec.len()),
                ));
            }
            ids.push(rec[0].trim().to_string());
            for (c, cell) in rec.iter().skip(1).enumerate() {
                let v: f64 = cell.trim().parse().map_err(|_| {
                    parse_err(line, format!("non-numeric value `{cell}` in column {}", c + 2))
                })?;
                if !v.is_finite() {
                    return Err(parse_err(line, format!("non-finite value `{cell}`")));
                }
                data.push(v);
            }
        }
        // data is sample-major, i.e. column-major for a d × n matrix
        let values = DMatrix::from_vec(d, ids.len(), data);
        FeatureSet::new(name, values, ids, feature_names)
    }
}

/// Binary class label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Positive,
    Negative,
}

impl Label {
    /// `+1.0` or `-1.0`.
    pub fn sign(self) -> f64 {
        match self {
            Label::Positive => 1.0,
            Label::Negative => -1.0,
        }
    }

    /// Sign rule with `0` mapped to positive.
    pub fn from_score(score: f64) -> Label {
        if score >= 0.0 {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    pub fn flipped(self) -> Label {
        match self {
            Label::Positive => Label::Negative,
            Label::Negative => Label::Positive,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Positive => "+1",
            Label::Negative => "-1",
        }
    }

    pub fn parse(s: &str) -> Option<Label> {
        match s.trim() {
            "+1" | "1" | "1.0" | "+1.0" => Some(Label::Positive),
            "-1" | "-1.0" => Some(Label::Negative),
            _ => None,
        }
    }
}

/// Labels for `n` samples, keyed by sample id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelVector {
    labels: Vec<Label>,
    sample_ids: Vec<String>,
}

impl LabelVector {
    pub fn new(labels: Vec<Label>, sample_ids: Vec<String>) -> Result<Self> {
        if labels.len() != sample_ids.len() {
            return Err(Error::validation(format!(
                "{} labels for {} sample ids",
                labels.len(),
                sample_ids.len()
            )));
        }
        let mut seen = HashSet::new();
        for id in &sample_ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::validation(format!("duplicate label id `{id}`")));
            }
        }
        Ok(Self { labels, sample_ids })
    }

    /// Labels from `±1` signs with generated ids `s0, s1, ...`.
    pub fn from_signs(signs: &[f64]) -> Result<Self> {
        let labels = signs
            .iter()
            .map(|&s| {
                if s == 1.0 {
                    Ok(Label::Positive)
                } else if s == -1.0 {
                    Ok(Label::Negative)
                } else {
                    Err(Error::validation(format!("label {s} is not +1 or -1")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let ids = (0..signs.len()).map(|i| format!("s{i}")).collect();
        Self::new(labels, ids)
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Labels as `±1.0`.
    pub fn signs(&self) -> Vec<f64> {
        self.labels.iter().map(|l| l.sign()).collect()
    }

    /// `(positives, negatives)`.
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.labels.iter().filter(|&&l| l == Label::Positive).count();
        (pos, self.labels.len() - pos)
    }

    pub fn require_both_classes(&self) -> Result<()> {
        let (p, n) = self.class_counts();
        if p == 0 || n == 0 {
            return Err(Error::validation(format!(
                "both classes must be present (positives {p}, negatives {n})"
            )));
        }
        Ok(())
    }

    /// Reorder/subset to follow `ids`.
    pub fn select_ids(&self, ids: &[String]) -> Result<LabelVector> {
        let index: HashMap<&str, usize> = self
            .sample_ids
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        let mut labels = Vec::with_capacity(ids.len());
        for id in ids {
            let i = index
                .get(id.as_str())
                .ok_or_else(|| Error::validation(format!("no label for sample `{id}`")))?;
            labels.push(self.labels[*i]);
        }
        LabelVector::new(labels, ids.to_vec())
    }

    pub fn select(&self, indices: &[usize]) -> LabelVector {
        LabelVector {
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            sample_ids: indices.iter().map(|&i| self.sample_ids[i].clone()).collect(),
        }
    }

    /// Check one-to-one alignment with a feature set's sample order.
    pub fn check_aligned(&self, set: &FeatureSet) -> Result<()> {
        if self.sample_ids != set.sample_ids() {
            return Err(Error::validation(format!(
                "labels are not aligned with feature set `{}`",
                set.name()
            )));
        }
        Ok(())
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<LabelVector> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_csv(&path.display().to_string(), &text)
    }

    pub fn parse_csv(origin: &str, text: &str) -> Result<LabelVector> {
        let parse_err = |line: usize, message: String| Error::Parse {
            path: origin.to_string(),
            line,
            message,
        };
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(text.as_bytes());
        let mut records = reader.records();
        match records.next() {
            Some(Ok(h)) if h.len() == 2 && h[0].trim() == "id" && h[1].trim() == "label" => {}
            Some(Err(e)) => return Err(parse_err(1, e.to_string())),
            _ => return Err(parse_err(1, "header must be `id,label`".into())),
        }
        let mut labels = Vec::new();
        let mut ids = Vec::new();
        for (k, rec) in records.enumerate() {
            let line = k + 2;
            let rec = rec.map_err(|e| parse_err(line, e.to_string()))?;
            if rec.len() != 2 {
                return Err(parse_err(line, format!("expected 2 fields, found {}", rec.len())));
            }
            let label = Label::parse(&rec[1])
                .ok_or_else(|| parse_err(line, format!("label `{}` is not +1 or -1", &rec[1])))?;
            ids.push(rec[0].trim().to_string());
            labels.push(label);
        }
        LabelVector::new(labels, ids)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = String::from("id,label\n");
        for (id, l) in self.sample_ids.iter().zip(&self.labels) {
            let _ = writeln!(out, "{id},{}", l.as_str());
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}

/// One side of a train/test split.
#[derive(Debug, Clone)]
pub struct Partition {
    pub features: Vec<FeatureSet>,
    pub labels: LabelVector,
}

impl Partition {
    pub fn sample_ids(&self) -> &[String] {
        self.labels.sample_ids()
    }
}

/// Column indices `(train, test)` of a seeded stratified split.
///
/// The train side receives `round(train_fraction · n)` samples. Each class
/// with at least two members lands in both partitions. Indices are returned
/// in ascending order.
pub fn split_indices(
    labels: &LabelVector,
    train_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::validation(format!(
            "train fraction {train_fraction} must lie in (0, 1)"
        )));
    }
    let n = labels.len();
    let n_train = (train_fraction * n as f64).round() as usize;
    let mut classes: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, l) in labels.labels().iter().enumerate() {
        classes[usize::from(*l == Label::Negative)].push(i);
    }

    // largest-remainder allocation of the train quota across classes
    let sizes = [classes[0].len(), classes[1].len()];
    let exact: Vec<f64> = sizes.iter().map(|&s| s as f64 * train_fraction).collect();
    let mut quota: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut order = [0usize, 1];
    order.sort_by(|&a, &b| {
        let fa = exact[a] - exact[a].floor();
        let fb = exact[b] - exact[b].floor();
        fb.partial_cmp(&fa).unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut k = 0;
    while quota.iter().sum::<usize>() < n_train && k < 4 {
        let c = order[k % 2];
        if quota[c] < sizes[c] {
            quota[c] += 1;
        }
        k += 1;
    }
    // keep every class with >= 2 members on both sides
    let bounds = |c: usize| -> (usize, usize) {
        if sizes[c] >= 2 {
            (1, sizes[c] - 1)
        } else {
            (0, sizes[c])
        }
    };
    for c in 0..2 {
        let (lo, hi) = bounds(c);
        quota[c] = quota[c].clamp(lo, hi);
    }
    loop {
        let total: usize = quota.iter().sum();
        if total == n_train {
            break;
        }
        let moved = if total > n_train {
            (0..2).find(|&c| quota[c] > bounds(c).0).map(|c| quota[c] -= 1)
        } else {
            (0..2).find(|&c| quota[c] < bounds(c).1).map(|c| quota[c] += 1)
        };
        if moved.is_none() {
            break;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::with_capacity(n_train);
    let mut test = Vec::with_capacity(n - n_train);
    for (c, members) in classes.iter_mut().enumerate() {
        members.shuffle(&mut rng);
        train.extend_from_slice(&members[..quota[c]]);
        test.extend_from_slice(&members[quota[c]..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Seeded stratified split of aligned feature sets and labels.
pub fn split(
    features: &[FeatureSet],
    labels: &LabelVector,
    train_fraction: f64,
    seed: u64,
) -> Result<(Partition, Partition)> {
    for f in features {
        labels.check_aligned(f)?;
    }
    let (train_idx, test_idx) = split_indices(labels, train_fraction, seed)?;
    let part = |idx: &[usize]| Partition {
        features: features.iter().map(|f| f.select_columns(idx)).collect(),
        labels: labels.select(idx),
    };
    Ok((part(&train_idx), part(&test_idx)))
}

/// Per-feature standardization statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Normalizer {
    /// Fit mean and sample standard deviation (divisor `n − 1`) per feature.
    pub fn fit(train: &FeatureSet) -> Result<Normalizer> {
        let n = train.len();
        if n < 2 {
            return Err(Error::validation(format!(
                "normalizer for `{}` needs at least 2 samples, got {n}",
                train.name()
            )));
        }
        let mut means = Vec::with_capacity(train.dim());
        let mut stds = Vec::with_capacity(train.dim());
        for row in train.values().row_iter() {
            let mean = row.iter().sum::<f64>() / n as f64;
            let var = row.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            means.push(mean);
            stds.push(var.sqrt().max(STD_FLOOR));
        }
        Ok(Normalizer { means, stds })
    }

    pub fn dim(&self) -> usize {
        self.means.len()
    }

    pub fn apply(&self, data: &FeatureSet) -> Result<FeatureSet> {
        if data.dim() != self.dim() {
            return Err(Error::validation(format!(
                "normalizer has {} features, `{}` has {}",
                self.dim(),
                data.name(),
                data.dim()
            )));
        }
        let mut values = data.values().clone();
        for (i, mut row) in values.row_iter_mut().enumerate() {
            let (m, s) = (self.means[i], self.stds[i]);
            row.apply(|v| *v = (*v - m) / s);
        }
        FeatureSet::new(
            data.name(),
            values,
            data.sample_ids().to_vec(),
            data.feature_names().to_vec(),
        )
    }

    pub fn apply_vector(&self, v: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            v.len(),
            v.iter()
                .enumerate()
                .map(|(i, x)| (x - self.means[i]) / self.stds[i]),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("img{i:03}")).collect()
    }

    fn random_set(d: usize, n: usize, seed: u64) -> FeatureSet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = DMatrix::from_fn(d, n, |_, _| rng.random_range(-5.0..5.0));
        FeatureSet::from_matrix("r", m, ids(n)).unwrap()
    }

    #[test]
    fn load_shape_is_features_by_samples() {
        let text = "id,a,b\nx,1,2\ny,3,4\nz,5,6\n";
        let f = FeatureSet::parse_csv("t", "mem", text).unwrap();
        assert_eq!((f.dim(), f.len()), (2, 3));
        assert_eq!(f.values()[(1, 2)], 6.0);
        assert_eq!(f.sample_ids(), &["x", "y", "z"]);
        assert_eq!(f.feature_names(), &["a", "b"]);
    }

    #[test]
    fn load_rejects_nan_bad_rows_and_duplicates() {
        let nan = FeatureSet::parse_csv("t", "mem", "id,a\nx,NaN\n");
        assert!(matches!(nan, Err(Error::Parse { line: 2, .. })));
        let short = FeatureSet::parse_csv("t", "mem", "id,a,b\nx,1,2\ny,3\n");
        assert!(matches!(short, Err(Error::Parse { line: 3, .. })));
        let word = FeatureSet::parse_csv("t", "mem", "id,a\nx,abc\n");
        assert!(matches!(word, Err(Error::Parse { .. })));
        let dup = FeatureSet::parse_csv("t", "mem", "id,a\nx,1\nx,2\n");
        assert!(matches!(dup, Err(Error::Validation(_))));
    }

    #[test]
    fn write_then_load_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let f = random_set(4, 17, 3);
        let path = dir.path().join("r.csv");
        f.write_csv(&path).unwrap();
        let g = FeatureSet::load_csv(&path).unwrap();
        let diff = (f.values() - g.values()).abs().max();
        assert!(diff <= 1e-12);
        assert_eq!(f.sample_ids(), g.sample_ids());
    }

    #[test]
    fn labels_parse_and_write() {
        let l = LabelVector::parse_csv("mem", "id,label\na,+1\nb,-1\n").unwrap();
        assert_eq!(l.labels(), &[Label::Positive, Label::Negative]);
        assert!(LabelVector::parse_csv("mem", "id,label\na,0\n").is_err());
        assert!(LabelVector::parse_csv("mem", "name,label\na,1\n").is_err());
    }

    #[test]
    fn split_seven_three() {
        let labels = LabelVector::from_signs(&[1., 1., 1., 1., 1., -1., -1., -1., -1., -1.]).unwrap();
        let (train, test) = split_indices(&labels, 0.7, 1).unwrap();
        assert_eq!((train.len(), test.len()), (7, 3));
    }

    #[test]
    fn split_is_deterministic_and_stratified() {
        let labels = LabelVector::from_signs(&[1., 1., 1., 1., 1., -1., -1., -1., -1., -1.]).unwrap();
        let set = FeatureSet::from_matrix("f", DMatrix::from_fn(2, 10, |i, j| (i + j) as f64), labels.sample_ids().to_vec()).unwrap();
        let a = split(std::slice::from_ref(&set), &labels, 0.6, 42).unwrap();
        let b = split(std::slice::from_ref(&set), &labels, 0.6, 42).unwrap();
        assert_eq!(a.0.labels, b.0.labels);
        assert_eq!(a.1.labels, b.1.labels);
        let (p, n) = a.0.labels.class_counts();
        assert!(p >= 1 && n >= 1);
        let (p, n) = a.1.labels.class_counts();
        assert!(p >= 1 && n >= 1);
        // features follow labels
        assert_eq!(a.0.features[0].sample_ids(), a.0.labels.sample_ids());
    }

    #[test]
    fn split_keeps_rare_class_on_both_sides() {
        let mut signs = vec![1.0; 18];
        signs.extend([-1.0, -1.0]);
        let labels = LabelVector::from_signs(&signs).unwrap();
        for seed in 0..20 {
            let (tr, te) = split_indices(&labels, 0.9, seed).unwrap();
            assert_eq!(tr.len(), 18);
            assert!(tr.iter().any(|&i| i >= 18));
            assert!(te.iter().any(|&i| i >= 18));
        }
    }

    #[test]
    fn split_rejects_misaligned_sets() {
        let labels = LabelVector::from_signs(&[1., -1., 1.]).unwrap();
        let set = FeatureSet::from_matrix("f", DMatrix::zeros(1, 3), vec!["a".into(), "b".into(), "c".into()]).unwrap();
        assert!(matches!(split(&[set], &labels, 0.5, 0), Err(Error::Validation(_))));
    }

    #[test]
    fn normalizer_hand_values() {
        let f = FeatureSet::from_matrix("f", DMatrix::from_row_slice(2, 3, &[1., 2., 3., 5., 5., 5.]), ids(3)).unwrap();
        let n = Normalizer::fit(&f).unwrap();
        assert_eq!(n.means, vec![2.0, 5.0]);
        assert_eq!(n.stds[0], 1.0);
        assert_eq!(n.stds[1], STD_FLOOR);
        let t = n.apply(&f).unwrap();
        assert_eq!(t.values().row(1).iter().copied().collect::<Vec<_>>(), vec![0.0; 3]);
        assert_eq!(t.values()[(0, 2)], 1.0);
    }

    #[test]
    fn normalizer_plug_in_and_identity() {
        let one = FeatureSet::from_matrix("f", DMatrix::from_element(1, 1, 3.0), ids(1)).unwrap();
        let n = Normalizer { means: vec![1.0], stds: vec![2.0] };
        assert_eq!(n.apply(&one).unwrap().values()[(0, 0)], 1.0);
        let id = Normalizer { means: vec![0.0], stds: vec![1.0] };
        assert_eq!(id.apply(&one).unwrap(), one);
        let two = FeatureSet::from_matrix("g", DMatrix::zeros(2, 1), ids(1)).unwrap();
        assert!(n.apply(&two).is_err());
        assert!(Normalizer::fit(&one).is_err());
    }

    #[test]
    fn normalizer_uses_train_statistics() {
        let train = random_set(3, 40, 9);
        let n = Normalizer::fit(&train).unwrap();
        let shifted = FeatureSet::from_matrix("s", train.values().add_scalar(4.0), train.sample_ids().to_vec()).unwrap();
        let t = n.apply(&shifted).unwrap();
        for row in t.values().row_iter() {
            let mean = row.iter().sum::<f64>() / row.len() as f64;
            assert!(mean > 0.1, "test mean {mean} should stay shifted");
        }
    }

    proptest! {
        #[test]
        fn standardized_train_has_zero_mean_unit_std(seed in 0u64..1000, d in 1usize..6, n in 2usize..60) {
            let f = random_set(d, n, seed);
            let t = Normalizer::fit(&f).unwrap().apply(&f).unwrap();
            for row in t.values().row_iter() {
                let mean = row.iter().sum::<f64>() / n as f64;
                let var = row.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
                prop_assert!(mean.abs() <= 1e-9);
                prop_assert!((var.sqrt() - 1.0).abs() <= 1e-6);
            }
        }

        #[test]
        fn split_is_a_partition(seed in 0u64..500, n in 4usize..80, frac in 0.1f64..0.9) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let signs: Vec<f64> = (0..n).map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 }).collect();
            let labels = LabelVector::from_signs(&signs).unwrap();
            let (tr, te) = split_indices(&labels, frac, seed).unwrap();
            let mut all: Vec<usize> = tr.iter().chain(&te).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
            let (p, q) = labels.class_counts();
            if p >= 2 && q >= 2 {
                let want = (frac * n as f64).round() as usize;
                // the quota is exact unless stratification bounds force a move
                if want >= 2 && n - want >= 2 {
                    prop_assert_eq!(tr.len(), want);
                }
            }
        }
    }
}
