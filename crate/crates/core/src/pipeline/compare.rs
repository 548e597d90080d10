//! The three-rung comparison: concatenation SVM, fused SVM, fused MKL.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{KernelConfig, PipelineConfig};
use super::corpus::Corpus;
use super::model::{fuse_split, fused_groups, write_json};
use crate::dataset::{FeatureSet, LabelVector};
use crate::error::{Error, Result};
use crate::metrics;
use crate::mkl::MklModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    /// All cue sets normalized and concatenated, one SVM.
    F4,
    /// Fused cue groups concatenated, one SVM.
    F5,
    /// Fused cue groups, one kernel per cue, SimpleMKL.
    F6,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::F4, Method::F5, Method::F6];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::F4 => "F4",
            Method::F5 => "F5",
            Method::F6 => "F6",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Method::F4 => "concatenation + SVM",
            Method::F5 => "DCA fusion + SVM",
            Method::F6 => "DCA fusion + SimpleMKL",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub method: Method,
    pub description: String,
    pub accuracy: f64,
    pub auc: f64,
    /// Total input dimension seen by the classifier.
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub config_digest: String,
    pub seed: u64,
    pub n_train: usize,
    pub n_test: usize,
    pub baseline_kernel: KernelConfig,
    pub rows: Vec<ComparisonRow>,
}

impl Comparison {
    pub fn row(&self, m: Method) -> &ComparisonRow {
        self.rows.iter().find(|r| r.method == m).expect("every method has a row")
    }

    pub fn concat_dim(&self) -> usize {
        self.row(Method::F4).dim
    }

    pub fn fused_dim(&self) -> usize {
        self.row(Method::F6).dim
    }

    /// `method,accuracy,auc`, one row per method.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("method,accuracy,auc\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{}", r.method.as_str(), r.accuracy, r.auc);
        }
        out
    }

    /// Fixed-width table for the terminal.
    pub fn to_table(&self) -> String {
        let mut out = format!("{:<4} {:<24} {:>7} {:>7} {:>6}\n", "", "method", "ACC", "AUC", "dim");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<4} {:<24} {:>7.3} {:>7.3} {:>6}",
                r.method.as_str(),
                r.description,
                r.accuracy,
                r.auc,
                r.dim
            );
        }
        out
    }
}

fn single_kernel(name: &str, train: &[&FeatureSet], test: &[&FeatureSet], labels: &LabelVector, kernel: &KernelConfig, cfg: &PipelineConfig, truth: &LabelVector) -> Result<(f64, f64, usize)> {
    let train = FeatureSet::vstack(name, train)?;
    let test = FeatureSet::vstack(name, test)?;
    let model = MklModel::fit(std::slice::from_ref(&train), &[kernel.choice_for(&train)], labels, &cfg.mkl_params())?;
    let (pred, scores) = model.predict(std::slice::from_ref(&test))?;
    let r = metrics::evaluate(&pred, &scores, truth)?;
    Ok((r.accuracy, r.auc, train.dim()))
}

/// Run all three methods on one split of `corpus`.
pub fn compare(corpus: &Corpus, cfg: &PipelineConfig) -> Result<Comparison> {
    let fs = fuse_split(corpus, cfg)?;
    let test_truth = corpus.labels.select_ids(&fs.test_ids)?;
    let baseline = &cfg.compare.baseline_kernel;
    let mut rows = Vec::with_capacity(3);

    // F4 sees the same cue sets as fusion, only normalized (inside the model).
    let raw_train = corpus.cue_sets(&fs.derived, &fs.train_ids)?;
    let raw_test = corpus.cue_sets(&fs.derived, &fs.test_ids)?;
    let names: Vec<&String> = fs.plan.cues.iter().flat_map(|c| c.types.iter().flat_map(|t| &t.sets)).collect();
    let pick = |m: &std::collections::BTreeMap<String, FeatureSet>| -> Result<Vec<FeatureSet>> {
        names
            .iter()
            .map(|n| {
                let norm = &fs.plan.normalizers[n.as_str()];
                norm.apply(m.get(n.as_str()).ok_or_else(|| Error::validation(format!("missing set `{n}`")))?)
            })
            .collect()
    };
    let (tr, te) = (pick(&raw_train)?, pick(&raw_test)?);
    let (acc, auc, dim) = single_kernel(
        "concatenated",
        &tr.iter().collect::<Vec<_>>(),
        &te.iter().collect::<Vec<_>>(),
        &fs.train_labels,
        baseline,
        cfg,
        &test_truth,
    )
    .map_err(|e| e.in_stage("compare F4"))?;
    rows.push(ComparisonRow {
        method: Method::F4,
        description: Method::F4.description().into(),
        accuracy: acc,
        auc,
        dim,
    });

    let test_groups = fused_groups(corpus, &fs.derived, &fs.plan, &fs.test_ids)?;
    let (acc, auc, dim) = single_kernel(
        "fused",
        &fs.train_groups.iter().collect::<Vec<_>>(),
        &test_groups.iter().collect::<Vec<_>>(),
        &fs.train_labels,
        baseline,
        cfg,
        &test_truth,
    )
    .map_err(|e| e.in_stage("compare F5"))?;
    rows.push(ComparisonRow {
        method: Method::F5,
        description: Method::F5.description().into(),
        accuracy: acc,
        auc,
        dim,
    });

    let choices: Vec<_> = fs
        .plan
        .cue_order()
        .iter()
        .zip(&fs.train_groups)
        .map(|(&c, g)| cfg.kernels.for_cue(c).choice_for(g))
        .collect();
    let mkl = MklModel::fit(&fs.train_groups, &choices, &fs.train_labels, &cfg.mkl_params()).map_err(|e| e.in_stage("compare F6"))?;
    let (pred, scores) = mkl.predict(&test_groups)?;
    let r = metrics::evaluate(&pred, &scores, &test_truth)?;
    rows.push(ComparisonRow {
        method: Method::F6,
        description: Method::F6.description().into(),
        accuracy: r.accuracy,
        auc: r.auc,
        dim: fs.train_groups.iter().map(FeatureSet::dim).sum(),
    });

    Ok(Comparison {
        config_digest: cfg.digest(),
        seed: cfg.split.seed,
        n_train: fs.train_ids.len(),
        n_test: fs.test_ids.len(),
        baseline_kernel: *baseline,
        rows,
    })
}

/// Write `comparison.json` and `comparison.csv` into `dir`.
pub fn write_comparison(c: &Comparison, dir: &Path) -> Result<()> {
    write_json(dir.join("comparison.json"), c)?;
    let path = dir.join("comparison.csv");
    std::fs::write(&path, c.to_csv_string()).map_err(|e| Error::io(&path, e))
}
