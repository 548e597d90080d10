//! Training, persistence, prediction and evaluation of the full classifier.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::PipelineConfig;
use super::corpus::{cue_layout, Corpus, DerivedReference};
use super::fuse::FusionPlan;
use crate::dataset::{FeatureSet, Label, LabelVector};
use crate::error::{Error, Result};
use crate::features::Cue;
use crate::kernels::KernelSpec;
use crate::metrics::{self, EvaluationReport, RocCurve};
use crate::mkl::MklModel;

pub const MODEL_VERSION: u32 = 1;

/// A persisted classifier: derived-feature references, fusion plan and the
/// multi-kernel SVM, tagged with the digest of the configuration that made it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub format_version: u32,
    pub config_digest: String,
    pub seed: u64,
    pub train_ids: Vec<String>,
    pub test_ids: Vec<String>,
    pub derived: Vec<DerivedReference>,
    pub fusion: FusionPlan,
    pub classifier: MklModel,
}

/// Summary written next to the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub config_digest: String,
    pub seed: u64,
    pub n_train: usize,
    pub n_test: usize,
    pub cues: Vec<Cue>,
    pub fused_dims: Vec<usize>,
    pub kernels: Vec<KernelSpec>,
    pub weights: Vec<f64>,
    pub objective_trace: Vec<f64>,
    pub duality_gap: f64,
    pub n_support: usize,
    pub train_accuracy: f64,
    pub train_auc: f64,
}

/// Fused training groups and everything needed to replay them.
pub struct FusedSplit {
    pub train_ids: Vec<String>,
    pub test_ids: Vec<String>,
    pub derived: Vec<DerivedReference>,
    pub plan: FusionPlan,
    pub train_groups: Vec<FeatureSet>,
    pub train_labels: LabelVector,
}

/// Split, compute train-referenced derived features and fit the fusion plan.
pub fn fuse_split(corpus: &Corpus, cfg: &PipelineConfig) -> Result<FusedSplit> {
    let (train_ids, test_ids) = corpus.split(cfg.split.train_fraction, cfg.split.seed)?;
    let derived = corpus.derived_references(&train_ids)?;
    let train_sets = corpus.cue_sets(&derived, &train_ids)?;
    let train_labels = corpus.labels.select_ids(&train_ids)?;
    let (plan, train_groups) = FusionPlan::fit(&cue_layout(&corpus.manifest), &train_sets, &train_labels, cfg.fusion_mode)
        .map_err(|e| e.in_stage("fuse"))?;
    Ok(FusedSplit {
        train_ids,
        test_ids,
        derived,
        plan,
        train_groups,
        train_labels,
    })
}

/// Replay derived features and fusion on arbitrary samples of the corpus.
pub fn fused_groups(corpus: &Corpus, derived: &[DerivedReference], plan: &FusionPlan, ids: &[String]) -> Result<Vec<FeatureSet>> {
    let sets = corpus.cue_sets(derived, ids)?;
    plan.apply(&sets)
}

/// `train`: fuse, then fit SimpleMKL with one kernel per cue.
pub fn train_model(corpus: &Corpus, cfg: &PipelineConfig) -> Result<(TrainedModel, TrainReport)> {
    let fs = fuse_split(corpus, cfg)?;
    let cues = fs.plan.cue_order();
    let choices: Vec<_> = cues
        .iter()
        .zip(&fs.train_groups)
        .map(|(&c, g)| cfg.kernels.for_cue(c).choice_for(g))
        .collect();
    let classifier =
        MklModel::fit(&fs.train_groups, &choices, &fs.train_labels, &cfg.mkl_params()).map_err(|e| e.in_stage("train"))?;
    let (pred, scores) = classifier.predict(&fs.train_groups)?;
    let eval = metrics::evaluate(&pred, &scores, &fs.train_labels)?;
    let report = TrainReport {
        config_digest: cfg.digest(),
        seed: cfg.split.seed,
        n_train: fs.train_ids.len(),
        n_test: fs.test_ids.len(),
        cues,
        fused_dims: fs.train_groups.iter().map(FeatureSet::dim).collect(),
        kernels: classifier.kernels.clone(),
        weights: classifier.weights.clone(),
        objective_trace: classifier.objective_trace.clone(),
        duality_gap: classifier.duality_gap,
        n_support: classifier.alpha.len(),
        train_accuracy: eval.accuracy,
        train_auc: eval.auc,
    };
    let model = TrainedModel {
        format_version: MODEL_VERSION,
        config_digest: report.config_digest.clone(),
        seed: cfg.split.seed,
        train_ids: fs.train_ids,
        test_ids: fs.test_ids,
        derived: fs.derived,
        fusion: fs.plan,
        classifier,
    };
    Ok((model, report))
}

impl TrainedModel {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_json(path, self)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let m: TrainedModel = serde_json::from_str(&text).map_err(|e| Error::Serde(format!("{}: {e}", path.display())))?;
        if m.format_version != MODEL_VERSION {
            return Err(Error::validation(format!(
                "model format {} is not supported (expected {MODEL_VERSION})",
                m.format_version
            )));
        }
        Ok(m)
    }

    /// Labels and decision values for `ids` of the corpus.
    pub fn predict(&self, corpus: &Corpus, ids: &[String]) -> Result<Predictions> {
        let groups = fused_groups(corpus, &self.derived, &self.fusion, ids).map_err(|e| e.in_stage("predict"))?;
        let (labels, decisions) = self.classifier.predict(&groups)?;
        Ok(Predictions {
            ids: ids.to_vec(),
            labels,
            decisions,
        })
    }
}

/// Rows of `id,label,decision`.
#[derive(Debug, Clone, PartialEq)]
pub struct Predictions {
    pub ids: Vec<String>,
    pub labels: Vec<Label>,
    pub decisions: Vec<f64>,
}

impl Predictions {
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("id,label,decision\n");
        for ((id, l), d) in self.ids.iter().zip(&self.labels).zip(&self.decisions) {
            let _ = writeln!(out, "{id},{},{d}", l.as_str());
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv_string()).map_err(|e| Error::io(path, e))
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_csv(&path.display().to_string(), &text)
    }

    pub fn parse_csv(origin: &str, text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let parse_err = |line: usize, message: String| Error::Parse {
            path: origin.to_string(),
            line,
            message,
        };
        let headers = reader.headers().map_err(|e| parse_err(1, e.to_string()))?;
        if headers.iter().collect::<Vec<_>>() != ["id", "label", "decision"] {
            return Err(parse_err(1, "expected header `id,label,decision`".into()));
        }
        let mut p = Predictions {
            ids: Vec::new(),
            labels: Vec::new(),
            decisions: Vec::new(),
        };
        for (i, rec) in reader.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| parse_err(line, e.to_string()))?;
            if rec.len() != 3 {
                return Err(parse_err(line, format!("{} fields, expected 3", rec.len())));
            }
            let label = Label::parse(&rec[1]).ok_or_else(|| parse_err(line, format!("bad label `{}`", &rec[1])))?;
            let d: f64 = rec[2]
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| parse_err(line, format!("bad decision value `{}`", &rec[2])))?;
            p.ids.push(rec[0].to_string());
            p.labels.push(label);
            p.decisions.push(d);
        }
        Ok(p)
    }
}

/// Evaluation summary echoed with the configuration digest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationOutput {
    pub config_digest: String,
    pub n: usize,
    #[serde(flatten)]
    pub report: EvaluationReport,
}

/// `evaluate`: score predictions against the label file.
pub fn evaluate_predictions(pred: &Predictions, truth: &LabelVector) -> Result<(EvaluationReport, RocCurve)> {
    let truth = truth.select_ids(&pred.ids).map_err(|e| e.in_stage("evaluate"))?;
    let mut report = metrics::evaluate(&pred.labels, &pred.decisions, &truth)?;
    let roc = report.roc.take().expect("evaluate fills the curve");
    Ok((report, roc))
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let text = serde_json::to_string_pretty(value)? + "\n";
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
