//! One function per subcommand. Each reads its inputs from disk and writes
//! its artifacts under the configured output directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::compare::{compare, write_comparison, Comparison};
use super::config::{PipelineConfig, Subset};
use super::corpus::Corpus;
use super::model::{
    evaluate_predictions, fuse_split, fused_groups, train_model, write_json, EvaluationOutput, Predictions, TrainReport,
    TrainedModel,
};
use crate::error::{Error, Result};

pub const FUSION_PLAN_FILE: &str = "fusion_plan.json";
pub const SPLIT_FILE: &str = "split.json";
pub const FUSED_DIR: &str = "fused";
pub const MODEL_FILE: &str = "model.json";
pub const TRAIN_REPORT_FILE: &str = "train_report.json";
pub const PREDICTIONS_FILE: &str = "predictions.csv";
pub const EVALUATION_FILE: &str = "evaluation.json";
pub const ROC_FILE: &str = "roc.csv";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitRecord {
    pub config_digest: String,
    pub seed: u64,
    pub train_ids: Vec<String>,
    pub test_ids: Vec<String>,
}

fn create_output(cfg: &PipelineConfig) -> Result<&Path> {
    std::fs::create_dir_all(&cfg.output).map_err(|e| Error::io(&cfg.output, e))?;
    Ok(&cfg.output)
}

/// `fuse`: fit the fusion plan on the training partition, write the plan,
/// the split and the fused features of both partitions.
pub fn run_fuse(cfg: &PipelineConfig) -> Result<SplitRecord> {
    let corpus = Corpus::load(cfg)?;
    let out = create_output(cfg)?;
    let fs = fuse_split(&corpus, cfg)?;
    let test_groups = fused_groups(&corpus, &fs.derived, &fs.plan, &fs.test_ids).map_err(|e| e.in_stage("fuse"))?;
    let fused = out.join(FUSED_DIR);
    std::fs::create_dir_all(&fused).map_err(|e| Error::io(&fused, e))?;
    for (cue, (tr, te)) in fs.plan.cue_order().iter().zip(fs.train_groups.iter().zip(&test_groups)) {
        tr.write_csv(fused.join(format!("{cue}_train.csv")))?;
        te.write_csv(fused.join(format!("{cue}_test.csv")))?;
    }
    write_json(out.join(FUSION_PLAN_FILE), &fs.plan)?;
    let record = SplitRecord {
        config_digest: cfg.digest(),
        seed: cfg.split.seed,
        train_ids: fs.train_ids,
        test_ids: fs.test_ids,
    };
    write_json(out.join(SPLIT_FILE), &record)?;
    Ok(record)
}

pub fn model_path(cfg: &PipelineConfig, model: Option<&Path>) -> PathBuf {
    model.map(Path::to_path_buf).unwrap_or_else(|| cfg.output.join(MODEL_FILE))
}

/// `train`: write the model and the training report.
pub fn run_train(cfg: &PipelineConfig, model: Option<&Path>) -> Result<TrainReport> {
    let corpus = Corpus::load(cfg)?;
    let out = create_output(cfg)?;
    let (m, report) = train_model(&corpus, cfg)?;
    m.save(model_path(cfg, model))?;
    write_json(out.join(TRAIN_REPORT_FILE), &report)?;
    Ok(report)
}

/// `predict`: score the configured subset with a saved model.
pub fn run_predict(cfg: &PipelineConfig, model: Option<&Path>) -> Result<Predictions> {
    let m = TrainedModel::load(model_path(cfg, model))?;
    let corpus = Corpus::load(cfg)?;
    let out = create_output(cfg)?;
    let ids = match cfg.predict.subset {
        Subset::Test => m.test_ids.clone(),
        Subset::Train => m.train_ids.clone(),
        Subset::All => corpus.sample_ids().to_vec(),
    };
    if ids.is_empty() {
        return Err(Error::validation("predict: the selected subset is empty"));
    }
    let p = m.predict(&corpus, &ids)?;
    p.write_csv(out.join(PREDICTIONS_FILE))?;
    Ok(p)
}

/// `evaluate`: score the predictions file against the label file.
pub fn run_evaluate(cfg: &PipelineConfig) -> Result<EvaluationOutput> {
    let out = create_output(cfg)?;
    let pred = Predictions::load_csv(out.join(PREDICTIONS_FILE))?;
    let truth = crate::dataset::LabelVector::load_csv(&cfg.data.labels)?;
    let (report, roc) = evaluate_predictions(&pred, &truth)?;
    roc.write_csv(out.join(ROC_FILE))?;
    let e = EvaluationOutput {
        config_digest: cfg.digest(),
        n: pred.ids.len(),
        report,
    };
    write_json(out.join(EVALUATION_FILE), &e)?;
    Ok(e)
}

/// `compare`: F4/F5/F6 on one split.
pub fn run_compare(cfg: &PipelineConfig) -> Result<Comparison> {
    let corpus = Corpus::load(cfg)?;
    let out = create_output(cfg)?;
    let c = compare(&corpus, cfg)?;
    write_comparison(&c, out)?;
    Ok(c)
}
