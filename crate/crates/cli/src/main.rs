//! `dcamkl`: extract, fuse, train, predict, evaluate and compare.
//!
//! Exit codes: 0 success, 2 validation, 3 non-convergence, 4 I/O.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dcamkl::pipeline::{self, PipelineConfig, SyntheticSpec};
use dcamkl::{Error, Result};

#[derive(Parser)]
#[command(name = "dcamkl", version, about = "DCA fusion and SimpleMKL classification of image features")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Pipeline configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Overrides `split.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `output`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct WithModel {
    #[command(flatten)]
    common: Common,
    /// Model file; defaults to `<out>/model.json`.
    #[arg(long)]
    model: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Extract every configured feature set from the image directory.
    Extract(Common),
    /// Fit the fusion plan and write fused features per cue.
    Fuse(Common),
    /// Train the multi-kernel classifier.
    Train(WithModel),
    /// Predict labels and decision values with a saved model.
    Predict(WithModel),
    /// Compute ACC, AUC and the ROC curve of the predictions.
    Evaluate(Common),
    /// Run concatenation SVM, fused SVM and fused MKL on one split.
    Compare(Common),
    /// Write a synthetic labeled image corpus with a matching config.
    Generate {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = SyntheticSpec::default().seed)]
        seed: u64,
        #[arg(long, default_value_t = SyntheticSpec::default().n)]
        n: usize,
    },
}

fn load(c: &Common) -> Result<PipelineConfig> {
    Ok(PipelineConfig::load(&c.config)?.with_seed(c.seed).with_output(c.out.clone()))
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Extract(c) => {
            let cfg = load(&c)?;
            let m = pipeline::run_extract(&cfg)?;
            for f in &m.failures {
                eprintln!("skipped {}: {}", f.file, f.error);
            }
            let n = m.sets.iter().map(|s| s.dim).sum::<usize>();
            println!(
                "extracted {} sets ({n} features) into {} with {} failures",
                m.sets.len(),
                cfg.features_dir().display(),
                m.failures.len()
            );
        }
        Command::Fuse(c) => {
            let cfg = load(&c)?;
            let s = pipeline::run_fuse(&cfg)?;
            println!("fused {} train and {} test samples into {}", s.train_ids.len(), s.test_ids.len(), cfg.output.display());
        }
        Command::Train(w) => {
            let cfg = load(&w.common)?;
            let r = pipeline::run_train(&cfg, w.model.as_deref())?;
            println!("config {}", r.config_digest);
            for ((cue, d), dim) in r.cues.iter().zip(&r.weights).zip(&r.fused_dims) {
                println!("  {:<20} dim {dim:>5}  weight {d:.4}", cue.as_str());
            }
            println!("train ACC {:.4} AUC {:.4}", r.train_accuracy, r.train_auc);
            println!("model written to {}", pipeline::model_path(&cfg, w.model.as_deref()).display());
        }
        Command::Predict(w) => {
            let cfg = load(&w.common)?;
            let p = pipeline::run_predict(&cfg, w.model.as_deref())?;
            println!("{} predictions written to {}", p.ids.len(), cfg.output.join(pipeline::PREDICTIONS_FILE).display());
        }
        Command::Evaluate(c) => {
            let cfg = load(&c)?;
            let e = pipeline::run_evaluate(&cfg)?;
            println!("n {}  ACC {:.4}  AUC {:.4}", e.n, e.report.accuracy, e.report.auc);
        }
        Command::Compare(c) => {
            let cfg = load(&c)?;
            let t = pipeline::run_compare(&cfg)?;
            print!("{}", t.to_table());
        }
        Command::Generate { out, seed, n } => {
            let spec = SyntheticSpec { n, seed, ..SyntheticSpec::default() };
            let lv = pipeline::generate_corpus(Path::new(&out), &spec)?;
            println!("wrote {} images and config.toml to {}", lv.len(), out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> ExitCode {
    ExitCode::from(e.exit_code() as u8)
}
