//! Run configuration loaded from TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::FeatureSet;
use crate::error::{Error, Result};
use crate::features::{Cue, Extractor};
use crate::fusion::FusionMode;
use crate::mkl::{KernelChoice, MklParams};
use crate::svm::SvmParams;

/// Kernel for one cue group. A polynomial without `scale` uses
/// `1 / dim` of the group so that inner products stay `O(1)` after
/// standardization; an RBF without `sigma` uses the median heuristic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum KernelConfig {
    Rbf {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sigma: Option<f64>,
    },
    Polynomial {
        degree: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        scale: Option<f64>,
        #[serde(default = "one")]
        offset: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl KernelConfig {
    pub fn poly(degree: u32) -> Self {
        KernelConfig::Polynomial {
            degree,
            scale: None,
            offset: 1.0,
        }
    }

    /// Fix the data-dependent polynomial scale for a group.
    pub fn choice_for(&self, group: &FeatureSet) -> KernelChoice {
        match *self {
            KernelConfig::Rbf { sigma } => KernelChoice::Rbf { sigma },
            KernelConfig::Polynomial { degree, scale, offset } => KernelChoice::Polynomial {
                degree,
                scale: scale.unwrap_or(1.0 / group.dim().max(1) as f64),
                offset,
            },
        }
    }
}

/// One kernel per cue group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelManifest {
    pub unusualness: KernelConfig,
    pub aesthetics: KernelConfig,
    pub general_preferences: KernelConfig,
}

impl Default for KernelManifest {
    fn default() -> Self {
        Self {
            unusualness: KernelConfig::Rbf { sigma: None },
            aesthetics: KernelConfig::poly(2),
            general_preferences: KernelConfig::poly(3),
        }
    }
}

impl KernelManifest {
    pub fn for_cue(&self, cue: Cue) -> KernelConfig {
        match cue {
            Cue::Unusualness => self.unusualness,
            Cue::Aesthetics => self.aesthetics,
            Cue::GeneralPreferences => self.general_preferences,
        }
    }
}

/// An externally computed descriptor (Gist, SIFT pyramid, …) in feature-CSV form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImportedSet {
    pub name: String,
    pub path: PathBuf,
    pub cue: Cue,
    /// Fusion type; defaults to the set name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    /// Directory of PNG/BMP images for `extract`.
    pub images: Option<PathBuf>,
    /// `id,label` CSV.
    pub labels: PathBuf,
    /// Directory holding extracted feature CSVs and the cue manifest.
    /// Defaults to `<output>/features`.
    pub features: Option<PathBuf>,
    pub imported: Vec<ImportedSet>,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            images: None,
            labels: PathBuf::from("labels.csv"),
            features: None,
            imported: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            train_fraction: 0.7,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtractConfig {
    pub extractors: Vec<Extractor>,
    pub familiarity_k: usize,
    pub lof_k: usize,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        Self {
            extractors: Extractor::ALL.to_vec(),
            familiarity_k: 10,
            lof_k: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Subset {
    #[default]
    Test,
    Train,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct PredictConfig {
    pub subset: Subset,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareConfig {
    /// Single kernel for the concatenation and fused-SVM baselines.
    pub baseline_kernel: KernelConfig,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self {
            baseline_kernel: KernelConfig::poly(3),
        }
    }
}

/// SimpleMKL outer-loop settings; the inner SVM uses `[svm]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MklConfig {
    pub outer_tol: f64,
    pub gap_tol: f64,
    pub max_outer: usize,
    pub armijo_c: f64,
    pub backtrack: f64,
    pub max_backtracks: usize,
}

impl Default for MklConfig {
    fn default() -> Self {
        let d = MklParams::default();
        Self {
            outer_tol: d.outer_tol,
            gap_tol: d.gap_tol,
            max_outer: d.max_outer,
            armijo_c: d.armijo_c,
            backtrack: d.backtrack,
            max_backtracks: d.max_backtracks,
        }
    }
}

/// Everything a run depends on. Unspecified fields take the documented
/// defaults; the effective configuration is echoed into every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub output: PathBuf,
    pub data: DataConfig,
    pub split: SplitConfig,
    pub extract: ExtractConfig,
    pub fusion_mode: FusionMode,
    pub svm: SvmParams,
    pub mkl: MklConfig,
    pub kernels: KernelManifest,
    pub predict: PredictConfig,
    pub compare: CompareConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            output: PathBuf::from("out"),
            data: DataConfig::default(),
            split: SplitConfig::default(),
            extract: ExtractConfig::default(),
            fusion_mode: FusionMode::Concat,
            svm: SvmParams::default(),
            mkl: MklConfig::default(),
            kernels: KernelManifest::default(),
            predict: PredictConfig::default(),
            compare: CompareConfig::default(),
        }
    }
}

impl PipelineConfig {
    /// Parse TOML; relative paths are resolved against `base`.
    pub fn from_toml(text: &str, base: &Path) -> Result<Self> {
        let mut cfg: PipelineConfig =
            toml::from_str(text).map_err(|e| Error::validation(format!("config: {}", e.message())))?;
        cfg.resolve_paths(base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.output);
        fix(&mut self.data.labels);
        if let Some(p) = self.data.images.as_mut() {
            fix(p);
        }
        if let Some(p) = self.data.features.as_mut() {
            fix(p);
        }
        for imp in &mut self.data.imported {
            fix(&mut imp.path);
        }
    }

    pub fn validate(&self) -> Result<()> {
        let f = self.split.train_fraction;
        if !(f > 0.0 && f < 1.0) {
            return Err(Error::validation(format!("split.train_fraction {f} must lie in (0, 1)")));
        }
        if self.svm.c <= 0.0 || self.svm.tol <= 0.0 {
            return Err(Error::validation("svm.c and svm.tol must be positive"));
        }
        if self.extract.familiarity_k == 0 || self.extract.lof_k == 0 {
            return Err(Error::validation("familiarity_k and lof_k must be at least 1"));
        }
        for k in [self.kernels.unusualness, self.kernels.aesthetics, self.kernels.general_preferences, self.compare.baseline_kernel] {
            match k {
                KernelConfig::Rbf { sigma: Some(s) } if !(s > 0.0) => {
                    return Err(Error::validation(format!("RBF sigma {s} must be positive")))
                }
                KernelConfig::Polynomial { degree: 0, .. } => return Err(Error::validation("polynomial degree must be ≥ 1")),
                KernelConfig::Polynomial { scale: Some(s), .. } if !(s > 0.0) => {
                    return Err(Error::validation(format!("polynomial scale {s} must be positive")))
                }
                _ => {}
            }
        }
        let mut names: Vec<&str> = self.data.imported.iter().map(|i| i.name.as_str()).collect();
        names.sort_unstable();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::validation(format!("imported set `{}` declared twice", w[0])));
        }
        Ok(())
    }

    pub fn mkl_params(&self) -> MklParams {
        MklParams {
            svm: self.svm,
            outer_tol: self.mkl.outer_tol,
            gap_tol: self.mkl.gap_tol,
            max_outer: self.mkl.max_outer,
            armijo_c: self.mkl.armijo_c,
            backtrack: self.mkl.backtrack,
            max_backtracks: self.mkl.max_backtracks,
        }
    }

    pub fn features_dir(&self) -> PathBuf {
        self.data.features.clone().unwrap_or_else(|| self.output.join("features"))
    }

    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        if let Some(s) = seed {
            self.split.seed = s;
        }
        self
    }

    pub fn with_output(mut self, out: Option<PathBuf>) -> Self {
        if let Some(o) = out {
            self.output = o;
        }
        self
    }

    /// SHA-256 of the canonical JSON form of the effective configuration.
    /// The output directory is left out so relocated runs share a digest.
    pub fn digest(&self) -> String {
        let mut c = self.clone();
        c.output = PathBuf::new();
        let json = serde_json::to_string(&c).expect("config serializes");
        let hash = Sha256::digest(json.as_bytes());
        hash.iter().map(|b| format!("{b:02x}")).collect()
    }
}
