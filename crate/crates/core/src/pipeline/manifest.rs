//! Cue manifest: which feature set feeds which cue and fusion type.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{Cue, CueGroup, Extractor, JPEG_QUALITY};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_VERSION: u32 = 1;

/// A feature set stored as CSV.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetEntry {
    pub name: String,
    /// `None` marks a support set that only feeds derived features.
    pub cue: Option<Cue>,
    /// Fusion type; sets of the same type within a cue are DCA-fused.
    pub kind: String,
    /// CSV path, relative to the manifest directory unless absolute.
    pub file: String,
    pub dim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivedMethod {
    /// Mean chi-squared distance to the k nearest reference samples.
    Familiarity,
    /// Local outlier factor against the reference samples.
    Lof,
}

/// A one-dimensional set computed against the training partition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivedEntry {
    pub name: String,
    pub cue: Cue,
    pub kind: String,
    pub method: DerivedMethod,
    pub source: String,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodecInfo {
    pub format: String,
    pub encoder: String,
    pub quality: u8,
    pub color: String,
}

impl Default for CodecInfo {
    fn default() -> Self {
        Self {
            format: "jpeg".into(),
            encoder: "image-rs baseline JpegEncoder".into(),
            quality: JPEG_QUALITY,
            color: "L8".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionFailure {
    pub file: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CueManifest {
    pub version: u32,
    pub codec: CodecInfo,
    pub sets: Vec<SetEntry>,
    pub derived: Vec<DerivedEntry>,
    pub failures: Vec<ExtractionFailure>,
}

/// Cue and fusion type of each built-in extractor; `None` for support sets.
pub fn extractor_role(e: Extractor) -> (Option<Cue>, &'static str) {
    use Extractor::*;
    match e {
        Glcm | Haar | Lbp => (Some(Cue::Aesthetics), "texture"),
        ColorMoments | ColorCorrelogram => (Some(Cue::Aesthetics), "color"),
        Arousal => (Some(Cue::Aesthetics), "arousal"),
        EdgeHistogram | HuMoments => (Some(Cue::Aesthetics), "shape"),
        Complexity => (Some(Cue::Aesthetics), "complexity"),
        Hog => (Some(Cue::GeneralPreferences), "hog"),
        ColorHistogram => (None, "support"),
    }
}

/// Unusualness features derived from the extracted sets that are present.
pub fn default_derived(extracted: &[Extractor], familiarity_k: usize, lof_k: usize) -> Vec<DerivedEntry> {
    let mut out = Vec::new();
    let has = |e: Extractor| extracted.contains(&e);
    if has(Extractor::ColorHistogram) {
        out.push(DerivedEntry {
            name: "familiarity".into(),
            cue: Cue::Unusualness,
            kind: "familiarity".into(),
            method: DerivedMethod::Familiarity,
            source: Extractor::ColorHistogram.name().into(),
            k: familiarity_k,
        });
    }
    for (name, src) in [
        ("lof_color", Extractor::ColorHistogram),
        ("lof_texture", Extractor::Lbp),
        ("lof_edge", Extractor::EdgeHistogram),
    ] {
        if has(src) {
            out.push(DerivedEntry {
                name: name.into(),
                cue: Cue::Unusualness,
                kind: "lof".into(),
                method: DerivedMethod::Lof,
                source: src.name().into(),
                k: lof_k,
            });
        }
    }
    out
}

impl CueManifest {
    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let path = dir.as_ref().join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let m: CueManifest = serde_json::from_str(&text).map_err(|e| Error::Serde(format!("{}: {e}", path.display())))?;
        m.validate()?;
        Ok(m)
    }

    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let path = dir.as_ref().join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self)? + "\n";
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }

    /// Every name is unique, and every derived source exists.
    pub fn validate(&self) -> Result<()> {
        if self.version != MANIFEST_VERSION {
            return Err(Error::validation(format!(
                "manifest version {} is not supported (expected {MANIFEST_VERSION})",
                self.version
            )));
        }
        let mut names: Vec<&str> = self.sets.iter().map(|s| s.name.as_str()).collect();
        names.extend(self.derived.iter().map(|d| d.name.as_str()));
        let mut sorted = names.clone();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::validation(format!("feature set `{}` appears twice in the manifest", w[0])));
        }
        for d in &self.derived {
            if !self.sets.iter().any(|s| s.name == d.source) {
                return Err(Error::validation(format!(
                    "derived set `{}` needs source `{}`, which is not in the manifest",
                    d.name, d.source
                )));
            }
        }
        Ok(())
    }

    /// Feature-set names per cue, in cue order; each name appears once.
    pub fn cue_groups(&self) -> Vec<CueGroup> {
        Cue::ALL
            .iter()
            .map(|&cue| CueGroup {
                cue,
                feature_sets: self
                    .derived
                    .iter()
                    .filter(|d| d.cue == cue)
                    .map(|d| d.name.clone())
                    .chain(self.sets.iter().filter(|s| s.cue == Some(cue)).map(|s| s.name.clone()))
                    .collect(),
            })
            .filter(|g| !g.feature_sets.is_empty())
            .collect()
    }

    /// Fusion type of a cue-assigned set.
    pub fn kind_of(&self, name: &str) -> Option<&str> {
        self.sets
            .iter()
            .find(|s| s.name == name)
            .map(|s| s.kind.as_str())
            .or_else(|| self.derived.iter().find(|d| d.name == name).map(|d| d.kind.as_str()))
    }
}
