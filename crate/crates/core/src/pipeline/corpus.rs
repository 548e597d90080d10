//! Labeled feature corpus: manifest sets aligned to the label file, plus the
//! train-referenced unusualness features.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::PipelineConfig;
use super::manifest::{CueManifest, DerivedEntry, DerivedMethod};
use crate::dataset::{split_indices, FeatureSet, LabelVector};
use crate::error::{Error, Result};
use crate::features::{familiarity, lof_query, Cue};

/// All sets of a manifest restricted to the labeled samples.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub manifest: CueManifest,
    pub labels: LabelVector,
    pub sets: BTreeMap<String, FeatureSet>,
}

/// Sets of one fusion type inside a cue, in manifest order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeLayout {
    pub kind: String,
    pub sets: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CueLayout {
    pub cue: Cue,
    pub types: Vec<TypeLayout>,
}

/// Group the manifest's cue sets by cue, then by fusion type.
pub fn cue_layout(manifest: &CueManifest) -> Vec<CueLayout> {
    manifest
        .cue_groups()
        .into_iter()
        .map(|g| {
            let mut types: Vec<TypeLayout> = Vec::new();
            for name in g.feature_sets {
                let kind = manifest.kind_of(&name).unwrap_or(&name).to_string();
                match types.iter_mut().find(|t| t.kind == kind) {
                    Some(t) => t.sets.push(name),
                    None => types.push(TypeLayout { kind, sets: vec![name] }),
                }
            }
            CueLayout { cue: g.cue, types }
        })
        .collect()
}

fn resolve(dir: &Path, file: &str) -> PathBuf {
    let p = PathBuf::from(file);
    if p.is_absolute() {
        p
    } else {
        dir.join(p)
    }
}

impl Corpus {
    /// Load the manifest and feature CSVs from the configured features
    /// directory and align them with the label file.
    pub fn load(cfg: &PipelineConfig) -> Result<Corpus> {
        let dir = cfg.features_dir();
        let manifest = CueManifest::load(&dir)?;
        let labels = LabelVector::load_csv(&cfg.data.labels)?;
        let mut sets = Vec::with_capacity(manifest.sets.len());
        for entry in &manifest.sets {
            let set = FeatureSet::load_csv(resolve(&dir, &entry.file))?.renamed(entry.name.clone());
            if set.dim() != entry.dim {
                return Err(Error::validation(format!(
                    "`{}` has {} features, manifest declares {}",
                    entry.name,
                    set.dim(),
                    entry.dim
                )));
            }
            sets.push(set);
        }
        Corpus::from_parts(manifest, sets, labels)
    }

    /// Align sets with the labels. Labeled samples whose image failed
    /// extraction are dropped; any other missing sample is an error.
    pub fn from_parts(manifest: CueManifest, sets: Vec<FeatureSet>, labels: LabelVector) -> Result<Corpus> {
        manifest.validate()?;
        let failed: Vec<&str> = manifest
            .failures
            .iter()
            .map(|f| Path::new(&f.file).file_stem().and_then(|s| s.to_str()).unwrap_or(""))
            .collect();
        let keep: Vec<String> = labels
            .sample_ids()
            .iter()
            .filter(|id| !failed.contains(&id.as_str()))
            .cloned()
            .collect();
        let labels = labels.select_ids(&keep)?;
        let mut map = BTreeMap::new();
        for set in sets {
            let aligned = set.select_ids(&keep).map_err(|e| e.in_stage(&format!("aligning `{}` with labels", set.name())))?;
            map.insert(set.name().to_string(), aligned);
        }
        for entry in &manifest.sets {
            if !map.contains_key(&entry.name) {
                return Err(Error::validation(format!("manifest set `{}` was not loaded", entry.name)));
            }
        }
        labels.require_both_classes()?;
        Ok(Corpus { manifest, labels, sets: map })
    }

    pub fn sample_ids(&self) -> &[String] {
        self.labels.sample_ids()
    }

    /// Seeded stratified `(train_ids, test_ids)`.
    pub fn split(&self, train_fraction: f64, seed: u64) -> Result<(Vec<String>, Vec<String>)> {
        let (tr, te) = split_indices(&self.labels, train_fraction, seed)?;
        let ids = self.sample_ids();
        Ok((tr.iter().map(|&i| ids[i].clone()).collect(), te.iter().map(|&i| ids[i].clone()).collect()))
    }

    pub fn set(&self, name: &str) -> Result<&FeatureSet> {
        self.sets
            .get(name)
            .ok_or_else(|| Error::validation(format!("feature set `{name}` is missing")))
    }

    /// Reference data for every derived entry, taken from the training ids.
    pub fn derived_references(&self, train_ids: &[String]) -> Result<Vec<DerivedReference>> {
        self.manifest
            .derived
            .iter()
            .map(|entry| {
                Ok(DerivedReference {
                    entry: entry.clone(),
                    reference: self.set(&entry.source)?.select_ids(train_ids)?,
                })
            })
            .collect()
    }

    /// Raw cue sets (derived included) for `ids`, keyed by name.
    pub fn cue_sets(&self, refs: &[DerivedReference], ids: &[String]) -> Result<BTreeMap<String, FeatureSet>> {
        let mut out = BTreeMap::new();
        for entry in &self.manifest.sets {
            if entry.cue.is_some() {
                out.insert(entry.name.clone(), self.set(&entry.name)?.select_ids(ids)?);
            }
        }
        for r in refs {
            let source = self.set(&r.entry.source)?.select_ids(ids)?;
            out.insert(r.entry.name.clone(), r.compute(&source)?);
        }
        Ok(out)
    }
}

/// A derived feature together with the training samples it is measured against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedReference {
    pub entry: DerivedEntry,
    pub reference: FeatureSet,
}

impl DerivedReference {
    /// One-row set of scores for the columns of `source`.
    pub fn compute(&self, source: &FeatureSet) -> Result<FeatureSet> {
        let scores = match self.entry.method {
            DerivedMethod::Familiarity => familiarity(source, &self.reference, self.entry.k),
            DerivedMethod::Lof => lof_query(source, &self.reference, self.entry.k),
        }
        .map_err(|e| e.in_stage(&format!("derived feature `{}`", self.entry.name)))?;
        FeatureSet::new(
            self.entry.name.clone(),
            nalgebra::DMatrix::from_row_slice(1, scores.len(), &scores),
            source.sample_ids().to_vec(),
            vec![self.entry.name.clone()],
        )
    }
}
