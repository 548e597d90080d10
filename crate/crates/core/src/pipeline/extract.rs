//! Batch feature extraction over an image directory.

use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::config::PipelineConfig;
use super::manifest::{default_derived, extractor_role, CodecInfo, CueManifest, ExtractionFailure, SetEntry, MANIFEST_VERSION};
use crate::dataset::FeatureSet;
use crate::error::{Error, Result};
use crate::features::{Extractor, RasterImage};

const IMAGE_EXTENSIONS: [&str; 2] = ["png", "bmp"];

/// Image files in `dir` sorted by sample id (the file stem).
pub fn list_images(dir: &Path) -> Result<Vec<(String, PathBuf)>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
        if !ext.is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.as_str())) {
            continue;
        }
        let id = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
        files.push((id, path));
    }
    files.sort();
    if let Some(w) = files.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::validation(format!("two images share the sample id `{}`", w[0].0)));
    }
    Ok(files)
}

fn extract_one(path: &Path, extractors: &[Extractor]) -> Result<Vec<Vec<f64>>> {
    let img = RasterImage::load(path)?;
    img.require_size(8, "feature extraction")?;
    extractors.iter().map(|e| e.extract(&img)).collect()
}

/// Run every extractor on every image. Undecodable or unsuitable images are
/// reported as failures and skipped; the output is ordered by sample id.
pub fn extract_images(dir: &Path, extractors: &[Extractor]) -> Result<(Vec<FeatureSet>, Vec<ExtractionFailure>)> {
    let files = list_images(dir)?;
    let results: Vec<Result<Vec<Vec<f64>>>> = files.par_iter().map(|(_, p)| extract_one(p, extractors)).collect();

    let mut ids = Vec::new();
    let mut rows: Vec<Vec<Vec<f64>>> = Vec::new();
    let mut failures = Vec::new();
    for ((id, path), res) in files.iter().zip(results) {
        match res {
            Ok(r) => {
                ids.push(id.clone());
                rows.push(r);
            }
            Err(e) => failures.push(ExtractionFailure {
                file: path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default(),
                error: e.to_string(),
            }),
        }
    }
    let sets = extractors
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let m = DMatrix::from_fn(e.dim(), ids.len(), |i, j| rows[j][k][i]);
            FeatureSet::new(e.name(), m, ids.clone(), e.feature_names())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((sets, failures))
}

/// `extract`: write one CSV per extractor and the cue manifest into the
/// features directory.
pub fn run_extract(cfg: &PipelineConfig) -> Result<CueManifest> {
    let images = cfg
        .data
        .images
        .as_ref()
        .ok_or_else(|| Error::validation("config has no data.images directory"))?;
    let out = cfg.features_dir();
    std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    let extractors = &cfg.extract.extractors;
    let (sets, failures) = extract_images(images, extractors)?;
    if sets.first().is_some_and(|s| s.is_empty()) {
        return Err(Error::validation(format!("no image in {} could be processed", images.display())));
    }

    let mut entries = Vec::new();
    for (e, set) in extractors.iter().zip(&sets) {
        let file = format!("{}.csv", e.name());
        set.write_csv(out.join(&file))?;
        let (cue, kind) = extractor_role(*e);
        entries.push(SetEntry {
            name: e.name().into(),
            cue,
            kind: kind.into(),
            file,
            dim: set.dim(),
        });
    }
    for imp in &cfg.data.imported {
        let set = FeatureSet::load_csv(&imp.path)?;
        entries.push(SetEntry {
            name: imp.name.clone(),
            cue: Some(imp.cue),
            kind: imp.kind.clone().unwrap_or_else(|| imp.name.clone()),
            file: imp.path.to_string_lossy().into_owned(),
            dim: set.dim(),
        });
    }
    let manifest = CueManifest {
        version: MANIFEST_VERSION,
        codec: CodecInfo::default(),
        sets: entries,
        derived: default_derived(extractors, cfg.extract.familiarity_k, cfg.extract.lof_k),
        failures,
    };
    manifest.validate()?;
    manifest.save(&out)?;
    Ok(manifest)
}
