//! Per-cue feature assembly: normalize, fuse same-type sets, concatenate types.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::corpus::CueLayout;
use crate::dataset::{FeatureSet, LabelVector, Normalizer};
use crate::error::{Error, Result};
use crate::features::Cue;
use crate::fusion::{fit_mdca, FusionMode, MdcaPlan};

/// One fusion type inside a cue. `plan` is `None` for a single set, which
/// passes through after normalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeFusion {
    pub kind: String,
    pub sets: Vec<String>,
    pub plan: Option<MdcaPlan>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CueFusion {
    pub cue: Cue,
    pub types: Vec<TypeFusion>,
}

/// Everything needed to turn raw cue sets into fused cue groups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionPlan {
    pub mode: FusionMode,
    /// Training-partition standardization per raw set.
    pub normalizers: BTreeMap<String, Normalizer>,
    pub cues: Vec<CueFusion>,
}

fn lookup<'a>(sets: &'a BTreeMap<String, FeatureSet>, name: &str) -> Result<&'a FeatureSet> {
    sets.get(name)
        .ok_or_else(|| Error::validation(format!("fusion plan needs feature set `{name}`")))
}

impl FusionPlan {
    /// Fit normalizers and MDCA chains on training sets. Returns the plan
    /// and the fused training group of each cue (named after the cue).
    pub fn fit(
        layout: &[CueLayout],
        sets: &BTreeMap<String, FeatureSet>,
        labels: &LabelVector,
        mode: FusionMode,
    ) -> Result<(FusionPlan, Vec<FeatureSet>)> {
        let mut normalizers = BTreeMap::new();
        let mut cues = Vec::with_capacity(layout.len());
        let mut groups = Vec::with_capacity(layout.len());
        for cl in layout {
            let mut types = Vec::with_capacity(cl.types.len());
            let mut parts = Vec::with_capacity(cl.types.len());
            for t in &cl.types {
                let mut normalized = Vec::with_capacity(t.sets.len());
                for name in &t.sets {
                    let raw = lookup(sets, name)?;
                    labels.check_aligned(raw)?;
                    let norm = Normalizer::fit(raw)?;
                    normalized.push(norm.apply(raw)?);
                    normalizers.insert(name.clone(), norm);
                }
                let (plan, fused) = if normalized.len() == 1 {
                    (None, normalized.pop().expect("one set"))
                } else {
                    let (plan, fused) = fit_mdca(&normalized, labels, mode).map_err(|e| match e {
                        Error::DegenerateFusion(m) => {
                            Error::DegenerateFusion(format!("type `{}` of cue {}: {m}", t.kind, cl.cue))
                        }
                        other => other,
                    })?;
                    (Some(plan), fused)
                };
                types.push(TypeFusion {
                    kind: t.kind.clone(),
                    sets: t.sets.clone(),
                    plan,
                });
                parts.push(fused);
            }
            let refs: Vec<&FeatureSet> = parts.iter().collect();
            groups.push(FeatureSet::vstack(cl.cue.as_str(), &refs)?);
            cues.push(CueFusion { cue: cl.cue, types });
        }
        Ok((FusionPlan { mode, normalizers, cues }, groups))
    }

    /// Replay on new samples; every set named in the plan must be present.
    pub fn apply(&self, sets: &BTreeMap<String, FeatureSet>) -> Result<Vec<FeatureSet>> {
        let mut groups = Vec::with_capacity(self.cues.len());
        for cf in &self.cues {
            let mut parts = Vec::with_capacity(cf.types.len());
            for t in &cf.types {
                let mut normalized = Vec::with_capacity(t.sets.len());
                for name in &t.sets {
                    let norm = self
                        .normalizers
                        .get(name)
                        .ok_or_else(|| Error::validation(format!("fusion plan has no normalizer for `{name}`")))?;
                    normalized.push(norm.apply(lookup(sets, name)?)?);
                }
                parts.push(match &t.plan {
                    None => normalized.pop().ok_or_else(|| Error::validation("empty fusion type"))?,
                    Some(plan) => plan.replay(&normalized)?,
                });
            }
            let refs: Vec<&FeatureSet> = parts.iter().collect();
            groups.push(FeatureSet::vstack(cf.cue.as_str(), &refs)?);
        }
        Ok(groups)
    }

    pub fn cue_order(&self) -> Vec<Cue> {
        self.cues.iter().map(|c| c.cue).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::corpus::TypeLayout;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fixture(n: usize, seed: u64) -> (BTreeMap<String, FeatureSet>, LabelVector) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let signs: Vec<f64> = (0..n).map(|i| if i % 3 == 0 { 1.0 } else { -1.0 }).collect();
        let ids: Vec<String> = (0..n).map(|i| format!("s{i:03}")).collect();
        let mut sets = BTreeMap::new();
        for (name, dim) in [("glcm", 5), ("haar", 4), ("lbp", 6), ("arousal", 1), ("hog", 7)] {
            let m = DMatrix::from_fn(dim, n, |i, j| signs[j] * (i as f64 + 1.0) * 0.3 + rng.random_range(-1.0..1.0));
            sets.insert(name.to_string(), FeatureSet::from_matrix(name, m, ids.clone()).unwrap());
        }
        (sets, LabelVector::new(signs.iter().map(|&s| crate::dataset::Label::from_score(s)).collect(), ids).unwrap())
    }

    fn layout() -> Vec<CueLayout> {
        vec![
            CueLayout {
                cue: Cue::Aesthetics,
                types: vec![
                    TypeLayout {
                        kind: "texture".into(),
                        sets: vec!["glcm".into(), "haar".into(), "lbp".into()],
                    },
                    TypeLayout {
                        kind: "arousal".into(),
                        sets: vec!["arousal".into()],
                    },
                ],
            },
            CueLayout {
                cue: Cue::GeneralPreferences,
                types: vec![TypeLayout {
                    kind: "hog".into(),
                    sets: vec!["hog".into()],
                }],
            },
        ]
    }

    #[test]
    fn texture_chain_and_pass_through() {
        let (sets, labels) = fixture(40, 1);
        let (plan, groups) = FusionPlan::fit(&layout(), &sets, &labels, FusionMode::Concat).unwrap();
        let texture = &plan.cues[0].types[0];
        assert_eq!(texture.plan.as_ref().unwrap().steps.len(), 2);
        assert!(plan.cues[0].types[1].plan.is_none());
        // binary labels: each DCA step yields r = 1, concatenated to 2
        assert_eq!(groups[0].dim(), 2 + 1);
        assert_eq!(groups[1].dim(), 7);
        let hog = plan.normalizers["hog"].apply(&sets["hog"]).unwrap();
        assert_eq!(groups[1].values(), hog.values());
    }

    #[test]
    fn replay_reproduces_training_groups() {
        let (sets, labels) = fixture(50, 2);
        let (plan, groups) = FusionPlan::fit(&layout(), &sets, &labels, FusionMode::Concat).unwrap();
        let replayed = plan.apply(&sets).unwrap();
        for (a, b) in groups.iter().zip(&replayed) {
            assert_eq!(a.sample_ids(), b.sample_ids());
            assert!((a.values() - b.values()).abs().max() <= 1e-12);
        }
    }

    #[test]
    fn missing_set_is_named() {
        let (mut sets, labels) = fixture(30, 3);
        let (plan, _) = FusionPlan::fit(&layout(), &sets, &labels, FusionMode::Concat).unwrap();
        sets.remove("haar");
        let err = plan.apply(&sets).unwrap_err().to_string();
        assert!(err.contains("haar"), "{err}");
    }

    #[test]
    fn degenerate_type_is_named() {
        let (mut sets, labels) = fixture(30, 4);
        let ids = sets["lbp"].sample_ids().to_vec();
        sets.insert("lbp".into(), FeatureSet::from_matrix("lbp", DMatrix::from_element(6, 30, 0.5), ids).unwrap());
        let err = FusionPlan::fit(&layout(), &sets, &labels, FusionMode::Concat).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("texture"), "{err}");
    }
}
