//! Binary classification metrics: accuracy, ROC curve and AUC.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{Label, LabelVector};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn from_predictions(predicted: &[Label], truth: &[Label]) -> Result<Self> {
        if predicted.len() != truth.len() {
            return Err(Error::validation(format!(
                "{} predictions for {} labels",
                predicted.len(),
                truth.len()
            )));
        }
        let mut c = ConfusionCounts::default();
        for (p, t) in predicted.iter().zip(truth) {
            match (p, t) {
                (Label::Positive, Label::Positive) => c.tp += 1,
                (Label::Negative, Label::Negative) => c.tn += 1,
                (Label::Positive, Label::Negative) => c.fp += 1,
                (Label::Negative, Label::Positive) => c.fn_ += 1,
            }
        }
        Ok(c)
    }

    pub fn total(&self) -> usize {
        self.tp + self.tn + self.fp + self.fn_
    }
}

/// `(TP + TN) / (TP + TN + FP + FN)`.
pub fn accuracy(counts: &ConfusionCounts) -> Result<f64> {
    let total = counts.total();
    if total == 0 {
        return Err(Error::validation("accuracy of an empty evaluation"));
    }
    Ok((counts.tp + counts.tn) as f64 / total as f64)
}

/// ROC vertices from `(0, 0)` to `(1, 1)` and the trapezoidal area under them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    /// `(fpr, tpr)` pairs.
    pub points: Vec<(f64, f64)>,
    pub auc: f64,
}

impl RocCurve {
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("fpr,tpr\n");
        for (f, t) in &self.points {
            let _ = writeln!(out, "{f},{t}");
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv_string()).map_err(|e| Error::io(path, e))
    }
}

/// ROC curve with one threshold per distinct score. Tied scores form a single
/// step, which yields a diagonal segment when the tie spans both classes.
pub fn roc(scores: &[f64], labels: &LabelVector) -> Result<RocCurve> {
    roc_labels(scores, labels.labels())
}

pub fn roc_labels(scores: &[f64], labels: &[Label]) -> Result<RocCurve> {
    if scores.len() != labels.len() {
        return Err(Error::validation(format!(
            "{} scores for {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::validation("scores must be finite"));
    }
    let pos = labels.iter().filter(|&&l| l == Label::Positive).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::validation("ROC needs both classes"));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut auc = 0.0;
    let mut k = 0;
    while k < order.len() {
        let s = scores[order[k]];
        while k < order.len() && scores[order[k]] == s {
            match labels[order[k]] {
                Label::Positive => tp += 1,
                Label::Negative => fp += 1,
            }
            k += 1;
        }
        let next = (fp as f64 / neg as f64, tp as f64 / pos as f64);
        let prev = *points.last().unwrap();
        auc += (next.0 - prev.0) * (next.1 + prev.1) / 2.0;
        points.push(next);
    }
    Ok(RocCurve { points, auc })
}

/// Accuracy, AUC, ROC and confusion counts for one evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub accuracy: f64,
    pub auc: f64,
    pub counts: ConfusionCounts,
    #[serde(skip)]
    pub roc: Option<RocCurve>,
}

pub fn evaluate(predicted: &[Label], scores: &[f64], truth: &LabelVector) -> Result<EvaluationReport> {
    let counts = ConfusionCounts::from_predictions(predicted, truth.labels())?;
    let curve = roc(scores, truth)?;
    Ok(EvaluationReport {
        accuracy: accuracy(&counts)?,
        auc: curve.auc,
        counts,
        roc: Some(curve),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn labels(signs: &[f64]) -> LabelVector {
        LabelVector::from_signs(signs).unwrap()
    }

    /// `P(s⁺ > s⁻) + ½ P(s⁺ = s⁻)` by enumerating all pairs.
    fn pair_auc(scores: &[f64], l: &[Label]) -> f64 {
        let mut num = 0.0;
        let mut pairs = 0.0;
        for i in 0..scores.len() {
            for j in 0..scores.len() {
                if l[i] == Label::Positive && l[j] == Label::Negative {
                    pairs += 1.0;
                    if scores[i] > scores[j] {
                        num += 1.0;
                    } else if scores[i] == scores[j] {
                        num += 0.5;
                    }
                }
            }
        }
        num / pairs
    }

    #[test]
    fn accuracy_plug_ins() {
        let all = ConfusionCounts { tp: 9, tn: 1, fp: 0, fn_: 0 };
        assert_eq!(accuracy(&all).unwrap(), 1.0);
        let half = ConfusionCounts { tp: 1, tn: 1, fp: 1, fn_: 1 };
        assert_eq!(accuracy(&half).unwrap(), 0.5);
        assert!(accuracy(&ConfusionCounts::default()).is_err());
    }

    #[test]
    fn counts_match_tally() {
        use Label::*;
        let p = [Positive, Positive, Negative, Negative, Positive];
        let t = [Positive, Negative, Negative, Positive, Positive];
        let c = ConfusionCounts::from_predictions(&p, &t).unwrap();
        assert_eq!(c, ConfusionCounts { tp: 2, tn: 1, fp: 1, fn_: 1 });
    }

    #[test]
    fn separating_and_tied_scores() {
        let l = labels(&[1.0, 1.0, -1.0, -1.0]);
        assert_eq!(roc(&[0.9, 0.8, 0.1, 0.2], &l).unwrap().auc, 1.0);
        let tied = roc(&[0.5; 4], &l).unwrap();
        assert_eq!(tied.auc, 0.5);
        assert_eq!(tied.points, vec![(0.0, 0.0), (1.0, 1.0)]);
        assert!(roc(&[0.1, 0.2], &labels(&[1.0, 1.0])).is_err());
    }

    #[test]
    fn report_on_twenty_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let signs: Vec<f64> = (0..20).map(|i| if i < 9 { 1.0 } else { -1.0 }).collect();
        let truth = labels(&signs);
        let scores: Vec<f64> = signs.iter().map(|s| s * 0.3 + rng.random_range(-0.5..0.5)).collect();
        let pred: Vec<Label> = scores.iter().map(|&s| Label::from_score(s)).collect();
        let r = evaluate(&pred, &scores, &truth).unwrap();
        let mut tally = [0usize; 4];
        for i in 0..20 {
            let k = match (scores[i] >= 0.0, signs[i] > 0.0) {
                (true, true) => 0,
                (false, false) => 1,
                (true, false) => 2,
                (false, true) => 3,
            };
            tally[k] += 1;
        }
        assert_eq!([r.counts.tp, r.counts.tn, r.counts.fp, r.counts.fn_], tally);
        assert_eq!(r.accuracy, (tally[0] + tally[1]) as f64 / 20.0);
        assert!((r.auc - pair_auc(&scores, truth.labels())).abs() <= 1e-12);

        let inv_pred: Vec<Label> = pred.iter().map(|l| l.flipped()).collect();
        let inv_scores: Vec<f64> = scores.iter().map(|s| -s).collect();
        let inv = evaluate(&inv_pred, &inv_scores, &truth).unwrap();
        assert!((inv.accuracy - (1.0 - r.accuracy)).abs() < 1e-12);
        assert!((inv.auc - (1.0 - r.auc)).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn auc_equals_pair_count(seed in 0u64..10_000, n in 2usize..120, levels in 2u32..50) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut signs: Vec<f64> = (0..n).map(|_| if rng.random_bool(0.4) { 1.0 } else { -1.0 }).collect();
            signs[0] = 1.0;
            signs[1] = -1.0;
            // coarse levels force ties
            let scores: Vec<f64> = (0..n).map(|_| rng.random_range(0..levels) as f64 / levels as f64).collect();
            let l = labels(&signs);
            let curve = roc(&scores, &l).unwrap();
            prop_assert!((curve.auc - pair_auc(&scores, l.labels())).abs() <= 1e-12);
            for w in curve.points.windows(2) {
                prop_assert!(w[1].0 >= w[0].0 && w[1].1 >= w[0].1);
            }
            prop_assert_eq!(*curve.points.last().unwrap(), (1.0, 1.0));
            let neg: Vec<f64> = scores.iter().map(|s| -s).collect();
            prop_assert!((roc(&neg, &l).unwrap().auc - (1.0 - curve.auc)).abs() <= 1e-12);
            let warped: Vec<f64> = scores.iter().map(|s| (3.0 * s).exp() - 7.0).collect();
            prop_assert_eq!(roc(&warped, &l).unwrap(), curve);
        }
    }
}
