//! Positive-class metrics and the random baseline.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::encode::binary_labels;
use super::{GbdtError, GbdtModel};
use crate::pairgen::PairDataset;

pub const DECISION_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Metrics {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Metrics {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize, tn: usize) -> Self {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Metrics { tp, fp, fn_, tn, precision, recall, f1 }
    }

    pub fn accuracy(&self) -> f64 {
        let total = self.tp + self.fp + self.fn_ + self.tn;
        if total == 0 {
            0.0
        } else {
            (self.tp + self.tn) as f64 / total as f64
        }
    }
}

pub fn metrics_from_predictions(gold: &[bool], predicted: &[bool]) -> Metrics {
    let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
    for (&g, &p) in gold.iter().zip(predicted) {
        match (g, p) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (true, false) => fn_ += 1,
            (false, false) => tn += 1,
        }
    }
    Metrics::from_counts(tp, fp, fn_, tn)
}

/// Metrics at threshold 0.5 against the dataset's gold labels.
pub fn evaluate(model: &GbdtModel, dataset: &PairDataset) -> Result<Metrics, GbdtError> {
    if dataset.is_empty() {
        return Ok(Metrics::default());
    }
    let x = model.schema.encode_all(dataset);
    let probs = model.predict_matrix(&x)?;
    let gold: Vec<bool> = binary_labels(dataset).iter().map(|&y| y > 0.5).collect();
    let predicted: Vec<bool> = probs.iter().map(|&p| p >= DECISION_THRESHOLD).collect();
    Ok(metrics_from_predictions(&gold, &predicted))
}

/// Label each example positive with probability `p`; counts and scores are
/// averaged over `runs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineMetrics {
    pub p: f64,
    pub runs: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub per_run_f1_min: f64,
    pub per_run_f1_max: f64,
}

pub fn random_baseline(dataset: &PairDataset, p: f64, runs: usize, seed: u64) -> Result<BaselineMetrics, GbdtError> {
    if dataset.is_empty() {
        return Err(GbdtError::EmptyDataset);
    }
    if !(0.0..=1.0).contains(&p) || runs == 0 {
        return Err(GbdtError::InvalidParams(format!("baseline needs p in [0,1] and runs >= 1, got p={p} runs={runs}")));
    }
    let gold: Vec<bool> = binary_labels(dataset).iter().map(|&y| y > 0.5).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sums = (0.0, 0.0, 0.0);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for _ in 0..runs {
        let predicted: Vec<bool> = gold.iter().map(|_| rng.gen::<f64>() < p).collect();
        let m = metrics_from_predictions(&gold, &predicted);
        sums.0 += m.precision;
        sums.1 += m.recall;
        sums.2 += m.f1;
        lo = lo.min(m.f1);
        hi = hi.max(m.f1);
    }
    let n = runs as f64;
    Ok(BaselineMetrics {
        p,
        runs,
        precision: sums.0 / n,
        recall: sums.1 / n,
        f1: sums.2 / n,
        per_run_f1_min: lo,
        per_run_f1_max: hi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pairgen::PairLabel;
    use crate::synth::example_with;
    use proptest::prelude::*;

    fn dataset(labels: &[PairLabel]) -> PairDataset {
        PairDataset {
            provenance: Default::default(),
            examples: labels
                .iter()
                .map(|&l| {
                    let mut e = example_with(|_| {});
                    e.label = l;
                    e
                })
                .collect(),
        }
    }

    #[test]
    fn perfect_and_degenerate() {
        let m = metrics_from_predictions(&[true, false, true], &[true, false, true]);
        assert_eq!((m.precision, m.recall, m.f1), (1.0, 1.0, 1.0));
        let m = metrics_from_predictions(&[true, false], &[false, false]);
        assert_eq!((m.precision, m.recall, m.f1), (0.0, 0.0, 0.0));
        assert_eq!(m.fn_, 1);
    }

    #[test]
    fn baseline_extremes() {
        let labels = [PairLabel::Bridging, PairLabel::Coref, PairLabel::None, PairLabel::None];
        let ds = dataset(&labels);
        let always = random_baseline(&ds, 1.0, 3, 1).unwrap();
        assert_eq!(always.recall, 1.0);
        assert_eq!(always.precision, 0.25);
        let never = random_baseline(&ds, 0.0, 3, 1).unwrap();
        assert_eq!(never.f1, 0.0);
    }

    #[test]
    fn baseline_is_seeded() {
        let labels: Vec<PairLabel> = (0..90)
            .map(|i| [PairLabel::Bridging, PairLabel::Coref, PairLabel::None][i % 3])
            .collect();
        let ds = dataset(&labels);
        assert_eq!(random_baseline(&ds, 1.0 / 3.0, 5, 4).unwrap(), random_baseline(&ds, 1.0 / 3.0, 5, 4).unwrap());
    }

    proptest! {
        #[test]
        fn metrics_stay_in_unit_interval(pairs in proptest::collection::vec((any::<bool>(), any::<bool>()), 0..60)) {
            let (gold, pred): (Vec<bool>, Vec<bool>) = pairs.into_iter().unzip();
            let m = metrics_from_predictions(&gold, &pred);
            for v in [m.precision, m.recall, m.f1, m.accuracy()] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            if m.precision + m.recall > 0.0 {
                let h = 2.0 * m.precision * m.recall / (m.precision + m.recall);
                prop_assert!((m.f1 - h).abs() < 1e-12);
            }
        }
    }
}
