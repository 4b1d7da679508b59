//! Split-gain and permutation importance, reported per source feature.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::encode::binary_labels;
use super::metrics::DECISION_THRESHOLD;
use super::{GbdtError, GbdtModel, Matrix};
use crate::pairgen::PairDataset;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceRow {
    pub feature: String,
    /// Average split gain, or mean accuracy drop.
    pub score: f64,
    /// Gain: share of the summed scores. MDA: standard deviation of the drop.
    pub secondary: f64,
    /// Gain: number of splits. MDA: number of repeats.
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Importance {
    pub measure: String,
    /// One row per encoder block, in schema order.
    pub rows: Vec<ImportanceRow>,
}

impl Importance {
    pub fn get(&self, feature: &str) -> Option<&ImportanceRow> {
        self.rows.iter().find(|r| r.feature == feature)
    }

    /// Rows by descending score, ties by feature name.
    pub fn ranked(&self) -> Vec<&ImportanceRow> {
        let mut rows: Vec<&ImportanceRow> = self.rows.iter().collect();
        rows.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.feature.cmp(&b.feature)));
        rows
    }

    /// 1-based rank of `feature`.
    pub fn rank_of(&self, feature: &str) -> Option<usize> {
        self.ranked().iter().position(|r| r.feature == feature).map(|i| i + 1)
    }
}

/// Total recorded gain and split count per encoded column.
pub fn column_gain_totals(model: &GbdtModel) -> Vec<(f64, usize)> {
    let mut totals = vec![(0.0, 0); model.schema.n_columns()];
    for tree in &model.trees {
        for (column, gain) in tree.splits() {
            totals[column].0 += gain;
            totals[column].1 += 1;
        }
    }
    totals
}

/// Average split gain per source feature; columns of a one-hot block count
/// toward their feature.
pub fn gain_importance(model: &GbdtModel) -> Importance {
    let columns = column_gain_totals(model);
    let mut rows: Vec<ImportanceRow> = model
        .schema
        .blocks
        .iter()
        .zip(model.schema.block_ranges())
        .map(|(block, range)| {
            let (total, count) = columns[range].iter().fold((0.0, 0), |a, c| (a.0 + c.0, a.1 + c.1));
            ImportanceRow {
                feature: block.feature().to_string(),
                score: if count == 0 { 0.0 } else { total / count as f64 },
                secondary: 0.0,
                count,
            }
        })
        .collect();
    let sum: f64 = rows.iter().map(|r| r.score).sum();
    if sum > 0.0 {
        for r in &mut rows {
            r.secondary = r.score / sum;
        }
    }
    Importance { measure: "gain".into(), rows }
}

fn accuracy(model: &GbdtModel, x: &Matrix, y: &[f64]) -> Result<f64, GbdtError> {
    let probs = model.predict_matrix(x)?;
    let correct = probs
        .iter()
        .zip(y)
        .filter(|(&p, &t)| (p >= DECISION_THRESHOLD) == (t > 0.5))
        .count();
    Ok(correct as f64 / y.len() as f64)
}

/// Mean decrease in accuracy when all columns of one feature are permuted
/// jointly across rows. Each feature draws from its own seeded stream.
pub fn mda_importance(model: &GbdtModel, dataset: &PairDataset, repeats: usize, seed: u64) -> Result<Importance, GbdtError> {
    if dataset.is_empty() {
        return Err(GbdtError::EmptyDataset);
    }
    if repeats == 0 {
        return Err(GbdtError::InvalidParams("mda needs at least one repeat".into()));
    }
    let x = model.schema.encode_all(dataset);
    let y = binary_labels(dataset);
    let base = accuracy(model, &x, &y)?;
    let ranges = model.schema.block_ranges();
    let rows = ranges
        .par_iter()
        .enumerate()
        .map(|(b, range)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let mut drops = Vec::with_capacity(repeats);
            let mut permuted = x.clone();
            let mut order: Vec<usize> = (0..x.rows).collect();
            for _ in 0..repeats {
                order.shuffle(&mut rng);
                for (r, &src) in order.iter().enumerate() {
                    for c in range.clone() {
                        permuted.set(r, c, x.get(src, c));
                    }
                }
                drops.push(base - accuracy(model, &permuted, &y)?);
            }
            let mean = drops.iter().sum::<f64>() / repeats as f64;
            let var = drops.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / repeats as f64;
            Ok(ImportanceRow {
                feature: model.schema.blocks[b].feature().to_string(),
                score: mean,
                secondary: var.sqrt(),
                count: repeats,
            })
        })
        .collect::<Result<Vec<_>, GbdtError>>()?;
    Ok(Importance { measure: "mda".into(), rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gbdt::encode::{Block, EncoderSchema};
    use crate::gbdt::{Node, Tree};

    fn model(blocks: Vec<Block>, trees: Vec<Tree>) -> GbdtModel {
        let schema = EncoderSchema { blocks, lemma_top_k: 0 };
        let x = Matrix::from_rows(&[vec![0.0; schema.n_columns()], vec![0.0; schema.n_columns()]]);
        let mut m = crate::gbdt::train(&x, &[0.0, 1.0], &schema, &crate::gbdt::HyperParams::default(), 0).unwrap();
        m.trees = trees;
        m
    }

    fn stump(column: usize, gain: f64) -> Tree {
        Tree {
            shrinkage: 1.0,
            nodes: vec![
                Node::Split { column, threshold: 0.5, gain, left: 1, right: 2 },
                Node::Leaf { weight: -1.0 },
                Node::Leaf { weight: 1.0 },
            ],
        }
    }

    #[test]
    fn one_hot_columns_aggregate_to_their_feature() {
        let blocks = vec![
            Block::OneHot { feature: "a".into(), categories: vec!["x".into(), "y".into()] },
            Block::Numeric { feature: "b".into() },
        ];
        let m = model(blocks, vec![stump(0, 2.0), stump(1, 4.0)]);
        let imp = gain_importance(&m);
        let a = imp.get("a").unwrap();
        assert_eq!((a.score, a.count, a.secondary), (3.0, 2, 1.0));
        assert_eq!(imp.get("b").unwrap().score, 0.0);
        let totals = column_gain_totals(&m);
        assert_eq!(totals[0].0 + totals[1].0, a.score * a.count as f64);
    }

    #[test]
    fn constant_column_has_zero_mda() {
        let mut ds = PairDataset::default();
        for i in 0..20 {
            let mut e = crate::synth::example_with(|f| {
                f.t_a_dist = i;
                f.n_phrase_len = 3;
            });
            if i >= 10 {
                e.label = crate::pairgen::PairLabel::Bridging;
            }
            ds.examples.push(e);
        }
        let enc = crate::gbdt::encode(&ds, None, 10).unwrap();
        let hp = crate::gbdt::HyperParams { n_rounds: 10, min_child_hessian: 0.0, ..Default::default() };
        let m = crate::gbdt::train(&enc.x, &enc.y, &enc.schema, &hp, 0).unwrap();
        let mda = mda_importance(&m, &ds, 5, 11).unwrap();
        assert_eq!(mda.get("n_phrase_len").unwrap().score, 0.0);
        assert!(mda.get("t_a_dist").unwrap().score > 0.2);
        assert_eq!(mda, mda_importance(&m, &ds, 5, 11).unwrap());
        let gain = gain_importance(&m);
        assert_eq!(gain.rank_of("t_a_dist"), Some(1));
        assert!((gain.get("t_a_dist").unwrap().secondary - 1.0).abs() < 1e-12);
    }
}
