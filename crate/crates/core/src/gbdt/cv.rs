//! Stratified k-fold grid search.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::encode::{encode, EncoderSchema};
use super::metrics::{metrics_from_predictions, DECISION_THRESHOLD};
use super::{train, GbdtError, HyperParams, ParamGrid};
use crate::pairgen::{PairDataset, PairLabel};

/// Validation folds stratified by pair label. Every index lands in exactly
/// one fold; each fold is sorted.
pub fn stratified_folds(labels: &[PairLabel], k: usize, seed: u64) -> Result<Vec<Vec<usize>>, GbdtError> {
    if k < 2 || labels.len() < k {
        return Err(GbdtError::TooFewRows { rows: labels.len(), k });
    }
    let mut by_label: BTreeMap<PairLabel, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        by_label.entry(l).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for (_, mut members) in by_label {
        members.shuffle(&mut rng);
        for i in members {
            folds[next % k].push(i);
            next += 1;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridScore {
    pub params: HyperParams,
    pub mean_f1: f64,
    pub fold_f1: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub best: HyperParams,
    pub best_mean_f1: f64,
    pub k: usize,
    pub seed: u64,
    /// One entry per grid configuration, in grid order.
    pub scores: Vec<GridScore>,
}

/// Configurations that differ only in `n_rounds` share one training run per
/// fold: the ensemble is grown to the largest round count and every smaller
/// count is scored on its tree prefix.
fn shape_key(p: &HyperParams) -> HyperParams {
    HyperParams { n_rounds: 0, ..p.clone() }
}

pub fn cross_validate(
    dataset: &PairDataset,
    grid: &ParamGrid,
    k: usize,
    seed: u64,
    lemma_top_k: usize,
) -> Result<CvResult, GbdtError> {
    let configs = grid.expand();
    if configs.is_empty() {
        return Err(GbdtError::EmptyGrid);
    }
    for c in &configs {
        c.validate()?;
    }
    let labels: Vec<PairLabel> = dataset.examples.iter().map(|e| e.label).collect();
    let folds = stratified_folds(&labels, k, seed)?;

    let mut shapes: Vec<(HyperParams, usize)> = Vec::new();
    for c in &configs {
        let key = shape_key(c);
        match shapes.iter_mut().find(|(s, _)| *s == key) {
            Some((_, max)) => *max = (*max).max(c.n_rounds),
            None => shapes.push((key, c.n_rounds)),
        }
    }

    // Fold-local encodings are shared by every shape.
    let encoded: Vec<_> = folds
        .par_iter()
        .map(|valid| {
            let train_idx: Vec<usize> = (0..dataset.len()).filter(|i| valid.binary_search(i).is_err()).collect();
            let train_ds = dataset.select(&train_idx);
            let train_enc = encode(&train_ds, None, lemma_top_k)?;
            let valid_ds = dataset.select(valid);
            let schema: &EncoderSchema = &train_enc.schema;
            let valid_x = schema.encode_all(&valid_ds);
            let gold: Vec<bool> = valid_ds.examples.iter().map(|e| e.label == PairLabel::Bridging).collect();
            Ok((train_enc, valid_x, gold))
        })
        .collect::<Result<_, GbdtError>>()?;

    let jobs: Vec<(usize, usize)> = (0..shapes.len()).flat_map(|s| (0..k).map(move |f| (s, f))).collect();
    // f1[(shape, fold)] is indexed by round count.
    let results: Vec<Vec<(usize, f64)>> = jobs
        .par_iter()
        .map(|&(s, f)| {
            let (shape, max_rounds) = &shapes[s];
            let params = HyperParams { n_rounds: *max_rounds, ..shape.clone() };
            let (train_enc, valid_x, gold) = &encoded[f];
            let model = train(&train_enc.x, &train_enc.y, &train_enc.schema, &params, seed)?;
            let mut rounds: Vec<usize> = configs
                .iter()
                .filter(|c| shape_key(c) == *shape)
                .map(|c| c.n_rounds)
                .collect();
            rounds.sort_unstable();
            rounds.dedup();
            rounds
                .into_iter()
                .map(|r| {
                    let probs = model.predict_matrix_prefix(valid_x, r)?;
                    let pred: Vec<bool> = probs.iter().map(|&p| p >= DECISION_THRESHOLD).collect();
                    Ok((r, metrics_from_predictions(gold, &pred).f1))
                })
                .collect()
        })
        .collect::<Result<_, GbdtError>>()?;

    let scores: Vec<GridScore> = configs
        .iter()
        .map(|c| {
            let s = shapes.iter().position(|(sh, _)| *sh == shape_key(c)).expect("shape registered");
            let fold_f1: Vec<f64> = (0..k)
                .map(|f| {
                    let per_round = &results[s * k + f];
                    per_round.iter().find(|(r, _)| *r == c.n_rounds).expect("round scored").1
                })
                .collect();
            GridScore {
                params: c.clone(),
                mean_f1: fold_f1.iter().sum::<f64>() / k as f64,
                fold_f1,
            }
        })
        .collect();

    let mut best = 0;
    for (i, s) in scores.iter().enumerate().skip(1) {
        let b = &scores[best];
        let better = s.mean_f1 > b.mean_f1
            || (s.mean_f1 == b.mean_f1
                && (s.params.n_rounds, s.params.max_depth) < (b.params.n_rounds, b.params.max_depth));
        if better {
            best = i;
        }
    }
    Ok(CvResult {
        best: scores[best].params.clone(),
        best_mean_f1: scores[best].mean_f1,
        k,
        seed,
        scores,
    })
}
