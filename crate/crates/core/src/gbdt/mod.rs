//! Gradient-boosted trees for the bridging-vs-rest decision, with
//! cross-validated grid search, metrics and feature importance.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub mod cv;
pub mod encode;
pub mod importance;
pub mod metrics;
pub mod tree;

pub use cv::{cross_validate, stratified_folds, CvResult, GridScore};
pub use encode::{encode, Block, Encoded, EncoderSchema, Matrix, DEFAULT_LEMMA_TOP_K};
pub use importance::{column_gain_totals, gain_importance, mda_importance, Importance, ImportanceRow};
pub use metrics::{evaluate, metrics_from_predictions, random_baseline, BaselineMetrics, Metrics};
pub use tree::{sigmoid, train, GbdtModel, Node, Tree};

#[derive(Debug, Error)]
pub enum GbdtError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("training labels contain a single class")]
    SingleClass,
    #[error("row has {found} columns, model schema expects {expected}")]
    Schema { expected: usize, found: usize },
    #[error("invalid hyperparameters: {0}")]
    InvalidParams(String),
    #[error("hyperparameter grid is empty")]
    EmptyGrid,
    #[error("{rows} rows cannot fill {k} folds")]
    TooFewRows { rows: usize, k: usize },
    #[error("model format: {0}")]
    Format(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub n_rounds: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    /// λ
    pub l2_leaf_penalty: f64,
    /// γ
    pub split_gain_threshold: f64,
    pub min_child_hessian: f64,
}

impl Default for HyperParams {
    fn default() -> Self {
        HyperParams {
            n_rounds: 100,
            max_depth: 4,
            learning_rate: 0.1,
            l2_leaf_penalty: 1.0,
            split_gain_threshold: 0.0,
            min_child_hessian: 1.0,
        }
    }
}

impl HyperParams {
    pub fn validate(&self) -> Result<(), GbdtError> {
        let bad = |m: &str| Err(GbdtError::InvalidParams(m.to_string()));
        if self.max_depth < 1 {
            return bad("max_depth must be at least 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        for (name, v) in [
            ("l2_leaf_penalty", self.l2_leaf_penalty),
            ("split_gain_threshold", self.split_gain_threshold),
            ("min_child_hessian", self.min_child_hessian),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(&format!("{name} must be non-negative"));
            }
        }
        Ok(())
    }
}

/// Cartesian hyperparameter grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamGrid {
    pub n_rounds: Vec<usize>,
    pub max_depth: Vec<usize>,
    pub learning_rate: Vec<f64>,
    pub l2_leaf_penalty: Vec<f64>,
    pub split_gain_threshold: Vec<f64>,
    pub min_child_hessian: Vec<f64>,
}

impl Default for ParamGrid {
    fn default() -> Self {
        ParamGrid {
            n_rounds: vec![50, 100, 200],
            max_depth: vec![3, 4, 6],
            learning_rate: vec![0.1, 0.3],
            l2_leaf_penalty: vec![1.0],
            split_gain_threshold: vec![0.0],
            min_child_hessian: vec![1.0, 5.0],
        }
    }
}

impl ParamGrid {
    pub fn single(p: &HyperParams) -> Self {
        ParamGrid {
            n_rounds: vec![p.n_rounds],
            max_depth: vec![p.max_depth],
            learning_rate: vec![p.learning_rate],
            l2_leaf_penalty: vec![p.l2_leaf_penalty],
            split_gain_threshold: vec![p.split_gain_threshold],
            min_child_hessian: vec![p.min_child_hessian],
        }
    }

    /// All configurations, `n_rounds` varying slowest.
    pub fn expand(&self) -> Vec<HyperParams> {
        let mut out = Vec::new();
        for &n_rounds in &self.n_rounds {
            for &max_depth in &self.max_depth {
                for &learning_rate in &self.learning_rate {
                    for &l2_leaf_penalty in &self.l2_leaf_penalty {
                        for &split_gain_threshold in &self.split_gain_threshold {
                            for &min_child_hessian in &self.min_child_hessian {
                                out.push(HyperParams {
                                    n_rounds,
                                    max_depth,
                                    learning_rate,
                                    l2_leaf_penalty,
                                    split_gain_threshold,
                                    min_child_hessian,
                                });
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_size_and_order() {
        let configs = ParamGrid::default().expand();
        assert_eq!(configs.len(), 3 * 3 * 2 * 2);
        assert_eq!(configs[0].n_rounds, 50);
        assert_eq!(configs[0].min_child_hessian, 1.0);
        assert_eq!(configs[1].min_child_hessian, 5.0);
        assert_eq!(configs.last().unwrap().n_rounds, 200);
    }

    #[test]
    fn params_validation() {
        assert!(HyperParams::default().validate().is_ok());
        let zero_depth = HyperParams { max_depth: 0, ..Default::default() };
        assert!(zero_depth.validate().is_err());
        let neg_lambda = HyperParams { l2_leaf_penalty: -1.0, ..Default::default() };
        assert!(neg_lambda.validate().is_err());
        let zero_lr = HyperParams { learning_rate: 0.0, ..Default::default() };
        assert!(zero_lr.validate().is_err());
    }
}
