//! Feature encoding: numeric passthrough, one-hot categories and a top-K
//! lemma vocabulary with an out-of-vocabulary bucket.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::GbdtError;
use crate::pairgen::{FeatureValue, FeatureVector, PairDataset, PairLabel};

pub const DEFAULT_LEMMA_TOP_K: usize = 200;
pub const OOV: &str = "<oov>";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Block {
    Numeric { feature: String },
    OneHot { feature: String, categories: Vec<String> },
    /// One-hot over `vocabulary` followed by one OOV column.
    Lexical { feature: String, vocabulary: Vec<String> },
}

impl Block {
    pub fn feature(&self) -> &str {
        match self {
            Block::Numeric { feature } | Block::OneHot { feature, .. } | Block::Lexical { feature, .. } => feature,
        }
    }

    pub fn width(&self) -> usize {
        match self {
            Block::Numeric { .. } => 1,
            Block::OneHot { categories, .. } => categories.len(),
            Block::Lexical { vocabulary, .. } => vocabulary.len() + 1,
        }
    }
}

/// Fitted encoding, with blocks ordered by feature name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderSchema {
    pub blocks: Vec<Block>,
    pub lemma_top_k: usize,
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Matrix {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        }
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn select_rows(&self, rows: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(rows.len() * self.cols);
        for &r in rows {
            data.extend_from_slice(self.row(r));
        }
        Matrix {
            rows: rows.len(),
            cols: self.cols,
            data,
        }
    }
}

impl EncoderSchema {
    /// Fit the encoding on training examples.
    pub fn fit(dataset: &PairDataset, lemma_top_k: usize) -> Result<Self, GbdtError> {
        if dataset.is_empty() {
            return Err(GbdtError::EmptyDataset);
        }
        enum Seen {
            Numeric,
            Categorical(BTreeSet<String>),
            Lexical(BTreeMap<String, usize>),
        }
        let mut seen: BTreeMap<String, Seen> = BTreeMap::new();
        for e in &dataset.examples {
            for (name, value) in e.features.values() {
                match value {
                    FeatureValue::Numeric(_) => {
                        seen.entry(name).or_insert(Seen::Numeric);
                    }
                    FeatureValue::Categorical(v) => {
                        if let Seen::Categorical(set) =
                            seen.entry(name).or_insert_with(|| Seen::Categorical(BTreeSet::new()))
                        {
                            set.insert(v);
                        }
                    }
                    FeatureValue::Lexical(v) => {
                        if let Seen::Lexical(counts) =
                            seen.entry(name).or_insert_with(|| Seen::Lexical(BTreeMap::new()))
                        {
                            *counts.entry(v).or_default() += 1;
                        }
                    }
                }
            }
        }
        let blocks = seen
            .into_iter()
            .map(|(feature, s)| match s {
                Seen::Numeric => Block::Numeric { feature },
                Seen::Categorical(set) => Block::OneHot {
                    feature,
                    categories: set.into_iter().collect(),
                },
                Seen::Lexical(counts) => {
                    let mut ranked: Vec<(String, usize)> = counts.into_iter().collect();
                    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
                    let mut vocabulary: Vec<String> =
                        ranked.into_iter().take(lemma_top_k).map(|(w, _)| w).collect();
                    vocabulary.sort();
                    Block::Lexical { feature, vocabulary }
                }
            })
            .collect();
        Ok(EncoderSchema { blocks, lemma_top_k })
    }

    pub fn n_columns(&self) -> usize {
        self.blocks.iter().map(Block::width).sum()
    }

    /// Column range of each block.
    pub fn block_ranges(&self) -> Vec<Range<usize>> {
        let mut start = 0;
        self.blocks
            .iter()
            .map(|b| {
                let r = start..start + b.width();
                start = r.end;
                r
            })
            .collect()
    }

    /// Block index of every column.
    pub fn column_blocks(&self) -> Vec<usize> {
        self.blocks
            .iter()
            .enumerate()
            .flat_map(|(i, b)| std::iter::repeat_n(i, b.width()))
            .collect()
    }

    pub fn column_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.n_columns());
        for b in &self.blocks {
            match b {
                Block::Numeric { feature } => names.push(feature.clone()),
                Block::OneHot { feature, categories } => {
                    names.extend(categories.iter().map(|c| format!("{feature}={c}")));
                }
                Block::Lexical { feature, vocabulary } => {
                    names.extend(vocabulary.iter().map(|c| format!("{feature}={c}")));
                    names.push(format!("{feature}={OOV}"));
                }
            }
        }
        names
    }

    /// Encode one feature vector. Unseen categories leave their block at
    /// zero; unseen lemmas set the OOV column.
    pub fn encode_row(&self, features: &FeatureVector) -> Vec<f64> {
        let values: BTreeMap<String, FeatureValue> = features.values().into_iter().collect();
        let mut row = vec![0.0; self.n_columns()];
        let mut offset = 0;
        for b in &self.blocks {
            let value = values.get(b.feature());
            match (b, value) {
                (Block::Numeric { .. }, Some(FeatureValue::Numeric(v))) => row[offset] = *v,
                (Block::OneHot { categories, .. }, Some(FeatureValue::Categorical(v))) => {
                    if let Ok(i) = categories.binary_search(v) {
                        row[offset + i] = 1.0;
                    }
                }
                (Block::Lexical { vocabulary, .. }, Some(FeatureValue::Lexical(v))) => {
                    let i = vocabulary.binary_search(v).unwrap_or(vocabulary.len());
                    row[offset + i] = 1.0;
                }
                _ => {}
            }
            offset += b.width();
        }
        row
    }

    pub fn encode_all(&self, dataset: &PairDataset) -> Matrix {
        let rows: Vec<Vec<f64>> = dataset.examples.iter().map(|e| self.encode_row(&e.features)).collect();
        let mut m = Matrix::from_rows(&rows);
        m.cols = self.n_columns();
        m
    }
}

/// Binary target: 1 for bridging, 0 otherwise.
pub fn binary_labels(dataset: &PairDataset) -> Vec<f64> {
    dataset
        .examples
        .iter()
        .map(|e| if e.label == PairLabel::Bridging { 1.0 } else { 0.0 })
        .collect()
}

/// Encoded design matrix and binary labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Encoded {
    pub x: Matrix,
    pub y: Vec<f64>,
    pub schema: EncoderSchema,
}

/// Encode a dataset, fitting a schema unless one is supplied.
pub fn encode(
    dataset: &PairDataset,
    schema: Option<&EncoderSchema>,
    lemma_top_k: usize,
) -> Result<Encoded, GbdtError> {
    if dataset.is_empty() {
        return Err(GbdtError::EmptyDataset);
    }
    let schema = match schema {
        Some(s) => s.clone(),
        None => EncoderSchema::fit(dataset, lemma_top_k)?,
    };
    Ok(Encoded {
        x: schema.encode_all(dataset),
        y: binary_labels(dataset),
        schema,
    })
}
