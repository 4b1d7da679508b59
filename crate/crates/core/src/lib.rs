//! Toolkit for bridging-anaphora corpora.
//!
//! The crate reads two corpus dialects into one document model, reduces the
//! richer standoff annotations to the bracket scope (single continuous
//! spans, single antecedents, discourse-new anaphors), builds balanced
//! antecedent/anaphor pair datasets, trains a gradient-boosted tree
//! classifier and produces the analysis tables used to compare corpora.
//!
//! ```text
//! ingest ──► harmonize ──► pairgen ──► gbdt ──► stats
//!    \___________________ pipeline ___________________/
//! ```
//!
//! Runnable walkthroughs for every stage live in `examples/`:
//!
//! ```bash
//! cargo run -p bridgekit --example convert_dialects
//! cargo run -p bridgekit --example harmonize_corpus
//! cargo run -p bridgekit --example balanced_pairs
//! cargo run -p bridgekit --example train_classifier
//! cargo run -p bridgekit --example feature_importance
//! cargo run -p bridgekit --example definiteness_residuals
//! cargo run -p bridgekit --example error_mining
//! cargo run -p bridgekit --example end_to_end
//! ```

pub mod gbdt;
pub mod harmonize;
pub mod ingest;
pub mod model;
pub mod pairgen;
pub mod pipeline;
pub mod stats;
pub mod synth;

pub use model::{
    BridgingLink, Definiteness, Document, InfStat, Mention, Number, Schema, Span, Token,
    UnifiedType,
};
