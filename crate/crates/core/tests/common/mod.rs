#![allow(dead_code)]

use std::path::Path;

use bridgekit::pipeline::PipelineConfig;
use bridgekit::synth::write_two_corpus_fixture;

pub const FIXTURE: &str = include_str!("../fixtures/harmonize_fixture.sff");

/// Config JSON for the two-corpus fixture, with a small grid.
pub fn two_corpus_config_json(seed: u64) -> String {
    serde_json::json!({
        "seed": seed,
        "corpora": [
            { "name": "gum", "train": ["gum_train.brk"], "dev": ["gum_dev.brk"], "test": ["gum_test.brk", "gentle_test.brk"] },
            { "name": "arrau", "train": ["arrau_train.sff"], "dev": ["arrau_dev.sff"], "test": ["arrau_test.sff"] }
        ],
        "exclusions": "exclusions.tsv",
        "grid": {
            "n_rounds": [20, 40],
            "max_depth": [3],
            "learning_rate": [0.3],
            "l2_leaf_penalty": [1.0],
            "split_gain_threshold": [0.0],
            "min_child_hessian": [1.0]
        },
        "cv_folds": 3,
        "mda_repeats": 2,
        "output_dir": "runs"
    })
    .to_string()
}

/// Write the fixture corpora and a config file into `dir`.
pub fn two_corpus_setup(dir: &Path, seed: u64) -> PipelineConfig {
    write_two_corpus_fixture(dir, seed).unwrap();
    let text = two_corpus_config_json(seed);
    std::fs::write(dir.join("config.json"), &text).unwrap();
    PipelineConfig::from_json(&text, dir).unwrap()
}
