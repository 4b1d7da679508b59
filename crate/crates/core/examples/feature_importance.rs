//! Rank features by split gain and by permutation accuracy drop on a
//! planted-rule corpus with one injected noise feature.
//!
//! ```bash
//! cargo run -p bridgekit --example feature_importance
//! ```

use bridgekit::gbdt::{self, HyperParams};
use bridgekit::pairgen::{build_balanced_dataset, PairConfig};
use bridgekit::synth::{add_noise_feature, planted_corpus, CorpusSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = PairConfig::default();
    let train_docs = planted_corpus(&CorpusSpec { docs: 40, id_prefix: "tr".into(), ..Default::default() }, 1);
    let test_docs = planted_corpus(&CorpusSpec { docs: 20, id_prefix: "te".into(), ..Default::default() }, 2);
    let mut train = build_balanced_dataset(&train_docs, 7, &config)?;
    let mut test = build_balanced_dataset(&test_docs, 7, &config)?;
    add_noise_feature(&mut train, 11);
    add_noise_feature(&mut test, 12);

    let enc = gbdt::encode(&train, None, gbdt::DEFAULT_LEMMA_TOP_K)?;
    let params = HyperParams { n_rounds: 100, max_depth: 4, learning_rate: 0.3, ..Default::default() };
    let model = gbdt::train(&enc.x, &enc.y, &enc.schema, &params, 7)?;

    let gain = gbdt::gain_importance(&model);
    let mda = gbdt::mda_importance(&model, &test, 5, 7)?;
    println!("{:<16}{:>12}{:>8}{:>10}", "feature", "gain", "share", "mda");
    for row in gain.ranked() {
        let drop = mda.get(&row.feature).map_or(0.0, |r| r.score);
        println!("{:<16}{:>12.3}{:>8.3}{:>10.4}", row.feature, row.score, row.secondary, drop);
    }
    Ok(())
}
