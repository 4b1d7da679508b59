//! Train on one corpus, then list gold bridging pairs in another corpus
//! that the model scores below tau.
//!
//! ```bash
//! cargo run -p bridgekit --example error_mining
//! ```

use bridgekit::gbdt::{self, HyperParams};
use bridgekit::model::Definiteness;
use bridgekit::pairgen::{build_balanced_dataset, PairConfig};
use bridgekit::stats::{confident_errors, confident_errors_csv, DEFAULT_TAU};
use bridgekit::synth::{planted_corpus, CorpusSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = PairConfig::default();
    let train_docs = planted_corpus(&CorpusSpec { docs: 30, id_prefix: "tr".into(), ..Default::default() }, 1);
    // Relabel some bridging anaphors as indefinite, against the planted rule.
    let other = CorpusSpec { docs: 15, id_prefix: "ot".into(), ..Default::default() };
    let mut other_docs = planted_corpus(&other, 4);
    for doc in &mut other_docs {
        let anaphors: Vec<String> = doc.bridging.iter().step_by(4).map(|l| l.anaphor_id.clone()).collect();
        for m in doc.mentions.iter_mut().filter(|m| anaphors.contains(&m.id)) {
            m.definiteness = Definiteness::Ind;
        }
    }

    let train = build_balanced_dataset(&train_docs, 3, &config)?;
    let eval = build_balanced_dataset(&other_docs, 3, &config)?;
    let enc = gbdt::encode(&train, None, gbdt::DEFAULT_LEMMA_TOP_K)?;
    let params = HyperParams { n_rounds: 50, max_depth: 3, learning_rate: 0.3, ..Default::default() };
    let model = gbdt::train(&enc.x, &enc.y, &enc.schema, &params, 3)?;

    let errors = confident_errors(&model, &eval, DEFAULT_TAU)?;
    println!("{} confident errors below {DEFAULT_TAU}", errors.len());
    for line in confident_errors_csv(&errors).lines().take(10) {
        println!("{line}");
    }
    Ok(())
}
