//! Train a boosted-tree classifier on a planted-rule corpus and compare it
//! with the random baseline on held-out documents.
//!
//! ```bash
//! cargo run -p bridgekit --example train_classifier
//! ```

use std::time::Instant;

use bridgekit::gbdt::{self, HyperParams};
use bridgekit::pairgen::{build_balanced_dataset, PairConfig, PairLabel};
use bridgekit::synth::{planted_corpus, CorpusSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let started = Instant::now();
    let config = PairConfig::default();
    let train_docs = planted_corpus(&CorpusSpec { docs: 40, id_prefix: "tr".into(), ..Default::default() }, 1);
    let test_docs = planted_corpus(&CorpusSpec { docs: 20, id_prefix: "te".into(), ..Default::default() }, 2);
    let train = build_balanced_dataset(&train_docs, 7, &config)?;
    let test = build_balanced_dataset(&test_docs, 7, &config)?;
    println!(
        "train pairs: {} bridging / {} coref / {} none",
        train.count(PairLabel::Bridging),
        train.count(PairLabel::Coref),
        train.count(PairLabel::None)
    );
    println!("test pairs:  {}", test.len());

    let enc = gbdt::encode(&train, None, gbdt::DEFAULT_LEMMA_TOP_K)?;
    let params = HyperParams { n_rounds: 100, max_depth: 4, learning_rate: 0.3, ..Default::default() };
    let model = gbdt::train(&enc.x, &enc.y, &enc.schema, &params, 7)?;

    let m = gbdt::evaluate(&model, &test)?;
    let b = gbdt::random_baseline(&test, 1.0 / 3.0, 5, 7)?;
    println!("{:<10}{:>8}{:>8}{:>8}", "", "P", "R", "F");
    println!("{:<10}{:>8.3}{:>8.3}{:>8.3}", "model", m.precision, m.recall, m.f1);
    println!("{:<10}{:>8.3}{:>8.3}{:>8.3}", "random", b.precision, b.recall, b.f1);
    println!("elapsed {:.2?}", started.elapsed());
    Ok(())
}
