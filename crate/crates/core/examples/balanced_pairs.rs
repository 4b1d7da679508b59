//! Build a balanced pair dataset and print it as CSV.
//!
//! ```bash
//! cargo run -p bridgekit --example balanced_pairs
//! ```

use bridgekit::pairgen::{build_balanced_dataset, max_bridging_distance, PairConfig, PairLabel};
use bridgekit::synth::corpus_with_links;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let docs = corpus_with_links(20, 5);
    let config = PairConfig::default();
    println!("{} documents, max bridging distance {}", docs.len(), max_bridging_distance(&docs)?);

    let ds = build_balanced_dataset(&docs, 42, &config)?;
    for label in [PairLabel::Bridging, PairLabel::Coref, PairLabel::None] {
        println!("{label:?}: {}", ds.count(label));
    }
    for w in &ds.provenance.warnings {
        println!("warning: {w}");
    }

    let mut csv = Vec::new();
    ds.write_csv(&mut csv)?;
    let text = String::from_utf8(csv)?;
    for line in text.lines().take(6) {
        println!("{line}");
    }
    Ok(())
}
