//! Harmonize a small standoff corpus and show what each step removed.
//!
//! ```bash
//! cargo run -p bridgekit --example harmonize_corpus
//! ```

use bridgekit::harmonize::{harmonize_corpus, ExclusionList, HarmonizeOptions};
use bridgekit::ingest::parse_standoff;

const CORPUS: &str = include_str!("../tests/fixtures/harmonize_fixture.sff");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let docs = parse_standoff(CORPUS)?;
    let before: usize = docs.iter().map(|d| d.bridging.len()).sum();

    let (harmonized, report) = harmonize_corpus(&docs, &HarmonizeOptions::default());
    let after: usize = harmonized.iter().map(|d| d.bridging.len()).sum();
    println!("links {before} -> {after}");
    print!("{report}");
    for r in &report.flattened {
        println!("  flattened {}/{} from {:?}", r.doc_id, r.mention_id, r.original_spans);
    }

    // An exclusion list drops individual anaphors by id.
    let options = HarmonizeOptions { exclusions: ExclusionList::parse("fix1\tm2\n")? };
    let (_, excluded) = harmonize_corpus(&docs, &options);
    println!("with exclusions: {} removed by list", excluded.removed_excluded);

    let (_, again) = harmonize_corpus(&harmonized, &HarmonizeOptions::default());
    println!("second pass zero-delta: {}", again.is_zero_delta());
    Ok(())
}
