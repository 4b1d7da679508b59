//! Definiteness against bridging status: Pearson residuals of a 2x2 table.
//!
//! ```bash
//! cargo run -p bridgekit --example definiteness_residuals
//! ```

use bridgekit::pairgen::{build_balanced_dataset, PairConfig};
use bridgekit::stats::{chi_square_residuals, definiteness_contingency, ContingencyTable2x2};
use bridgekit::synth::{planted_corpus, CorpusSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let textbook = chi_square_residuals(&ContingencyTable2x2::new([[40, 10], [10, 40]]), false)?;
    println!("{}", textbook.to_text());

    let docs = planted_corpus(&CorpusSpec::default(), 9);
    let ds = build_balanced_dataset(&docs, 1, &PairConfig::default())?;
    let table = definiteness_contingency(&ds)?;
    println!("pairs without definiteness left out: {}", table.excluded_none);
    let r = chi_square_residuals(&table, true)?;
    println!("{}", r.to_text());
    print!("{}", r.to_csv());
    Ok(())
}
