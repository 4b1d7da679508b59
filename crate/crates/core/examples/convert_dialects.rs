//! Read a document from the bracket dialect, then write it as canonical
//! JSONL and as standoff.
//!
//! ```bash
//! cargo run -p bridgekit --example convert_dialects
//! ```

use bridgekit::ingest::{emit_bracket, emit_canonical, emit_standoff, parse_bracket, parse_canonical};
use bridgekit::synth::random_documents;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let doc = random_documents(1, 3, true).remove(0);
    let bracket = emit_bracket(&doc)?;
    println!("--- bracket\n{bracket}");

    let parsed = parse_bracket(&bracket)?;
    let canonical = emit_canonical(&parsed);
    println!("--- canonical\n{canonical}");
    println!("--- standoff\n{}", emit_standoff(&parsed)?);

    assert_eq!(parse_canonical(&canonical)?, parsed);
    println!("canonical round trip ok: {} mentions, {} links", parsed[0].mentions.len(), parsed[0].bridging.len());
    Ok(())
}
