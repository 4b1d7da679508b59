//! Run the full pipeline over two synthetic corpora in different dialects.
//!
//! ```bash
//! cargo run --release -p bridgekit --example end_to_end
//! ```

use bridgekit::gbdt::ParamGrid;
use bridgekit::pipeline::{run, PipelineConfig};
use bridgekit::synth::write_two_corpus_fixture;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    write_two_corpus_fixture(dir.path(), 17)?;
    let grid = ParamGrid {
        n_rounds: vec![30, 60],
        max_depth: vec![3],
        learning_rate: vec![0.3],
        min_child_hessian: vec![1.0],
        ..Default::default()
    };
    let config = serde_json::json!({
        "seed": 17,
        "corpora": [
            { "name": "gum", "train": ["gum_train.brk"], "dev": ["gum_dev.brk"], "test": ["gum_test.brk", "gentle_test.brk"] },
            { "name": "arrau", "train": ["arrau_train.sff"], "dev": ["arrau_dev.sff"], "test": ["arrau_test.sff"] }
        ],
        "exclusions": "exclusions.tsv",
        "grid": grid,
        "cv_folds": 3,
        "output_dir": "runs"
    });
    let config = PipelineConfig::from_json(&config.to_string(), dir.path())?;
    let out = run(&config)?;
    print!("{}", out.report.to_text());
    println!("\nfiles under {}:", out.dir.display());
    let mut files = Vec::new();
    let mut stack = vec![out.dir.clone()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d)? {
            let path = entry?.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                files.push(path.strip_prefix(&out.dir)?.display().to_string());
            }
        }
    }
    files.sort();
    for f in files {
        println!("  {f}");
    }
    Ok(())
}
