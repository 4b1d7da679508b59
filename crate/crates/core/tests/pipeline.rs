mod common;

use bridgekit::pipeline::{run, PipelineConfig, PipelineError};

#[test]
fn full_run_populates_every_section_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let config = common::two_corpus_setup(dir.path(), 21);
    let first = run(&config).unwrap();
    let report_json = std::fs::read(first.dir.join("report.json")).unwrap();
    let r = &first.report;
    assert_eq!(r.harmonize.len(), 2);
    assert_eq!(r.datasets.len(), 4);
    assert_eq!(r.evaluation.len(), 4);
    assert_eq!(r.baselines.len(), 2);
    assert_eq!(r.importance.len(), 2);
    assert_eq!(r.residuals.len(), 2);
    assert_eq!(r.distributions.len(), 2);
    assert_eq!(r.confident_errors.len(), 4);
    assert!(r.harmonize["arrau"].removed_excluded > 0);
    assert!(r.harmonize["arrau"].flattened_discontinuous > 0);
    for name in ["config.resolved.json", "metrics.csv", "report.txt", "models/gum.json", "stats/arrau_residuals.csv", "errors/gum_on_arrau.csv"] {
        assert!(first.dir.join(name).is_file(), "{name}");
    }
    assert!(!first.dir.with_extension("partial").exists());

    let second = run(&config).unwrap();
    assert_eq!(second.dir, first.dir);
    assert_eq!(std::fs::read(second.dir.join("report.json")).unwrap(), report_json);
}

#[test]
fn failed_run_keeps_partial_directory() {
    let dir = tempfile::tempdir().unwrap();
    common::two_corpus_setup(dir.path(), 3);
    // A test partition with no bridging links fails at pair generation.
    let tokens_only = "# doc_id = empty1\n1\tA\ta\tDT\tsing\tdet\t2\t\n2\tdog\tdog\tNN\tsing\troot\t0\t\n\n";
    std::fs::write(dir.path().join("gum_test.brk"), tokens_only).unwrap();
    std::fs::write(dir.path().join("gentle_test.brk"), tokens_only.replace("empty1", "empty2")).unwrap();
    let config = PipelineConfig::load(&dir.path().join("config.json")).unwrap();
    let err = run(&config).unwrap_err();
    assert!(matches!(err, PipelineError::Stage { .. }), "{err}");
    assert_eq!(err.exit_code(), 3);
    let runs: Vec<_> = std::fs::read_dir(dir.path().join("runs")).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(runs.len(), 1);
    assert!(runs[0].to_string_lossy().ends_with(".partial"));
}

#[test]
fn config_errors() {
    let dir = tempfile::tempdir().unwrap();
    common::two_corpus_setup(dir.path(), 3);
    let text = common::two_corpus_config_json(3);
    let mut value: serde_json::Value = serde_json::from_str(&text).unwrap();
    value.as_object_mut().unwrap().remove("seed");
    assert!(matches!(PipelineConfig::from_json(&value.to_string(), dir.path()), Err(PipelineError::Config(_))));

    let mut value: serde_json::Value = serde_json::from_str(&text).unwrap();
    value["surprise"] = 1.into();
    assert!(PipelineConfig::from_json(&value.to_string(), dir.path()).is_err());

    let mut config = PipelineConfig::from_json(&text, dir.path()).unwrap();
    config.corpora[0].test.push(dir.path().join("missing.brk"));
    let err = run(&config).unwrap_err();
    assert_eq!(err.exit_code(), 1);
}

#[test]
fn config_hash_tracks_content() {
    let dir = tempfile::tempdir().unwrap();
    let a = common::two_corpus_setup(dir.path(), 3);
    let mut b = a.clone();
    assert_eq!(a.hash(), b.hash());
    b.seed = 4;
    assert_ne!(a.hash(), b.hash());
}
