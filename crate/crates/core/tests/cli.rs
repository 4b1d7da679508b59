mod common;

use std::path::Path;
use std::process::{Command, Output};

fn bridgekit(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bridgekit"))
        .args(args)
        .current_dir(cwd)
        .env_remove("BRIDGEKIT_OUTPUT_DIR")
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn single_stage_commands_chain() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("corpus.sff"), common::FIXTURE).unwrap();
    bridgekit::synth::write_two_corpus_fixture(d, 5).unwrap();

    let o = bridgekit(&["convert", "corpus.sff", "--out", "corpus.jsonl"], d);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(std::fs::read_to_string(d.join("corpus.jsonl")).unwrap().lines().count(), 2);

    let o = bridgekit(&["harmonize", "corpus.sff", "--out", "h.jsonl", "--report", "h.json"], d);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("h.json")).unwrap()).unwrap();
    assert_eq!(report["removed_split_antecedent"], 3);
    assert_eq!(report["removed_given_anaphor"], 2);
    assert_eq!(report["flattened_discontinuous"], 4);

    let o = bridgekit(&["pairs", "arrau_train.sff", "--out", "train.jsonl", "--csv", "train.csv", "--seed", "1"], d);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = bridgekit(&["pairs", "arrau_test.sff", "--out", "test.jsonl", "--seed", "1"], d);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(std::fs::read_to_string(d.join("train.csv")).unwrap().starts_with("doc_id,"));

    std::fs::write(
        d.join("grid.json"),
        r#"{"n_rounds":[20],"max_depth":[3],"learning_rate":[0.3],"l2_leaf_penalty":[1.0],"split_gain_threshold":[0.0],"min_child_hessian":[1.0]}"#,
    )
    .unwrap();
    let o = bridgekit(&["train", "train.jsonl", "--out", "model.json", "--seed", "1", "--grid", "grid.json", "--folds", "3"], d);
    assert!(o.status.success(), "{}", stderr(&o));

    let o = bridgekit(&["eval", "model.json", "test.jsonl", "--seed", "1"], d);
    assert!(o.status.success(), "{}", stderr(&o));
    let eval: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(eval["model"]["f1"].as_f64().unwrap() > 0.5);

    let o = bridgekit(&["importance", "model.json", "test.jsonl", "--seed", "1", "--repeats", "2", "--out-dir", "imp"], d);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(d.join("imp/gain.csv").is_file() && d.join("imp/mda.csv").is_file());

    let o = bridgekit(
        &["analyze", "h.jsonl", "--data", "test.jsonl", "--model", "model.json", "--out-dir", "stats", "--adjusted"],
        d,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["pair_types.csv", "anaphor_types.csv", "subtypes.csv", "residuals.csv", "confident_errors.csv"] {
        assert!(d.join("stats").join(f).is_file(), "{f}");
    }
}

#[test]
fn bad_nesting_exits_2_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let text = "# doc_id = d1\n1\tA\ta\tDT\tsing\tdet\t2\t(m1-place-new-ind\n2\tbig\tbig\tJJ\tsing\tamod\t3\t(m2-place-new-ind\n3\thouse\thouse\tNN\tsing\troot\t0\tm1)\n4\t.\t.\t.\tnone\tpunct\t3\tm2)\n\n";
    std::fs::write(dir.path().join("bad.brk"), text).unwrap();
    let o = bridgekit(&["convert", "bad.brk", "--out", "x.jsonl"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("line 4") || err.contains("line 5"), "{err}");
}

#[test]
fn empty_input_converts_to_empty_output() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("empty.brk"), "").unwrap();
    let o = bridgekit(&["convert", "empty.brk", "--out", "empty.jsonl"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(std::fs::read_to_string(dir.path().join("empty.jsonl")).unwrap(), "");
}

#[test]
fn config_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("config.json"), r#"{"corpora": []}"#).unwrap();
    let o = bridgekit(&["run", "config.json"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let o = bridgekit(&["run", "missing.json"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn run_respects_output_dir_override() {
    let dir = tempfile::tempdir().unwrap();
    common::two_corpus_setup(dir.path(), 9);
    let o = Command::new(env!("CARGO_BIN_EXE_bridgekit"))
        .args(["run", "config.json"])
        .current_dir(dir.path())
        .env("BRIDGEKIT_OUTPUT_DIR", dir.path().join("elsewhere"))
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let runs: Vec<_> = std::fs::read_dir(dir.path().join("elsewhere")).unwrap().collect();
    assert_eq!(runs.len(), 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("== classification"));
}
