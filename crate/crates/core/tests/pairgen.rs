use bridgekit::pairgen::{build_balanced_dataset, is_pronoun, max_bridging_distance, PairConfig, PairDataset, PairLabel};
use bridgekit::synth::{corpus_with_links, planted_corpus, planted_rule, CorpusSpec};
use proptest::prelude::*;

#[test]
fn bridging_pairs_are_kept_in_full() {
    let docs = corpus_with_links(30, 3);
    let ds = build_balanced_dataset(&docs, 1, &PairConfig::default()).unwrap();
    let links: usize = docs.iter().map(|d| d.bridging.len()).sum();
    assert_eq!(ds.count(PairLabel::Bridging), links);
    for e in ds.examples.iter().filter(|e| e.label == PairLabel::Bridging) {
        let doc = docs.iter().find(|d| d.doc_id == e.doc_id).unwrap();
        assert!(doc.bridging.iter().any(|l| l.anaphor_id == e.anaphor_id && l.antecedent_ids[0] == e.antecedent_id));
    }
}

#[test]
fn jsonl_round_trip_and_seed_sensitivity() {
    let docs = corpus_with_links(40, 8);
    let config = PairConfig::default();
    let a = build_balanced_dataset(&docs, 1, &config).unwrap();
    let back = PairDataset::from_jsonl(&a.to_jsonl()).unwrap();
    assert_eq!(back.to_jsonl(), a.to_jsonl());
    let b = build_balanced_dataset(&docs, 2, &config).unwrap();
    assert_ne!(a.to_jsonl(), b.to_jsonl());
}

#[test]
fn planted_features_reproduce_the_rule() {
    let docs = planted_corpus(&CorpusSpec { docs: 5, ..Default::default() }, 4);
    let ds = build_balanced_dataset(&docs, 1, &PairConfig::default()).unwrap();
    for e in &ds.examples {
        assert_eq!(planted_rule(&e.features), e.label == PairLabel::Bridging, "{}/{}", e.antecedent_id, e.anaphor_id);
    }
}

#[test]
fn corpus_without_links_is_an_error() {
    let mut docs = corpus_with_links(5, 1);
    for d in &mut docs {
        d.bridging.clear();
    }
    assert!(max_bridging_distance(&docs).is_err());
    assert!(build_balanced_dataset(&docs, 1, &PairConfig::default()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn negatives_respect_pronoun_and_distance_filters(seed in any::<u64>(), links in 5usize..40) {
        let docs = corpus_with_links(links, seed);
        let config = PairConfig::default();
        let max = max_bridging_distance(&docs).unwrap();
        let ds = build_balanced_dataset(&docs, seed, &config).unwrap();
        prop_assert_eq!(ds.count(PairLabel::Bridging), links);
        prop_assert!(ds.count(PairLabel::Coref) <= links);
        prop_assert!(ds.count(PairLabel::None) <= links);
        for e in ds.examples.iter().filter(|e| e.label != PairLabel::Bridging) {
            let doc = docs.iter().find(|d| d.doc_id == e.doc_id).unwrap();
            prop_assert!(!is_pronoun(doc, doc.mention(&e.anaphor_id).unwrap(), &config.pronoun_tags));
            prop_assert!(e.features.t_a_dist <= max);
        }
    }
}
