mod common;

use bridgekit::harmonize::{harmonize_corpus, harmonize_document, HarmonizeOptions};
use bridgekit::ingest::parse_standoff;
use bridgekit::model::Document;
use bridgekit::synth::{random_documents, roughen};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rough_documents(seed: u64) -> Vec<Document> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut docs = random_documents(3, seed, false);
    for d in &mut docs {
        roughen(&mut rng, d);
    }
    docs
}

#[test]
fn fixture_counts() {
    let docs = parse_standoff(common::FIXTURE).unwrap();
    let (out, report) = harmonize_corpus(&docs, &HarmonizeOptions::default());
    assert_eq!(report.counts(), (3, 2, 4));
    assert_eq!(report.flattened.len(), 4);
    assert!(out.iter().all(|d| !d.has_discontinuous() && !d.has_split_antecedents()));
    let links: usize = out.iter().map(|d| d.bridging.len()).sum();
    assert_eq!(links, 4);
}

#[test]
fn unknown_label_is_reported_not_dropped() {
    let text = common::FIXTURE.replacen("\tperson\t", "\tvehicle\t", 1);
    assert_ne!(text, common::FIXTURE);
    let docs = parse_standoff(&text).unwrap();
    let (out, report) = harmonize_corpus(&docs, &HarmonizeOptions::default());
    assert_eq!(report.unresolved_entity_types, vec!["vehicle".to_string()]);
    assert_eq!(out[0].mentions.len(), docs[0].mentions.len());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn harmonize_is_idempotent(seed in any::<u64>()) {
        let options = HarmonizeOptions::default();
        let (once, _) = harmonize_corpus(&rough_documents(seed), &options);
        let (twice, again) = harmonize_corpus(&once, &options);
        prop_assert!(again.is_zero_delta());
        prop_assert_eq!(twice, once);
    }

    #[test]
    fn harmonize_only_removes_links(seed in any::<u64>()) {
        for doc in rough_documents(seed) {
            let (out, report) = harmonize_document(&doc, &HarmonizeOptions::default());
            prop_assert!(out.bridging.len() <= doc.bridging.len());
            prop_assert_eq!(
                doc.bridging.len() - out.bridging.len(),
                report.removed_split_antecedent + report.removed_given_anaphor + report.removed_excluded
            );
            for link in &out.bridging {
                prop_assert!(doc.bridging.iter().any(|l| l.anaphor_id == link.anaphor_id && l.antecedent_ids == link.antecedent_ids));
            }
            prop_assert!(out.mentions.len() <= doc.mentions.len());
        }
    }

    #[test]
    fn exactly_one_non_given_mention_per_chain(seed in any::<u64>()) {
        for doc in random_documents(3, seed, false) {
            let flags = doc.given_flags();
            let mut chains: std::collections::BTreeMap<&str, usize> = Default::default();
            for (m, given) in doc.mentions.iter().zip(&flags) {
                prop_assert_eq!(*given, doc.is_given(m));
                if let Some(c) = &m.chain_id {
                    if !given {
                        *chains.entry(c).or_default() += 1;
                    } else {
                        chains.entry(c).or_default();
                    }
                } else {
                    prop_assert!(!given);
                }
            }
            prop_assert!(chains.values().all(|&n| n == 1));
        }
    }
}
