//! Seeded synthetic corpora for tests, examples and demos.
//!
//! [`planted_corpus`] builds documents whose bridging links follow a known
//! rule: a pair is bridging exactly when the anaphor is a definite
//! discourse-new mention, both mentions share a unified entity type and the
//! anaphor starts fewer than [`PLANTED_MAX_DISTANCE`] tokens after the
//! antecedent. [`random_document`] produces arbitrary valid documents for
//! round-trip checks.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::harmonize::{entity_type_table, BridgingSubtype};
use crate::ingest::{emit_bracket, emit_standoff};
use crate::model::{
    find_head, BridgingLink, Definiteness, Document, InfStat, Mention, Number, Schema, Span, Token,
    UnifiedType,
};
use crate::pairgen::{FeatureVector, PairDataset, PairExample, PairLabel};

/// Pair example with neutral features, adjusted by `f`.
pub fn example_with(f: impl FnOnce(&mut FeatureVector)) -> PairExample {
    let mut features = FeatureVector {
        t_entity_type: UnifiedType::Abstract,
        n_entity_type: UnifiedType::Abstract,
        t_definite: Definiteness::Ind,
        n_definite: Definiteness::Ind,
        t_phrase_len: 2,
        n_phrase_len: 2,
        t_head_deprel: "obj".into(),
        n_head_deprel: "obj".into(),
        t_head_xpos: "NN".into(),
        n_head_xpos: "NN".into(),
        t_head_lemma: "thing".into(),
        n_head_lemma: "thing".into(),
        t_head_number: Number::Sing,
        n_head_number: Number::Sing,
        t_infstat: InfStat::New,
        t_a_dist: 1,
        extra: BTreeMap::new(),
    };
    f(&mut features);
    PairExample {
        doc_id: "d1".into(),
        antecedent_id: "m1".into(),
        anaphor_id: "m2".into(),
        features,
        label: PairLabel::None,
    }
}

const WORDS: &[&str] = &[
    "house", "door", "city", "river", "plan", "Monday", "water", "dog", "idea", "firm", "she", "the", "a", "of",
    "ran", "big", "Smith", "road", "1987", "mr.",
];
const XPOS: &[&str] = &["NN", "NNS", "NNP", "DT", "PRP", "PRP$", "VBD", "JJ", "IN", "CD"];
const DEPRELS: &[&str] = &["nsubj", "obj", "det", "root", "nmod", "amod", "case", "punct"];
const ORIGINAL_TYPES: &[&str] = &[
    "person", "place", "object", "event", "abstract", "space", "concrete", "undersp-onto", "plan",
];

fn pick<'a, R: Rng>(rng: &mut R, items: &[&'a str]) -> &'a str {
    items.choose(rng).copied().unwrap_or("x")
}

fn crosses(a: Span, b: Span) -> bool {
    (a.start < b.start && b.start <= a.end && a.end < b.end) || (b.start < a.start && a.start <= b.end && b.end < a.end)
}

/// A random valid document. With `bracket_safe` every mention is one
/// continuous span, spans nest without crossing and every link has one
/// antecedent; otherwise discontinuous mentions, crossing spans and split
/// antecedents occur.
pub fn random_document<R: Rng>(rng: &mut R, doc_id: &str, bracket_safe: bool) -> Document {
    let schema = *Schema::ALL.choose(rng).expect("schemas");
    let mut doc = Document::new(doc_id, schema);
    doc.genre = pick(rng, &["news", "fiction", "academic", "vlog"]).to_string();
    let n = rng.gen_range(1..=24);
    for i in 1..=n {
        let form = pick(rng, WORDS).to_string();
        let mut head = rng.gen_range(0..=n);
        if head == i {
            head = 0;
        }
        doc.tokens.push(Token {
            index: i,
            lemma: form.to_lowercase(),
            form,
            xpos: pick(rng, XPOS).to_string(),
            number: *Number::ALL.choose(rng).expect("numbers"),
            deprel: pick(rng, DEPRELS).to_string(),
            head,
        });
    }

    let wanted = rng.gen_range(0..=8);
    let mut attempts = 0;
    while doc.mentions.len() < wanted && attempts < 50 {
        attempts += 1;
        let s = rng.gen_range(1..=n);
        let e = rng.gen_range(s..=n.min(s + 5));
        let mut spans = vec![Span::new(s, e)];
        if !bracket_safe && e + 2 <= n && rng.gen_bool(0.3) {
            let s2 = rng.gen_range(e + 2..=n);
            spans.push(Span::new(s2, rng.gen_range(s2..=n.min(s2 + 2))));
        }
        if bracket_safe && doc.mentions.iter().any(|m| crosses(m.spans[0], spans[0])) {
            continue;
        }
        let tokens: Vec<usize> = spans.iter().flat_map(|s| s.start..=s.end).collect();
        let head_index = if rng.gen_bool(0.7) {
            find_head(&doc.tokens, &spans)
        } else {
            *tokens.choose(rng).expect("non-empty span")
        };
        doc.mentions.push(Mention {
            id: format!("m{}", doc.mentions.len() + 1),
            spans,
            head_index,
            entity_type_original: pick(rng, ORIGINAL_TYPES).to_string(),
            entity_type_unified: *UnifiedType::ALL.choose(rng).expect("types"),
            infstat: *InfStat::ALL.choose(rng).expect("infstat"),
            definiteness: *Definiteness::ALL.choose(rng).expect("definiteness"),
            chain_id: rng.gen_bool(0.5).then(|| format!("c{}", rng.gen_range(1..=3))),
        });
    }

    let k = doc.mentions.len();
    if k >= 2 {
        for _ in 0..rng.gen_range(0..=4) {
            let ana = rng.gen_range(0..k);
            let mut antes: Vec<String> = Vec::new();
            let n_antes = if !bracket_safe && k >= 3 && rng.gen_bool(0.3) { 2 } else { 1 };
            while antes.len() < n_antes {
                let a = rng.gen_range(0..k);
                let id = doc.mentions[a].id.clone();
                if a != ana && !antes.contains(&id) {
                    antes.push(id);
                }
            }
            let subtype = rng
                .gen_bool(0.6)
                .then(|| BridgingSubtype::ALL.choose(rng).expect("subtypes").as_str().to_string());
            doc.bridging.push(BridgingLink {
                anaphor_id: doc.mentions[ana].id.clone(),
                antecedent_ids: antes,
                subtype,
            });
        }
    }
    doc
}

pub fn random_documents(count: usize, seed: u64, bracket_safe: bool) -> Vec<Document> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|i| random_document(&mut rng, &format!("r{i}"), bracket_safe)).collect()
}

pub const PLANTED_MAX_DISTANCE: usize = 40;

/// The rule that generated the planted corpus, read off pair features.
pub fn planted_rule(f: &FeatureVector) -> bool {
    f.n_definite == Definiteness::Def && f.t_entity_type == f.n_entity_type && f.t_a_dist < PLANTED_MAX_DISTANCE
}

const PLANTED_TYPES: &[(UnifiedType, &[&str])] = &[
    (UnifiedType::Person, &["man", "woman", "teacher", "driver"]),
    (UnifiedType::Place, &["city", "room", "garden", "station"]),
    (UnifiedType::Concrete, &["door", "table", "engine", "window"]),
    (UnifiedType::Event, &["meeting", "party", "storm", "trial"]),
    (UnifiedType::Time, &["morning", "week", "year", "evening"]),
];

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSpec {
    pub docs: usize,
    pub mentions_per_doc: usize,
    /// Probability that a discourse-new mention is definite.
    pub definite_rate: f64,
    /// Probability that a mention re-mentions an earlier entity.
    pub remention_rate: f64,
    /// Share of re-mentions realised as a pronoun.
    pub pronoun_rate: f64,
    pub schema: Schema,
    pub id_prefix: String,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            docs: 20,
            mentions_per_doc: 30,
            definite_rate: 0.4,
            remention_rate: 0.45,
            pronoun_rate: 0.0,
            schema: Schema::GumLike,
            id_prefix: "doc".into(),
        }
    }
}

fn original_label(schema: Schema, t: UnifiedType) -> String {
    entity_type_table(schema)
        .iter()
        .find(|(_, u)| *u == t)
        .map(|(l, _)| l.to_string())
        .unwrap_or_else(|| t.as_str().to_string())
}

fn push_token(doc: &mut Document, form: &str, xpos: &str, deprel: &str, head: usize) -> usize {
    let index = doc.tokens.len() + 1;
    doc.tokens.push(Token {
        index,
        form: form.to_string(),
        lemma: form.to_lowercase(),
        xpos: xpos.to_string(),
        number: if xpos == "NN" { Number::Sing } else { Number::None },
        deprel: deprel.to_string(),
        head,
    });
    index
}

fn planted_document<R: Rng>(rng: &mut R, spec: &CorpusSpec, doc_id: String) -> Document {
    let mut doc = Document::new(doc_id, spec.schema);
    doc.genre = "synthetic".into();
    // (unified type, chain id)
    let mut entities: Vec<(usize, String)> = Vec::new();
    let mut definite_new = Vec::new();
    for k in 0..spec.mentions_per_doc {
        for _ in 0..rng.gen_range(0..=3) {
            let (form, xpos) = *[("and", "CC"), ("saw", "VBD"), ("near", "IN"), (",", ",")]
                .choose(rng)
                .expect("fillers");
            push_token(&mut doc, form, xpos, "dep", 0);
        }
        let remention = !entities.is_empty() && rng.gen_bool(spec.remention_rate);
        let (ty, chain, infstat) = if remention {
            let (ty, chain) = entities.choose(rng).expect("entities").clone();
            (ty, chain, InfStat::Giv)
        } else {
            let ty = rng.gen_range(0..PLANTED_TYPES.len());
            let chain = format!("e{}", entities.len() + 1);
            entities.push((ty, chain.clone()));
            (ty, chain, InfStat::New)
        };
        let (unified, nouns) = PLANTED_TYPES[ty];
        let id = format!("m{}", k + 1);
        let (spans, definiteness) = if remention && rng.gen_bool(spec.pronoun_rate) {
            let t = push_token(&mut doc, "it", "PRP", "nsubj", 0);
            (vec![Span::new(t, t)], Definiteness::Def)
        } else {
            let definite = !remention && rng.gen_bool(spec.definite_rate);
            let start = doc.tokens.len() + 1;
            push_token(&mut doc, if definite { "the" } else { "a" }, "DT", "det", start + 1);
            let noun = push_token(&mut doc, nouns.choose(rng).expect("nouns"), "NN", "obj", 0);
            let def = if definite { Definiteness::Def } else { Definiteness::Ind };
            (vec![Span::new(start, noun)], def)
        };
        if definiteness == Definiteness::Def && infstat == InfStat::New {
            definite_new.push(doc.mentions.len());
        }
        let head_index = find_head(&doc.tokens, &spans);
        doc.mentions.push(Mention {
            id,
            spans,
            head_index,
            entity_type_original: original_label(spec.schema, unified),
            entity_type_unified: unified,
            infstat,
            definiteness,
            chain_id: Some(chain),
        });
    }
    for &ana in &definite_new {
        let (b, ana_start) = (&doc.mentions[ana], doc.mentions[ana].start());
        let links: Vec<BridgingLink> = doc.mentions[..ana]
            .iter()
            .filter(|a| a.entity_type_unified == b.entity_type_unified && ana_start - a.start() < PLANTED_MAX_DISTANCE)
            .map(|a| BridgingLink {
                anaphor_id: b.id.clone(),
                antecedent_ids: vec![a.id.clone()],
                subtype: None,
            })
            .collect();
        doc.bridging.extend(links);
    }
    doc
}

/// Documents whose bridging links follow [`planted_rule`].
pub fn planted_corpus(spec: &CorpusSpec, seed: u64) -> Vec<Document> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..spec.docs)
        .map(|i| planted_document(&mut rng, spec, format!("{}{i:03}", spec.id_prefix)))
        .collect()
}

/// A planted corpus trimmed to exactly `links` bridging links, with pronoun
/// re-mentions among the candidates.
pub fn corpus_with_links(links: usize, seed: u64) -> Vec<Document> {
    let spec = CorpusSpec { docs: 1, pronoun_rate: 0.3, remention_rate: 0.6, ..Default::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut docs = Vec::new();
    let mut total = 0;
    while total < links {
        let mut doc = planted_document(&mut rng, &spec, format!("doc{:03}", docs.len()));
        doc.bridging.truncate(links - total);
        total += doc.bridging.len();
        docs.push(doc);
    }
    docs
}

/// Add an `extra["noise"]` feature drawn uniformly from `[0, 1)`,
/// independently of everything else.
pub fn add_noise_feature(dataset: &mut PairDataset, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for e in &mut dataset.examples {
        e.features.extra.insert("noise".into(), rng.gen());
    }
}

/// Give some links a second antecedent, link a few re-mentions as bridging
/// anaphors and stretch some mentions over a gap, as in the richer standoff
/// corpora.
pub fn roughen<R: Rng>(rng: &mut R, doc: &mut Document) {
    let k = doc.mentions.len();
    for link in &mut doc.bridging {
        if rng.gen_bool(0.1) {
            let extra = doc.mentions[rng.gen_range(0..k)].id.clone();
            if extra != link.anaphor_id && !link.antecedent_ids.contains(&extra) {
                link.antecedent_ids.push(extra);
            }
        }
        if rng.gen_bool(0.5) {
            link.subtype = Some(BridgingSubtype::ALL.choose(rng).expect("subtypes").as_str().to_string());
        }
    }
    for i in 1..k {
        if doc.mentions[i].infstat == InfStat::Giv && rng.gen_bool(0.05) {
            let ante = doc.mentions[rng.gen_range(0..i)].id.clone();
            let ana = doc.mentions[i].id.clone();
            doc.bridging.push(BridgingLink { anaphor_id: ana, antecedent_ids: vec![ante], subtype: None });
        }
    }
    let n = doc.tokens.len();
    for m in &mut doc.mentions {
        let end = m.end();
        if m.spans.len() == 1 && end + 2 <= n && doc.tokens[end].xpos != "DT" && rng.gen_bool(0.05) {
            m.spans.push(Span::new(end + 2, end + 2));
        }
    }
}

/// Write a two-corpus fixture: gum-like bracket files `gum_train.brk`,
/// `gum_dev.brk`, `gum_test.brk`, `gentle_test.brk` and arrau-like standoff
/// files `arrau_train.sff`, `arrau_dev.sff`, `arrau_test.sff`, plus an
/// exclusion list.
pub fn write_two_corpus_fixture(dir: &Path, seed: u64) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let gum = |docs: usize, prefix: &str, s: u64| {
        let spec = CorpusSpec { docs, id_prefix: prefix.into(), pronoun_rate: 0.3, ..Default::default() };
        planted_corpus(&spec, s)
    };
    let to_io = |e: crate::ingest::IngestError| io::Error::new(io::ErrorKind::InvalidData, e.to_string());
    let files = [("gum_train.brk", 8, "gtr"), ("gum_dev.brk", 2, "gdv"), ("gum_test.brk", 3, "gte"), ("gentle_test.brk", 2, "gen")];
    for (i, (name, docs, prefix)) in files.into_iter().enumerate() {
        let mut text = String::new();
        for doc in gum(docs, prefix, seed.wrapping_add(i as u64)) {
            text.push_str(&emit_bracket(&doc).map_err(to_io)?);
        }
        fs::write(dir.join(name), text)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xa77a);
    let files = [("arrau_train.sff", 10, "atr"), ("arrau_dev.sff", 2, "adv"), ("arrau_test.sff", 4, "ate")];
    let mut excluded = String::new();
    for (i, (name, docs, prefix)) in files.into_iter().enumerate() {
        let spec = CorpusSpec {
            docs,
            id_prefix: prefix.into(),
            schema: Schema::ArrauLike,
            definite_rate: 0.5,
            ..Default::default()
        };
        let mut corpus = planted_corpus(&spec, seed.wrapping_add(100 + i as u64));
        for doc in &mut corpus {
            roughen(&mut rng, doc);
        }
        if excluded.is_empty() {
            let doc = &corpus[0];
            let kept = doc.bridging.iter().rev().find(|l| {
                l.antecedent_ids.len() == 1 && doc.mention(&l.anaphor_id).is_some_and(|m| !doc.is_given(m))
            });
            if let Some(l) = kept {
                excluded = format!("{}\t{}\n", doc.doc_id, l.anaphor_id);
            }
        }
        fs::write(dir.join(name), emit_standoff(&corpus).map_err(to_io)?)?;
    }
    fs::write(dir.join("exclusions.tsv"), format!("# doc_id\tanaphor_id\n{excluded}"))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pairgen::{build_balanced_dataset, extract_features, PairConfig};

    #[test]
    fn random_documents_validate() {
        for bracket_safe in [true, false] {
            for doc in random_documents(200, 5, bracket_safe) {
                doc.validate().unwrap();
                if bracket_safe {
                    assert!(!doc.has_discontinuous() && !doc.has_split_antecedents());
                }
            }
        }
    }

    #[test]
    fn planted_links_follow_the_rule() {
        let docs = planted_corpus(&CorpusSpec { docs: 3, ..Default::default() }, 9);
        let config = PairConfig::default();
        for doc in &docs {
            doc.validate().unwrap();
            for (j, b) in doc.mentions.iter().enumerate() {
                for a in &doc.mentions[..j] {
                    let f = extract_features(doc, a, b, &config).unwrap();
                    let linked = doc.bridging.iter().any(|l| l.anaphor_id == b.id && l.antecedent_ids == [a.id.clone()]);
                    assert_eq!(linked, planted_rule(&f), "{} {} -> {}", doc.doc_id, a.id, b.id);
                }
            }
        }
        let ds = build_balanced_dataset(&docs, 1, &config).unwrap();
        assert!(ds.examples.iter().all(|e| (e.label == PairLabel::Bridging) == planted_rule(&e.features)));
    }

    #[test]
    fn exact_link_count() {
        let docs = corpus_with_links(50, 3);
        assert_eq!(docs.iter().map(|d| d.bridging.len()).sum::<usize>(), 50);
    }
}
