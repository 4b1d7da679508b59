//! Antecedent/anaphor pair enumeration, feature extraction and balanced
//! dataset construction.
//!
//! Feature names use `t_` for the antecedent side and `n_` for the anaphor
//! side; `t_a_dist` is the distance in tokens between the two mention starts.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Definiteness, Document, InfStat, Mention, Number, UnifiedType};

#[derive(Debug, Error)]
pub enum PairgenError {
    #[error("antecedent `{antecedent}` does not precede anaphor `{anaphor}`")]
    Order { antecedent: String, anaphor: String },
    #[error("no bridging links, so no distance cap can be derived")]
    NoBridging,
    #[error("corpus has no tokens")]
    NoTokens,
    #[error("dataset line {line}: {message}")]
    Format { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub const DEFAULT_PRONOUN_TAGS: &[&str] = &["PRP", "PRP$", "WP", "WP$"];
const DEFINITE_DETERMINERS: &[&str] = &["the", "this", "that", "these", "those"];
const POSSESSIVE_TAGS: &[&str] = &["PRP$", "WP$", "POS"];
const PROPER_NOUN_TAGS: &[&str] = &["NNP", "NNPS"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairConfig {
    pub pronoun_tags: BTreeSet<String>,
    /// Fill unannotated definiteness and information status heuristically.
    pub derive_missing: bool,
}

impl Default for PairConfig {
    fn default() -> Self {
        PairConfig {
            pronoun_tags: DEFAULT_PRONOUN_TAGS.iter().map(|s| s.to_string()).collect(),
            derive_missing: true,
        }
    }
}

fn head_xpos<'a>(doc: &'a Document, m: &Mention) -> &'a str {
    doc.token(m.head_index).map(|t| t.xpos.as_str()).unwrap_or("")
}

/// True when the mention's head carries one of the pronoun tags.
pub fn is_pronoun(doc: &Document, m: &Mention, pronoun_tags: &BTreeSet<String>) -> bool {
    pronoun_tags.contains(head_xpos(doc, m))
}

/// Annotated definiteness, or a determiner/possessive/proper-noun/pronoun
/// heuristic when unannotated.
pub fn derive_definiteness(doc: &Document, m: &Mention, pronoun_tags: &BTreeSet<String>) -> Definiteness {
    if m.definiteness != Definiteness::None {
        return m.definiteness;
    }
    let first = doc.token(m.start());
    let determiner = first.is_some_and(|t| {
        DEFINITE_DETERMINERS.iter().any(|d| t.lemma.eq_ignore_ascii_case(d))
            || POSSESSIVE_TAGS.contains(&t.xpos.as_str())
    });
    let head = head_xpos(doc, m);
    if determiner || PROPER_NOUN_TAGS.contains(&head) || pronoun_tags.contains(head) {
        Definiteness::Def
    } else {
        Definiteness::Ind
    }
}

/// Annotated information status, or givenness from the chain structure.
pub fn derive_infstat(doc: &Document, m: &Mention) -> InfStat {
    if m.infstat != InfStat::None {
        m.infstat
    } else if doc.is_given(m) {
        InfStat::Giv
    } else {
        InfStat::New
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub t_entity_type: UnifiedType,
    pub n_entity_type: UnifiedType,
    pub t_definite: Definiteness,
    pub n_definite: Definiteness,
    pub t_phrase_len: usize,
    pub n_phrase_len: usize,
    pub t_head_deprel: String,
    pub n_head_deprel: String,
    pub t_head_xpos: String,
    pub n_head_xpos: String,
    pub t_head_lemma: String,
    pub n_head_lemma: String,
    pub t_head_number: Number,
    pub n_head_number: Number,
    pub t_infstat: InfStat,
    pub t_a_dist: usize,
    /// Additional numeric features, keyed by name.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, f64>,
}

/// How a feature is presented to the classifier.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureValue {
    Numeric(f64),
    Categorical(String),
    /// Open-vocabulary categorical value (head lemmas).
    Lexical(String),
}

impl FeatureVector {
    /// Every feature as `(name, value)`, extras last.
    pub fn values(&self) -> Vec<(String, FeatureValue)> {
        use FeatureValue::*;
        let cat = |s: &str| Categorical(s.to_string());
        let mut out = vec![
            ("t_entity_type".to_string(), cat(self.t_entity_type.as_str())),
            ("n_entity_type".to_string(), cat(self.n_entity_type.as_str())),
            ("t_definite".to_string(), cat(self.t_definite.as_str())),
            ("n_definite".to_string(), cat(self.n_definite.as_str())),
            ("t_phrase_len".to_string(), Numeric(self.t_phrase_len as f64)),
            ("n_phrase_len".to_string(), Numeric(self.n_phrase_len as f64)),
            ("t_head_deprel".to_string(), cat(&self.t_head_deprel)),
            ("n_head_deprel".to_string(), cat(&self.n_head_deprel)),
            ("t_head_xpos".to_string(), cat(&self.t_head_xpos)),
            ("n_head_xpos".to_string(), cat(&self.n_head_xpos)),
            ("t_head_lemma".to_string(), Lexical(self.t_head_lemma.clone())),
            ("n_head_lemma".to_string(), Lexical(self.n_head_lemma.clone())),
            ("t_head_number".to_string(), cat(self.t_head_number.as_str())),
            ("n_head_number".to_string(), cat(self.n_head_number.as_str())),
            ("t_infstat".to_string(), cat(self.t_infstat.as_str())),
            ("t_a_dist".to_string(), Numeric(self.t_a_dist as f64)),
        ];
        out.extend(self.extra.iter().map(|(k, v)| (k.clone(), Numeric(*v))));
        out
    }
}

fn precedes(doc: &Document, ante: &Mention, ana: &Mention) -> bool {
    let key = |m: &Mention| {
        let pos = doc.mention_position(&m.id).unwrap_or(usize::MAX);
        (m.start(), m.first_end(), pos)
    };
    key(ante) < key(ana)
}

/// Features of the pair; the antecedent must come first in document order.
pub fn extract_features(
    doc: &Document,
    ante: &Mention,
    ana: &Mention,
    config: &PairConfig,
) -> Result<FeatureVector, PairgenError> {
    if !precedes(doc, ante, ana) {
        return Err(PairgenError::Order {
            antecedent: ante.id.clone(),
            anaphor: ana.id.clone(),
        });
    }
    Ok(features_unchecked(doc, ante, ana, config))
}

fn features_unchecked(doc: &Document, ante: &Mention, ana: &Mention, config: &PairConfig) -> FeatureVector {
    let head = |m: &Mention| doc.token(m.head_index).expect("validated head index");
    let (th, nh) = (head(ante), head(ana));
    let (t_definite, n_definite, t_infstat) = if config.derive_missing {
        (
            derive_definiteness(doc, ante, &config.pronoun_tags),
            derive_definiteness(doc, ana, &config.pronoun_tags),
            derive_infstat(doc, ante),
        )
    } else {
        (ante.definiteness, ana.definiteness, ante.infstat)
    };
    FeatureVector {
        t_entity_type: ante.entity_type_unified,
        n_entity_type: ana.entity_type_unified,
        t_definite,
        n_definite,
        t_phrase_len: ante.token_count(),
        n_phrase_len: ana.token_count(),
        t_head_deprel: th.deprel.clone(),
        n_head_deprel: nh.deprel.clone(),
        t_head_xpos: th.xpos.clone(),
        n_head_xpos: nh.xpos.clone(),
        t_head_lemma: th.lemma.clone(),
        n_head_lemma: nh.lemma.clone(),
        t_head_number: th.number,
        n_head_number: nh.number,
        t_infstat,
        t_a_dist: ana.start() - ante.start(),
        extra: BTreeMap::new(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairLabel {
    Bridging,
    Coref,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairExample {
    pub doc_id: String,
    pub antecedent_id: String,
    pub anaphor_id: String,
    pub features: FeatureVector,
    pub label: PairLabel,
}

/// Forward bridging pairs `(antecedent position, anaphor position)` and the
/// number of links whose antecedent follows the anaphor.
fn bridging_pairs(doc: &Document) -> (BTreeSet<(usize, usize)>, usize) {
    let lookup = doc.mention_lookup();
    let mut pairs = BTreeSet::new();
    let mut backward = 0;
    for link in &doc.bridging {
        let Some(&ana) = lookup.get(link.anaphor_id.as_str()) else {
            continue;
        };
        for ante_id in &link.antecedent_ids {
            let Some(&ante) = lookup.get(ante_id.as_str()) else {
                continue;
            };
            if doc.order_key(ante) < doc.order_key(ana) {
                pairs.insert((ante, ana));
            } else {
                backward += 1;
            }
        }
    }
    (pairs, backward)
}

/// Largest `t_a_dist` over all bridging pairs of the corpus.
pub fn max_bridging_distance(docs: &[Document]) -> Result<usize, PairgenError> {
    docs.iter()
        .flat_map(|doc| {
            let (pairs, _) = bridging_pairs(doc);
            pairs
                .into_iter()
                .map(|(a, b)| doc.mentions[b].start() - doc.mentions[a].start())
                .collect::<Vec<_>>()
        })
        .max()
        .ok_or(PairgenError::NoBridging)
}

fn document_order(doc: &Document) -> Vec<usize> {
    let mut order: Vec<usize> = (0..doc.mentions.len()).collect();
    order.sort_by_key(|&i| doc.order_key(i));
    order
}

fn label_of(doc: &Document, bridging: &BTreeSet<(usize, usize)>, ante: usize, ana: usize) -> PairLabel {
    let (a, b) = (&doc.mentions[ante], &doc.mentions[ana]);
    if bridging.contains(&(ante, ana)) {
        PairLabel::Bridging
    } else if a.chain_id.is_some() && a.chain_id == b.chain_id {
        PairLabel::Coref
    } else {
        PairLabel::None
    }
}

/// Every ordered mention pair of a document with its label.
pub fn enumerate_labeled_pairs(doc: &Document, config: &PairConfig) -> Vec<PairExample> {
    let (bridging, _) = bridging_pairs(doc);
    let order = document_order(doc);
    let mut out = Vec::new();
    for (j, &ana) in order.iter().enumerate() {
        for &ante in &order[..j] {
            let (a, b) = (&doc.mentions[ante], &doc.mentions[ana]);
            out.push(PairExample {
                doc_id: doc.doc_id.clone(),
                antecedent_id: a.id.clone(),
                anaphor_id: b.id.clone(),
                features: features_unchecked(doc, a, b, config),
                label: label_of(doc, &bridging, ante, ana),
            });
        }
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub corpus: String,
    pub partition: String,
    pub seed: u64,
    pub max_distance: usize,
    pub skipped_backward_links: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PairDataset {
    pub provenance: Provenance,
    pub examples: Vec<PairExample>,
}

impl PairDataset {
    pub fn count(&self, label: PairLabel) -> usize {
        self.examples.iter().filter(|e| e.label == label).count()
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    /// Subset of examples in the given order.
    pub fn select(&self, indices: &[usize]) -> PairDataset {
        PairDataset {
            provenance: self.provenance.clone(),
            examples: indices.iter().map(|&i| self.examples[i].clone()).collect(),
        }
    }

    /// Provenance header line followed by one example per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = serde_json::json!({ "provenance": &self.provenance }).to_string();
        out.push('\n');
        for e in &self.examples {
            out.push_str(&serde_json::to_value(e).expect("examples serialize").to_string());
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<PairDataset, PairgenError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let fmt_err = |line: usize, e: serde_json::Error| PairgenError::Format {
            line: line + 1,
            message: e.to_string(),
        };
        #[derive(Deserialize)]
        struct Header {
            provenance: Provenance,
        }
        let provenance = match lines.next() {
            Some((i, l)) => serde_json::from_str::<Header>(l).map_err(|e| fmt_err(i, e))?.provenance,
            None => {
                return Err(PairgenError::Format {
                    line: 1,
                    message: "missing provenance header".into(),
                })
            }
        };
        let examples = lines
            .map(|(i, l)| serde_json::from_str(l).map_err(|e| fmt_err(i, e)))
            .collect::<Result<_, _>>()?;
        Ok(PairDataset { provenance, examples })
    }

    /// Flat CSV with one column per feature.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), PairgenError> {
        let extras: BTreeSet<&str> = self
            .examples
            .iter()
            .flat_map(|e| e.features.extra.keys().map(String::as_str))
            .collect();
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["doc_id", "antecedent_id", "anaphor_id", "label"];
        let base: Vec<String> = match self.examples.first() {
            Some(e) => e.features.values().into_iter().map(|(k, _)| k).filter(|k| !e.features.extra.contains_key(k)).collect(),
            None => Vec::new(),
        };
        header.extend(base.iter().map(String::as_str));
        header.extend(extras.iter().copied());
        w.write_record(&header)?;
        for e in &self.examples {
            let label = match e.label {
                PairLabel::Bridging => "bridging",
                PairLabel::Coref => "coref",
                PairLabel::None => "none",
            };
            let mut row = vec![e.doc_id.clone(), e.antecedent_id.clone(), e.anaphor_id.clone(), label.to_string()];
            for (name, value) in e.features.values() {
                if e.features.extra.contains_key(&name) {
                    continue;
                }
                row.push(match value {
                    FeatureValue::Numeric(v) => v.to_string(),
                    FeatureValue::Categorical(s) | FeatureValue::Lexical(s) => s,
                });
            }
            for k in &extras {
                row.push(e.features.extra.get(*k).map(|v| v.to_string()).unwrap_or_default());
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

struct Candidate {
    doc: usize,
    ante: usize,
    ana: usize,
}

/// All bridging pairs plus equally many sampled coreference and
/// non-coreference pairs.
///
/// Negatives must have a non-pronoun anaphor and lie within the largest
/// attested bridging distance. Candidates are ordered by document id and
/// mention ids before seeded sampling without replacement, so the result is
/// a function of `(docs, seed, config)` only.
pub fn build_balanced_dataset(
    docs: &[Document],
    seed: u64,
    config: &PairConfig,
) -> Result<PairDataset, PairgenError> {
    let max_distance = max_bridging_distance(docs)?;

    let mut doc_order: Vec<usize> = (0..docs.len()).collect();
    doc_order.sort_by(|&a, &b| docs[a].doc_id.cmp(&docs[b].doc_id));

    let mut bridging = Vec::new();
    let mut coref = Vec::new();
    let mut none = Vec::new();
    let mut backward = 0;
    for &d in &doc_order {
        let doc = &docs[d];
        let (pairs, skipped) = bridging_pairs(doc);
        backward += skipped;
        let ids = |c: &Candidate| (doc.mentions[c.ante].id.clone(), doc.mentions[c.ana].id.clone());
        let mut doc_bridging: Vec<Candidate> =
            pairs.iter().map(|&(ante, ana)| Candidate { doc: d, ante, ana }).collect();
        doc_bridging.sort_by_key(ids);

        let order = document_order(doc);
        let mut doc_coref = Vec::new();
        let mut doc_none = Vec::new();
        for (j, &ana) in order.iter().enumerate() {
            if is_pronoun(doc, &doc.mentions[ana], &config.pronoun_tags) {
                continue;
            }
            let ana_start = doc.mentions[ana].start();
            for &ante in order[..j].iter().rev() {
                if ana_start - doc.mentions[ante].start() > max_distance {
                    break;
                }
                let candidate = Candidate { doc: d, ante, ana };
                match label_of(doc, &pairs, ante, ana) {
                    PairLabel::Bridging => {}
                    PairLabel::Coref => doc_coref.push(candidate),
                    PairLabel::None => doc_none.push(candidate),
                }
            }
        }
        doc_coref.sort_by_key(ids);
        doc_none.sort_by_key(ids);
        bridging.extend(doc_bridging);
        coref.extend(doc_coref);
        none.extend(doc_none);
    }

    let wanted = bridging.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut warnings = Vec::new();
    let mut sample = |pool: Vec<Candidate>, name: &str| -> Vec<Candidate> {
        if pool.len() < wanted {
            warnings.push(format!(
                "only {} {name} candidates for {wanted} bridging pairs",
                pool.len()
            ));
            return pool;
        }
        let mut picked = rand::seq::index::sample(&mut rng, pool.len(), wanted).into_vec();
        picked.sort_unstable();
        let keep: HashSet<usize> = picked.into_iter().collect();
        pool.into_iter()
            .enumerate()
            .filter_map(|(i, c)| keep.contains(&i).then_some(c))
            .collect()
    };
    let coref = sample(coref, "coref");
    let none = sample(none, "non-coreference");

    let mut examples = Vec::with_capacity(wanted * 3);
    for (pool, label) in [(bridging, PairLabel::Bridging), (coref, PairLabel::Coref), (none, PairLabel::None)] {
        for c in pool {
            let doc = &docs[c.doc];
            let (a, b) = (&doc.mentions[c.ante], &doc.mentions[c.ana]);
            examples.push(PairExample {
                doc_id: doc.doc_id.clone(),
                antecedent_id: a.id.clone(),
                anaphor_id: b.id.clone(),
                features: features_unchecked(doc, a, b, config),
                label,
            });
        }
    }

    Ok(PairDataset {
        provenance: Provenance {
            corpus: String::new(),
            partition: String::new(),
            seed,
            max_distance,
            skipped_backward_links: backward,
            warnings,
        },
        examples,
    })
}

/// Bridging links per thousand tokens.
pub fn bridging_rate_per_1k(docs: &[Document]) -> Result<f64, PairgenError> {
    let links: usize = docs.iter().map(|d| d.bridging.len()).sum();
    let tokens: usize = docs.iter().map(|d| d.tokens.len()).sum();
    rate_per_1k(links, tokens)
}

pub fn rate_per_1k(links: usize, tokens: usize) -> Result<f64, PairgenError> {
    if tokens == 0 {
        return Err(PairgenError::NoTokens);
    }
    Ok(1000.0 * links as f64 / tokens as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::testing::*;
    use crate::model::{BridgingLink, Schema, Token};

    fn tok(index: usize, lemma: &str, xpos: &str, head: usize) -> Token {
        let mut t = token(index, lemma, xpos, head);
        t.lemma = lemma.to_string();
        t
    }

    /// "a house ... the door": tokens 1-2 and 4-5.
    fn house_doc() -> Document {
        let mut doc = Document::new("h", Schema::GumLike);
        doc.tokens = vec![
            tok(1, "a", "DT", 2),
            tok(2, "house", "NN", 0),
            tok(3, "with", "IN", 2),
            tok(4, "the", "DT", 5),
            tok(5, "door", "NN", 3),
            tok(6, "it", "PRP", 2),
        ];
        let mut a = mention("m1", &[(1, 2)], None);
        a.head_index = 2;
        let mut b = mention("m2", &[(4, 5)], None);
        b.head_index = 5;
        let c = mention("m3", &[(6, 6)], None);
        doc.mentions = vec![a, b, c];
        doc
    }

    #[test]
    fn definiteness_heuristic() {
        let doc = house_doc();
        let tags = PairConfig::default().pronoun_tags;
        assert_eq!(derive_definiteness(&doc, &doc.mentions[1], &tags), Definiteness::Def);
        assert_eq!(derive_definiteness(&doc, &doc.mentions[0], &tags), Definiteness::Ind);
        assert_eq!(derive_definiteness(&doc, &doc.mentions[2], &tags), Definiteness::Def);
        let mut annotated = doc.mentions[1].clone();
        annotated.definiteness = Definiteness::Ind;
        assert_eq!(derive_definiteness(&doc, &annotated, &tags), Definiteness::Ind);
    }

    #[test]
    fn infstat_derivation() {
        let mut doc = flat_doc(10);
        doc.mentions.push(mention("a", &[(1, 1)], Some("c")));
        doc.mentions.push(mention("b", &[(5, 5)], Some("c")));
        doc.mentions.push(mention("s", &[(7, 7)], None));
        assert_eq!(derive_infstat(&doc, &doc.mentions[1]), InfStat::Giv);
        assert_eq!(derive_infstat(&doc, &doc.mentions[0]), InfStat::New);
        assert_eq!(derive_infstat(&doc, &doc.mentions[2]), InfStat::New);
        let mut acc = doc.mentions[2].clone();
        acc.infstat = InfStat::Acc;
        assert_eq!(derive_infstat(&doc, &acc), InfStat::Acc);
    }

    #[test]
    fn pronoun_tags_are_configurable() {
        let mut doc = house_doc();
        let default = PairConfig::default().pronoun_tags;
        assert!(is_pronoun(&doc, &doc.mentions[2], &default));
        assert!(!is_pronoun(&doc, &doc.mentions[1], &default));
        doc.tokens[5].xpos = "PRON".into();
        let custom: BTreeSet<String> = ["PRON".to_string()].into();
        assert!(is_pronoun(&doc, &doc.mentions[2], &custom));
        assert!(!is_pronoun(&doc, &doc.mentions[2], &default));
    }

    #[test]
    fn feature_arithmetic() {
        let mut doc = flat_doc(12);
        doc.mentions.push(mention("a", &[(2, 4)], None));
        doc.mentions.push(mention("b", &[(10, 10)], None));
        doc.mentions.push(mention("c", &[(5, 5)], None));
        doc.mentions.push(mention("d", &[(6, 6)], None));
        let cfg = PairConfig::default();
        let f = extract_features(&doc, &doc.mentions[0], &doc.mentions[1], &cfg).unwrap();
        assert_eq!((f.t_a_dist, f.t_phrase_len, f.n_phrase_len), (8, 3, 1));
        let f = extract_features(&doc, &doc.mentions[2], &doc.mentions[3], &cfg).unwrap();
        assert_eq!(f.t_a_dist, 1);
        assert!(matches!(
            extract_features(&doc, &doc.mentions[1], &doc.mentions[0], &cfg),
            Err(PairgenError::Order { .. })
        ));
    }

    #[test]
    fn discontinuous_phrase_length_counts_all_spans() {
        let mut doc = flat_doc(12);
        doc.mentions.push(mention("a", &[(2, 3), (6, 6)], None));
        doc.mentions.push(mention("b", &[(9, 9)], None));
        let f = extract_features(&doc, &doc.mentions[0], &doc.mentions[1], &PairConfig::default()).unwrap();
        assert_eq!(f.t_phrase_len, 3);
    }

    fn links_at(distances: &[usize]) -> Document {
        let mut doc = flat_doc(200);
        for (k, d) in distances.iter().enumerate() {
            let s = 1 + k * 50;
            doc.mentions.push(mention(&format!("a{k}"), &[(s, s)], None));
            doc.mentions.push(mention(&format!("b{k}"), &[(s + d, s + d)], None));
            doc.bridging.push(BridgingLink::new(&format!("b{k}"), &[&format!("a{k}")], None));
        }
        doc
    }

    #[test]
    fn distance_cap() {
        assert_eq!(max_bridging_distance(&[links_at(&[3, 40, 12])]).unwrap(), 40);
        assert_eq!(max_bridging_distance(&[links_at(&[7])]).unwrap(), 7);
        assert!(matches!(max_bridging_distance(&[]), Err(PairgenError::NoBridging)));
    }

    #[test]
    fn enumeration_labels() {
        let mut doc = flat_doc(10);
        doc.mentions.push(mention("a", &[(1, 1)], None));
        doc.mentions.push(mention("b", &[(3, 3)], None));
        doc.mentions.push(mention("c", &[(5, 5)], None));
        let pairs = enumerate_labeled_pairs(&doc, &PairConfig::default());
        assert_eq!(pairs.len(), 3);
        assert!(pairs.iter().all(|p| p.label == PairLabel::None));

        doc.mentions[0].chain_id = Some("k".into());
        doc.mentions[2].chain_id = Some("k".into());
        doc.bridging.push(BridgingLink::new("b", &["a"], None));
        let pairs = enumerate_labeled_pairs(&doc, &PairConfig::default());
        let label = |a: &str, b: &str| {
            pairs
                .iter()
                .find(|p| p.antecedent_id == a && p.anaphor_id == b)
                .unwrap()
                .label
        };
        assert_eq!(label("a", "b"), PairLabel::Bridging);
        assert_eq!(label("a", "c"), PairLabel::Coref);
        assert_eq!(label("b", "c"), PairLabel::None);
    }

    #[test]
    fn rates() {
        let r = rate_per_1k(1900, 228_000).unwrap();
        assert!((r - 8.3).abs() <= 0.05, "{r}");
        assert_eq!(rate_per_1k(12, 1000).unwrap(), 12.0);
        assert_eq!(rate_per_1k(0, 500).unwrap(), 0.0);
        assert!(rate_per_1k(3, 0).is_err());
    }

    #[test]
    fn empty_corpus_has_no_dataset() {
        let doc = flat_doc(5);
        assert!(matches!(
            build_balanced_dataset(&[doc], 1, &PairConfig::default()),
            Err(PairgenError::NoBridging)
        ));
    }

    #[test]
    fn shortage_is_recorded() {
        let doc = links_at(&[3, 4]);
        let ds = build_balanced_dataset(&[doc], 1, &PairConfig::default()).unwrap();
        assert_eq!(ds.count(PairLabel::Bridging), 2);
        assert_eq!(ds.count(PairLabel::Coref), 0);
        assert!(ds.provenance.warnings.iter().any(|w| w.contains("coref")));
    }

    #[test]
    fn jsonl_and_csv_export() {
        let doc = links_at(&[3, 4]);
        let ds = build_balanced_dataset(&[doc], 1, &PairConfig::default()).unwrap();
        let back = PairDataset::from_jsonl(&ds.to_jsonl()).unwrap();
        assert_eq!(back, ds);
        let mut buf = Vec::new();
        ds.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let header = text.lines().next().unwrap();
        assert!(header.starts_with("doc_id,antecedent_id,anaphor_id,label,t_entity_type"));
        assert!(header.ends_with("t_a_dist"));
        assert_eq!(text.lines().count(), ds.len() + 1);
    }
}
