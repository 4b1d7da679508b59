//! Reduce standoff-style annotations to the bracket scope and unify entity
//! types.
//!
//! A corpus pass applies, per document and in this order: discontinuous
//! mentions are flattened to their envelope, split-antecedent links are
//! dropped, links whose anaphor already has an earlier coreferent mention
//! are dropped, manually excluded links are dropped, entity types are mapped
//! to the unified inventory and subtype labels are checked. A link that
//! qualifies for several removals is counted under the first rule only.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Document, Schema, Span, UnifiedType};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown {schema} entity type `{label}`")]
pub struct UnknownEntityType {
    pub schema: Schema,
    pub label: String,
}

const GUM_TYPES: &[(&str, UnifiedType)] = &[
    ("person", UnifiedType::Person),
    ("place", UnifiedType::Place),
    ("organization", UnifiedType::Organization),
    ("object", UnifiedType::Concrete),
    ("plant", UnifiedType::Concrete),
    ("event", UnifiedType::Event),
    ("time", UnifiedType::Time),
    ("substance", UnifiedType::Substance),
    ("animal", UnifiedType::Animate),
    ("abstract", UnifiedType::Abstract),
];

const ARRAU_TYPES: &[(&str, UnifiedType)] = &[
    ("person", UnifiedType::Person),
    ("space", UnifiedType::Place),
    ("organization", UnifiedType::Organization),
    ("concrete", UnifiedType::Concrete),
    ("plan", UnifiedType::Event),
    ("time", UnifiedType::Time),
    ("substance", UnifiedType::Substance),
    ("medicine", UnifiedType::Substance),
    ("animate", UnifiedType::Animate),
    ("abstract", UnifiedType::Abstract),
    ("undersp-onto", UnifiedType::Abstract),
    ("disease", UnifiedType::Abstract),
    ("numerical", UnifiedType::Abstract),
    ("none", UnifiedType::Abstract),
];

/// Original-to-unified entity type table of one schema.
pub fn entity_type_table(schema: Schema) -> &'static [(&'static str, UnifiedType)] {
    match schema {
        Schema::GumLike => GUM_TYPES,
        Schema::ArrauLike => ARRAU_TYPES,
        Schema::Canonical => &[],
    }
}

/// Map an original entity label to the unified inventory (case-insensitive).
///
/// Canonical-schema documents already carry unified names, which map to
/// themselves.
pub fn unify_entity_type(schema: Schema, original: &str) -> Result<UnifiedType, UnknownEntityType> {
    let unknown = || UnknownEntityType {
        schema,
        label: original.to_string(),
    };
    if schema == Schema::Canonical {
        return original
            .parse::<UnifiedType>()
            .ok()
            .filter(|t| *t != UnifiedType::Unresolved)
            .ok_or_else(unknown);
    }
    entity_type_table(schema)
        .iter()
        .find(|(label, _)| label.eq_ignore_ascii_case(original))
        .map(|&(_, unified)| unified)
        .ok_or_else(unknown)
}

/// Relation labels of the standoff schema.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BridgingSubtype {
    Poss,
    PossInv,
    Element,
    ElementInv,
    Subset,
    SubsetInv,
    Other,
    OtherInv,
    UnderspRel,
}

impl BridgingSubtype {
    pub const ALL: [BridgingSubtype; 9] = [
        BridgingSubtype::Poss,
        BridgingSubtype::PossInv,
        BridgingSubtype::Element,
        BridgingSubtype::ElementInv,
        BridgingSubtype::Subset,
        BridgingSubtype::SubsetInv,
        BridgingSubtype::Other,
        BridgingSubtype::OtherInv,
        BridgingSubtype::UnderspRel,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BridgingSubtype::Poss => "poss",
            BridgingSubtype::PossInv => "poss-inv",
            BridgingSubtype::Element => "element",
            BridgingSubtype::ElementInv => "element-inv",
            BridgingSubtype::Subset => "subset",
            BridgingSubtype::SubsetInv => "subset-inv",
            BridgingSubtype::Other => "other",
            BridgingSubtype::OtherInv => "other-inv",
            BridgingSubtype::UnderspRel => "undersp-rel",
        }
    }
}

impl FromStr for BridgingSubtype {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        BridgingSubtype::ALL
            .into_iter()
            .find(|t| t.as_str().eq_ignore_ascii_case(s))
            .ok_or(())
    }
}

impl fmt::Display for BridgingSubtype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubtypeViolation {
    pub doc_id: String,
    pub anaphor_id: String,
    pub antecedent_ids: Vec<String>,
    pub subtype: String,
}

/// Links whose subtype is neither a known label nor unmarked.
pub fn validate_subtypes(doc: &Document) -> Vec<SubtypeViolation> {
    doc.bridging
        .iter()
        .filter_map(|link| {
            let label = link.subtype.as_deref()?;
            label.parse::<BridgingSubtype>().is_err().then(|| SubtypeViolation {
                doc_id: doc.doc_id.clone(),
                anaphor_id: link.anaphor_id.clone(),
                antecedent_ids: link.antecedent_ids.clone(),
                subtype: label.to_string(),
            })
        })
        .collect()
}

/// Remove every link with more than one antecedent.
pub fn drop_split_antecedent_links(doc: &Document) -> (Document, usize) {
    let mut out = doc.clone();
    out.bridging.retain(|l| !l.is_split_antecedent());
    let removed = doc.bridging.len() - out.bridging.len();
    (out, removed)
}

/// Remove every link whose anaphor has an earlier member in its chain.
pub fn drop_given_anaphor_links(doc: &Document) -> (Document, usize) {
    let given = doc.given_flags();
    let lookup = doc.mention_lookup();
    let mut out = doc.clone();
    out.bridging
        .retain(|l| !lookup.get(l.anaphor_id.as_str()).is_some_and(|&i| given[i]));
    let removed = doc.bridging.len() - out.bridging.len();
    (out, removed)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlattenRecord {
    pub doc_id: String,
    pub mention_id: String,
    pub original_spans: Vec<Span>,
}

/// Two mentions that became indistinguishable after flattening.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeConflict {
    pub doc_id: String,
    pub mention_ids: [String; 2],
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Flattened {
    pub doc: Document,
    pub count: usize,
    pub records: Vec<FlattenRecord>,
    pub conflicts: Vec<MergeConflict>,
}

/// Replace each discontinuous mention by its envelope span.
pub fn flatten_discontinuous(doc: &Document) -> Flattened {
    let mut out = doc.clone();
    let mut records = Vec::new();
    for m in out.mentions.iter_mut().filter(|m| m.is_discontinuous()) {
        records.push(FlattenRecord {
            doc_id: doc.doc_id.clone(),
            mention_id: m.id.clone(),
            original_spans: m.spans.clone(),
        });
        m.spans = vec![Span::new(m.start(), m.end())];
    }
    let mut conflicts = Vec::new();
    for r in &records {
        let i = out.mention_position(&r.mention_id).expect("flattened mention exists");
        let a = &out.mentions[i];
        for (j, b) in out.mentions.iter().enumerate() {
            // Report each unordered pair once; pairs of two flattened
            // mentions are reported from the earlier one.
            let b_flattened = records.iter().any(|x| x.mention_id == b.id);
            if j == i || (b_flattened && j < i) {
                continue;
            }
            if a.spans == b.spans && a.chain_id == b.chain_id {
                conflicts.push(MergeConflict {
                    doc_id: doc.doc_id.clone(),
                    mention_ids: [a.id.clone(), b.id.clone()],
                    span: a.spans[0],
                });
            }
        }
    }
    Flattened {
        doc: out,
        count: records.len(),
        records,
        conflicts,
    }
}

/// `(doc_id, anaphor_id)` pairs whose links are removed by hand.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExclusionList {
    pub entries: BTreeSet<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("exclusion list line {line}: expected `doc_id<TAB>anaphor_id`")]
pub struct ExclusionParseError {
    pub line: usize,
}

impl ExclusionList {
    pub fn parse(text: &str) -> Result<Self, ExclusionParseError> {
        let mut entries = BTreeSet::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split('\t');
            match (parts.next(), parts.next(), parts.next()) {
                (Some(doc), Some(ana), None) if !doc.is_empty() && !ana.is_empty() => {
                    entries.insert((doc.to_string(), ana.trim().to_string()));
                }
                _ => return Err(ExclusionParseError { line: i + 1 }),
            }
        }
        Ok(ExclusionList { entries })
    }

    pub fn contains(&self, doc_id: &str, anaphor_id: &str) -> bool {
        self.entries.contains(&(doc_id.to_string(), anaphor_id.to_string()))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HarmonizeOptions {
    pub exclusions: ExclusionList,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainTypeConflict {
    pub doc_id: String,
    pub chain_id: String,
    pub types: Vec<UnifiedType>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HarmonizeReport {
    pub flattened_discontinuous: usize,
    pub removed_split_antecedent: usize,
    pub removed_given_anaphor: usize,
    pub removed_excluded: usize,
    pub entity_type_remaps: usize,
    pub unresolved_entity_types: Vec<String>,
    pub subtype_violations: Vec<SubtypeViolation>,
    pub merge_conflicts: Vec<MergeConflict>,
    pub chain_type_conflicts: Vec<ChainTypeConflict>,
    /// Pre-flattening spans of every flattened mention.
    pub flattened: Vec<FlattenRecord>,
}

impl HarmonizeReport {
    /// True when the pass changed nothing.
    pub fn is_zero_delta(&self) -> bool {
        self.flattened_discontinuous == 0
            && self.removed_split_antecedent == 0
            && self.removed_given_anaphor == 0
            && self.removed_excluded == 0
            && self.entity_type_remaps == 0
    }

    pub fn counts(&self) -> (usize, usize, usize) {
        (
            self.removed_split_antecedent,
            self.removed_given_anaphor,
            self.flattened_discontinuous,
        )
    }

    /// Add another report's counts and listings to this one.
    pub fn absorb(&mut self, other: HarmonizeReport) {
        self.flattened_discontinuous += other.flattened_discontinuous;
        self.removed_split_antecedent += other.removed_split_antecedent;
        self.removed_given_anaphor += other.removed_given_anaphor;
        self.removed_excluded += other.removed_excluded;
        self.entity_type_remaps += other.entity_type_remaps;
        self.unresolved_entity_types.extend(other.unresolved_entity_types);
        self.unresolved_entity_types.sort();
        self.unresolved_entity_types.dedup();
        self.subtype_violations.extend(other.subtype_violations);
        self.merge_conflicts.extend(other.merge_conflicts);
        self.chain_type_conflicts.extend(other.chain_type_conflicts);
        self.flattened.extend(other.flattened);
    }
}

impl fmt::Display for HarmonizeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows = [
            ("flattened discontinuous mentions", self.flattened_discontinuous),
            ("removed split-antecedent links", self.removed_split_antecedent),
            ("removed given-anaphor links", self.removed_given_anaphor),
            ("removed excluded links", self.removed_excluded),
            ("entity type remaps", self.entity_type_remaps),
            ("subtype violations", self.subtype_violations.len()),
            ("merge conflicts", self.merge_conflicts.len()),
            ("chain type conflicts", self.chain_type_conflicts.len()),
        ];
        for (label, n) in rows {
            writeln!(f, "{label:<34}{n:>8}")?;
        }
        if !self.unresolved_entity_types.is_empty() {
            writeln!(f, "{:<34}{}", "unresolved entity types", self.unresolved_entity_types.join(", "))?;
        }
        Ok(())
    }
}

/// Harmonize one document.
pub fn harmonize_document(doc: &Document, options: &HarmonizeOptions) -> (Document, HarmonizeReport) {
    let mut report = HarmonizeReport::default();

    let flat = flatten_discontinuous(doc);
    report.flattened_discontinuous = flat.count;
    report.flattened = flat.records;
    report.merge_conflicts = flat.conflicts;

    let (doc, n) = drop_split_antecedent_links(&flat.doc);
    report.removed_split_antecedent = n;
    let (mut doc, n) = drop_given_anaphor_links(&doc);
    report.removed_given_anaphor = n;

    let before = doc.bridging.len();
    let doc_id = doc.doc_id.clone();
    doc.bridging
        .retain(|l| !options.exclusions.contains(&doc_id, &l.anaphor_id));
    report.removed_excluded = before - doc.bridging.len();

    let mut unresolved = BTreeSet::new();
    for m in &mut doc.mentions {
        let unified = match unify_entity_type(doc.schema, &m.entity_type_original) {
            Ok(t) => t,
            Err(e) => {
                unresolved.insert(e.label);
                UnifiedType::Unresolved
            }
        };
        if unified != m.entity_type_unified {
            report.entity_type_remaps += 1;
            m.entity_type_unified = unified;
        }
    }
    report.unresolved_entity_types = unresolved.into_iter().collect();

    let mut chains: BTreeMap<&str, BTreeSet<UnifiedType>> = BTreeMap::new();
    for m in &doc.mentions {
        if let Some(c) = m.chain_id.as_deref() {
            chains.entry(c).or_default().insert(m.entity_type_unified);
        }
    }
    report.chain_type_conflicts = chains
        .into_iter()
        .filter(|(_, types)| types.len() > 1)
        .map(|(chain, types)| ChainTypeConflict {
            doc_id: doc.doc_id.clone(),
            chain_id: chain.to_string(),
            types: types.into_iter().collect(),
        })
        .collect();

    report.subtype_violations = validate_subtypes(&doc);
    (doc, report)
}

/// Harmonize every document; reports are summed in document order.
pub fn harmonize_corpus(docs: &[Document], options: &HarmonizeOptions) -> (Vec<Document>, HarmonizeReport) {
    let results: Vec<(Document, HarmonizeReport)> = docs
        .par_iter()
        .map(|d| harmonize_document(d, options))
        .collect();
    let mut report = HarmonizeReport::default();
    let mut out = Vec::with_capacity(results.len());
    for (doc, r) in results {
        report.absorb(r);
        out.push(doc);
    }
    (out, report)
}
