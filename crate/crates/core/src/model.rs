//! Canonical in-memory document model.
//!
//! Token positions are 1-based and spans are inclusive, so a single-token
//! mention at position `k` has the span `[k, k]`. Documents are plain values:
//! every transformation in the crate builds a new [`Document`].

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// A label string that is not part of a closed inventory.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid {kind} label `{value}`")]
pub struct ParseLabelError {
    pub kind: &'static str,
    pub value: String,
}

macro_rules! label_enum {
    ($(#[$meta:meta])* $name:ident, $kind:literal { $($variant:ident => $label:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $label),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = ParseLabelError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                $(if s.eq_ignore_ascii_case($label) {
                    return Ok($name::$variant);
                })+
                Err(ParseLabelError { kind: $kind, value: s.to_string() })
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                serializer.serialize_str(self.as_str())
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
                let s = String::deserialize(deserializer)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

label_enum!(
    /// Grammatical number of a token.
    Number, "number" { Sing => "sing", Plur => "plur", None => "none" }
);

label_enum!(
    /// Information status of a mention.
    InfStat, "infstat" { New => "new", Giv => "giv", Acc => "acc", None => "none" }
);

label_enum!(
    Definiteness, "definiteness" { Def => "def", Ind => "ind", None => "none" }
);

label_enum!(
    /// Annotation scheme a document was read from.
    Schema, "schema" { GumLike => "gum_like", ArrauLike => "arrau_like", Canonical => "canonical" }
);

label_enum!(
    /// Entity types shared by both corpus families.
    UnifiedType, "unified entity type" {
        Person => "person",
        Place => "place",
        Organization => "organization",
        Concrete => "concrete",
        Event => "event",
        Time => "time",
        Substance => "substance",
        Animate => "animate",
        Abstract => "abstract",
        Unresolved => "unresolved",
    }
);

impl UnifiedType {
    /// The nine resolved types, excluding [`UnifiedType::Unresolved`].
    pub fn resolved() -> &'static [UnifiedType] {
        &Self::ALL[..9]
    }
}

/// Inclusive token range, serialized as `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end + 1 - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end < self.start
    }

    pub fn contains(&self, index: usize) -> bool {
        self.start <= index && index <= self.end
    }
}

impl From<[usize; 2]> for Span {
    fn from([start, end]: [usize; 2]) -> Self {
        Span { start, end }
    }
}

impl From<Span> for [usize; 2] {
    fn from(span: Span) -> Self {
        [span.start, span.end]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub index: usize,
    pub form: String,
    pub lemma: String,
    pub xpos: String,
    pub number: Number,
    pub deprel: String,
    /// Index of the syntactic head, `0` for the root.
    pub head: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mention {
    pub id: String,
    pub spans: Vec<Span>,
    pub head_index: usize,
    pub entity_type_original: String,
    pub entity_type_unified: UnifiedType,
    pub infstat: InfStat,
    pub definiteness: Definiteness,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain_id: Option<String>,
}

impl Mention {
    /// Start of the first span; the key used for document order.
    pub fn start(&self) -> usize {
        self.spans[0].start
    }

    /// End of the first span, the secondary document-order key.
    pub fn first_end(&self) -> usize {
        self.spans[0].end
    }

    /// Last token covered by any span.
    pub fn end(&self) -> usize {
        self.spans.iter().map(|s| s.end).max().unwrap_or(0)
    }

    pub fn is_discontinuous(&self) -> bool {
        self.spans.len() > 1
    }

    /// Number of tokens covered across all spans.
    pub fn token_count(&self) -> usize {
        self.spans.iter().map(Span::len).sum()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.spans.iter().any(|s| s.contains(index))
    }

    /// Token indices covered by the mention, in order.
    pub fn token_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.spans.iter().flat_map(|s| s.start..=s.end)
    }
}

/// Start of the mention's first span.
pub fn mention_start(m: &Mention) -> usize {
    m.start()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BridgingLink {
    pub anaphor_id: String,
    pub antecedent_ids: Vec<String>,
    /// Relation label; `None` means unmarked.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subtype: Option<String>,
}

impl BridgingLink {
    pub fn new(anaphor: &str, antecedents: &[&str], subtype: Option<&str>) -> Self {
        BridgingLink {
            anaphor_id: anaphor.to_string(),
            antecedent_ids: antecedents.iter().map(|s| s.to_string()).collect(),
            subtype: subtype.map(str::to_string),
        }
    }

    pub fn is_split_antecedent(&self) -> bool {
        self.antecedent_ids.len() > 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    pub genre: String,
    pub schema: Schema,
    pub tokens: Vec<Token>,
    pub mentions: Vec<Mention>,
    pub bridging: Vec<BridgingLink>,
}

/// An invariant breach, located by a field path such as `mentions[2].spans[0]`.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{path}: {message}")]
pub struct ValidationError {
    pub path: String,
    pub message: String,
}

fn breach(path: impl Into<String>, message: impl Into<String>) -> ValidationError {
    ValidationError {
        path: path.into(),
        message: message.into(),
    }
}

impl Document {
    pub fn new(doc_id: impl Into<String>, schema: Schema) -> Self {
        Document {
            doc_id: doc_id.into(),
            genre: String::new(),
            schema,
            tokens: Vec::new(),
            mentions: Vec::new(),
            bridging: Vec::new(),
        }
    }

    pub fn token(&self, index: usize) -> Option<&Token> {
        index.checked_sub(1).and_then(|i| self.tokens.get(i))
    }

    pub fn mention(&self, id: &str) -> Option<&Mention> {
        self.mentions.iter().find(|m| m.id == id)
    }

    pub fn mention_position(&self, id: &str) -> Option<usize> {
        self.mentions.iter().position(|m| m.id == id)
    }

    /// Map from mention id to its position in `mentions`.
    pub fn mention_lookup(&self) -> HashMap<&str, usize> {
        self.mentions
            .iter()
            .enumerate()
            .map(|(i, m)| (m.id.as_str(), i))
            .collect()
    }

    /// Total document order over mentions: first-span start, then first-span
    /// end, then list position.
    pub fn order_key(&self, position: usize) -> (usize, usize, usize) {
        let m = &self.mentions[position];
        (m.start(), m.first_end(), position)
    }

    /// True when an earlier member of the mention's chain exists.
    pub fn is_given(&self, m: &Mention) -> bool {
        let Some(chain) = m.chain_id.as_deref() else {
            return false;
        };
        let position = self.mention_position(&m.id).unwrap_or(self.mentions.len());
        let key = (m.start(), m.first_end(), position);
        self.mentions.iter().enumerate().any(|(i, other)| {
            i != position
                && other.chain_id.as_deref() == Some(chain)
                && (other.start(), other.first_end(), i) < key
        })
    }

    /// `is_given` for every mention at once, indexed like `mentions`.
    pub fn given_flags(&self) -> Vec<bool> {
        let mut first: HashMap<&str, (usize, usize, usize)> = HashMap::new();
        for (i, m) in self.mentions.iter().enumerate() {
            if let Some(chain) = m.chain_id.as_deref() {
                let key = self.order_key(i);
                first
                    .entry(chain)
                    .and_modify(|k| *k = (*k).min(key))
                    .or_insert(key);
            }
        }
        self.mentions
            .iter()
            .enumerate()
            .map(|(i, m)| match m.chain_id.as_deref() {
                Some(chain) => first[chain] != self.order_key(i),
                None => false,
            })
            .collect()
    }

    pub fn has_discontinuous(&self) -> bool {
        self.mentions.iter().any(Mention::is_discontinuous)
    }

    pub fn has_split_antecedents(&self) -> bool {
        self.bridging.iter().any(BridgingLink::is_split_antecedent)
    }

    /// Check every structural invariant of the model.
    pub fn validate(&self) -> Result<(), ValidationError> {
        let n = self.tokens.len();
        for (i, t) in self.tokens.iter().enumerate() {
            if t.index != i + 1 {
                return Err(breach(
                    format!("tokens[{i}].index"),
                    format!("expected {}, found {}", i + 1, t.index),
                ));
            }
            if t.head > n || t.head == t.index {
                return Err(breach(
                    format!("tokens[{i}].head"),
                    format!("head {} is not 0 or another token index", t.head),
                ));
            }
        }

        let mut ids: HashMap<&str, usize> = HashMap::new();
        for (i, m) in self.mentions.iter().enumerate() {
            if ids.insert(m.id.as_str(), i).is_some() {
                return Err(breach(
                    format!("mentions[{i}].id"),
                    format!("duplicate mention id `{}`", m.id),
                ));
            }
            if m.spans.is_empty() {
                return Err(breach(format!("mentions[{i}].spans"), "no spans"));
            }
            for (j, s) in m.spans.iter().enumerate() {
                let path = format!("mentions[{i}].spans[{j}]");
                if s.start == 0 || s.end > n {
                    return Err(breach(
                        path,
                        format!("[{}, {}] outside tokens 1..{n}", s.start, s.end),
                    ));
                }
                if s.start > s.end {
                    return Err(breach(path, format!("start {} > end {}", s.start, s.end)));
                }
                if j > 0 && s.start <= m.spans[j - 1].end {
                    return Err(breach(path, "spans overlap or are out of order"));
                }
            }
            if !m.contains(m.head_index) {
                return Err(breach(
                    format!("mentions[{i}].head_index"),
                    format!("head {} outside mention spans", m.head_index),
                ));
            }
        }

        for (i, link) in self.bridging.iter().enumerate() {
            if !ids.contains_key(link.anaphor_id.as_str()) {
                return Err(breach(
                    format!("bridging[{i}].anaphor_id"),
                    format!("unknown mention `{}`", link.anaphor_id),
                ));
            }
            if link.antecedent_ids.is_empty() {
                return Err(breach(format!("bridging[{i}].antecedent_ids"), "no antecedents"));
            }
            for (j, ante) in link.antecedent_ids.iter().enumerate() {
                let path = format!("bridging[{i}].antecedent_ids[{j}]");
                if !ids.contains_key(ante.as_str()) {
                    return Err(breach(path, format!("unknown mention `{ante}`")));
                }
                if *ante == link.anaphor_id {
                    return Err(breach(path, "anaphor listed as its own antecedent"));
                }
            }
        }
        Ok(())
    }
}

/// Head-finding heuristic: the span token whose dependency head lies outside
/// the mention (leftmost if several), else the mention's last token.
pub fn find_head(tokens: &[Token], spans: &[Span]) -> usize {
    let inside = |k: usize| spans.iter().any(|s| s.contains(k));
    let mut last = 0;
    for s in spans {
        for k in s.start..=s.end {
            last = k;
            if let Some(t) = k.checked_sub(1).and_then(|i| tokens.get(i)) {
                if t.head == 0 || !inside(t.head) {
                    return k;
                }
            }
        }
    }
    last
}


#[cfg(test)]
mod tests {
    use super::testing::*;
    use super::*;

    #[test]
    fn mention_start_is_first_span_start() {
        assert_eq!(mention_start(&mention("a", &[(3, 5)], None)), 3);
        assert_eq!(mention_start(&mention("a", &[(3, 5), (9, 9)], None)), 3);
        assert_eq!(mention_start(&mention("a", &[(1, 1)], None)), 1);
    }

    #[test]
    fn givenness_follows_chain_order() {
        let mut doc = flat_doc(12);
        doc.mentions.push(mention("A", &[(2, 2)], Some("c")));
        doc.mentions.push(mention("B", &[(10, 10)], Some("c")));
        doc.mentions.push(mention("S", &[(5, 5)], None));
        assert!(doc.is_given(&doc.mentions[1]));
        assert!(!doc.is_given(&doc.mentions[0]));
        assert!(!doc.is_given(&doc.mentions[2]));
        assert_eq!(doc.given_flags(), vec![false, true, false]);
    }

    #[test]
    fn givenness_ties_use_first_end_then_list_order() {
        let mut doc = flat_doc(12);
        doc.mentions.push(mention("long", &[(2, 6)], Some("c")));
        doc.mentions.push(mention("short", &[(2, 3)], Some("c")));
        doc.mentions.push(mention("twin", &[(2, 3)], Some("c")));
        assert!(doc.is_given(&doc.mentions[0]));
        assert!(!doc.is_given(&doc.mentions[1]));
        assert!(doc.is_given(&doc.mentions[2]));
        assert_eq!(doc.given_flags(), vec![true, false, true]);
    }

    #[test]
    fn validation_reports_field_paths() {
        let mut doc = flat_doc(4);
        doc.mentions.push(mention("a", &[(0, 1)], None));
        let err = doc.validate().unwrap_err();
        assert_eq!(err.path, "mentions[0].spans[0]");

        let mut doc = flat_doc(4);
        doc.mentions.push(mention("a", &[(1, 2)], None));
        doc.bridging.push(BridgingLink::new("a", &["zz"], None));
        assert_eq!(doc.validate().unwrap_err().path, "bridging[0].antecedent_ids[0]");

        let mut doc = flat_doc(4);
        doc.tokens[2].head = 3;
        assert_eq!(doc.validate().unwrap_err().path, "tokens[2].head");

        let mut doc = flat_doc(6);
        doc.mentions.push(mention("a", &[(1, 3), (3, 4)], None));
        assert!(doc.validate().is_err());
    }

    #[test]
    fn head_finder_prefers_token_headed_outside() {
        // 1 <- 2 <- 3, token 4 headed by 1
        let tokens = vec![
            token(1, "saw", "VBD", 0),
            token(2, "the", "DT", 3),
            token(3, "door", "NN", 1),
            token(4, "now", "RB", 1),
        ];
        assert_eq!(find_head(&tokens, &[Span::new(2, 3)]), 3);
        assert_eq!(find_head(&tokens, &[Span::new(1, 4)]), 1);
        // a cycle-free span whose tokens all head inside does not occur with
        // a root in range, but the fallback is the last token
        let cyclic = vec![token(1, "a", "DT", 2), token(2, "b", "NN", 1)];
        assert_eq!(find_head(&cyclic, &[Span::new(1, 2)]), 2);
    }

    #[test]
    fn labels_parse_case_insensitively() {
        assert_eq!("PLUR".parse::<Number>().unwrap(), Number::Plur);
        assert_eq!("giv".parse::<InfStat>().unwrap(), InfStat::Giv);
        assert!("given".parse::<InfStat>().is_err());
        assert_eq!(UnifiedType::resolved().len(), 9);
    }
}
