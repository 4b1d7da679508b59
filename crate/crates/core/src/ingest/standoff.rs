//! Standoff dialect.
//!
//! ```text
//! DOC	wsj_0001	news
//! TOK	1	Pierre	pierre	NNP	sing	compound	2
//! TOK	2	Vinken	vinken	NNP	sing	root	0
//! MEN	m1	1-2	person	c1
//! MEN	m2	3-5,9-9	concrete	_
//! BRG	m2	m1+m3	element
//! ```
//!
//! Fields are separated by whitespace. `DOC` starts a new document (id and
//! optional genre); records before the first `DOC` belong to an implicit
//! document. `#` lines and blank lines are ignored. `_` stands for a missing
//! chain id or subtype.

#![allow(clippy::tabs_in_doc_comments)]

use std::collections::HashMap;
use std::fmt::Write as _;

use super::IngestError;
use crate::model::{
    find_head, BridgingLink, Definiteness, Document, InfStat, Mention, Schema, Span, Token,
    UnifiedType,
};

struct Pending {
    doc: Document,
    mention_lines: Vec<usize>,
    link_lines: Vec<usize>,
    ids: HashMap<String, usize>,
}

impl Pending {
    fn new(doc_id: String, genre: String) -> Self {
        let mut doc = Document::new(doc_id, Schema::ArrauLike);
        doc.genre = genre;
        Pending {
            doc,
            mention_lines: Vec::new(),
            link_lines: Vec::new(),
            ids: HashMap::new(),
        }
    }

    fn finish(mut self, line_no: usize) -> Result<Document, IngestError> {
        let n = self.doc.tokens.len();
        for (m, &line) in self.doc.mentions.iter_mut().zip(&self.mention_lines) {
            for s in &m.spans {
                if s.start == 0 || s.end > n || s.start > s.end {
                    return Err(IngestError::Range {
                        line,
                        message: format!(
                            "span {}-{} of `{}` outside tokens 1..{n}",
                            s.start, s.end, m.id
                        ),
                    });
                }
            }
            m.head_index = find_head(&self.doc.tokens, &m.spans);
        }
        for (link, &line) in self.doc.bridging.iter().zip(&self.link_lines) {
            for id in std::iter::once(&link.anaphor_id).chain(&link.antecedent_ids) {
                if !self.ids.contains_key(id) {
                    return Err(IngestError::Reference {
                        line,
                        id: id.clone(),
                    });
                }
            }
        }
        self.doc
            .validate()
            .map_err(|source| IngestError::Validation { line: line_no, source })?;
        Ok(self.doc)
    }
}

fn parse_spans(line: usize, field: &str) -> Result<Vec<Span>, IngestError> {
    field
        .split(',')
        .map(|part| {
            let (s, e) = part
                .split_once('-')
                .ok_or_else(|| IngestError::syntax(line, format!("span `{part}` is not START-END")))?;
            let parse = |v: &str| {
                v.parse::<usize>()
                    .map_err(|_| IngestError::syntax(line, format!("bad span bound `{v}`")))
            };
            Ok(Span::new(parse(s)?, parse(e)?))
        })
        .collect()
}

fn optional(field: &str) -> Option<String> {
    (field != "_").then(|| field.to_string())
}

/// Parse every document in a standoff-dialect text.
pub fn parse_standoff(text: &str) -> Result<Vec<Document>, IngestError> {
    let mut docs = Vec::new();
    let mut current: Option<Pending> = None;
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        let record = fields[0];
        if record == "DOC" {
            if fields.len() < 2 {
                return Err(IngestError::syntax(line, "DOC record without an id"));
            }
            if let Some(p) = current.take() {
                docs.push(p.finish(line)?);
            }
            current = Some(Pending::new(fields[1].to_string(), fields[2..].join(" ")));
            continue;
        }
        let pending = current.get_or_insert_with(|| {
            Pending::new(format!("doc{}", docs.len() + 1), String::new())
        });
        match record {
            "TOK" => {
                if fields.len() != 8 {
                    return Err(IngestError::syntax(line, "TOK needs 7 fields"));
                }
                let index: usize = fields[1]
                    .parse()
                    .map_err(|_| IngestError::syntax(line, format!("bad token index `{}`", fields[1])))?;
                if index != pending.doc.tokens.len() + 1 {
                    return Err(IngestError::syntax(
                        line,
                        format!("token index {index}, expected {}", pending.doc.tokens.len() + 1),
                    ));
                }
                let number = fields[5]
                    .parse()
                    .map_err(|e| IngestError::syntax(line, format!("{e}")))?;
                let head = fields[7]
                    .parse()
                    .map_err(|_| IngestError::syntax(line, format!("bad head `{}`", fields[7])))?;
                pending.doc.tokens.push(Token {
                    index,
                    form: fields[2].to_string(),
                    lemma: fields[3].to_string(),
                    xpos: fields[4].to_string(),
                    number,
                    deprel: fields[6].to_string(),
                    head,
                });
            }
            "MEN" => {
                if fields.len() != 5 {
                    return Err(IngestError::syntax(line, "MEN needs 4 fields"));
                }
                let id = fields[1].to_string();
                if pending.ids.contains_key(&id) {
                    return Err(IngestError::Duplicate { line, id });
                }
                let spans = parse_spans(line, fields[2])?;
                pending.ids.insert(id.clone(), pending.doc.mentions.len());
                pending.mention_lines.push(line);
                pending.doc.mentions.push(Mention {
                    id,
                    head_index: spans[0].start,
                    spans,
                    entity_type_original: fields[3].to_string(),
                    entity_type_unified: UnifiedType::Unresolved,
                    infstat: InfStat::None,
                    definiteness: Definiteness::None,
                    chain_id: optional(fields[4]),
                });
            }
            "BRG" => {
                if fields.len() != 4 {
                    return Err(IngestError::syntax(line, "BRG needs 3 fields"));
                }
                pending.link_lines.push(line);
                pending.doc.bridging.push(BridgingLink {
                    anaphor_id: fields[1].to_string(),
                    antecedent_ids: fields[2].split('+').map(str::to_string).collect(),
                    subtype: optional(fields[3]),
                });
            }
            other => {
                return Err(IngestError::syntax(line, format!("unknown record `{other}`")));
            }
        }
    }
    if let Some(p) = current {
        docs.push(p.finish(last_line)?);
    }
    Ok(docs)
}

/// Serialize documents in the standoff dialect.
///
/// Information status, definiteness, head overrides and unified types have
/// no standoff field and are not written.
pub fn emit_standoff(docs: &[Document]) -> Result<String, IngestError> {
    let atom = |what: &str, v: &str| -> Result<(), IngestError> {
        if v.is_empty() || v.chars().any(char::is_whitespace) {
            return Err(IngestError::violation(
                None,
                format!("{what} `{v}` cannot be written in the standoff dialect"),
            ));
        }
        Ok(())
    };
    let mut out = String::new();
    for doc in docs {
        atom("doc_id", &doc.doc_id)?;
        if doc.genre.contains(['\n', '\r']) {
            return Err(IngestError::violation(None, "genre contains a newline"));
        }
        let _ = writeln!(out, "DOC\t{}\t{}", doc.doc_id, doc.genre);
        for t in &doc.tokens {
            for (what, v) in [("form", &t.form), ("lemma", &t.lemma), ("xpos", &t.xpos), ("deprel", &t.deprel)] {
                atom(what, v)?;
            }
            let _ = writeln!(
                out,
                "TOK\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                t.index, t.form, t.lemma, t.xpos, t.number, t.deprel, t.head
            );
        }
        for m in &doc.mentions {
            atom("mention id", &m.id)?;
            atom("entity type", &m.entity_type_original)?;
            let spans: Vec<String> = m.spans.iter().map(|s| format!("{}-{}", s.start, s.end)).collect();
            let _ = writeln!(
                out,
                "MEN\t{}\t{}\t{}\t{}",
                m.id,
                spans.join(","),
                m.entity_type_original,
                m.chain_id.as_deref().unwrap_or("_")
            );
        }
        for link in &doc.bridging {
            let _ = writeln!(
                out,
                "BRG\t{}\t{}\t{}",
                link.anaphor_id,
                link.antecedent_ids.join("+"),
                link.subtype.as_deref().unwrap_or("_")
            );
        }
        out.push('\n');
    }
    Ok(out)
}
