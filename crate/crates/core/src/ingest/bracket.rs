//! Bracket dialect.
//!
//! ```text
//! # doc_id = d1
//! # genre = news
//! 1	A	a	DT	sing	det	2	(m1-place-new-ind
//! 2	house	house	NN	sing	root	0	m1)
//! 3	.	.	.	none	punct	2
//! 4	The	the	DT	sing	det	5	(m2-concrete-new-def
//! 5	door	door	NN	sing	root	0	m2);Bridge=m1<m2
//! ```
//!
//! Columns are tab-separated: index, form, lemma, xpos, number, deprel,
//! head, annotation. The annotation column is empty (or `_`) or holds
//! comma-separated items. `(ID-TYPE-INFSTAT-DEF` opens a mention, `ID)`
//! closes it and `(ID-TYPE-INFSTAT-DEF)` is a single-token mention. Closing
//! items take `;key=value` attributes:
//!
//! * `Chain=CHAIN`: coreference chain;
//! * `Bridge=ANTE<ID` or `Bridge=ANTE<ID:SUBTYPE`: bridging link, repeatable;
//! * `Head=K`: head token, written only when it differs from the heuristic;
//! * `Unified=TYPE`: unified entity type once harmonized.
//!
//! `# schema = ...` may mark documents that originate from another schema;
//! it defaults to `gum_like`. A blank line ends a document.

#![allow(clippy::tabs_in_doc_comments)]

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{is_reserved, IngestError};
use crate::model::{
    find_head, BridgingLink, Definiteness, Document, InfStat, Mention, Number, Schema, Span,
    Token, UnifiedType,
};

struct Draft {
    id: String,
    entity_type: String,
    infstat: InfStat,
    definiteness: Definiteness,
    start: usize,
    end: usize,
    chain: Option<String>,
    head: Option<usize>,
    unified: UnifiedType,
    line: usize,
}

struct PendingBridge {
    antecedent: String,
    anaphor: String,
    subtype: Option<String>,
    line: usize,
}

#[derive(Default)]
struct Builder {
    doc_id: Option<String>,
    genre: Option<String>,
    schema: Option<Schema>,
    tokens: Vec<Token>,
    drafts: Vec<Draft>,
    by_id: HashMap<String, usize>,
    open: Vec<usize>,
    bridges: Vec<PendingBridge>,
    started: bool,
}

impl Builder {
    fn header(&mut self, line_no: usize, line: &str) -> Result<(), IngestError> {
        let body = line.trim_start_matches('#').trim();
        let Some((key, value)) = body.split_once('=') else {
            return Ok(());
        };
        let value = value.trim().to_string();
        let key = key.trim();
        if !matches!(key, "doc_id" | "genre" | "schema") {
            return Ok(());
        }
        if !self.tokens.is_empty() {
            return Err(IngestError::syntax(line_no, format!("`{key}` header after tokens")));
        }
        self.started = true;
        match key {
            "doc_id" => self.doc_id = Some(value),
            "genre" => self.genre = Some(value),
            _ => {
                let schema = value
                    .parse()
                    .map_err(|e| IngestError::syntax(line_no, format!("{e}")))?;
                self.schema = Some(schema);
            }
        }
        Ok(())
    }

    fn token_line(&mut self, line_no: usize, line: &str) -> Result<(), IngestError> {
        self.started = true;
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 8 {
            return Err(IngestError::syntax(
                line_no,
                format!("expected 8 tab-separated columns, found {}", cols.len()),
            ));
        }
        let index: usize = cols[0]
            .parse()
            .map_err(|_| IngestError::syntax(line_no, format!("bad token index `{}`", cols[0])))?;
        if index != self.tokens.len() + 1 {
            return Err(IngestError::syntax(
                line_no,
                format!("token index {index}, expected {}", self.tokens.len() + 1),
            ));
        }
        let number: Number = cols[4]
            .parse()
            .map_err(|e| IngestError::syntax(line_no, format!("{e}")))?;
        let head: usize = cols[6]
            .parse()
            .map_err(|_| IngestError::syntax(line_no, format!("bad head `{}`", cols[6])))?;
        self.tokens.push(Token {
            index,
            form: cols[1].to_string(),
            lemma: cols[2].to_string(),
            xpos: cols[3].to_string(),
            number,
            deprel: cols[5].to_string(),
            head,
        });

        let field = cols[7];
        if field.is_empty() || field == "_" {
            return Ok(());
        }
        for item in field.split(',') {
            self.item(line_no, index, item)?;
        }
        Ok(())
    }

    fn item(&mut self, line_no: usize, index: usize, item: &str) -> Result<(), IngestError> {
        let mut parts = item.split(';');
        let core = parts.next().unwrap_or_default();
        let attrs: Vec<&str> = parts.collect();
        let opens = core.starts_with('(');
        let closes = core.ends_with(')');
        let closed = match (opens, closes) {
            (true, true) if core.len() > 2 => {
                let pos = self.open_mention(line_no, index, &core[1..core.len() - 1])?;
                Some(pos)
            }
            (true, false) => {
                let pos = self.open_mention(line_no, index, &core[1..])?;
                self.open.push(pos);
                None
            }
            (false, true) => {
                let id = &core[..core.len() - 1];
                let Some(&top) = self.open.last() else {
                    return Err(IngestError::syntax(
                        line_no,
                        format!("closing `{id}` with no open mention"),
                    ));
                };
                if self.drafts[top].id != id {
                    return Err(IngestError::syntax(
                        line_no,
                        format!(
                            "bracket nesting: `{id})` closes while `{}` is innermost open",
                            self.drafts[top].id
                        ),
                    ));
                }
                self.open.pop();
                self.drafts[top].end = index;
                Some(top)
            }
            _ => {
                return Err(IngestError::syntax(line_no, format!("malformed item `{item}`")));
            }
        };

        match closed {
            Some(pos) => {
                for attr in attrs {
                    self.attribute(line_no, pos, attr)?;
                }
            }
            None if !attrs.is_empty() => {
                return Err(IngestError::syntax(
                    line_no,
                    format!("attributes on opening item `{item}`"),
                ));
            }
            None => {}
        }
        Ok(())
    }

    fn open_mention(&mut self, line_no: usize, index: usize, body: &str) -> Result<usize, IngestError> {
        let fields: Vec<&str> = body.split('-').collect();
        if fields.len() < 4 {
            return Err(IngestError::syntax(
                line_no,
                format!("mention `{body}` is not ID-TYPE-INFSTAT-DEF"),
            ));
        }
        let id = fields[0];
        let entity_type = fields[1..fields.len() - 2].join("-");
        if id.is_empty() || entity_type.is_empty() {
            return Err(IngestError::syntax(line_no, format!("empty id or type in `{body}`")));
        }
        let infstat: InfStat = fields[fields.len() - 2]
            .parse()
            .map_err(|e| IngestError::syntax(line_no, format!("{e}")))?;
        let definiteness: Definiteness = fields[fields.len() - 1]
            .parse()
            .map_err(|e| IngestError::syntax(line_no, format!("{e}")))?;
        if self.by_id.contains_key(id) {
            return Err(IngestError::Duplicate {
                line: line_no,
                id: id.to_string(),
            });
        }
        let pos = self.drafts.len();
        self.by_id.insert(id.to_string(), pos);
        self.drafts.push(Draft {
            id: id.to_string(),
            entity_type,
            infstat,
            definiteness,
            start: index,
            end: index,
            chain: None,
            head: None,
            unified: UnifiedType::Unresolved,
            line: line_no,
        });
        Ok(pos)
    }

    fn attribute(&mut self, line_no: usize, pos: usize, attr: &str) -> Result<(), IngestError> {
        let Some((key, value)) = attr.split_once('=') else {
            return Err(IngestError::syntax(line_no, format!("malformed attribute `{attr}`")));
        };
        match key {
            "Chain" => {
                if self.drafts[pos].chain.replace(value.to_string()).is_some() {
                    return Err(IngestError::syntax(line_no, "repeated Chain attribute"));
                }
            }
            "Head" => {
                let head = value
                    .parse()
                    .map_err(|_| IngestError::syntax(line_no, format!("bad Head `{value}`")))?;
                self.drafts[pos].head = Some(head);
            }
            "Unified" => {
                self.drafts[pos].unified = value
                    .parse()
                    .map_err(|e| IngestError::syntax(line_no, format!("{e}")))?;
            }
            "Bridge" => {
                let Some((ante, rest)) = value.split_once('<') else {
                    return Err(IngestError::syntax(
                        line_no,
                        format!("Bridge `{value}` is not ANTE<ID"),
                    ));
                };
                if ante.contains('+') {
                    return Err(IngestError::violation(
                        Some(line_no),
                        format!("multiple antecedents `{ante}` in bridge to `{rest}`"),
                    ));
                }
                let (anaphor, subtype) = match rest.split_once(':') {
                    Some((a, s)) => (a, Some(s.to_string())),
                    None => (rest, None),
                };
                if anaphor != self.drafts[pos].id {
                    return Err(IngestError::syntax(
                        line_no,
                        format!("Bridge anaphor `{anaphor}` on item closing `{}`", self.drafts[pos].id),
                    ));
                }
                self.bridges.push(PendingBridge {
                    antecedent: ante.to_string(),
                    anaphor: anaphor.to_string(),
                    subtype,
                    line: line_no,
                });
            }
            _ => {
                return Err(IngestError::syntax(line_no, format!("unknown attribute `{key}`")));
            }
        }
        Ok(())
    }

    fn finish(self, ordinal: usize, line_no: usize) -> Result<Document, IngestError> {
        if let Some(&pos) = self.open.last() {
            let d = &self.drafts[pos];
            return Err(IngestError::syntax(
                line_no,
                format!("mention `{}` opened at line {} is never closed", d.id, d.line),
            ));
        }
        let mut doc = Document::new(
            self.doc_id.unwrap_or_else(|| format!("doc{ordinal}")),
            self.schema.unwrap_or(Schema::GumLike),
        );
        doc.genre = self.genre.unwrap_or_default();
        doc.tokens = self.tokens;
        for d in self.drafts {
            let spans = vec![Span::new(d.start, d.end)];
            let head_index = d.head.unwrap_or_else(|| find_head(&doc.tokens, &spans));
            doc.mentions.push(Mention {
                id: d.id,
                spans,
                head_index,
                entity_type_original: d.entity_type,
                entity_type_unified: d.unified,
                infstat: d.infstat,
                definiteness: d.definiteness,
                chain_id: d.chain,
            });
        }
        for b in self.bridges {
            if !self.by_id.contains_key(&b.antecedent) {
                return Err(IngestError::Reference {
                    line: b.line,
                    id: b.antecedent,
                });
            }
            doc.bridging.push(BridgingLink {
                anaphor_id: b.anaphor,
                antecedent_ids: vec![b.antecedent],
                subtype: b.subtype,
            });
        }
        doc.validate()
            .map_err(|source| IngestError::Validation { line: line_no, source })?;
        Ok(doc)
    }
}

/// Parse every document in a bracket-dialect text.
pub fn parse_bracket(text: &str) -> Result<Vec<Document>, IngestError> {
    let mut docs = Vec::new();
    let mut builder = Builder::default();
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        last_line = line_no;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            if builder.started {
                let done = std::mem::take(&mut builder);
                docs.push(done.finish(docs.len() + 1, line_no)?);
            }
        } else if line.starts_with('#') {
            builder.header(line_no, line)?;
        } else {
            builder.token_line(line_no, line)?;
        }
    }
    if builder.started {
        docs.push(builder.finish(docs.len() + 1, last_line)?);
    }
    Ok(docs)
}

fn check_atom(what: &str, value: &str, allow_dash: bool) -> Result<(), IngestError> {
    if value.is_empty() || value.chars().any(|c| is_reserved(c) || (!allow_dash && c == '-')) {
        return Err(IngestError::violation(
            None,
            format!("{what} `{value}` cannot be written in the bracket dialect"),
        ));
    }
    Ok(())
}

fn check_column(what: &str, value: &str) -> Result<(), IngestError> {
    if value.contains(['\t', '\n', '\r']) {
        return Err(IngestError::violation(None, format!("{what} `{value}` contains a tab or newline")));
    }
    Ok(())
}

/// Serialize one document in the bracket dialect.
///
/// Fails when the document holds a discontinuous mention, a split
/// antecedent or crossing mention spans; harmonize such documents first.
pub fn emit_bracket(doc: &Document) -> Result<String, IngestError> {
    for m in &doc.mentions {
        if m.is_discontinuous() {
            return Err(IngestError::violation(
                None,
                format!("mention `{}` is discontinuous", m.id),
            ));
        }
        check_atom("mention id", &m.id, false)?;
        check_atom("entity type", &m.entity_type_original, true)?;
        if let Some(chain) = &m.chain_id {
            check_atom("chain id", chain, true)?;
        }
    }
    for link in &doc.bridging {
        if link.is_split_antecedent() {
            return Err(IngestError::violation(
                None,
                format!("bridge to `{}` has {} antecedents", link.anaphor_id, link.antecedent_ids.len()),
            ));
        }
        if let Some(subtype) = &link.subtype {
            check_atom("subtype", subtype, true)?;
        }
    }
    check_column("doc_id", &doc.doc_id)?;
    check_column("genre", &doc.genre)?;
    for t in &doc.tokens {
        for (what, value) in [("form", &t.form), ("lemma", &t.lemma), ("xpos", &t.xpos), ("deprel", &t.deprel)] {
            check_column(what, value)?;
        }
    }

    let spans: Vec<Span> = doc.mentions.iter().map(|m| m.spans[0]).collect();
    for (i, a) in spans.iter().enumerate() {
        for (j, b) in spans.iter().enumerate() {
            if a.start < b.start && b.start <= a.end && a.end < b.end {
                return Err(IngestError::violation(
                    None,
                    format!("mentions `{}` and `{}` cross", doc.mentions[i].id, doc.mentions[j].id),
                ));
            }
        }
    }

    // Open order: start ascending, longer first, then list position.
    // Closing at a token reverses the open order.
    let mut order: Vec<usize> = (0..spans.len()).collect();
    order.sort_by_key(|&i| (spans[i].start, std::cmp::Reverse(spans[i].end), i));
    let mut opens: Vec<Vec<usize>> = vec![Vec::new(); doc.tokens.len() + 1];
    let mut closes: Vec<Vec<usize>> = vec![Vec::new(); doc.tokens.len() + 1];
    let mut singles: Vec<Vec<usize>> = vec![Vec::new(); doc.tokens.len() + 1];
    for &i in &order {
        let s = spans[i];
        if s.start == s.end {
            singles[s.start].push(i);
        } else {
            opens[s.start].push(i);
        }
    }
    for &i in order.iter().rev() {
        let s = spans[i];
        if s.start != s.end {
            closes[s.end].push(i);
        }
    }

    let mut bridges: HashMap<&str, Vec<&BridgingLink>> = HashMap::new();
    for link in &doc.bridging {
        bridges.entry(link.anaphor_id.as_str()).or_default().push(link);
    }

    let open_item = |m: &Mention| {
        format!(
            "({}-{}-{}-{}",
            m.id, m.entity_type_original, m.infstat, m.definiteness
        )
    };
    let close_attrs = |m: &Mention, out: &mut String| {
        if let Some(chain) = &m.chain_id {
            let _ = write!(out, ";Chain={chain}");
        }
        if m.head_index != find_head(&doc.tokens, &m.spans) {
            let _ = write!(out, ";Head={}", m.head_index);
        }
        if m.entity_type_unified != UnifiedType::Unresolved {
            let _ = write!(out, ";Unified={}", m.entity_type_unified);
        }
        for link in bridges.get(m.id.as_str()).into_iter().flatten() {
            let _ = write!(out, ";Bridge={}<{}", link.antecedent_ids[0], m.id);
            if let Some(subtype) = &link.subtype {
                let _ = write!(out, ":{subtype}");
            }
        }
    };

    let mut out = String::new();
    let _ = writeln!(out, "# doc_id = {}", doc.doc_id);
    let _ = writeln!(out, "# genre = {}", doc.genre);
    if doc.schema != Schema::GumLike {
        let _ = writeln!(out, "# schema = {}", doc.schema);
    }
    for t in &doc.tokens {
        let k = t.index;
        let mut items: Vec<String> = Vec::new();
        for &i in &opens[k] {
            items.push(open_item(&doc.mentions[i]));
        }
        for &i in &singles[k] {
            let m = &doc.mentions[i];
            let mut item = open_item(m);
            item.push(')');
            close_attrs(m, &mut item);
            items.push(item);
        }
        for &i in &closes[k] {
            let m = &doc.mentions[i];
            let mut item = format!("{})", m.id);
            close_attrs(m, &mut item);
            items.push(item);
        }
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            t.index,
            t.form,
            t.lemma,
            t.xpos,
            t.number,
            t.deprel,
            t.head,
            items.join(",")
        );
    }
    out.push('\n');
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const HOUSE: &str = "# doc_id = d1\n\
        1\tA\ta\tDT\tsing\tdet\t2\t(m1-place-new-ind\n\
        2\thouse\thouse\tNN\tsing\troot\t0\tm1)\n\
        3\tThe\tthe\tDT\tsing\tdet\t4\t(m2-object-new-def\n\
        4\tdoor\tdoor\tNN\tsing\troot\t0\tm2);Bridge=m1<m2\n";

    #[test]
    fn single_token_mention() {
        let docs = parse_bracket("1\tHe\the\tPRP\tsing\troot\t0\t(m1-person-new-def)\n").unwrap();
        let m = &docs[0].mentions[0];
        assert_eq!(m.spans, vec![Span::new(1, 1)]);
        assert_eq!(m.entity_type_original, "person");
        assert_eq!(m.infstat, InfStat::New);
        assert_eq!(m.definiteness, Definiteness::Def);
        assert_eq!(docs[0].schema, Schema::GumLike);
        assert_eq!(docs[0].doc_id, "doc1");
    }

    #[test]
    fn contiguous_span_and_bridge() {
        let docs = parse_bracket(HOUSE).unwrap();
        let doc = &docs[0];
        assert_eq!(doc.mentions[0].spans, vec![Span::new(1, 2)]);
        assert_eq!(doc.mentions[0].head_index, 2);
        assert_eq!(doc.bridging, vec![BridgingLink::new("m2", &["m1"], None)]);
        assert_eq!(parse_bracket(&emit_bracket(doc).unwrap()).unwrap()[0], *doc);
    }

    #[test]
    fn span_from_token_two_to_four() {
        let text = "1\tx\tx\tNN\tsing\troot\t0\t\n\
            2\ta\ta\tDT\tsing\tdet\t4\t(m1-event-new-ind\n\
            3\tbig\tbig\tJJ\tsing\tamod\t4\t\n\
            4\tparty\tparty\tNN\tsing\tobj\t1\tm1)\n";
        let doc = &parse_bracket(text).unwrap()[0];
        assert_eq!(doc.mentions[0].spans, vec![Span::new(2, 4)]);
        assert_eq!(doc.mentions[0].head_index, 4);
    }

    #[test]
    fn crossing_brackets_report_line() {
        let text = "1\ta\ta\tDT\tsing\tdet\t0\t(m1-place-new-ind\n\
            2\tb\tb\tNN\tsing\troot\t1\t(m2-place-new-ind\n\
            3\tc\tc\tNN\tsing\troot\t1\tm1)\n\
            4\td\td\tNN\tsing\troot\t1\tm2)\n";
        match parse_bracket(text) {
            Err(IngestError::Syntax { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn unclosed_and_unknown_reference() {
        let unclosed = "1\ta\ta\tDT\tsing\tdet\t0\t(m1-place-new-ind\n";
        assert!(matches!(parse_bracket(unclosed), Err(IngestError::Syntax { .. })));
        let dangling = "1\ta\ta\tNN\tsing\troot\t0\t(m2-place-new-ind);Bridge=m9<m2\n";
        match parse_bracket(dangling) {
            Err(IngestError::Reference { line, id }) => {
                assert_eq!((line, id.as_str()), (1, "m9"));
            }
            other => panic!("expected reference error, got {other:?}"),
        }
    }

    #[test]
    fn multi_antecedent_is_a_dialect_violation() {
        let text = "1\ta\ta\tNN\tsing\troot\t0\t(m1-place-new-ind)\n\
            2\tb\tb\tNN\tsing\troot\t0\t(m2-place-new-ind)\n\
            3\tc\tc\tNN\tsing\troot\t0\t(m3-place-new-def);Bridge=m1+m2<m3\n";
        assert!(matches!(
            parse_bracket(text),
            Err(IngestError::DialectViolation { line: Some(3), .. })
        ));
    }

    #[test]
    fn unknown_infstat_is_rejected() {
        let text = "1\ta\ta\tNN\tsing\troot\t0\t(m1-place-given-def)\n";
        assert!(matches!(parse_bracket(text), Err(IngestError::Syntax { .. })));
    }

    #[test]
    fn discontinuous_mentions_cannot_be_emitted() {
        let mut doc = parse_bracket(HOUSE).unwrap().remove(0);
        doc.mentions[0].spans = vec![Span::new(1, 1), Span::new(3, 3)];
        doc.mentions[0].head_index = 1;
        assert!(matches!(emit_bracket(&doc), Err(IngestError::DialectViolation { .. })));
    }

    #[test]
    fn tokens_only_document() {
        let mut doc = Document::new("empty", Schema::GumLike);
        doc.genre = "fiction".into();
        doc.tokens = parse_bracket(HOUSE).unwrap()[0].tokens.clone();
        let text = emit_bracket(&doc).unwrap();
        for line in text.lines().filter(|l| !l.starts_with('#') && !l.is_empty()) {
            assert!(line.ends_with('\t'), "annotation column should be empty: {line:?}");
        }
        assert_eq!(parse_bracket(&text).unwrap(), vec![doc]);
    }

    #[test]
    fn nested_and_identical_spans_round_trip() {
        let text = "# doc_id = n\n# genre = g\n\
            1\tthe\tthe\tDT\tsing\tdet\t2\t(a-place-new-def,(b-place-new-def,(c-time-new-ind)\n\
            2\troof\troof\tNN\tsing\troot\t0\tb);Chain=k,a);Chain=k\n";
        let docs = parse_bracket(text).unwrap();
        assert_eq!(docs[0].mentions.len(), 3);
        let emitted = emit_bracket(&docs[0]).unwrap();
        assert_eq!(parse_bracket(&emitted).unwrap(), docs);
    }

    #[test]
    fn non_default_head_and_unified_type_survive() {
        let mut doc = parse_bracket(HOUSE).unwrap().remove(0);
        doc.mentions[1].head_index = 3;
        doc.mentions[1].entity_type_unified = UnifiedType::Concrete;
        doc.bridging[0].subtype = Some("poss".into());
        doc.schema = Schema::ArrauLike;
        let text = emit_bracket(&doc).unwrap();
        assert!(text.contains("m2);Head=3;Unified=concrete;Bridge=m1<m2:poss"));
        assert_eq!(parse_bracket(&text).unwrap(), vec![doc]);
    }
}
