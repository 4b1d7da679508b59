//! Canonical JSON lines: one document object per line, keys sorted.

use super::IngestError;
use crate::model::Document;

/// Parse canonical JSONL, validating each document.
pub fn parse_canonical(text: &str) -> Result<Vec<Document>, IngestError> {
    let mut docs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let doc: Document = serde_json::from_str(line)
            .map_err(|e| IngestError::syntax(i + 1, format!("invalid document JSON: {e}")))?;
        doc.validate()
            .map_err(|source| IngestError::Validation { line: i + 1, source })?;
        docs.push(doc);
    }
    Ok(docs)
}

/// Serialize documents deterministically, one per line.
pub fn emit_canonical(docs: &[Document]) -> String {
    let mut out = String::new();
    for doc in docs {
        // Going through `Value` sorts object keys.
        let value = serde_json::to_value(doc).expect("documents serialize to JSON");
        out.push_str(&value.to_string());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::testing::*;
    use crate::model::BridgingLink;

    fn sample() -> Document {
        let mut doc = flat_doc(6);
        doc.mentions.push(mention("a", &[(1, 2), (4, 4)], Some("c1")));
        doc.mentions.push(mention("b", &[(5, 5)], None));
        doc.bridging.push(BridgingLink::new("b", &["a"], Some("poss")));
        doc
    }

    #[test]
    fn round_trip_and_sorted_keys() {
        let mut second = sample();
        second.doc_id = "d2".into();
        let docs = vec![sample(), second];
        let text = emit_canonical(&docs);
        assert_eq!(text.lines().count(), 2);
        assert!(text.starts_with("{\"bridging\":[{\"anaphor_id\":\"b\""));
        assert!(text.contains("\"spans\":[[1,2],[4,4]]"));
        assert_eq!(parse_canonical(&text).unwrap(), docs);
    }

    #[test]
    fn token_zero_is_a_validation_error() {
        let mut doc = sample();
        doc.mentions[1].spans[0].start = 0;
        let text = emit_canonical(&[doc]);
        match parse_canonical(&text) {
            Err(IngestError::Validation { line, source }) => {
                assert_eq!(line, 1);
                assert_eq!(source.path, "mentions[1].spans[0]");
            }
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn empty_input_yields_no_documents() {
        assert!(parse_canonical("").unwrap().is_empty());
        assert!(parse_canonical("{not json").is_err());
    }
}
