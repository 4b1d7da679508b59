//! Readers and writers for the three on-disk forms of a corpus.
//!
//! * `.brk`: bracket dialect, one token per line with nested mention
//!   brackets in the last column. Only continuous mentions and single
//!   antecedents can be expressed.
//! * `.sff`: standoff dialect of `TOK`/`MEN`/`BRG` records, which allows
//!   discontinuous spans and split antecedents.
//! * `.jsonl`: canonical JSON, one document per line.

mod bracket;
mod canonical;
mod standoff;

use std::path::Path;

use thiserror::Error;

pub use bracket::{emit_bracket, parse_bracket};
pub use canonical::{emit_canonical, parse_canonical};
pub use standoff::{emit_standoff, parse_standoff};

use crate::model::{Document, ValidationError};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown mention `{id}`")]
    Reference { line: usize, id: String },
    #[error("line {line}: duplicate mention id `{id}`")]
    Duplicate { line: usize, id: String },
    #[error("line {line}: {message}")]
    Range { line: usize, message: String },
    #[error("dialect violation{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    DialectViolation { line: Option<usize>, message: String },
    #[error("line {line}: invalid document: {source}")]
    Validation {
        line: usize,
        #[source]
        source: ValidationError,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl IngestError {
    pub(crate) fn syntax(line: usize, message: impl Into<String>) -> Self {
        IngestError::Syntax {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn violation(line: Option<usize>, message: impl Into<String>) -> Self {
        IngestError::DialectViolation {
            line,
            message: message.into(),
        }
    }
}

/// File dialect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dialect {
    Bracket,
    Standoff,
    Canonical,
}

impl Dialect {
    pub fn from_path(path: &Path) -> Option<Dialect> {
        match path.extension()?.to_str()? {
            "brk" => Some(Dialect::Bracket),
            "sff" => Some(Dialect::Standoff),
            "jsonl" | "json" => Some(Dialect::Canonical),
            _ => None,
        }
    }

    pub fn parse(self, text: &str) -> Result<Vec<Document>, IngestError> {
        match self {
            Dialect::Bracket => parse_bracket(text),
            Dialect::Standoff => parse_standoff(text),
            Dialect::Canonical => parse_canonical(text),
        }
    }
}

impl std::str::FromStr for Dialect {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bracket" | "brk" => Ok(Dialect::Bracket),
            "standoff" | "sff" => Ok(Dialect::Standoff),
            "canonical" | "jsonl" => Ok(Dialect::Canonical),
            other => Err(format!("unknown dialect `{other}`")),
        }
    }
}

/// Read and parse one file.
pub fn read_documents(path: &Path, dialect: Dialect) -> Result<Vec<Document>, IngestError> {
    let text = std::fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    dialect.parse(&text)
}

/// Characters that carry structure in the bracket annotation column.
pub(crate) fn is_reserved(c: char) -> bool {
    matches!(c, '(' | ')' | ',' | ';' | '<' | '=' | ':' | '+') || c.is_whitespace()
}
