//! Text input and output: the expression grammar and the key-value file
//! format shared by model, symmetry, catalog and solution files.

mod parse;
mod print;

pub use parse::{parse, parse_raw, ParseContext, ParseError, ParseErrorKind};
pub use print::print;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FileError {
    #[error("line {line}: expected `key = value`")]
    Malformed { line: usize },
    #[error("line {line}: {source}")]
    Expr {
        line: usize,
        #[source]
        source: ParseError,
    },
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
    #[error("missing required key `{0}`")]
    Missing(String),
}

/// One `key = value` line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

/// Split a key-value file into entries. `#` starts a comment; blank lines
/// are skipped. Keys keep their order of appearance.
pub fn read_entries(text: &str) -> Result<Vec<Entry>, FileError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or(FileError::Malformed { line: i + 1 })?;
        let key = k.trim();
        if key.is_empty() {
            return Err(FileError::Malformed { line: i + 1 });
        }
        out.push(Entry {
            key: key.to_string(),
            value: v.trim().to_string(),
            line: i + 1,
        });
    }
    Ok(out)
}

/// Comma-separated name list; empty string gives an empty list.
pub fn split_list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

impl Entry {
    pub fn parse_expr(&self, ctx: &ParseContext) -> Result<crate::expr::Expr, FileError> {
        parse(&self.value, ctx).map_err(|source| FileError::Expr {
            line: self.line,
            source,
        })
    }

    pub fn invalid(&self, message: impl Into<String>) -> FileError {
        FileError::Invalid {
            line: self.line,
            message: message.into(),
        }
    }
}
