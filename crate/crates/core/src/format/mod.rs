//! The `.ghcft` text format: a line-oriented, block-structured description
//! of a system model. `docs/format.md` has the grammar.
//!
//! ```
//! use ghcft::format::{parse_model, serialize_model};
//!
//! let text = "ghcft 1\n\
//!             component k {\n\
//!               outport o\n\
//!               cft {\n\
//!                 basic e 50000 FIT\n\
//!                 ofm f on o from e\n\
//!               }\n\
//!             }\n";
//! let doc = parse_model(text).unwrap();
//! let rate = doc.system.components["k"].flm.as_cft().unwrap().basic_events["e"];
//! assert_eq!(rate.value(), 5.0e-5);
//! assert_eq!(parse_model(&serialize_model(&doc)).unwrap(), doc);
//! ```

mod lexer;
mod parse;
mod write;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::model::SystemModel;

pub use write::{format_number, format_rate, serialize_model};

/// The only format version this crate reads and writes.
pub const FORMAT_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq)]
pub struct ModelDocument {
    pub format_version: String,
    pub system: SystemModel,
    /// Free-form key/value pairs such as `title` or `author`.
    pub metadata: BTreeMap<String, String>,
}

impl ModelDocument {
    pub fn new(system: SystemModel) -> Self {
        ModelDocument {
            format_version: FORMAT_VERSION.to_string(),
            system,
            metadata: BTreeMap::new(),
        }
    }
}

/// 1-based line and column (in characters).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Position {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FormatErrorKind {
    Syntax { expected: Vec<String>, found: String },
    UnknownVersion(String),
    DuplicateIdentifier { what: &'static str, id: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct FormatError {
    pub pos: Position,
    pub kind: FormatErrorKind,
}

impl FormatError {
    pub(crate) fn syntax(pos: Position, expected: &[&str], found: &str) -> Self {
        FormatError {
            pos,
            kind: FormatErrorKind::Syntax {
                expected: expected.iter().map(|s| s.to_string()).collect(),
                found: found.to_string(),
            },
        }
    }

    pub fn position(&self) -> Position {
        self.pos
    }
}

impl fmt::Display for FormatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.pos)?;
        match &self.kind {
            FormatErrorKind::Syntax { expected, found } => {
                let list = match expected.as_slice() {
                    [] => String::from("something else"),
                    [one] => one.clone(),
                    [init @ .., last] => format!("{} or {last}", init.join(", ")),
                };
                write!(f, "expected {list}, found {found}")
            }
            FormatErrorKind::UnknownVersion(v) => {
                write!(f, "unknown format version `{v}` (supported: {FORMAT_VERSION})")
            }
            FormatErrorKind::DuplicateIdentifier { what, id } => write!(f, "duplicate {what} `{id}`"),
        }
    }
}

/// Parses a `.ghcft` document. Checks syntax and identifier uniqueness only;
/// semantic checks are [`crate::model::validate_model`]'s job.
pub fn parse_model(text: &str) -> Result<ModelDocument, FormatError> {
    let tokens = lexer::tokenize(text)?;
    parse::Parser::new(tokens).document()
}
