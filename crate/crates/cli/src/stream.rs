//! The text stream format.
//!
//! ```text
//! H 1 <vertex-count hint>
//! # comment
//! E <u> <v>
//! Q <k> | Q auto
//! B
//! ```
//!
//! Edges before the first `Q` form the initial graph; the first query
//! triggers preprocessing. Every later `E` is one insertion and `B` closes a
//! batch. Files are ASCII with LF line endings and single spaces.

use std::fmt::Write as _;

use thiserror::Error;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error, PartialEq)]
pub enum StreamError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuerySpec {
    Fixed(usize),
    Auto,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Record {
    Edge(usize, usize),
    Query(QuerySpec),
    Batch,
    Comment(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StreamFile {
    pub n_hint: usize,
    pub records: Vec<Record>,
}

impl StreamFile {
    pub fn parse(text: &str) -> Result<Self, StreamError> {
        let mut lines = text.split('\n').enumerate();
        let err = |line: usize, msg: String| StreamError::Parse { line, msg };
        let (_, header) = lines.next().ok_or_else(|| err(1, "empty stream".into()))?;
        let fields: Vec<&str> = header.split(' ').collect();
        let n_hint = match fields.as_slice() {
            ["H", version, n] => {
                if version.parse::<u32>().ok() != Some(FORMAT_VERSION) {
                    return Err(err(1, format!("unsupported format version {version:?}")));
                }
                n.parse().map_err(|_| err(1, format!("bad vertex-count hint {n:?}")))?
            }
            _ => return Err(err(1, format!("expected header `H {FORMAT_VERSION} <n>`, got {header:?}"))),
        };
        let mut records = Vec::new();
        for (i, line) in lines {
            let lineno = i + 1;
            if line.is_empty() {
                // only the trailing newline may produce an empty line
                if lineno == text.split('\n').count() {
                    break;
                }
                return Err(err(lineno, "empty line".into()));
            }
            if let Some(rest) = line.strip_prefix('#') {
                records.push(Record::Comment(rest.to_string()));
                continue;
            }
            let fields: Vec<&str> = line.split(' ').collect();
            let num = |s: &str| s.parse::<usize>().map_err(|_| err(lineno, format!("bad integer {s:?}")));
            let rec = match fields.as_slice() {
                ["E", u, v] => Record::Edge(num(u)?, num(v)?),
                ["Q", "auto"] => Record::Query(QuerySpec::Auto),
                ["Q", k] => Record::Query(QuerySpec::Fixed(num(k)?)),
                ["B"] => Record::Batch,
                _ => return Err(err(lineno, format!("unrecognised record {line:?}"))),
            };
            records.push(rec);
        }
        Ok(StreamFile { n_hint, records })
    }

    pub fn serialize(&self) -> String {
        let mut out = format!("H {FORMAT_VERSION} {}\n", self.n_hint);
        for r in &self.records {
            match r {
                Record::Edge(u, v) => writeln!(out, "E {u} {v}"),
                Record::Query(QuerySpec::Auto) => writeln!(out, "Q auto"),
                Record::Query(QuerySpec::Fixed(k)) => writeln!(out, "Q {k}"),
                Record::Batch => writeln!(out, "B"),
                Record::Comment(c) => writeln!(out, "#{c}"),
            }
            .expect("writing to a String");
        }
        out
    }

    /// File line of record `i` (the header is line 1).
    pub fn line_of(i: usize) -> usize {
        i + 2
    }
}

/// Planted labels per batch boundary: `T <b>` followed by one label per
/// vertex, in vertex order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruthFile {
    pub sections: Vec<Vec<usize>>,
}

impl TruthFile {
    pub fn parse(text: &str) -> Result<Self, StreamError> {
        let mut sections: Vec<Vec<usize>> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            let err = |msg: String| StreamError::Parse { line: lineno, msg };
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(b) = line.strip_prefix("T ") {
                let b: usize = b.parse().map_err(|_| err(format!("bad section index {b:?}")))?;
                if b != sections.len() {
                    return Err(err(format!("expected section {}, got {b}", sections.len())));
                }
                sections.push(Vec::new());
                continue;
            }
            let label = line.parse().map_err(|_| err(format!("bad label {line:?}")))?;
            sections
                .last_mut()
                .ok_or_else(|| err("label before the first `T` section".into()))?
                .push(label);
        }
        Ok(TruthFile { sections })
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for (b, labels) in self.sections.iter().enumerate() {
            writeln!(out, "T {b}").expect("writing to a String");
            for l in labels {
                writeln!(out, "{l}").expect("writing to a String");
            }
        }
        out
    }
}
