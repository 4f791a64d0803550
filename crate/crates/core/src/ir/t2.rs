//! Extraction records.
//!
//! ```text
//! entity: building
//! atomic action type: select_by_tag
//! atomic action arg1: tag: str:main street
//!
//! entity: building
//! atomic action type: scale_getter
//! atomic action arg1: y: inf
//! ```
//!
//! Records are separated by one blank line. Each argument line carries the
//! argument key and a sigil-typed value (see [`crate::scene::Value`]).

use crate::scene::{ActionRegistry, Arg, AtomicCall, EntityKind, Value};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum T2Error {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: unknown entity kind `{kind}`")]
    UnknownKind { line: usize, kind: String },
    #[error("line {line}: unknown atomic action `{name}`")]
    UnknownAction { line: usize, name: String },
    #[error("line {line}: `{name}` takes {arity} argument(s), got arg{index} (arity overflow)")]
    ArityOverflow {
        line: usize,
        name: String,
        arity: usize,
        index: usize,
    },
}

fn malformed(line: usize, message: impl Into<String>) -> T2Error {
    T2Error::Malformed {
        line,
        message: message.into(),
    }
}

/// One (entity, atomic action) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionRecord {
    pub entity_kind: EntityKind,
    /// `call.target_kind` is always `Some(entity_kind)`.
    pub call: AtomicCall,
}

impl ExtractionRecord {
    pub fn new(entity_kind: EntityKind, action: impl Into<String>, args: Vec<Arg>) -> Self {
        Self {
            entity_kind,
            call: AtomicCall::new(action, args, Some(entity_kind)),
        }
    }
}

pub(crate) fn valid_key(key: &str) -> bool {
    !key.is_empty() && !key.contains(':') && !key.chars().any(char::is_whitespace)
}

pub fn serialize_t2(records: &[ExtractionRecord]) -> String {
    records
        .iter()
        .map(|r| {
            let mut block = format!(
                "entity: {}\natomic action type: {}",
                r.entity_kind, r.call.action
            );
            for (j, arg) in r.call.args.iter().enumerate() {
                block.push_str(&format!("\natomic action arg{}: {}: {}", j + 1, arg.key, arg.value));
            }
            block
        })
        .collect::<Vec<_>>()
        .join("\n\n")
}

pub fn parse_t2(text: &str, registry: &ActionRegistry) -> Result<Vec<ExtractionRecord>, T2Error> {
    let text = text.trim_end_matches('\n');
    if text.is_empty() {
        return Ok(Vec::new());
    }
    let lines: Vec<&str> = text.split('\n').collect();
    let mut records = Vec::new();
    let mut i = 0;
    while i < lines.len() {
        let line_no = |k: usize| k + 1;
        let kind_text = lines[i]
            .strip_prefix("entity: ")
            .ok_or_else(|| malformed(line_no(i), format!("expected `entity: <kind>`, got {:?}", lines[i])))?;
        let kind: EntityKind = kind_text.parse().map_err(|_| T2Error::UnknownKind {
            line: line_no(i),
            kind: kind_text.to_string(),
        })?;
        i += 1;
        let action_line = lines
            .get(i)
            .ok_or_else(|| malformed(line_no(i), "missing `atomic action type` line"))?;
        let name = action_line.strip_prefix("atomic action type: ").ok_or_else(|| {
            malformed(line_no(i), format!("expected `atomic action type: <name>`, got {action_line:?}"))
        })?;
        let spec = registry.get(name).ok_or_else(|| T2Error::UnknownAction {
            line: line_no(i),
            name: name.to_string(),
        })?;
        i += 1;

        let mut args = Vec::new();
        while i < lines.len() && !lines[i].is_empty() {
            let expected = args.len() + 1;
            let prefix = format!("atomic action arg{expected}: ");
            let rest = lines[i].strip_prefix(&prefix).ok_or_else(|| {
                malformed(line_no(i), format!("expected `{}`, got {:?}", prefix.trim_end(), lines[i]))
            })?;
            if expected > spec.arity() {
                return Err(T2Error::ArityOverflow {
                    line: line_no(i),
                    name: spec.name.clone(),
                    arity: spec.arity(),
                    index: expected,
                });
            }
            let (key, value) = rest
                .split_once(": ")
                .ok_or_else(|| malformed(line_no(i), format!("expected `<key>: <value>`, got {rest:?}")))?;
            if !valid_key(key) {
                return Err(malformed(line_no(i), format!("invalid argument key `{key}`")));
            }
            let value: Value = value
                .parse()
                .map_err(|e| malformed(line_no(i), format!("{e}")))?;
            args.push(Arg::new(key, value));
            i += 1;
        }
        records.push(ExtractionRecord::new(kind, name, args));
        if i < lines.len() {
            // blank separator; exactly one, followed by another record
            i += 1;
            if i >= lines.len() || lines[i].is_empty() {
                return Err(malformed(line_no(i.min(lines.len() - 1)), "expected a record after the blank line"));
            }
        }
    }
    Ok(records)
}
