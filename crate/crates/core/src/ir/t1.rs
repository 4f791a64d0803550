//! The classified template.
//!
//! ```text
//! action type: select
//! action arg1: height
//! action arg2: main street
//! ```
//!
//! `arg<i>` is the 1-based slot index in the action type's schema; slots
//! that do not apply are simply absent.

use super::schema::SchemaSet;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

const TYPE_KEY: &str = "action type: ";
const ARG_PREFIX: &str = "action arg";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct T1Error {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> T1Error {
    T1Error {
        line,
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifiedCommand {
    pub action_type: String,
    /// Slot index (1-based) to natural-language span.
    pub args: BTreeMap<usize, String>,
}

pub(crate) fn valid_span(span: &str) -> bool {
    !span.is_empty() && !span.contains(['\n', '\r']) && span.trim() == span
}

impl ClassifiedCommand {
    pub fn new(
        action_type: impl Into<String>,
        args: BTreeMap<usize, String>,
        schemas: &SchemaSet,
    ) -> Result<Self, T1Error> {
        let cmd = Self {
            action_type: action_type.into(),
            args,
        };
        cmd.validate(schemas)?;
        Ok(cmd)
    }

    pub fn validate(&self, schemas: &SchemaSet) -> Result<(), T1Error> {
        let schema = schemas
            .get(&self.action_type)
            .ok_or_else(|| err(1, format!("unregistered action type `{}`", self.action_type)))?;
        for (i, (index, span)) in self.args.iter().enumerate() {
            if schema.slot(*index).is_none() {
                return Err(err(i + 2, format!("`{}` has no slot arg{index}", self.action_type)));
            }
            if !valid_span(span) {
                return Err(err(i + 2, format!("invalid span {span:?}")));
            }
        }
        Ok(())
    }

    /// `(slot name, span)` pairs in slot order.
    pub fn named_args<'a>(&'a self, schemas: &'a SchemaSet) -> Vec<(&'a str, &'a str)> {
        let Some(schema) = schemas.get(&self.action_type) else {
            return Vec::new();
        };
        self.args
            .iter()
            .filter_map(|(i, span)| schema.slot(*i).map(|s| (s.name.as_str(), span.as_str())))
            .collect()
    }
}

pub fn serialize_t1(cmd: &ClassifiedCommand) -> String {
    let mut out = format!("{TYPE_KEY}{}", cmd.action_type);
    for (index, span) in &cmd.args {
        out.push_str(&format!("\n{ARG_PREFIX}{index}: {span}"));
    }
    out
}

pub fn parse_t1(text: &str, schemas: &SchemaSet) -> Result<ClassifiedCommand, T1Error> {
    let text = text.strip_suffix('\n').unwrap_or(text);
    let mut lines = text.split('\n');
    let first = lines.next().unwrap_or_default();
    let action_type = first
        .strip_prefix(TYPE_KEY)
        .ok_or_else(|| err(1, format!("expected `action type: <type>`, got {first:?}")))?;
    let schema = schemas
        .get(action_type)
        .ok_or_else(|| err(1, format!("unregistered action type `{action_type}`")))?;

    let mut args = BTreeMap::new();
    for (i, line) in lines.enumerate() {
        let number = i + 2;
        let rest = line
            .strip_prefix(ARG_PREFIX)
            .ok_or_else(|| err(number, format!("malformed line {line:?}")))?;
        let (index, span) = rest
            .split_once(": ")
            .ok_or_else(|| err(number, format!("malformed line {line:?}")))?;
        let index: usize = index
            .parse()
            .map_err(|_| err(number, format!("bad argument index `{index}`")))?;
        if schema.slot(index).is_none() {
            return Err(err(number, format!("`{action_type}` has no slot arg{index}")));
        }
        if !valid_span(span) {
            return Err(err(number, format!("invalid span {span:?}")));
        }
        if args.insert(index, span.to_string()).is_some() {
            return Err(err(number, format!("duplicate key `action arg{index}`")));
        }
    }
    Ok(ClassifiedCommand {
        action_type: action_type.to_string(),
        args,
    })
}
