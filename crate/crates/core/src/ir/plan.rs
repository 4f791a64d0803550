use super::t2::ExtractionRecord;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Respond {
    Do,
    Skip,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanStep {
    /// 1-based position of the record in the extraction output.
    pub index: usize,
    pub record: ExtractionRecord,
    pub respond: Respond,
}

/// An ordering of extraction records, each labelled do or skip.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ExecutionPlan {
    pub steps: Vec<PlanStep>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("plan line {line}: {message}")]
pub struct PlanError {
    pub line: usize,
    pub message: String,
}

/// Parses `do <i>` / `skip <i>` lines. Blank lines and `#` comments are
/// ignored. Every record index must appear exactly once.
pub fn parse_plan(text: &str, record_count: usize) -> Result<Vec<(usize, Respond)>, PlanError> {
    let mut seen = BTreeSet::new();
    let mut order = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| PlanError { line: i + 1, message };
        let (word, index) = line
            .split_once(' ')
            .ok_or_else(|| err(format!("expected `do <i>` or `skip <i>`, got {line:?}")))?;
        let respond = match word {
            "do" => Respond::Do,
            "skip" => Respond::Skip,
            other => return Err(err(format!("unknown respond `{other}`"))),
        };
        let index: usize = index
            .trim()
            .parse()
            .map_err(|_| err(format!("bad record index `{index}`")))?;
        if index == 0 || index > record_count {
            return Err(err(format!("record index {index} out of range 1..={record_count}")));
        }
        if !seen.insert(index) {
            return Err(err(format!("record {index} listed twice")));
        }
        order.push((index, respond));
    }
    if seen.len() != record_count {
        let missing: Vec<String> = (1..=record_count)
            .filter(|i| !seen.contains(i))
            .map(|i| i.to_string())
            .collect();
        return Err(PlanError {
            line: text.lines().count().max(1),
            message: format!("records {} not planned", missing.join(", ")),
        });
    }
    Ok(order)
}

impl ExecutionPlan {
    pub fn from_order(records: &[ExtractionRecord], order: &[(usize, Respond)]) -> Self {
        Self {
            steps: order
                .iter()
                .map(|(index, respond)| PlanStep {
                    index: *index,
                    record: records[index - 1].clone(),
                    respond: *respond,
                })
                .collect(),
        }
    }

    /// Every record, in order, marked do.
    pub fn do_all(records: &[ExtractionRecord]) -> Self {
        let order: Vec<_> = (1..=records.len()).map(|i| (i, Respond::Do)).collect();
        Self::from_order(records, &order)
    }

    pub fn to_text(&self) -> String {
        self.steps
            .iter()
            .map(|s| match s.respond {
                Respond::Do => format!("do {}", s.index),
                Respond::Skip => format!("skip {}", s.index),
            })
            .collect::<Vec<_>>()
            .join("\n")
    }

    pub fn do_steps(&self) -> impl Iterator<Item = &PlanStep> {
        self.steps.iter().filter(|s| s.respond == Respond::Do)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}
