//! Intermediate representations of a command as it is lowered, and their
//! normative text forms.
//!
//! | value               | text form                                   |
//! |---------------------|---------------------------------------------|
//! | [`RawTranscript`]   | free text                                   |
//! | [`ClassifiedCommand`] | `action type:` / `action arg<i>:` lines   |
//! | [`ExtractionRecord`] list | `entity:` / `atomic action ...` blocks |
//! | [`ExecutionPlan`]   | `do <i>` / `skip <i>` lines                 |
//!
//! All values are immutable once built.

mod plan;
mod schema;
mod t1;
mod t2;
mod tokens;

pub use plan::{parse_plan, ExecutionPlan, PlanError, PlanStep, Respond};
pub use schema::{ActionSchema, SchemaSet, Slot};
pub use t1::{parse_t1, serialize_t1, ClassifiedCommand, T1Error};
pub use t2::{parse_t2, serialize_t2, ExtractionRecord, T2Error};
pub use tokens::{count_tokens, TokenBasis, TokenCount, TokenError};
pub(crate) use tokens::whitespace_tokens;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TranscriptStage {
    Raw,
    Preprocessed,
}

/// On average a transcript of `t` tokens covers `f` frames with `t ≈ 0.04 f`.
pub const TOKENS_PER_FRAME: f64 = 0.04;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TranscriptError {
    #[error("frame_end {end} precedes frame_start {start}")]
    Frames { start: u64, end: u64 },
}

/// The recognized text of a voice command (T) or its corrected form (T₀).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawTranscript {
    pub text: String,
    pub frame_start: u64,
    pub frame_end: u64,
    pub stage: TranscriptStage,
}

impl RawTranscript {
    pub fn new(
        text: impl Into<String>,
        frame_start: u64,
        frame_end: u64,
        stage: TranscriptStage,
    ) -> Result<Self, TranscriptError> {
        if frame_end < frame_start {
            return Err(TranscriptError::Frames {
                start: frame_start,
                end: frame_end,
            });
        }
        Ok(Self {
            text: text.into(),
            frame_start,
            frame_end,
            stage,
        })
    }

    /// A raw transcript starting at `frame_start` whose span follows the
    /// token rate: `f = ⌈t / 0.04⌉ = 25·t` frames for `t` whitespace tokens.
    pub fn spoken(text: impl Into<String>, frame_start: u64) -> Self {
        let text = text.into();
        let frames = frames_for_tokens(text.split_whitespace().count() as u64);
        Self {
            text,
            frame_start,
            frame_end: frame_start + frames,
            stage: TranscriptStage::Raw,
        }
    }

    /// Same span, new text, preprocessed stage.
    pub fn corrected(&self, text: impl Into<String>) -> Self {
        Self {
            text: text.into(),
            frame_start: self.frame_start,
            frame_end: self.frame_end,
            stage: TranscriptStage::Preprocessed,
        }
    }
}

/// `⌈t / 0.04⌉` computed exactly in integers.
pub fn frames_for_tokens(tokens: u64) -> u64 {
    // 1 / 0.04 = 25
    tokens * 25
}
