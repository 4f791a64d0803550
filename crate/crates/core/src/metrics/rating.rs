use crate::scene::{Feedback, SceneState};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

/// A–C are pass grades, D is engine failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Level {
    A,
    B,
    C,
    D,
}

impl Level {
    pub const ALL: [Level; 4] = [Level::A, Level::B, Level::C, Level::D];
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("level {level} contradicts feedback status; D is reserved for failed runs")]
pub struct RatingError {
    pub level: Level,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRating {
    pub level: Level,
    pub feedback: Feedback,
    /// Set when a human replaced the automatic grade.
    pub manual: bool,
}

impl OutcomeRating {
    /// Replaces the automatic grade. A pass can only be regraded within
    /// A–C, and a failure stays D.
    pub fn override_level(&mut self, level: Level) -> Result<(), RatingError> {
        if (level == Level::D) != !self.feedback.is_pass() {
            return Err(RatingError { level });
        }
        self.level = level;
        self.manual = true;
        Ok(())
    }
}

/// Entities a run selected or changed, relative to `before`.
fn touched(before: &SceneState, after: &SceneState) -> BTreeSet<String> {
    let mut ids = before.changed_entities(after);
    ids.extend(after.selection());
    ids
}

/// Automatic rubric: fail → D; the expected entity state exactly → A; the
/// right entities with other values → B; anything else → C. Without an
/// expectation the run's own result is taken as expected.
pub fn rate_outcome(
    feedback: &Feedback,
    before: &SceneState,
    after: &SceneState,
    expectation: Option<&SceneState>,
) -> OutcomeRating {
    let level = if !feedback.is_pass() {
        Level::D
    } else {
        let expected = expectation.unwrap_or(after);
        if after.entities == expected.entities {
            Level::A
        } else if touched(before, after) == touched(before, expected) {
            Level::B
        } else {
            Level::C
        }
    };
    OutcomeRating {
        level,
        feedback: feedback.clone(),
        manual: false,
    }
}
