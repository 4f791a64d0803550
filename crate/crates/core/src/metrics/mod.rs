//! Token accounting, outcome ratings, and the baseline ablation harness.

mod ablation;
mod baseline;
mod ledger;
mod rating;

pub use ablation::{run_ablation, AblationReport, BaselineSummary, RatingCounts, SampleOutcome};
pub use baseline::{BaselineConfig, BaselineError, Stage};
pub use ledger::{total_tokens, TokenLedger};
pub use rating::{rate_outcome, Level, OutcomeRating, RatingError};
