//! The agent stages and the machinery around them: backends, prompt
//! templates, the substitution table, the action matcher, and the
//! feedback-gated execution race.

mod backend;
mod config;
mod execute;
mod matcher;
mod mock;
mod prompts;
mod remote;
mod run;
pub mod seeds;
pub mod stages;
mod substitution;

pub use backend::{AgentBackend, BackendError, Completion, CompletionRequest, ScriptedBackend, Task, Usage};
pub use config::{AgentConfig, ConfigError};
pub use execute::{
    plan_and_execute, CandidateRun, ExecContext, ExecEvent, ExecutionError, ExecutionReport, Planner, RaceMode,
    TrialAttempt, TrialLog,
};
pub use matcher::{cosine, embed_registry, match_atomic, rank_atomic, terms, MatchError, TermFrequencyEmbedder};
pub use mock::{DeterministicBackend, DEFAULT_GROUNDING_BUDGET, FALLBACK_CONFIDENCE};
pub use prompts::{render, PromptError, PromptSet};
pub use remote::{RemoteBackend, DEFAULT_EMBED_MODEL, DEFAULT_MODEL};
pub use run::{Frames, Interpreter, PipelineEvent, PipelineTrace};
pub use stages::{classify, execute_direct, extract, extract_spans, Classified, Extraction, StageError, WHOLE_COMMAND};
pub use substitution::{
    active_count, build_substitution_table, parse_proposals, preprocess, rank_order, replace_tokens, SubstitutionError,
    SubstitutionPair, SubstitutionTable,
};
