//! The language-model seam.
//!
//! Every stage talks to an [`AgentBackend`] through a rendered prompt. The
//! request also carries a structured [`Task`] describing what the prompt
//! asks for; remote backends ignore it, offline backends answer from it.

use crate::ir::{count_tokens, ExtractionRecord, TokenBasis, TokenError};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::sync::Mutex;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("backend transport: {0}")]
    Transport(String),
    #[error("backend response: {0}")]
    Response(String),
    #[error("scripted backend exhausted after {0} completion(s)")]
    ScriptExhausted(usize),
    #[error("backend does not support {0}")]
    Unsupported(&'static str),
}

/// What a prompt asks for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "snake_case")]
pub enum Task {
    /// Propose (supposed, wrongly pronounced) pairs from example commands.
    ProposeSubstitutions { action_type: String, examples: Vec<String> },
    Classify { command: String },
    /// Ground one span (a classified slot, or a whole command when `slot`
    /// is `command`) into extraction records.
    Extract {
        slot: String,
        span: String,
        context: String,
        /// Documented action names, closest match first.
        documented: Vec<String>,
        negatives: Vec<String>,
    },
    Plan { records: Vec<ExtractionRecord>, candidate: usize },
    /// Write `count` commands for a sampled task.
    Generate {
        action_type: String,
        kinds: Vec<String>,
        actions: Vec<String>,
        count: usize,
        seed: u64,
    },
    Freeform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub prompt: String,
    pub temperature: f64,
    pub max_generation: u32,
    pub task: Task,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub prompt_tokens: Option<u64>,
    pub completion_tokens: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Completion {
    pub text: String,
    pub usage: Usage,
    /// Backend score in [0, 1]; compared against the confidence threshold.
    pub confidence: f64,
}

impl Completion {
    pub fn certain(text: impl Into<String>) -> Self {
        Self {
            text: text.into(),
            usage: Usage::default(),
            confidence: 1.0,
        }
    }

    /// `|prompt| + |generated|` on the backend's basis.
    pub fn tokens(&self, prompt: &str, basis: TokenBasis) -> Result<u64, TokenError> {
        let p = count_tokens(prompt, basis, self.usage.prompt_tokens)?.value;
        let g = count_tokens(&self.text, basis, self.usage.completion_tokens)?.value;
        Ok(p + g)
    }
}

pub trait AgentBackend: Send + Sync {
    fn name(&self) -> &str;
    fn complete(&self, request: &CompletionRequest) -> Result<Completion, BackendError>;
    fn embed(&self, text: &str) -> Result<Vec<f64>, BackendError>;
    fn token_basis(&self) -> TokenBasis {
        TokenBasis::Whitespace
    }
}

/// Replays canned completions for one task kind and delegates everything
/// else. Used to script failures in tests and examples.
pub struct ScriptedBackend<B> {
    inner: B,
    matches: fn(&Task) -> bool,
    script: Mutex<VecDeque<String>>,
    served: Mutex<usize>,
}

impl<B: AgentBackend> ScriptedBackend<B> {
    pub fn new(inner: B, matches: fn(&Task) -> bool, script: impl IntoIterator<Item = String>) -> Self {
        Self {
            inner,
            matches,
            script: Mutex::new(script.into_iter().collect()),
            served: Mutex::new(0),
        }
    }

    /// Scripts extraction replies.
    pub fn extractions(inner: B, script: impl IntoIterator<Item = String>) -> Self {
        Self::new(inner, |t| matches!(t, Task::Extract { .. }), script)
    }

    pub fn served(&self) -> usize {
        *self.served.lock().expect("script lock")
    }
}

impl<B: AgentBackend> AgentBackend for ScriptedBackend<B> {
    fn name(&self) -> &str {
        "scripted"
    }

    fn complete(&self, request: &CompletionRequest) -> Result<Completion, BackendError> {
        if !(self.matches)(&request.task) {
            return self.inner.complete(request);
        }
        let mut served = self.served.lock().expect("script lock");
        let text = self
            .script
            .lock()
            .expect("script lock")
            .pop_front()
            .ok_or(BackendError::ScriptExhausted(*served))?;
        *served += 1;
        Ok(Completion::certain(text))
    }

    fn embed(&self, text: &str) -> Result<Vec<f64>, BackendError> {
        self.inner.embed(text)
    }

    fn token_basis(&self) -> TokenBasis {
        self.inner.token_basis()
    }
}
