//! OpenAI-compatible HTTP backend.
//!
//! `V2A_API_BASE` (e.g. `https://api.openai.com/v1`) and `V2A_API_KEY`
//! select the endpoint; `V2A_MODEL` and `V2A_EMBED_MODEL` override the
//! model names.

use super::backend::{AgentBackend, BackendError, Completion, CompletionRequest, Usage};
use crate::ir::TokenBasis;
use serde::Deserialize;
use serde_json::json;
use std::time::Duration;

pub const DEFAULT_MODEL: &str = "text-davinci-003";
pub const DEFAULT_EMBED_MODEL: &str = "text-embedding-ada-002";

#[derive(Debug, Clone)]
pub struct RemoteBackend {
    base: String,
    key: String,
    model: String,
    embed_model: String,
    client: reqwest::blocking::Client,
}

#[derive(Deserialize)]
struct CompletionResponse {
    choices: Vec<Choice>,
    usage: Option<ReportedUsage>,
}

#[derive(Deserialize)]
struct Choice {
    text: String,
    logprobs: Option<Logprobs>,
}

#[derive(Deserialize)]
struct Logprobs {
    token_logprobs: Vec<Option<f64>>,
}

#[derive(Deserialize)]
struct ReportedUsage {
    prompt_tokens: u64,
    completion_tokens: u64,
}

#[derive(Deserialize)]
struct EmbeddingResponse {
    data: Vec<EmbeddingItem>,
}

#[derive(Deserialize)]
struct EmbeddingItem {
    embedding: Vec<f64>,
}

/// Geometric-mean token probability, or 1 when the server sent none.
fn confidence(logprobs: Option<&Logprobs>) -> f64 {
    let Some(lp) = logprobs else { return 1.0 };
    let known: Vec<f64> = lp.token_logprobs.iter().flatten().copied().collect();
    if known.is_empty() {
        return 1.0;
    }
    (known.iter().sum::<f64>() / known.len() as f64).exp()
}

impl RemoteBackend {
    pub fn new(base: impl Into<String>, key: impl Into<String>) -> Result<Self, BackendError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(60))
            .build()
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        Ok(Self {
            base: base.into().trim_end_matches('/').to_string(),
            key: key.into(),
            model: DEFAULT_MODEL.into(),
            embed_model: DEFAULT_EMBED_MODEL.into(),
            client,
        })
    }

    /// Reads `V2A_API_BASE`, `V2A_API_KEY` and the optional model overrides.
    pub fn from_env() -> Result<Self, BackendError> {
        let var = |k: &str| std::env::var(k).map_err(|_| BackendError::Transport(format!("{k} is not set")));
        let mut backend = Self::new(var("V2A_API_BASE")?, var("V2A_API_KEY")?)?;
        if let Ok(m) = std::env::var("V2A_MODEL") {
            backend.model = m;
        }
        if let Ok(m) = std::env::var("V2A_EMBED_MODEL") {
            backend.embed_model = m;
        }
        Ok(backend)
    }

    fn post<T: for<'de> Deserialize<'de>>(&self, path: &str, body: serde_json::Value) -> Result<T, BackendError> {
        let response = self
            .client
            .post(format!("{}/{path}", self.base))
            .bearer_auth(&self.key)
            .json(&body)
            .send()
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        let status = response.status();
        if !status.is_success() {
            let text = response.text().unwrap_or_default();
            return Err(BackendError::Response(format!("{status}: {text}")));
        }
        response.json().map_err(|e| BackendError::Response(e.to_string()))
    }
}

impl AgentBackend for RemoteBackend {
    fn name(&self) -> &str {
        "remote"
    }

    fn complete(&self, request: &CompletionRequest) -> Result<Completion, BackendError> {
        let body = json!({
            "model": self.model,
            "prompt": request.prompt,
            "temperature": request.temperature,
            "max_tokens": request.max_generation,
            "logprobs": 1,
        });
        let resp: CompletionResponse = self.post("completions", body)?;
        let choice = resp
            .choices
            .into_iter()
            .next()
            .ok_or_else(|| BackendError::Response("no choices".into()))?;
        Ok(Completion {
            confidence: confidence(choice.logprobs.as_ref()),
            text: choice.text.trim().to_string(),
            usage: Usage {
                prompt_tokens: resp.usage.as_ref().map(|u| u.prompt_tokens),
                completion_tokens: resp.usage.as_ref().map(|u| u.completion_tokens),
            },
        })
    }

    fn embed(&self, text: &str) -> Result<Vec<f64>, BackendError> {
        let resp: EmbeddingResponse = self.post("embeddings", json!({ "model": self.embed_model, "input": text }))?;
        resp.data
            .into_iter()
            .next()
            .map(|d| d.embedding)
            .ok_or_else(|| BackendError::Response("no embedding".into()))
    }

    fn token_basis(&self) -> TokenBasis {
        TokenBasis::BackendReported
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn confidence_from_logprobs() {
        assert_eq!(confidence(None), 1.0);
        let lp = Logprobs {
            token_logprobs: vec![None, Some(0.0), Some(0.0)],
        };
        assert_eq!(confidence(Some(&lp)), 1.0);
        let lp = Logprobs {
            token_logprobs: vec![Some((0.5f64).ln())],
        };
        assert!((confidence(Some(&lp)) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn unreachable_server_is_a_transport_error() {
        let b = RemoteBackend::new("http://127.0.0.1:9", "k").unwrap();
        assert!(matches!(b.embed("x"), Err(BackendError::Transport(_))));
    }
}
