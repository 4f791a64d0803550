//! Service configuration, read from a TOML file.
//!
//! ```toml
//! listen = "127.0.0.1:8080"
//! scene = "scenes/block.json"
//! prompts = "prompts"
//! backend = "mock"
//! baseline = "Voice2Action"
//! substitution = "lexicon"
//! alpha = 0.25
//! max_trials = 8
//! ```
//!
//! Every agent knob (`k_ext`, `m_exe`, `confidence`, ...) may appear at the
//! top level. `substitution` is `"lexicon"`, `"learned"`, `"none"` or
//! `{ pairs = [["building", "beauty"], ...] }`.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use thiserror::Error;
use v2a_core::datagen::confusion_table;
use v2a_core::metrics::{BaselineConfig, BaselineError};
use v2a_core::pipeline::{
    seeds, AgentBackend, AgentConfig, BackendError, ConfigError, DeterministicBackend, Interpreter, PromptError,
    PromptSet, RaceMode, RemoteBackend, SubstitutionError, SubstitutionTable,
};
use v2a_core::scene::{builtin_registry, SceneError, SceneState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    #[default]
    Mock,
    Remote,
}

impl std::str::FromStr for BackendKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mock" => Ok(Self::Mock),
            "remote" => Ok(Self::Remote),
            other => Err(format!("unknown backend `{other}` (expected mock or remote)")),
        }
    }
}

/// Where the session substitution table comes from.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubstitutionSource {
    /// Every confusion pair of the command lexicon.
    #[default]
    Lexicon,
    /// Proposed by the backend from the seed commands, weighted against
    /// them, top `alpha` kept.
    Learned,
    /// Explicit `(supposed, wrong)` pairs, all active.
    Pairs(Vec<(String, String)>),
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ServiceConfig {
    pub listen: String,
    pub scene: Option<PathBuf>,
    pub prompts: Option<PathBuf>,
    pub backend: BackendKind,
    pub baseline: String,
    pub substitution: SubstitutionSource,
    pub race: RaceMode,
    #[serde(flatten)]
    pub agent: AgentConfig,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            listen: "127.0.0.1:8080".into(),
            scene: None,
            prompts: None,
            backend: BackendKind::Mock,
            baseline: BaselineConfig::voice2action().name,
            substitution: SubstitutionSource::Lexicon,
            race: RaceMode::Simulated,
            agent: AgentConfig::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum SetupError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error(transparent)]
    Agent(#[from] ConfigError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    Prompts(#[from] PromptError),
    #[error("backend: {0}")]
    Backend(#[from] BackendError),
    #[error("substitution table: {0}")]
    Substitution(#[from] SubstitutionError),
}

impl ServiceConfig {
    pub fn from_toml(text: &str) -> Result<Self, SetupError> {
        let config: Self = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SetupError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| SetupError::Read {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), SetupError> {
        self.agent.validate()?;
        BaselineConfig::by_name(&self.baseline)?;
        Ok(())
    }

    pub fn baseline(&self) -> Result<BaselineConfig, SetupError> {
        Ok(BaselineConfig::by_name(&self.baseline)?)
    }

    /// The configured scene, or the bundled fixture.
    pub fn load_scene(&self) -> Result<SceneState, SetupError> {
        Ok(match &self.scene {
            Some(path) => SceneState::load_file(path)?,
            None => SceneState::fixture(),
        })
    }

    pub fn make_backend(&self, kind: BackendKind) -> Result<Arc<dyn AgentBackend>, SetupError> {
        Ok(match kind {
            BackendKind::Mock => Arc::new(DeterministicBackend::new(&builtin_registry())),
            BackendKind::Remote => Arc::new(RemoteBackend::from_env()?),
        })
    }

    /// A ready interpreter on `kind`: embedded registry, prompts, agent
    /// config and substitution table.
    pub fn interpreter(&self, kind: BackendKind) -> Result<Interpreter, SetupError> {
        let prompts = match &self.prompts {
            Some(dir) => PromptSet::from_dir(dir)?,
            None => PromptSet::default(),
        };
        let mut interpreter = Interpreter::new(self.make_backend(kind)?)?
            .with_config(self.agent.clone())
            .with_prompts(prompts)
            .with_race(self.race);
        match &self.substitution {
            SubstitutionSource::Lexicon => interpreter = interpreter.with_table(confusion_table()),
            SubstitutionSource::Learned => {
                let corpus: Vec<String> = seeds::SEED_COMMANDS.iter().map(|s| s.command.to_string()).collect();
                let spent = interpreter.learn_substitutions(&corpus)?;
                tracing::info!(tokens = spent, "substitution table learned");
            }
            SubstitutionSource::Pairs(pairs) => {
                let refs: Vec<(&str, &str)> = pairs.iter().map(|(s, w)| (s.as_str(), w.as_str())).collect();
                interpreter = interpreter.with_table(SubstitutionTable::fixed(&refs));
            }
            SubstitutionSource::None => interpreter = interpreter.with_table(SubstitutionTable::default()),
        }
        Ok(interpreter)
    }
}
