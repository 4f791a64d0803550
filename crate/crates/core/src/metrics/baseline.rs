use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Pre,
    Cls,
    Ext,
    Exe,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Pre => "pre",
            Stage::Cls => "cls",
            Stage::Ext => "ext",
            Stage::Exe => "exe",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BaselineError {
    #[error("unknown baseline `{0}`")]
    Unknown(String),
    #[error("baseline `{0}` must enable exe")]
    NoExe(String),
    #[error("baseline `{0}` enables cls without ext")]
    ClsWithoutExt(String),
}

/// A pipeline variant: which stages run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaselineConfig {
    pub name: String,
    pub stages: BTreeSet<Stage>,
}

impl BaselineConfig {
    pub fn new(name: impl Into<String>, stages: impl IntoIterator<Item = Stage>) -> Result<Self, BaselineError> {
        let b = Self {
            name: name.into(),
            stages: stages.into_iter().collect(),
        };
        if !b.enabled(Stage::Exe) {
            return Err(BaselineError::NoExe(b.name));
        }
        if b.enabled(Stage::Cls) && !b.enabled(Stage::Ext) {
            return Err(BaselineError::ClsWithoutExt(b.name));
        }
        Ok(b)
    }

    fn known(name: &str, stages: &[Stage]) -> Self {
        Self::new(name, stages.iter().copied()).expect("reference baselines are valid")
    }

    pub fn llm_exe() -> Self {
        Self::known("LLM-Exe", &[Stage::Exe])
    }

    pub fn llm_pre_exe() -> Self {
        Self::known("LLM-Pre-Exe", &[Stage::Pre, Stage::Exe])
    }

    /// The full pipeline with the whole corrected transcript as the only
    /// span to extract.
    pub fn llm_pre_ext_exe() -> Self {
        Self::known("LLM-Pre-Ext-Exe", &[Stage::Pre, Stage::Ext, Stage::Exe])
    }

    pub fn voice2action() -> Self {
        Self::known("Voice2Action", &[Stage::Pre, Stage::Cls, Stage::Ext, Stage::Exe])
    }

    /// The four reference variants, cheapest pipeline last.
    pub fn all() -> Vec<Self> {
        vec![Self::llm_exe(), Self::llm_pre_exe(), Self::llm_pre_ext_exe(), Self::voice2action()]
    }

    pub fn by_name(name: &str) -> Result<Self, BaselineError> {
        Self::all()
            .into_iter()
            .find(|b| b.name.eq_ignore_ascii_case(name))
            .ok_or_else(|| BaselineError::Unknown(name.to_string()))
    }

    pub fn enabled(&self, stage: Stage) -> bool {
        self.stages.contains(&stage)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_variants() {
        let all = BaselineConfig::all();
        assert_eq!(all.len(), 4);
        assert!(all.iter().all(|b| b.enabled(Stage::Exe)));
        assert_eq!(BaselineConfig::voice2action().stages.len(), 4);
        assert_eq!(BaselineConfig::by_name("voice2action").unwrap().name, "Voice2Action");
        assert!(BaselineConfig::by_name("x").is_err());
        assert!(BaselineConfig::new("bad", [Stage::Pre]).is_err());
        assert!(BaselineConfig::new("bad", [Stage::Cls, Stage::Exe]).is_err());
    }
}
