use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid agent config: {0}")]
pub struct ConfigError(pub String);

/// Knobs of the four agent stages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AgentConfig {
    /// Few-shot example counts per stage.
    pub k_pre: usize,
    pub k_cls: usize,
    pub k_ext: usize,
    pub k_exe: usize,
    /// Pre-processing agents; one per action type.
    pub m_pre: usize,
    /// Extraction agents; one per atomic action.
    pub m_ext: usize,
    /// Execution candidates raced per trial. Not fixed by any reference
    /// value; 3 trades race benefit against cost.
    pub m_exe: usize,
    pub temperature_pre: f64,
    pub temperature_other: f64,
    /// Completions scored below this are treated as parse failures.
    pub confidence: f64,
    pub max_generation: u32,
    pub max_trials: usize,
    /// Active fraction of the substitution table.
    pub alpha: f64,
    /// Simulated frames that elapse per processed token.
    pub frames_per_token: u64,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            k_pre: 3,
            k_cls: 2,
            k_ext: 3,
            k_exe: 3,
            m_pre: 2,
            m_ext: 7,
            m_exe: 3,
            temperature_pre: 0.9,
            temperature_other: 0.0,
            confidence: 0.8,
            max_generation: 512,
            max_trials: 8,
            alpha: 0.25,
            frames_per_token: 1,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let counts = [
            ("k_pre", self.k_pre),
            ("k_cls", self.k_cls),
            ("k_ext", self.k_ext),
            ("k_exe", self.k_exe),
            ("m_pre", self.m_pre),
            ("m_ext", self.m_ext),
            ("m_exe", self.m_exe),
            ("max_trials", self.max_trials),
            ("max_generation", self.max_generation as usize),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return Err(ConfigError(format!("{name} must be at least 1")));
        }
        for (name, t) in [("temperature_pre", self.temperature_pre), ("temperature_other", self.temperature_other)] {
            if !(0.0..=2.0).contains(&t) {
                return Err(ConfigError(format!("{name} = {t} outside [0, 2]")));
            }
        }
        if !(self.confidence > 0.0 && self.confidence <= 1.0) {
            return Err(ConfigError(format!("confidence = {} outside (0, 1]", self.confidence)));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(ConfigError(format!("alpha = {} outside [0, 1]", self.alpha)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        AgentConfig::default().validate().unwrap();
    }

    #[test]
    fn rejects_out_of_range() {
        let bad = [
            AgentConfig { k_cls: 0, ..Default::default() },
            AgentConfig { temperature_pre: 2.5, ..Default::default() },
            AgentConfig { confidence: 0.0, ..Default::default() },
            AgentConfig { alpha: 1.5, ..Default::default() },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
    }
}
