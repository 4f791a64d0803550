//! Transcript correction through weighted token substitutions.
//!
//! Backends propose `(supposed, wrong)` pairs from example commands. A
//! pair's weight is the number of times it was proposed divided by how
//! often its supposed token occurs in the corpus, so frequent words need
//! more evidence. Only the top `⌈α·N⌉` pairs are applied.

use super::backend::{AgentBackend, BackendError, CompletionRequest, Task};
use super::config::AgentConfig;
use super::prompts::PromptSet;
use crate::ir::{RawTranscript, TokenError};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SubstitutionError {
    #[error("alpha = {0} outside [0, 1]")]
    Alpha(f64),
    #[error("pair ({supposed}, {wrong}) needs positive counts")]
    Weight { supposed: String, wrong: String },
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Tokens(#[from] TokenError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubstitutionPair {
    pub supposed: String,
    pub wrong: String,
    /// Times the pair was proposed.
    pub proposals: u64,
    /// Occurrences of `supposed` in the corpus.
    pub occurrences: u64,
}

impl SubstitutionPair {
    pub fn new(supposed: impl Into<String>, wrong: impl Into<String>, proposals: u64, occurrences: u64) -> Self {
        Self {
            supposed: supposed.into(),
            wrong: wrong.into(),
            proposals,
            occurrences,
        }
    }

    pub fn weight(&self) -> f64 {
        self.proposals as f64 / self.occurrences as f64
    }

    /// Exact comparison of the rational weights.
    pub fn cmp_weight(&self, other: &Self) -> Ordering {
        let lhs = self.proposals as u128 * other.occurrences as u128;
        let rhs = other.proposals as u128 * self.occurrences as u128;
        lhs.cmp(&rhs)
    }
}

/// Heavier first, then the lexicographically smaller wrong token, then the
/// smaller supposed token.
pub fn rank_order(a: &SubstitutionPair, b: &SubstitutionPair) -> Ordering {
    b.cmp_weight(a)
        .then_with(|| a.wrong.cmp(&b.wrong))
        .then_with(|| a.supposed.cmp(&b.supposed))
}

/// `⌈α·n⌉`, computed on α rounded to parts per million so that values
/// like 0.25 or 0.3 do not pick up binary representation error.
pub fn active_count(alpha: f64, n: usize) -> usize {
    let ppm = (alpha * 1e6).round() as u128;
    let k = (ppm * n as u128).div_ceil(1_000_000);
    (k as usize).min(n)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubstitutionTable {
    pairs: Vec<SubstitutionPair>,
    alpha: f64,
    /// Indices into `pairs`, best first.
    active: Vec<usize>,
}

impl Default for SubstitutionTable {
    fn default() -> Self {
        Self {
            pairs: Vec::new(),
            alpha: 0.25,
            active: Vec::new(),
        }
    }
}

impl SubstitutionTable {
    pub fn new(pairs: Vec<SubstitutionPair>, alpha: f64) -> Result<Self, SubstitutionError> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(SubstitutionError::Alpha(alpha));
        }
        if let Some(p) = pairs.iter().find(|p| p.proposals == 0 || p.occurrences == 0) {
            return Err(SubstitutionError::Weight {
                supposed: p.supposed.clone(),
                wrong: p.wrong.clone(),
            });
        }
        let mut order: Vec<usize> = (0..pairs.len()).collect();
        order.sort_by(|&a, &b| rank_order(&pairs[a], &pairs[b]));
        order.truncate(active_count(alpha, pairs.len()));
        Ok(Self {
            pairs,
            alpha,
            active: order,
        })
    }

    /// Every pair active with equal weight.
    pub fn fixed(pairs: &[(&str, &str)]) -> Self {
        let pairs = pairs.iter().map(|(s, w)| SubstitutionPair::new(*s, *w, 1, 1)).collect();
        Self::new(pairs, 1.0).expect("unit weights and alpha 1 are valid")
    }

    pub fn pairs(&self) -> &[SubstitutionPair] {
        &self.pairs
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Active pairs, best first.
    pub fn active(&self) -> Vec<&SubstitutionPair> {
        self.active.iter().map(|&i| &self.pairs[i]).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// wrong → supposed, resolved so that no output is itself corrected
    /// again. When two active pairs share a wrong token, or a pair would
    /// close a cycle, the higher-ranked pair wins.
    pub fn corrections(&self) -> BTreeMap<&str, &str> {
        let mut direct: BTreeMap<&str, &str> = BTreeMap::new();
        for p in self.active() {
            let (wrong, supposed) = (p.wrong.as_str(), p.supposed.as_str());
            if direct.contains_key(wrong) {
                continue;
            }
            let mut end = supposed;
            while let Some(next) = direct.get(end) {
                end = next;
            }
            if end != wrong {
                direct.insert(wrong, supposed);
            }
        }
        // chains are acyclic, so following them terminates
        direct
            .keys()
            .map(|&wrong| {
                let mut end = direct[wrong];
                while let Some(next) = direct.get(end) {
                    end = next;
                }
                (wrong, end)
            })
            .collect()
    }

    /// supposed → wrong, the inverse used to simulate recognition errors.
    pub fn confusions(&self) -> BTreeMap<&str, &str> {
        let mut map = BTreeMap::new();
        for p in self.active() {
            map.entry(p.supposed.as_str()).or_insert(p.wrong.as_str());
        }
        map
    }

    /// Active pairs rendered one per line for prompts.
    pub fn render_active(&self) -> String {
        self.active()
            .iter()
            .map(|p| format!("({}, {})", p.supposed, p.wrong))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// Rewrites every maximal non-whitespace run found in `map`, keeping all
/// whitespace byte-identical.
pub fn replace_tokens(text: &str, mut map: impl FnMut(&str) -> Option<String>) -> String {
    let mut out = String::with_capacity(text.len());
    let mut start = None;
    for (i, c) in text.char_indices() {
        match (c.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                let tok = &text[s..i];
                out.push_str(&map(tok).unwrap_or_else(|| tok.to_string()));
                out.push(c);
                start = None;
            }
            (true, None) => out.push(c),
            (false, Some(_)) => {}
        }
    }
    if let Some(s) = start {
        let tok = &text[s..];
        out.push_str(&map(tok).unwrap_or_else(|| tok.to_string()));
    }
    out
}

/// Replaces whole-token occurrences of active wrong tokens by their
/// supposed tokens. Pure; never sees the scene.
pub fn preprocess(transcript: &RawTranscript, table: &SubstitutionTable) -> RawTranscript {
    let corrections = table.corrections();
    let text = replace_tokens(&transcript.text, |tok| corrections.get(tok).map(|s| s.to_string()));
    transcript.corrected(text)
}

/// Parses `(supposed, wrong)` lines, skipping anything else.
pub fn parse_proposals(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter_map(|line| {
            let inner = line.trim().strip_prefix('(')?.strip_suffix(')')?;
            let (s, w) = inner.split_once(',')?;
            let (s, w) = (s.trim(), w.trim());
            let single = |t: &str| !t.is_empty() && !t.contains(char::is_whitespace);
            (single(s) && single(w) && s != w).then(|| (s.to_string(), w.to_string()))
        })
        .collect()
}

/// Asks one backend per action type for confusion pairs and weights them
/// against the corpus. Returns the table and the tokens spent.
pub fn build_substitution_table(
    per_action_examples: &BTreeMap<String, Vec<String>>,
    corpus: &[String],
    backend: &dyn AgentBackend,
    prompts: &PromptSet,
    config: &AgentConfig,
) -> Result<(SubstitutionTable, u64), SubstitutionError> {
    if corpus.is_empty() {
        return Err(SubstitutionError::EmptyCorpus);
    }
    let mut occurrences: BTreeMap<&str, u64> = BTreeMap::new();
    for line in corpus {
        for tok in line.split_whitespace() {
            *occurrences.entry(tok).or_default() += 1;
        }
    }

    let mut proposals: BTreeMap<(String, String), u64> = BTreeMap::new();
    let mut spent = 0;
    for (action_type, examples) in per_action_examples {
        let examples: Vec<String> = examples.iter().take(config.k_pre).cloned().collect();
        let prompt = prompts.propose_substitutions(action_type, &examples);
        let request = CompletionRequest {
            prompt,
            temperature: config.temperature_pre,
            max_generation: config.max_generation,
            task: Task::ProposeSubstitutions {
                action_type: action_type.clone(),
                examples,
            },
        };
        let completion = backend.complete(&request)?;
        spent += completion.tokens(&request.prompt, backend.token_basis())?;
        for pair in parse_proposals(&completion.text) {
            *proposals.entry(pair).or_default() += 1;
        }
    }

    let mut pairs = Vec::new();
    for ((supposed, wrong), n) in proposals {
        match occurrences.get(supposed.as_str()) {
            Some(&occ) => pairs.push(SubstitutionPair::new(supposed, wrong, n, occ)),
            None => tracing::warn!(%supposed, %wrong, "supposed token absent from corpus, pair dropped"),
        }
    }
    let table = SubstitutionTable::new(pairs, config.alpha)?;
    tracing::info!(pairs = table.pairs().len(), active = table.active().len(), "substitution table built");
    Ok((table, spent))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toy_table() {
        let t = SubstitutionTable::new(
            vec![
                SubstitutionPair::new("building", "beauty", 3, 30),
                SubstitutionPair::new("street", "sea", 2, 10),
            ],
            0.5,
        )
        .unwrap();
        let active: Vec<_> = t.active().iter().map(|p| p.wrong.as_str()).collect();
        assert_eq!(active, vec!["sea"]);
        assert_eq!(SubstitutionTable::new(t.pairs().to_vec(), 1.0).unwrap().active().len(), 2);
    }

    #[test]
    fn active_count_is_exact_ceiling() {
        assert_eq!(active_count(0.25, 4), 1);
        assert_eq!(active_count(0.25, 5), 2);
        assert_eq!(active_count(0.3, 10), 3);
        assert_eq!(active_count(0.0, 10), 0);
        assert_eq!(active_count(1.0, 7), 7);
        assert_eq!(active_count(0.25, 0), 0);
    }

    #[test]
    fn street_example_preprocess() {
        let t = SubstitutionTable::fixed(&[("building", "beauty"), ("main", "mean"), ("street", "sea")]);
        let raw = RawTranscript::spoken("select the highest beauty on mean sea", 0);
        let t0 = preprocess(&raw, &t);
        assert_eq!(t0.text, "select the highest building on main street");
        assert_eq!(t0.frame_end, raw.frame_end);
        let clean = RawTranscript::spoken("select the road", 0);
        assert_eq!(preprocess(&clean, &t).text, "select the road");
    }

    #[test]
    fn whitespace_survives() {
        let out = replace_tokens("  a\tb \n a", |t| (t == "a").then(|| "xy".to_string()));
        assert_eq!(out, "  xy\tb \n xy");
    }

    #[test]
    fn chains_resolve_and_cycles_break() {
        let t = SubstitutionTable::fixed(&[("a", "b"), ("b", "c"), ("c", "a")]);
        let raw = RawTranscript::spoken("a b c", 0);
        let once = preprocess(&raw, &t);
        assert_eq!(preprocess(&once, &t).text, once.text);
        // equal weights rank by wrong token: (c, a), (a, b), then (b, c),
        // which would close the cycle and is dropped
        assert_eq!(once.text, "c c c");
    }

    #[test]
    fn empty_table_is_identity() {
        let raw = RawTranscript::spoken("select the highest beauty", 0);
        assert_eq!(preprocess(&raw, &SubstitutionTable::default()).text, raw.text);
    }

    #[test]
    fn proposals_parse() {
        let got = parse_proposals("(building, beauty)\nnoise\n(main,mean)\n(a b, c)\n(x, x)");
        assert_eq!(
            got,
            vec![("building".into(), "beauty".into()), ("main".into(), "mean".into())]
        );
    }
}
