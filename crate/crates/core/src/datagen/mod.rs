//! Synthetic command datasets.
//!
//! Each round samples a task (one action type, some entity kinds, some
//! atomic actions), asks a backend for a batch of commands, and keeps the
//! ones that pass the filter. Kept commands are then mis-transcribed with
//! the confusion table to stand in for a speech recognizer.

mod corrupt;
mod dataset;
mod templates;

pub use corrupt::{confusion_table, corrupt_transcript, mishear_all};
pub use dataset::{read_jsonl, write_jsonl, DatasetError, DatasetHeader, DatasetSample, Expected, DATASET_FORMAT, DATASET_VERSION};
pub use templates::{fill_templates, SAMPLE_SEPARATOR};

use crate::ir::{parse_t2, ActionSchema, SchemaSet};
use crate::pipeline::{seeds, AgentBackend, CompletionRequest, PromptSet, Task};
use crate::pipeline::stages::entity_set;
use crate::scene::{ActionRegistry, EntityKind, SceneState};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DatagenConfig {
    pub rounds: usize,
    pub per_round: usize,
    /// Inclusive bounds of the entity-kind count draw.
    pub d_ent_range: (usize, usize),
    /// Inclusive bounds of the atomic-action count draw.
    pub d_atom_range: (usize, usize),
    pub seed: u64,
    /// Chance that each confusable token is mis-transcribed.
    pub corruption: f64,
    /// Generation budget for one round's completion.
    pub max_generation: u32,
}

impl Default for DatagenConfig {
    fn default() -> Self {
        Self {
            rounds: 10,
            per_round: 10,
            d_ent_range: (1, 3),
            d_atom_range: (2, 10),
            seed: 0,
            corruption: 0.3,
            max_generation: 4096,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DatagenError {
    #[error("empty range {0:?}")]
    EmptyRange((usize, usize)),
    #[error("{rounds} round(s) of {per_round} cannot yield {size} samples")]
    TooSmall { rounds: usize, per_round: usize, size: usize },
    #[error("corruption probability {0} outside [0, 1]")]
    Probability(f64),
    #[error("no action schemas or atomic actions to sample from")]
    EmptyRegistry,
}

impl DatagenConfig {
    pub fn validate(&self, size: usize) -> Result<(), DatagenError> {
        for r in [self.d_ent_range, self.d_atom_range] {
            if r.0 > r.1 || r.0 == 0 {
                return Err(DatagenError::EmptyRange(r));
            }
        }
        if self.rounds * self.per_round < size {
            return Err(DatagenError::TooSmall {
                rounds: self.rounds,
                per_round: self.per_round,
                size,
            });
        }
        if !(0.0..=1.0).contains(&self.corruption) {
            return Err(DatagenError::Probability(self.corruption));
        }
        Ok(())
    }
}

/// One sampled generation task.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskDraw {
    pub action_type: String,
    pub kinds: Vec<EntityKind>,
    pub actions: Vec<String>,
    /// The raw draws, before capping at the available counts.
    pub d_ent: usize,
    pub d_atom: usize,
}

/// Draws one action type uniformly, then `d_ent` kinds and `d_atom`
/// actions without replacement. Draws larger than what is available are
/// capped.
pub fn sample_task(config: &DatagenConfig, schemas: &SchemaSet, registry: &ActionRegistry, rng: &mut impl Rng) -> TaskDraw {
    let types = schemas.action_types();
    let action_type = types[rng.gen_range(0..types.len())].to_string();
    let d_ent = rng.gen_range(config.d_ent_range.0..=config.d_ent_range.1);
    let d_atom = rng.gen_range(config.d_atom_range.0..=config.d_atom_range.1);
    let kinds: Vec<EntityKind> = EntityKind::ALL
        .choose_multiple(rng, d_ent.min(EntityKind::ALL.len()))
        .copied()
        .collect();
    let names = registry.names();
    let actions: Vec<String> = names
        .choose_multiple(rng, d_atom.min(names.len()))
        .map(|s| s.to_string())
        .collect();
    TaskDraw {
        action_type,
        kinds,
        actions,
        d_ent,
        d_atom,
    }
}

/// Why candidates were dropped.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectionReport {
    pub candidates: usize,
    pub accepted: usize,
    pub duplicate: usize,
    /// Records that do not parse or do not pass on the scene.
    pub unsound: usize,
    /// Records that pass but select and change nothing.
    pub empty: usize,
    /// Rejected by the filter predicate.
    pub filtered: usize,
    pub failed_rounds: usize,
}

impl RejectionReport {
    pub fn rejection_rate(&self) -> f64 {
        if self.candidates == 0 {
            return 0.0;
        }
        1.0 - self.accepted as f64 / self.candidates as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedDataset {
    pub samples: Vec<DatasetSample>,
    pub report: RejectionReport,
}

/// Everything generation reads besides its config.
pub struct DatagenContext<'a> {
    pub backend: &'a dyn AgentBackend,
    pub registry: &'a ActionRegistry,
    pub schemas: &'a SchemaSet,
    pub prompts: &'a PromptSet,
    /// Scene that labels are checked against.
    pub scene: &'a SceneState,
}

fn round_rng(seed: u64, round: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(round as u64);
    rng
}

fn round_prompt(ctx: &DatagenContext, schema: &ActionSchema, draw: &TaskDraw, count: usize) -> String {
    let documented: Vec<_> = draw.actions.iter().filter_map(|a| ctx.registry.get(a)).collect();
    let examples: Vec<String> = seeds::seeds_of(&schema.action_type)
        .iter()
        .map(|s| format!("command: {}\n{}", s.command, s.t2))
        .collect();
    ctx.prompts.generate(schema, &entity_set(), &documented, &examples, count)
}

/// Parses one generated sample; `None` when it is not a well-formed pair.
fn parse_candidate(text: &str) -> Option<(String, String)> {
    let (head, t2) = text.trim().split_once('\n')?;
    let command = head.strip_prefix("command:")?.trim().to_string();
    (!command.is_empty()).then(|| (command, t2.trim().to_string()))
}

enum Verdict {
    Unsound,
    Empty,
    Sound(Expected),
}

fn check_label(ctx: &DatagenContext, t2: &str) -> Verdict {
    let Ok(records) = parse_t2(t2, ctx.registry) else {
        return Verdict::Unsound;
    };
    if records.is_empty() {
        return Verdict::Unsound;
    }
    let mut scene = ctx.scene.clone();
    for r in &records {
        if !scene.apply_atomic(ctx.registry, &r.call).feedback.is_pass() {
            return Verdict::Unsound;
        }
    }
    if scene.selection().is_empty() && ctx.scene.changed_entities(&scene).is_empty() {
        return Verdict::Empty;
    }
    let entities: BTreeSet<EntityKind> = records.iter().map(|r| r.entity_kind).collect();
    Verdict::Sound(Expected {
        entities: entities.into_iter().collect(),
        t2: t2.to_string(),
    })
}

/// Generates up to `size` accepted samples. Rounds are independent: each
/// has its own random stream derived from the seed, so they run in
/// parallel without changing the output. A round whose backend call fails
/// is skipped.
pub fn generate_dataset(
    config: &DatagenConfig,
    ctx: &DatagenContext,
    size: usize,
    filter: &mut dyn FnMut(&DatasetSample) -> bool,
) -> Result<GeneratedDataset, DatagenError> {
    config.validate(size)?;
    if ctx.schemas.is_empty() || ctx.registry.is_empty() {
        return Err(DatagenError::EmptyRegistry);
    }

    // (round, draw, completion text or None)
    let rounds: Vec<(TaskDraw, Option<String>, ChaCha8Rng)> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..config.rounds)
            .map(|round| {
                s.spawn(move || {
                    let mut rng = round_rng(config.seed, round);
                    let draw = sample_task(config, ctx.schemas, ctx.registry, &mut rng);
                    let schema = ctx.schemas.get(&draw.action_type).expect("drawn from schemas");
                    let request = CompletionRequest {
                        prompt: round_prompt(ctx, schema, &draw, config.per_round),
                        temperature: 0.0,
                        max_generation: config.max_generation,
                        task: Task::Generate {
                            action_type: draw.action_type.clone(),
                            kinds: draw.kinds.iter().map(|k| k.as_str().to_string()).collect(),
                            actions: draw.actions.clone(),
                            count: config.per_round,
                            seed: rng.gen(),
                        },
                    };
                    let text = match ctx.backend.complete(&request) {
                        Ok(c) => Some(c.text),
                        Err(e) => {
                            tracing::warn!(round, error = %e, "generation round skipped");
                            None
                        }
                    };
                    (draw, text, rng)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("generation worker panicked")).collect()
    });

    let table = confusion_table();
    let mut report = RejectionReport::default();
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut samples = Vec::new();
    for (round, (draw, text, mut rng)) in rounds.into_iter().enumerate() {
        let Some(text) = text else {
            report.failed_rounds += 1;
            continue;
        };
        for (k, chunk) in text.split(SAMPLE_SEPARATOR).enumerate() {
            report.candidates += 1;
            let Some((command, t2)) = parse_candidate(chunk) else {
                report.unsound += 1;
                continue;
            };
            if !seen.insert(command.clone()) {
                report.duplicate += 1;
                continue;
            }
            let expected = match check_label(ctx, &t2) {
                Verdict::Sound(e) => e,
                Verdict::Unsound => {
                    report.unsound += 1;
                    continue;
                }
                Verdict::Empty => {
                    report.empty += 1;
                    continue;
                }
            };
            let transcript = corrupt_transcript(&command, &table, config.corruption, &mut rng);
            let mut sample = DatasetSample {
                id: format!("r{round:02}-{k:02}"),
                command,
                transcript: transcript.text,
                action_type: draw.action_type.clone(),
                expected,
                accepted: false,
            };
            sample.accepted = filter(&sample);
            if !sample.accepted {
                report.filtered += 1;
                continue;
            }
            report.accepted += 1;
            samples.push(sample);
        }
    }
    if samples.len() < size {
        tracing::warn!(wanted = size, got = samples.len(), "fewer accepted samples than requested");
    }
    samples.truncate(size);
    tracing::info!(
        accepted = report.accepted,
        candidates = report.candidates,
        rate = report.rejection_rate(),
        "dataset generated"
    );
    Ok(GeneratedDataset { samples, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::DeterministicBackend;
    use crate::scene::builtin_registry;

    fn fixture() -> SceneState {
        SceneState::fixture()
    }

    #[test]
    fn draws_are_capped_and_reproducible() {
        let reg = builtin_registry();
        let schemas = SchemaSet::default();
        let config = DatagenConfig {
            d_atom_range: (10, 10),
            ..DatagenConfig::default()
        };
        let a = sample_task(&config, &schemas, &reg, &mut round_rng(3, 0));
        let b = sample_task(&config, &schemas, &reg, &mut round_rng(3, 0));
        assert_eq!(a, b);
        assert_eq!(a.d_atom, 10);
        assert_eq!(a.actions.len(), 7);
    }

    #[test]
    fn twenty_sound_samples() {
        let reg = builtin_registry();
        let schemas = SchemaSet::default();
        let backend = DeterministicBackend::new(&reg);
        let scene = fixture();
        let ctx = DatagenContext {
            backend: &backend,
            registry: &reg,
            schemas: &schemas,
            prompts: &PromptSet::default(),
            scene: &scene,
        };
        let out = generate_dataset(&DatagenConfig::default(), &ctx, 20, &mut |_| true).unwrap();
        assert_eq!(out.samples.len(), 20);
        assert!(out.report.rejection_rate() < 0.10, "{:?}", out.report);
        for s in &out.samples {
            assert!(s.accepted);
            assert!(parse_t2(&s.expected.t2, &reg).is_ok());
        }
        let none = generate_dataset(&DatagenConfig::default(), &ctx, 20, &mut |_| false).unwrap();
        assert!(none.samples.is_empty());
        assert_eq!(none.report.filtered, none.report.candidates - none.report.duplicate - none.report.unsound - none.report.empty);
    }
}
