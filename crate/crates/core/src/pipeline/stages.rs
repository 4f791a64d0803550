//! Classification and extraction. Neither stage sees the scene.

use super::backend::{AgentBackend, BackendError, Completion, CompletionRequest, Task};
use super::config::AgentConfig;
use super::matcher::{rank_atomic, MatchError};
use super::prompts::PromptSet;
use super::seeds;
use crate::ir::{parse_t1, parse_t2, ClassifiedCommand, ExtractionRecord, SchemaSet, T1Error, T2Error, TokenError};
use crate::scene::{ActionRegistry, AtomicActionSpec, EntityKind};
use thiserror::Error;

/// Slot name used when a whole command is extracted as one span.
pub const WHOLE_COMMAND: &str = "command";

#[derive(Debug, Error)]
pub enum StageError {
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Tokens(#[from] TokenError),
    #[error(transparent)]
    Match(#[from] MatchError),
    #[error("answer confidence {confidence:.2} below threshold {threshold:.2}")]
    LowConfidence {
        confidence: f64,
        threshold: f64,
        raw: String,
        tokens: u64,
    },
    #[error("unparseable classification: {source}")]
    Classification {
        raw: String,
        tokens: u64,
        #[source]
        source: T1Error,
    },
    #[error("{source}")]
    Extraction {
        raw: String,
        tokens: u64,
        #[source]
        source: T2Error,
    },
}

impl StageError {
    /// Tokens spent before the stage failed.
    pub fn tokens(&self) -> u64 {
        match self {
            StageError::LowConfidence { tokens, .. }
            | StageError::Classification { tokens, .. }
            | StageError::Extraction { tokens, .. } => *tokens,
            _ => 0,
        }
    }

    /// Raw backend output, when there was one.
    pub fn raw(&self) -> Option<&str> {
        match self {
            StageError::LowConfidence { raw, .. }
            | StageError::Classification { raw, .. }
            | StageError::Extraction { raw, .. } => Some(raw),
            _ => None,
        }
    }
}

/// S_entity rendered for prompts.
pub fn entity_set() -> String {
    let names: Vec<&str> = EntityKind::ALL.iter().map(|k| k.as_str()).collect();
    format!("{{{}}}", names.join(", "))
}

/// One completion plus its token cost; rejects low-confidence answers.
pub(crate) fn call(
    backend: &dyn AgentBackend,
    config: &AgentConfig,
    prompt: String,
    temperature: f64,
    task: Task,
) -> Result<(Completion, u64), StageError> {
    let request = CompletionRequest {
        prompt,
        temperature,
        max_generation: config.max_generation,
        task,
    };
    let completion = backend.complete(&request)?;
    let tokens = completion.tokens(&request.prompt, backend.token_basis())?;
    if completion.confidence < config.confidence {
        return Err(StageError::LowConfidence {
            confidence: completion.confidence,
            threshold: config.confidence,
            raw: completion.text,
            tokens,
        });
    }
    Ok((completion, tokens))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classified {
    pub command: ClassifiedCommand,
    pub text: String,
    pub tokens: u64,
}

/// One backend call with `k_cls` examples, parsed as T₁.
pub fn classify(
    t0: &str,
    schemas: &SchemaSet,
    backend: &dyn AgentBackend,
    prompts: &PromptSet,
    config: &AgentConfig,
) -> Result<Classified, StageError> {
    // one example per action type first, then the rest
    let mut examples: Vec<(&str, &str)> = Vec::new();
    for ty in schemas.action_types() {
        if let Some(s) = seeds::seeds_of(ty).first() {
            examples.push((s.command, s.t1));
        }
    }
    for s in seeds::SEED_COMMANDS {
        if !examples.iter().any(|(c, _)| *c == s.command) {
            examples.push((s.command, s.t1));
        }
    }
    examples.truncate(config.k_cls);

    let prompt = prompts.classify(schemas, &examples, t0);
    let task = Task::Classify { command: t0.to_string() };
    let (completion, tokens) = call(backend, config, prompt, config.temperature_other, task)?;
    let command = parse_t1(&completion.text, schemas).map_err(|source| StageError::Classification {
        raw: completion.text.clone(),
        tokens,
        source,
    })?;
    tracing::debug!(action_type = %command.action_type, slots = command.args.len(), "classified");
    Ok(Classified {
        command,
        text: completion.text,
        tokens,
    })
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Extraction {
    pub records: Vec<ExtractionRecord>,
    /// T₂ text as returned, blocks of all spans joined.
    pub text: String,
    pub tokens: u64,
}

fn kind_mention(context: &str) -> Option<&'static str> {
    context.split_whitespace().find_map(|w| {
        let w = w.to_lowercase();
        EntityKind::ALL
            .iter()
            .find(|k| w == k.as_str() || w == format!("{}s", k.as_str()))
            .map(|k| k.as_str())
    })
}

/// The span's closest action first, then every other action with a
/// positive cosine, so spans covering several clauses stay groundable.
pub fn documented_actions<'r>(
    query: &str,
    registry: &'r ActionRegistry,
    backend: &dyn AgentBackend,
) -> Result<Vec<&'r AtomicActionSpec>, MatchError> {
    let ranked = rank_atomic(query, registry, backend)?;
    Ok(ranked
        .iter()
        .enumerate()
        .filter(|(i, (_, score))| *i == 0 || *score > 0.0)
        .map(|(_, (name, _))| registry.get(name).expect("ranked from registry"))
        .collect())
}

/// Extracts each `(slot, span)` with one backend call. Records come back
/// ordered reset, filter, pick, mutate so selections narrow before they
/// are read or changed.
#[allow(clippy::too_many_arguments)]
pub fn extract_spans(
    spans: &[(String, String)],
    context: &str,
    registry: &ActionRegistry,
    backend: &dyn AgentBackend,
    prompts: &PromptSet,
    config: &AgentConfig,
    negatives: &[String],
) -> Result<Extraction, StageError> {
    let entities = entity_set();
    let mut out = Extraction::default();
    let mut blocks = Vec::new();
    for (slot, span) in spans {
        let query = match (slot.as_str(), kind_mention(context)) {
            (WHOLE_COMMAND, _) => span.clone(),
            (_, Some(kind)) => format!("{slot} of {kind} {span}"),
            (_, None) => format!("{slot} {span}"),
        };
        let documented = documented_actions(&query, registry, backend)?;
        let examples: Vec<(String, String)> = if slot == WHOLE_COMMAND {
            seeds::SEED_COMMANDS
                .iter()
                .take(config.k_ext)
                .map(|s| (format!("command: {}", s.command), s.t2.to_string()))
                .collect()
        } else {
            seeds::slot_examples_for(&documented[0].name, config.k_ext)
                .into_iter()
                .map(|e| (format!("{}: {}", e.slot, e.span), e.t2.to_string()))
                .collect()
        };
        let prompt = prompts.extract(&entities, slot, span, context, &documented, &examples, negatives);
        let task = Task::Extract {
            slot: slot.clone(),
            span: span.clone(),
            context: context.to_string(),
            documented: documented.iter().map(|s| s.name.clone()).collect(),
            negatives: negatives.to_vec(),
        };
        let (completion, tokens) = call(backend, config, prompt, config.temperature_other, task).map_err(|e| {
            with_prior_tokens(e, out.tokens)
        })?;
        out.tokens += tokens;
        let records = parse_t2(&completion.text, registry).map_err(|source| StageError::Extraction {
            raw: completion.text.clone(),
            tokens: out.tokens,
            source,
        })?;
        if !completion.text.trim().is_empty() {
            blocks.push(completion.text.trim_end().to_string());
        }
        out.records.extend(records);
    }
    out.records
        .sort_by_key(|r| registry.get(&r.call.action).map(|s| s.family()));
    out.text = blocks.join("\n\n");
    Ok(out)
}

fn with_prior_tokens(e: StageError, prior: u64) -> StageError {
    match e {
        StageError::LowConfidence {
            confidence,
            threshold,
            raw,
            tokens,
        } => StageError::LowConfidence {
            confidence,
            threshold,
            raw,
            tokens: tokens + prior,
        },
        other => other,
    }
}

/// Extraction from a classified command: one call per filled slot.
#[allow(clippy::too_many_arguments)]
pub fn extract(
    t1: &ClassifiedCommand,
    t0: &str,
    schemas: &SchemaSet,
    registry: &ActionRegistry,
    backend: &dyn AgentBackend,
    prompts: &PromptSet,
    config: &AgentConfig,
    negatives: &[String],
) -> Result<Extraction, StageError> {
    let spans: Vec<(String, String)> = t1
        .named_args(schemas)
        .into_iter()
        .map(|(slot, span)| (slot.to_string(), span.to_string()))
        .collect();
    extract_spans(&spans, t0, registry, backend, prompts, config, negatives)
}

/// Straight from command text to records with every action documented.
pub fn execute_direct(
    command: &str,
    registry: &ActionRegistry,
    backend: &dyn AgentBackend,
    prompts: &PromptSet,
    config: &AgentConfig,
    negatives: &[String],
) -> Result<Extraction, StageError> {
    let documented: Vec<&AtomicActionSpec> = registry.iter().collect();
    let examples: Vec<(String, String)> = seeds::SEED_COMMANDS
        .iter()
        .take(config.k_ext)
        .map(|s| (s.command.to_string(), s.t2.to_string()))
        .collect();
    let prompt = prompts.execute_direct(&entity_set(), command, &documented, &examples, negatives);
    let task = Task::Extract {
        slot: WHOLE_COMMAND.into(),
        span: command.to_string(),
        context: command.to_string(),
        documented: documented.iter().map(|s| s.name.clone()).collect(),
        negatives: negatives.to_vec(),
    };
    let (completion, tokens) = call(backend, config, prompt, config.temperature_other, task)?;
    let records = parse_t2(&completion.text, registry).map_err(|source| StageError::Extraction {
        raw: completion.text.clone(),
        tokens,
        source,
    })?;
    Ok(Extraction {
        records,
        text: completion.text,
        tokens,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{embed_registry, DeterministicBackend};
    use crate::scene::builtin_registry;

    fn setup() -> (ActionRegistry, DeterministicBackend) {
        let mut reg = builtin_registry();
        let b = DeterministicBackend::new(&reg);
        embed_registry(&mut reg, &b).unwrap();
        (reg, b)
    }

    #[test]
    fn street_example_classify_and_extract() {
        let (reg, b) = setup();
        let (schemas, prompts, cfg) = (SchemaSet::default(), PromptSet::default(), AgentConfig::default());
        let t0 = "select the highest building on main street";
        let cls = classify(t0, &schemas, &b, &prompts, &cfg).unwrap();
        assert_eq!(cls.text, "action type: select\naction arg1: height\naction arg2: main street");
        assert!(cls.tokens > 0);
        let ext = extract(&cls.command, t0, &schemas, &reg, &b, &prompts, &cfg, &[]).unwrap();
        let actions: Vec<&str> = ext.records.iter().map(|r| r.call.action.as_str()).collect();
        assert_eq!(actions, vec!["select_by_tag", "scale_getter"]);
        assert!(ext.records.iter().all(|r| r.entity_kind == EntityKind::Building));
        assert!(ext.text.contains("atomic action arg1: y: inf"));
    }

    #[test]
    fn empty_command_fails_classification() {
        let (_, b) = setup();
        let err = classify("", &SchemaSet::default(), &b, &PromptSet::default(), &AgentConfig::default()).unwrap_err();
        assert!(matches!(err, StageError::Classification { .. }));
        assert!(err.tokens() > 0);
    }

    #[test]
    fn zero_slots_extract_nothing() {
        let (reg, b) = setup();
        let t1 = ClassifiedCommand {
            action_type: "select".into(),
            args: Default::default(),
        };
        let ext = extract(&t1, "select it", &SchemaSet::default(), &reg, &b, &PromptSet::default(), &AgentConfig::default(), &[]).unwrap();
        assert!(ext.records.is_empty());
        assert_eq!(ext.tokens, 0);
    }

    #[test]
    fn low_confidence_is_a_failure() {
        let (reg, b) = setup();
        let cfg = AgentConfig {
            confidence: 0.9,
            ..Default::default()
        };
        // no kind word and no unknown word: the backend assumes `building`
        let err = extract_spans(
            &[("superlative degree".into(), "height".into())],
            "select the highest",
            &reg,
            &b,
            &PromptSet::default(),
            &cfg,
            &[],
        )
        .unwrap_err();
        assert!(matches!(err, StageError::LowConfidence { .. }));
        assert!(err.tokens() > 0);
    }
}
