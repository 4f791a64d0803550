//! Offline backend that answers every stage from the command lexicon.
//!
//! Output is a pure function of the request. The model is deliberately
//! imperfect in the ways a completion model is:
//!
//! * Grounding budget. One completion can ground a limited number of
//!   clauses. Each clause costs as many units as actions are documented in
//!   the prompt; a clause past the budget loses its last argument. An
//!   action already named in a negative example is grounded with care: it
//!   costs nothing and is dropped rather than emitted broken.
//! * Unknown words. When a prompt covers a whole command rather than one
//!   slot, every out-of-vocabulary word not yet ruled out by a negative
//!   example is taken for an entity mention.
//! * Entity guessing. With no kind word in sight, the first unknown word
//!   is guessed as the entity kind; once that is ruled out the backend
//!   falls back to `building` at reduced confidence.

use super::backend::{AgentBackend, BackendError, Completion, CompletionRequest, Task};
use super::matcher::TermFrequencyEmbedder;
use crate::ir::{serialize_t1, serialize_t2, ClassifiedCommand, ExtractionRecord, SchemaSet};
use crate::lexicon::{self, Clause};
use crate::scene::{ActionFamily, ActionRegistry, Arg, AtomicActionSpec, EntityKind, Value};
use std::collections::BTreeMap;

pub const DEFAULT_GROUNDING_BUDGET: usize = 8;

/// Confidence reported when the entity kind had to be assumed.
pub const FALLBACK_CONFIDENCE: f64 = 0.85;

#[derive(Debug, Clone)]
pub struct DeterministicBackend {
    registry: ActionRegistry,
    schemas: SchemaSet,
    embedder: TermFrequencyEmbedder,
    grounding_budget: usize,
}

fn slot_action(slot: &str) -> Option<&'static str> {
    Some(match slot {
        "superlative degree" => "scale_getter",
        "location" => "select_by_tag",
        "distance" => "range",
        "proximity" => "locate",
        "reset" => "deselect_all",
        "resize" => "scale_setter",
        "movement" => "translate",
        _ => return None,
    })
}

fn mentions(negatives: &[String], word: &str) -> bool {
    let quoted = format!("`{word}`");
    negatives.iter().any(|n| n.contains(&quoted))
}

/// Arguments for `spec` read off `span`; may come up short.
fn ground_args(spec: &AtomicActionSpec, span: &str) -> Vec<Arg> {
    use crate::scene::Effect;
    let nums = |keys: &[&str]| -> Vec<Arg> {
        keys.iter()
            .zip(lexicon::numbers(span))
            .map(|(k, n)| Arg::new(*k, Value::Num(n)))
            .collect()
    };
    match spec.effect {
        Effect::DeselectAll => Vec::new(),
        Effect::SelectByTag => vec![Arg::new("tag", Value::Str(span.to_string()))],
        Effect::Range => nums(&["start", "end"]),
        Effect::Locate => nums(&["x", "y", "z"]),
        Effect::ScaleGetter => lexicon::degree_argument(span)
            .map(|(axis, v)| vec![Arg::new(axis.as_str(), v)])
            .unwrap_or_default(),
        Effect::ScaleSetter => match lexicon::resize_factors(span) {
            Some([x, y, z]) => vec![
                Arg::new("x", Value::Num(x)),
                Arg::new("y", Value::Num(y)),
                Arg::new("z", Value::Num(z)),
            ],
            None => nums(&["x", "y", "z"]),
        },
        Effect::Translate => lexicon::movement_offset(span)
            .map(|v| vec![Arg::new("offset", Value::Vector(v))])
            .unwrap_or_default(),
    }
}

fn truncate_to(text: String, max_tokens: u32) -> String {
    let mut used = 0usize;
    let mut kept = Vec::new();
    for line in text.split('\n') {
        used += line.split_whitespace().count();
        if used > max_tokens as usize {
            break;
        }
        kept.push(line);
    }
    kept.join("\n")
}

impl DeterministicBackend {
    pub fn new(registry: &ActionRegistry) -> Self {
        Self {
            registry: registry.clone(),
            schemas: SchemaSet::default(),
            embedder: TermFrequencyEmbedder::for_registry(registry),
            grounding_budget: DEFAULT_GROUNDING_BUDGET,
        }
    }

    pub fn with_grounding_budget(mut self, units: usize) -> Self {
        self.grounding_budget = units;
        self
    }

    pub fn grounding_budget(&self) -> usize {
        self.grounding_budget
    }

    fn propose(&self, examples: &[String]) -> String {
        let mut lines: Vec<String> = Vec::new();
        for ex in examples {
            for tok in lexicon::tokens(ex) {
                for (supposed, wrong) in lexicon::CONFUSIONS {
                    let line = format!("({supposed}, {wrong})");
                    if tok == *supposed && !lines.contains(&line) {
                        lines.push(line);
                    }
                }
            }
        }
        lines.join("\n")
    }

    fn classify(&self, command: &str) -> String {
        if command.trim().is_empty() {
            return String::new();
        }
        let clauses = lexicon::find_clauses(command);
        let action_type = lexicon::action_type(command, &clauses);
        let schema = self.schemas.get(action_type).expect("lexicon types are registered");
        let args: BTreeMap<usize, String> = clauses
            .iter()
            .filter_map(|c| schema.slot_index(c.slot).map(|i| (i, c.span.clone())))
            .collect();
        serialize_t1(&ClassifiedCommand {
            action_type: action_type.to_string(),
            args,
        })
    }

    /// Returns the T₂ text and the confidence.
    fn extract(&self, slot: &str, span: &str, context: &str, documented: &[String], negatives: &[String]) -> (String, f64) {
        let docs: Vec<&AtomicActionSpec> = documented.iter().filter_map(|n| self.registry.get(n)).collect();
        let Some(primary) = docs.first() else {
            return (String::new(), 1.0);
        };

        // focused when the slot is a schema slot, compound otherwise
        let clauses: Vec<Clause> = if slot_action(slot).is_some() {
            vec![Clause {
                slot: "focused",
                span: span.to_string(),
                start: 0,
            }]
        } else {
            lexicon::find_clauses(span)
        };
        let whole = slot_action(slot).is_none();

        let unknown_free = |tok: &String| !mentions(negatives, tok);
        let (kind_text, confidence) = match lexicon::detect_kind(span).or_else(|| lexicon::detect_kind(context)) {
            Some(k) => (k.as_str().to_string(), 1.0),
            None => match lexicon::unknown_tokens(context).into_iter().find(unknown_free) {
                Some(guess) => (guess, 1.0),
                None => (EntityKind::Building.as_str().to_string(), FALLBACK_CONFIDENCE),
            },
        };

        let cost = docs.len();
        let mut spent = 0;
        let mut grounded: Vec<(ActionFamily, String)> = Vec::new();
        for clause in &clauses {
            let spec = match slot_action(if clause.slot == "focused" { slot } else { clause.slot }) {
                Some(name) => docs.iter().find(|s| s.name == name).copied(),
                None => None,
            };
            let spec = match spec {
                Some(s) => s,
                None if clause.slot == "focused" => *primary,
                None => continue,
            };
            let careful = mentions(negatives, &spec.name);
            let mut args = ground_args(spec, &clause.span);
            if !careful {
                spent += cost;
                if spent > self.grounding_budget {
                    args.pop();
                }
            } else if args.len() != spec.arity() {
                continue;
            }
            let block = serialize_t2(&[ExtractionRecord {
                entity_kind: EntityKind::Building,
                call: crate::scene::AtomicCall::new(spec.name.clone(), args, Some(EntityKind::Building)),
            }]);
            let block = block.replacen("entity: building", &format!("entity: {kind_text}"), 1);
            grounded.push((spec.family(), block));
        }
        grounded.sort_by_key(|(family, _)| *family);

        let mut blocks: Vec<String> = Vec::new();
        if whole {
            for tok in lexicon::unknown_tokens(span).into_iter().filter(unknown_free) {
                if tok != kind_text {
                    blocks.push(format!("entity: {tok}\natomic action type: {}", primary.name));
                }
            }
        }
        blocks.extend(grounded.into_iter().map(|(_, b)| b));
        (blocks.join("\n\n"), confidence)
    }

    fn plan(&self, records: &[ExtractionRecord], candidate: usize) -> String {
        let mut lines: Vec<String> = Vec::new();
        match candidate % 3 {
            0 => lines.extend((1..=records.len()).map(|i| format!("do {i}"))),
            1 => {
                for (i, r) in records.iter().enumerate() {
                    let dup = records[..i].contains(r);
                    lines.push(format!("{} {}", if dup { "skip" } else { "do" }, i + 1));
                }
            }
            _ => {
                lines.push("# narrow the selection before changing it".into());
                let mut order: Vec<usize> = (0..records.len()).collect();
                order.sort_by_key(|&i| self.registry.get(&records[i].call.action).map(|s| s.family()));
                lines.extend(order.into_iter().map(|i| format!("do {}", i + 1)));
            }
        }
        lines.join("\n")
    }
}

impl AgentBackend for DeterministicBackend {
    fn name(&self) -> &str {
        "mock"
    }

    fn complete(&self, request: &CompletionRequest) -> Result<Completion, BackendError> {
        let (text, confidence) = match &request.task {
            Task::ProposeSubstitutions { examples, .. } => (self.propose(examples), 1.0),
            Task::Classify { command } => (self.classify(command), 1.0),
            Task::Extract {
                slot,
                span,
                context,
                documented,
                negatives,
            } => self.extract(slot, span, context, documented, negatives),
            Task::Plan { records, candidate } => (self.plan(records, *candidate), 1.0),
            Task::Generate {
                action_type,
                kinds,
                actions,
                count,
                seed,
            } => (
                crate::datagen::fill_templates(action_type, kinds, actions, *count, *seed),
                1.0,
            ),
            Task::Freeform => return Err(BackendError::Unsupported("free-form prompts")),
        };
        Ok(Completion {
            text: truncate_to(text, request.max_generation),
            confidence,
            ..Completion::certain("")
        })
    }

    fn embed(&self, text: &str) -> Result<Vec<f64>, BackendError> {
        Ok(self.embedder.embed(text))
    }
}
