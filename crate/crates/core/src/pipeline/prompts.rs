//! Prompt templates, one per stage.
//!
//! Defaults are compiled in from `prompts/*.txt`; a directory with files
//! of the same names overrides them one by one. Placeholders are written
//! `{name}` and substituted verbatim.

use crate::ir::{serialize_t2, ActionSchema, ExtractionRecord, SchemaSet};
use crate::scene::AtomicActionSpec;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PromptError {
    #[error("reading prompt {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Substitutes `{key}` for each pair. Unknown placeholders are left alone.
pub fn render(template: &str, vars: &[(&str, &str)]) -> String {
    let mut out = template.to_string();
    for (k, v) in vars {
        out = out.replace(&format!("{{{k}}}"), v);
    }
    out.trim_end().to_string()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptSet {
    pub preprocess_propose: String,
    pub preprocess_apply: String,
    pub classify: String,
    pub classify_type: String,
    pub function: String,
    pub extract: String,
    pub execute_direct: String,
    pub plan: String,
    pub generate: String,
}

impl Default for PromptSet {
    fn default() -> Self {
        Self {
            preprocess_propose: include_str!("../../prompts/preprocess_propose.txt").into(),
            preprocess_apply: include_str!("../../prompts/preprocess_apply.txt").into(),
            classify: include_str!("../../prompts/classify.txt").into(),
            classify_type: include_str!("../../prompts/classify_type.txt").into(),
            function: include_str!("../../prompts/function.txt").into(),
            extract: include_str!("../../prompts/extract.txt").into(),
            execute_direct: include_str!("../../prompts/execute_direct.txt").into(),
            plan: include_str!("../../prompts/plan.txt").into(),
            generate: include_str!("../../prompts/generate.txt").into(),
        }
    }
}

fn joined(blocks: impl IntoIterator<Item = String>) -> String {
    blocks.into_iter().collect::<Vec<_>>().join("\n")
}

impl PromptSet {
    /// Defaults overridden by any `<stage>.txt` present in `dir`.
    pub fn from_dir(dir: impl AsRef<Path>) -> Result<Self, PromptError> {
        let dir = dir.as_ref();
        let mut set = Self::default();
        let slots: [(&str, &mut String); 9] = [
            ("preprocess_propose", &mut set.preprocess_propose),
            ("preprocess_apply", &mut set.preprocess_apply),
            ("classify", &mut set.classify),
            ("classify_type", &mut set.classify_type),
            ("function", &mut set.function),
            ("extract", &mut set.extract),
            ("execute_direct", &mut set.execute_direct),
            ("plan", &mut set.plan),
            ("generate", &mut set.generate),
        ];
        for (name, slot) in slots {
            let path = dir.join(format!("{name}.txt"));
            if path.exists() {
                *slot = std::fs::read_to_string(&path).map_err(|source| PromptError::Io {
                    path: path.display().to_string(),
                    source,
                })?;
                tracing::debug!(prompt = name, "template overridden");
            }
        }
        Ok(set)
    }

    pub fn propose_substitutions(&self, action_type: &str, examples: &[String]) -> String {
        render(
            &self.preprocess_propose,
            &[("action_type", action_type), ("examples", &examples.join("\n"))],
        )
    }

    pub fn apply_substitutions(&self, pairs: &str, transcript: &str) -> String {
        render(&self.preprocess_apply, &[("pairs", pairs), ("transcript", transcript)])
    }

    fn action_type_block(&self, schema: &ActionSchema) -> String {
        let slots = joined(
            schema
                .slots
                .iter()
                .enumerate()
                .map(|(i, s)| format!("action arg{}: {}", i + 1, s.hint.replace("{object}", "object"))),
        );
        render(
            &self.classify_type,
            &[
                ("action_type", &schema.action_type),
                ("explanation", &schema.explanation),
                ("slots", &slots),
            ],
        )
    }

    /// `examples` are `(command, T₁ text)` pairs.
    pub fn classify(&self, schemas: &SchemaSet, examples: &[(&str, &str)], command: &str) -> String {
        let types = joined(schemas.iter().map(|s| self.action_type_block(s)));
        let examples = joined(examples.iter().map(|(c, t1)| format!("command: {c}\n{t1}")));
        render(
            &self.classify,
            &[("action_types", &types), ("examples", &examples), ("command", command)],
        )
    }

    pub fn function_doc(&self, spec: &AtomicActionSpec) -> String {
        render(
            &self.function,
            &[
                ("name", &spec.name),
                ("function_documentation", &spec.doc),
                ("signature", &spec.signature()),
            ],
        )
    }

    fn negatives_block(negatives: &[String]) -> String {
        if negatives.is_empty() {
            String::new()
        } else {
            let lines = joined(negatives.iter().map(|n| format!("- {n}")));
            format!("Earlier answers failed with:\n{lines}")
        }
    }

    /// Extraction of one slot. `examples` are `(slot: span, T₂ text)`.
    #[allow(clippy::too_many_arguments)]
    pub fn extract(
        &self,
        entities: &str,
        slot: &str,
        span: &str,
        context: &str,
        documented: &[&AtomicActionSpec],
        examples: &[(String, String)],
        negatives: &[String],
    ) -> String {
        let docs = joined(documented.iter().map(|s| self.function_doc(s)));
        let examples = joined(examples.iter().map(|(q, a)| format!("{q}\n{a}")));
        render(
            &self.extract,
            &[
                ("entities", entities),
                ("slot", slot),
                ("span", span),
                ("context", context),
                ("function_documentation", &docs),
                ("examples", &examples),
                ("negatives", &Self::negatives_block(negatives)),
            ],
        )
    }

    /// Whole-command extraction with every action documented.
    pub fn execute_direct(
        &self,
        entities: &str,
        command: &str,
        documented: &[&AtomicActionSpec],
        examples: &[(String, String)],
        negatives: &[String],
    ) -> String {
        let docs = joined(documented.iter().map(|s| self.function_doc(s)));
        let examples = joined(examples.iter().map(|(q, a)| format!("command: {q}\n{a}")));
        render(
            &self.execute_direct,
            &[
                ("entities", entities),
                ("span", command),
                ("function_documentation", &docs),
                ("examples", &examples),
                ("negatives", &Self::negatives_block(negatives)),
            ],
        )
    }

    /// `examples` are `(T₂ text, plan text)` pairs.
    pub fn plan(&self, records: &[ExtractionRecord], examples: &[(&str, &str)]) -> String {
        let numbered = joined(
            records
                .iter()
                .enumerate()
                .map(|(i, r)| format!("{}.\n{}", i + 1, serialize_t2(std::slice::from_ref(r)))),
        );
        let examples = joined(examples.iter().map(|(t2, plan)| format!("{t2}\n{plan}")));
        render(&self.plan, &[("records", &numbered), ("examples", &examples)])
    }

    pub fn generate(
        &self,
        schema: &ActionSchema,
        entities: &str,
        documented: &[&AtomicActionSpec],
        examples: &[String],
        count: usize,
    ) -> String {
        let docs = joined(documented.iter().map(|s| self.function_doc(s)));
        render(
            &self.generate,
            &[
                ("count", &count.to_string()),
                ("action_type", &schema.action_type),
                ("explanation", &schema.explanation),
                ("entities", entities),
                ("function_documentation", &docs),
                ("examples", &examples.join("\n---\n")),
            ],
        )
    }
}
