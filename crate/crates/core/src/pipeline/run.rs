//! One command end to end: the enabled stages of a baseline, the retry
//! loop, and the trace that records every intermediate form.

use super::backend::{AgentBackend, BackendError};
use super::config::AgentConfig;
use super::execute::{plan_and_execute, ExecContext, ExecEvent, Planner, RaceMode, TrialLog};
use super::matcher::embed_registry;
use super::prompts::PromptSet;
use super::seeds;
use super::stages::{classify, execute_direct, extract, extract_spans, Extraction, StageError, WHOLE_COMMAND};
use super::substitution::{build_substitution_table, preprocess, SubstitutionError, SubstitutionTable};
use crate::ir::{serialize_t1, whitespace_tokens, RawTranscript, SchemaSet, TranscriptStage};
use crate::metrics::{rate_outcome, BaselineConfig, OutcomeRating, Stage, TokenLedger};
use crate::scene::{builtin_registry, ActionRegistry, Feedback, SceneState};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

/// Frame stamps of one command. `f` is the end of speech; each later
/// stamp is where the corresponding stage finished.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Frames {
    pub f: u64,
    pub f0: u64,
    pub f1: u64,
    /// Frame the winning plan was applied at.
    pub f3: Option<u64>,
    /// Scene clock when the command finished.
    pub end: u64,
}

/// Everything one command produced. A stage's field is `None` exactly when
/// the baseline disables it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineTrace {
    pub baseline: String,
    pub raw: String,
    pub t0: Option<String>,
    pub t1: Option<String>,
    /// Extraction of the final trial.
    pub t2: Option<String>,
    pub plan: Option<String>,
    pub winner: Option<usize>,
    pub feedback: Feedback,
    pub trials: TrialLog,
    pub ledger: TokenLedger,
    pub n_token: u64,
    pub rating: OutcomeRating,
    pub frames: Frames,
    pub selection: Vec<String>,
    pub changed: Vec<String>,
}

impl PipelineTrace {
    pub fn passed(&self) -> bool {
        self.feedback.is_pass()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum PipelineEvent {
    StageCompleted { stage: Stage, text: String, tokens: u64 },
    Execution { detail: ExecEvent },
    Finished { pass: bool, message: String },
}

/// The configured interpreter: backend, embedded registry, schemas,
/// prompts and substitution table. Cheap to share across threads.
#[derive(Clone)]
pub struct Interpreter {
    backend: Arc<dyn AgentBackend>,
    registry: ActionRegistry,
    schemas: SchemaSet,
    prompts: PromptSet,
    config: AgentConfig,
    table: SubstitutionTable,
    race: RaceMode,
}

impl std::fmt::Debug for Interpreter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Interpreter")
            .field("backend", &self.backend.name())
            .field("config", &self.config)
            .field("race", &self.race)
            .finish_non_exhaustive()
    }
}

impl Interpreter {
    /// Builtin registry embedded with `backend`, default schemas, prompts
    /// and config, and an empty substitution table.
    pub fn new(backend: Arc<dyn AgentBackend>) -> Result<Self, BackendError> {
        let mut registry = builtin_registry();
        embed_registry(&mut registry, backend.as_ref())?;
        Ok(Self {
            backend,
            registry,
            schemas: SchemaSet::default(),
            prompts: PromptSet::default(),
            config: AgentConfig::default(),
            table: SubstitutionTable::default(),
            race: RaceMode::default(),
        })
    }

    pub fn with_config(mut self, config: AgentConfig) -> Self {
        self.config = config;
        self
    }

    pub fn with_prompts(mut self, prompts: PromptSet) -> Self {
        self.prompts = prompts;
        self
    }

    pub fn with_table(mut self, table: SubstitutionTable) -> Self {
        self.table = table;
        self
    }

    pub fn with_race(mut self, race: RaceMode) -> Self {
        self.race = race;
        self
    }

    pub fn backend(&self) -> &dyn AgentBackend {
        self.backend.as_ref()
    }

    pub fn registry(&self) -> &ActionRegistry {
        &self.registry
    }

    pub fn schemas(&self) -> &SchemaSet {
        &self.schemas
    }

    pub fn prompts(&self) -> &PromptSet {
        &self.prompts
    }

    pub fn config(&self) -> &AgentConfig {
        &self.config
    }

    pub fn table(&self) -> &SubstitutionTable {
        &self.table
    }

    /// Learns the substitution table from the seed commands of each action
    /// type, weighted against `corpus`. Returns the tokens spent.
    pub fn learn_substitutions(&mut self, corpus: &[String]) -> Result<u64, SubstitutionError> {
        let mut per_action: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for ty in self.schemas.action_types().into_iter().take(self.config.m_pre) {
            let examples = seeds::seeds_of(ty).iter().map(|s| s.command.to_string()).collect();
            per_action.insert(ty.to_string(), examples);
        }
        let (table, spent) =
            build_substitution_table(&per_action, corpus, self.backend.as_ref(), &self.prompts, &self.config)?;
        self.table = table;
        Ok(spent)
    }

    /// Runs `transcript` through the stages `baseline` enables. Never fails:
    /// stage errors end up as a failing feedback in the trace.
    pub fn run(
        &self,
        baseline: &BaselineConfig,
        scene: &mut SceneState,
        transcript: &RawTranscript,
        observer: &mut dyn FnMut(PipelineEvent),
    ) -> PipelineTrace {
        self.run_tagged(baseline, scene, transcript, &baseline.name, observer)
    }

    /// [`Interpreter::run`] with `tag` as the history origin prefix of
    /// every call it applies.
    pub fn run_tagged(
        &self,
        baseline: &BaselineConfig,
        scene: &mut SceneState,
        transcript: &RawTranscript,
        tag: &str,
        observer: &mut dyn FnMut(PipelineEvent),
    ) -> PipelineTrace {
        let fpt = self.config.frames_per_token;
        let before = scene.clone();
        scene.advance_to(transcript.frame_end);
        let f = scene.frame;
        let mut ledger = TokenLedger::new(0.0, 0.0, 0.0, 0.0, 0.0);
        ledger.basis = self.backend.token_basis();
        let mut trace = PipelineTrace {
            baseline: baseline.name.clone(),
            raw: transcript.text.clone(),
            t0: None,
            t1: None,
            t2: None,
            plan: None,
            winner: None,
            feedback: Feedback::fail("not run", 0),
            trials: TrialLog::default(),
            ledger,
            n_token: 0,
            rating: rate_outcome(&Feedback::fail("not run", 0), &before, scene, None),
            frames: Frames {
                f,
                f0: f,
                f1: f,
                ..Frames::default()
            },
            selection: Vec::new(),
            changed: Vec::new(),
        };

        // pre-processing is a table lookup; its cost is the apply prompt plus T₀
        let t0 = if baseline.enabled(Stage::Pre) && transcript.stage == TranscriptStage::Raw {
            let t0 = preprocess(transcript, &self.table);
            let prompt = self.prompts.apply_substitutions(&self.table.render_active(), &transcript.text);
            let tokens = whitespace_tokens(&prompt) + whitespace_tokens(&t0.text);
            trace.ledger.n0 = tokens as f64;
            scene.advance_frames(tokens * fpt);
            observer(PipelineEvent::StageCompleted {
                stage: Stage::Pre,
                text: t0.text.clone(),
                tokens,
            });
            trace.t0 = Some(t0.text.clone());
            t0
        } else {
            transcript.clone()
        };
        trace.frames.f0 = scene.frame;

        let classified = if baseline.enabled(Stage::Cls) {
            match classify(&t0.text, &self.schemas, self.backend.as_ref(), &self.prompts, &self.config) {
                Ok(c) => {
                    trace.ledger.n1 = c.tokens as f64;
                    scene.advance_frames(c.tokens * fpt);
                    let text = serialize_t1(&c.command);
                    observer(PipelineEvent::StageCompleted {
                        stage: Stage::Cls,
                        text: text.clone(),
                        tokens: c.tokens,
                    });
                    trace.t1 = Some(text);
                    Some(c.command)
                }
                Err(e) => {
                    trace.ledger.n1 = e.tokens() as f64;
                    scene.advance_frames(e.tokens() * fpt);
                    trace.t1 = e.raw().map(str::to_string);
                    trace.ledger.n_trial = 1.0;
                    return self.finish(trace, Feedback::fail(e.to_string(), 0), &before, scene, observer);
                }
            }
        } else {
            None
        };
        trace.frames.f1 = scene.frame;

        let direct = !baseline.enabled(Stage::Ext);
        let ctx = ExecContext {
            backend: self.backend.as_ref(),
            registry: &self.registry,
            prompts: &self.prompts,
            config: &self.config,
            race: self.race,
            planner: if direct { Planner::DoAll } else { Planner::Race },
            tag,
        };
        let mut extract_fn = |negatives: &[String]| -> Result<Extraction, StageError> {
            let (backend, prompts, config) = (self.backend.as_ref(), &self.prompts, &self.config);
            match (&classified, direct) {
                (_, true) => execute_direct(&t0.text, &self.registry, backend, prompts, config, negatives),
                (Some(t1), false) => {
                    extract(t1, &t0.text, &self.schemas, &self.registry, backend, prompts, config, negatives)
                }
                (None, false) => {
                    let spans = [(WHOLE_COMMAND.to_string(), t0.text.clone())];
                    extract_spans(&spans, &t0.text, &self.registry, backend, prompts, config, negatives)
                }
            }
        };
        let mut exec_observer = |detail: ExecEvent| {
            if let (ExecEvent::Extracted { text, tokens, .. }, false) = (&detail, direct) {
                observer(PipelineEvent::StageCompleted {
                    stage: Stage::Ext,
                    text: text.clone(),
                    tokens: *tokens,
                });
            }
            observer(PipelineEvent::Execution { detail });
        };
        let result = plan_and_execute(&ctx, scene, &mut extract_fn, &mut exec_observer);
        let report = match &result {
            Ok(r) => r,
            Err(e) => e.report(),
        };

        let n_trial = report.trials.n_trial().max(1) as f64;
        let (ext, exe) = (report.extraction_tokens as f64, report.execution_tokens as f64);
        if direct {
            trace.ledger.n3 = (ext + exe) / n_trial;
        } else {
            trace.ledger.n2 = ext / n_trial;
            trace.ledger.n3 = exe / n_trial;
            trace.t2 = report.trials.attempts.last().map(|a| a.extraction.clone());
        }
        trace.ledger.n_trial = n_trial;
        trace.plan = report.plan.as_ref().map(|p| p.to_text());
        observer(PipelineEvent::StageCompleted {
            stage: Stage::Exe,
            text: trace.plan.clone().unwrap_or_default(),
            tokens: if direct { ext as u64 + exe as u64 } else { exe as u64 },
        });
        trace.winner = report.winner;
        trace.frames.f3 = report.f3;
        let feedback = report.feedback.clone();
        trace.trials = report.trials.clone();
        self.finish(trace, feedback, &before, scene, observer)
    }

    fn finish(
        &self,
        mut trace: PipelineTrace,
        feedback: Feedback,
        before: &SceneState,
        scene: &SceneState,
        observer: &mut dyn FnMut(PipelineEvent),
    ) -> PipelineTrace {
        trace.n_token = trace.ledger.total();
        trace.rating = rate_outcome(&feedback, before, scene, None);
        trace.frames.end = scene.frame;
        trace.selection = scene.selection();
        trace.changed = before.changed_entities(scene).into_iter().collect();
        observer(PipelineEvent::Finished {
            pass: feedback.is_pass(),
            message: feedback.error_message.clone(),
        });
        trace.feedback = feedback;
        tracing::info!(
            baseline = %trace.baseline,
            pass = trace.feedback.is_pass(),
            n_trial = trace.ledger.n_trial,
            n_token = trace.n_token,
            "command finished"
        );
        trace
    }

    /// `run` with a freshly spoken transcript starting at the scene clock.
    pub fn run_text(&self, baseline: &BaselineConfig, scene: &mut SceneState, text: &str) -> PipelineTrace {
        let transcript = RawTranscript::spoken(text, scene.frame);
        self.run(baseline, scene, &transcript, &mut |_| {})
    }
}

