//! A live scene and the commands run against it. The HTTP service and the
//! REPL both drive commands through [`Session::run_command`].

use serde::{Deserialize, Serialize};
use std::sync::Arc;
use tokio::sync::broadcast;
use v2a_core::datagen::{confusion_table, mishear_all};
use v2a_core::ir::RawTranscript;
use v2a_core::metrics::{BaselineConfig, OutcomeRating, TokenLedger};
use v2a_core::pipeline::{Interpreter, PipelineEvent, PipelineTrace};
use v2a_core::scene::{EntityDocument, SceneDocument, SceneState};

const EVENT_BUFFER: usize = 256;

/// Ledger row of one command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub command: String,
    pub text: String,
    pub ledger: TokenLedger,
    pub n_token: u64,
    pub rating: OutcomeRating,
}

/// What the event stream carries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SessionEvent {
    Pipeline { command: String, event: PipelineEvent },
    SceneDelta {
        command: String,
        frame: u64,
        changed: Vec<EntityDocument>,
        selection: Vec<String>,
    },
}

/// Scene as served to clients: the document plus clock and selection.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SceneSnapshot {
    pub frame: u64,
    pub selection: Vec<String>,
    pub scene: SceneDocument,
}

pub struct Session {
    pub id: String,
    scene: SceneState,
    baseline: BaselineConfig,
    interpreter: Arc<Interpreter>,
    ledgers: Vec<LedgerEntry>,
    events: broadcast::Sender<SessionEvent>,
}

impl Session {
    pub fn new(id: impl Into<String>, scene: SceneState, baseline: BaselineConfig, interpreter: Arc<Interpreter>) -> Self {
        let (events, _) = broadcast::channel(EVENT_BUFFER);
        Self {
            id: id.into(),
            scene,
            baseline,
            interpreter,
            ledgers: Vec::new(),
            events,
        }
    }

    pub fn scene(&self) -> &SceneState {
        &self.scene
    }

    pub fn baseline(&self) -> &BaselineConfig {
        &self.baseline
    }

    pub fn ledgers(&self) -> &[LedgerEntry] {
        &self.ledgers
    }

    pub fn snapshot(&self) -> SceneSnapshot {
        SceneSnapshot {
            frame: self.scene.frame,
            selection: self.scene.selection(),
            scene: self.scene.to_document(),
        }
    }

    pub fn subscribe(&self) -> broadcast::Receiver<SessionEvent> {
        self.events.subscribe()
    }

    /// The text a recognizer that mishears every confusable token would
    /// produce. Uses the session table, or the lexicon table when the
    /// session has none.
    pub fn mishear(&self, text: &str) -> String {
        let table = self.interpreter.table();
        if table.is_empty() {
            mishear_all(text, &confusion_table())
        } else {
            mishear_all(text, table)
        }
    }

    /// Runs one command. Stage events and the final scene delta go to
    /// subscribers; the ledger row is appended. Pipeline failures are part
    /// of the trace, never an error.
    pub fn run_command(&mut self, text: &str, corrupt: bool) -> PipelineTrace {
        let command = format!("c{}", self.ledgers.len() + 1);
        let heard = if corrupt { self.mishear(text) } else { text.to_string() };
        let transcript = RawTranscript::spoken(heard, self.scene.frame);
        let events = self.events.clone();
        let mut observer = |event: PipelineEvent| {
            // nobody listening is fine
            let _ = events.send(SessionEvent::Pipeline {
                command: command.clone(),
                event,
            });
        };
        let trace = self.interpreter.run_tagged(&self.baseline, &mut self.scene, &transcript, &command, &mut observer);
        let doc = self.scene.to_document();
        let changed = doc.entities.into_iter().filter(|e| trace.changed.contains(&e.id)).collect();
        let _ = self.events.send(SessionEvent::SceneDelta {
            command: command.clone(),
            frame: self.scene.frame,
            changed,
            selection: trace.selection.clone(),
        });
        self.ledgers.push(LedgerEntry {
            command,
            text: text.to_string(),
            ledger: trace.ledger,
            n_token: trace.n_token,
            rating: trace.rating.clone(),
        });
        trace
    }
}
