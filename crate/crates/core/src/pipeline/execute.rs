//! Feedback-gated execution.
//!
//! Each trial races `m_exe` candidate plans. Every candidate runs on its
//! own clone of the scene; the first to finish with a pass wins and the
//! others are cancelled. The winner's do-steps are then replayed on the
//! real scene, all at one frame. When every candidate fails, the first
//! error becomes a negative example and extraction runs again.

use super::backend::{AgentBackend, Task};
use super::config::AgentConfig;
use super::prompts::PromptSet;
use super::seeds;
use super::stages::{call, Extraction, StageError};
use crate::ir::{parse_plan, ExecutionPlan, ExtractionRecord};
use crate::scene::{ActionRegistry, Feedback, SceneState};
use serde::{Deserialize, Serialize};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc;
use thiserror::Error;

/// How "first to finish" is decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RaceMode {
    /// Finish time = the candidate's call tokens × frames per token.
    /// Deterministic.
    #[default]
    Simulated,
    /// Candidates run on threads; arrival order decides.
    WallClock,
}

/// How a trial turns records into a plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Planner {
    /// Race `m_exe` planning calls.
    Race,
    /// Do every record in order; the extraction call already was the
    /// execution call.
    DoAll,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRun {
    pub index: usize,
    pub plan: String,
    pub tokens: u64,
    /// Simulated finish, in frames after the trial started.
    pub finish: u64,
    /// `None` when the candidate was cancelled before it finished.
    pub feedback: Option<Feedback>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialAttempt {
    /// T₂ text the trial worked from.
    pub extraction: String,
    pub feedback: Feedback,
    pub negative_examples_added: Vec<String>,
    pub candidates: Vec<CandidateRun>,
    pub winner: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrialLog {
    pub attempts: Vec<TrialAttempt>,
}

impl TrialLog {
    pub fn n_trial(&self) -> usize {
        self.attempts.len()
    }

    /// Every negative example accumulated so far, in order.
    pub fn negatives(&self) -> Vec<String> {
        self.attempts
            .iter()
            .flat_map(|a| a.negative_examples_added.iter().cloned())
            .collect()
    }
}

/// Outcome of [`plan_and_execute`], successful or not.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutionReport {
    pub trials: TrialLog,
    pub plan: Option<ExecutionPlan>,
    pub records: Vec<ExtractionRecord>,
    pub winner: Option<usize>,
    /// Tokens of every extraction call over all trials.
    pub extraction_tokens: u64,
    /// Tokens of the counted execution call of every trial.
    pub execution_tokens: u64,
    pub feedback: Feedback,
    /// Frame at which the winning plan was applied.
    pub f3: Option<u64>,
}

#[derive(Debug, Error)]
pub enum ExecutionError {
    #[error("no passing plan after {} trial(s): {}", .0.trials.n_trial(), .0.feedback.error_message)]
    TrialsExhausted(Box<ExecutionReport>),
}

impl ExecutionError {
    pub fn report(&self) -> &ExecutionReport {
        match self {
            ExecutionError::TrialsExhausted(r) => r,
        }
    }
}

/// Everything the execution stage needs besides the scene.
pub struct ExecContext<'a> {
    pub backend: &'a dyn AgentBackend,
    pub registry: &'a ActionRegistry,
    pub prompts: &'a PromptSet,
    pub config: &'a AgentConfig,
    pub race: RaceMode,
    pub planner: Planner,
    /// Prefix of the history origin of every applied call.
    pub tag: &'a str,
}

/// Progress notifications from the execution loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum ExecEvent {
    Extracted { trial: usize, text: String, tokens: u64 },
    CandidateFinished { trial: usize, candidate: usize, pass: bool, finish: u64 },
    TrialFailed { trial: usize, message: String },
    Applied { trial: usize, frame: u64, changed: Vec<String> },
}

fn run_plan(scene: &mut SceneState, registry: &ActionRegistry, plan: &ExecutionPlan, origin: &str, cancel: Option<&AtomicBool>) -> Option<Feedback> {
    for step in plan.do_steps() {
        if cancel.is_some_and(|c| c.load(Ordering::Acquire)) {
            return None;
        }
        let applied = scene.apply_atomic_from(registry, &step.record.call, Some(origin));
        if !applied.feedback.is_pass() {
            return Some(applied.feedback);
        }
    }
    Some(Feedback::pass(0))
}

struct Candidate {
    run: CandidateRun,
    plan: Option<ExecutionPlan>,
}

/// Asks for candidate `index`'s plan. A plan that does not parse is a
/// finished, failed candidate.
fn request_plan(ctx: &ExecContext, records: &[ExtractionRecord], index: usize) -> Candidate {
    let examples = seeds::plan_examples(ctx.config.k_exe);
    let example_refs: Vec<(&str, &str)> = examples.iter().map(|(a, b)| (*a, b.as_str())).collect();
    let prompt = ctx.prompts.plan(records, &example_refs);
    let task = Task::Plan {
        records: records.to_vec(),
        candidate: index,
    };
    let (completion, tokens) = match call(ctx.backend, ctx.config, prompt, ctx.config.temperature_other, task) {
        Ok(ok) => ok,
        Err(e) => return stage_failure(e, index, ctx.config.frames_per_token),
    };
    let finish = tokens * ctx.config.frames_per_token;
    let mut run = CandidateRun {
        index,
        plan: completion.text.clone(),
        tokens,
        finish,
        feedback: None,
    };
    match parse_plan(&completion.text, records.len()) {
        Ok(order) => Candidate {
            run,
            plan: Some(ExecutionPlan::from_order(records, &order)),
        },
        Err(e) => {
            run.feedback = Some(Feedback::fail(format!("unparseable plan: {e}"), finish));
            Candidate { run, plan: None }
        }
    }
}

/// Runs a parsed plan on a private clone advanced to the candidate's
/// finish frame.
fn execute_candidate(ctx: &ExecContext, c: &mut Candidate, scene: &SceneState, cancel: Option<&AtomicBool>) {
    let Some(plan) = &c.plan else { return };
    let mut clone = scene.clone();
    clone.advance_frames(c.run.finish);
    let origin = format!("{}:candidate {}", ctx.tag, c.run.index);
    let finish = c.run.finish;
    c.run.feedback = run_plan(&mut clone, ctx.registry, plan, &origin, cancel).map(|mut fb| {
        fb.frames_consumed = finish;
        fb
    });
}

fn stage_failure(e: StageError, index: usize, frames_per_token: u64) -> Candidate {
    let tokens = e.tokens();
    Candidate {
        run: CandidateRun {
            index,
            plan: e.raw().unwrap_or_default().to_string(),
            tokens,
            finish: tokens * frames_per_token,
            feedback: Some(Feedback::fail(format!("planning failed: {e}"), tokens * frames_per_token)),
        },
        plan: None,
    }
}

/// Result of one race: candidates in finishing order, and the winner's
/// position among them.
struct Race {
    finished: Vec<Candidate>,
    winner: Option<usize>,
}

fn race_simulated(ctx: &ExecContext, records: &[ExtractionRecord], scene: &SceneState) -> Race {
    // planning calls are issued together; candidates then execute in
    // finishing order and the first pass cancels the rest
    let mut pending: Vec<Candidate> = (0..ctx.config.m_exe).map(|i| request_plan(ctx, records, i)).collect();
    pending.sort_by_key(|c| (c.run.finish, c.run.index));
    let mut finished = Vec::new();
    let mut winner = None;
    for mut c in pending {
        if winner.is_none() {
            execute_candidate(ctx, &mut c, scene, None);
            if c.run.feedback.as_ref().is_some_and(Feedback::is_pass) {
                winner = Some(finished.len());
            }
        }
        finished.push(c);
    }
    Race { finished, winner }
}

fn race_wall_clock(ctx: &ExecContext, records: &[ExtractionRecord], scene: &SceneState) -> Race {
    let cancel = AtomicBool::new(false);
    let (tx, rx) = mpsc::channel::<Candidate>();
    let mut finished = Vec::new();
    let mut winner = None;
    std::thread::scope(|s| {
        for i in 0..ctx.config.m_exe {
            let tx = tx.clone();
            let cancel = &cancel;
            s.spawn(move || {
                let mut c = request_plan(ctx, records, i);
                if !cancel.load(Ordering::Acquire) {
                    execute_candidate(ctx, &mut c, scene, Some(cancel));
                }
                let _ = tx.send(c);
            });
        }
        drop(tx);
        for mut c in rx {
            if winner.is_some() {
                // finished after the winner: its outcome is discarded
                c.run.feedback = None;
            } else if c.run.feedback.as_ref().is_some_and(Feedback::is_pass) {
                winner = Some(finished.len());
                cancel.store(true, Ordering::Release);
            }
            finished.push(c);
        }
    });
    Race { finished, winner }
}

/// Extract, plan and execute until a plan passes or `max_trials` is hit.
///
/// `extract` receives the negative examples gathered so far. Failed
/// extractions count as failed trials. The real scene is touched only to
/// advance the clock and to replay the winning plan.
pub fn plan_and_execute(
    ctx: &ExecContext,
    scene: &mut SceneState,
    extract: &mut dyn FnMut(&[String]) -> Result<Extraction, StageError>,
    observer: &mut dyn FnMut(ExecEvent),
) -> Result<ExecutionReport, ExecutionError> {
    let fpt = ctx.config.frames_per_token;
    let mut report = ExecutionReport {
        trials: TrialLog::default(),
        plan: None,
        records: Vec::new(),
        winner: None,
        extraction_tokens: 0,
        execution_tokens: 0,
        feedback: Feedback::fail("not run", 0),
        f3: None,
    };
    let mut negatives: Vec<String> = Vec::new();

    for trial in 1..=ctx.config.max_trials {
        let extraction = extract(&negatives);
        let (records, text) = match extraction {
            Ok(ext) => {
                report.extraction_tokens += ext.tokens;
                scene.advance_frames(ext.tokens * fpt);
                observer(ExecEvent::Extracted {
                    trial,
                    text: ext.text.clone(),
                    tokens: ext.tokens,
                });
                (ext.records, ext.text)
            }
            Err(e) => {
                report.extraction_tokens += e.tokens();
                scene.advance_frames(e.tokens() * fpt);
                let message = e.to_string();
                fail_trial(&mut report, &mut negatives, trial, e.raw().unwrap_or_default(), message, Vec::new(), observer);
                continue;
            }
        };
        if records.is_empty() {
            let message = "extraction produced no atomic actions".to_string();
            fail_trial(&mut report, &mut negatives, trial, &text, message, Vec::new(), observer);
            continue;
        }

        let race = match ctx.planner {
            Planner::Race => match ctx.race {
                RaceMode::Simulated => race_simulated(ctx, &records, scene),
                RaceMode::WallClock => race_wall_clock(ctx, &records, scene),
            },
            Planner::DoAll => {
                let plan = ExecutionPlan::do_all(&records);
                let mut clone = scene.clone();
                let feedback = run_plan(&mut clone, ctx.registry, &plan, "direct", None);
                let pass = feedback.as_ref().is_some_and(Feedback::is_pass);
                Race {
                    finished: vec![Candidate {
                        run: CandidateRun {
                            index: 0,
                            plan: plan.to_text(),
                            tokens: 0,
                            finish: 0,
                            feedback,
                        },
                        plan: Some(plan),
                    }],
                    winner: pass.then_some(0),
                }
            }
        };
        for c in &race.finished {
            if let Some(fb) = &c.run.feedback {
                observer(ExecEvent::CandidateFinished {
                    trial,
                    candidate: c.run.index,
                    pass: fb.is_pass(),
                    finish: c.run.finish,
                });
            }
        }
        let runs: Vec<CandidateRun> = race.finished.iter().map(|c| c.run.clone()).collect();

        match race.winner {
            Some(pos) => {
                let won = &race.finished[pos];
                let plan = won.plan.clone().expect("a passing candidate has a plan");
                report.execution_tokens += won.run.tokens;
                scene.advance_frames(won.run.tokens * fpt);
                let f3 = scene.frame;
                let before = scene.clone();
                let origin = format!("{}:candidate {}", ctx.tag, won.run.index);
                let replay = run_plan(scene, ctx.registry, &plan, &origin, None);
                debug_assert!(replay.as_ref().is_some_and(Feedback::is_pass));
                let changed: Vec<String> = before.changed_entities(scene).into_iter().collect();
                observer(ExecEvent::Applied {
                    trial,
                    frame: f3,
                    changed,
                });
                let feedback = Feedback::pass(won.run.finish);
                report.trials.attempts.push(TrialAttempt {
                    extraction: text,
                    feedback: feedback.clone(),
                    negative_examples_added: Vec::new(),
                    candidates: runs,
                    winner: Some(won.run.index),
                });
                report.winner = Some(won.run.index);
                report.plan = Some(plan);
                report.records = records;
                report.feedback = feedback;
                report.f3 = Some(f3);
                tracing::debug!(trial, winner = won.run.index, f3, "plan passed");
                return Ok(report);
            }
            None => {
                let first = &race.finished[0];
                report.execution_tokens += first.run.tokens;
                scene.advance_frames(first.run.tokens * fpt);
                let message = first
                    .run
                    .feedback
                    .as_ref()
                    .map(|f| f.error_message.clone())
                    .unwrap_or_else(|| "candidate cancelled".into());
                report.records = records;
                fail_trial(&mut report, &mut negatives, trial, &text, message, runs, observer);
            }
        }
    }
    tracing::debug!(trials = report.trials.n_trial(), "trials exhausted");
    Err(ExecutionError::TrialsExhausted(Box::new(report)))
}

fn fail_trial(
    report: &mut ExecutionReport,
    negatives: &mut Vec<String>,
    trial: usize,
    text: &str,
    message: String,
    candidates: Vec<CandidateRun>,
    observer: &mut dyn FnMut(ExecEvent),
) {
    observer(ExecEvent::TrialFailed {
        trial,
        message: message.clone(),
    });
    negatives.push(message.clone());
    report.feedback = Feedback::fail(message.clone(), 0);
    report.trials.attempts.push(TrialAttempt {
        extraction: text.to_string(),
        feedback: report.feedback.clone(),
        negative_examples_added: vec![message],
        candidates,
        winner: None,
    });
}
