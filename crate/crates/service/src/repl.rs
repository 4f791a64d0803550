//! Interactive loop over one session.

use crate::session::Session;
use std::fmt::Write as _;
use std::io::{BufRead, Write};
use v2a_core::pipeline::PipelineTrace;
use v2a_core::scene::SceneDocument;

const USAGE: &str = "meta-commands: :scene, :metrics, :quit (anything else runs as a command; prefix with ! to mishear it)";

/// Result of one input line.
#[derive(Debug)]
pub struct LineOutcome {
    pub output: String,
    pub trace: Option<PipelineTrace>,
    pub quit: bool,
}

impl LineOutcome {
    fn text(output: impl Into<String>) -> Self {
        Self {
            output: output.into(),
            trace: None,
            quit: false,
        }
    }
}

pub struct Repl {
    session: Session,
}

impl Repl {
    pub fn new(session: Session) -> Self {
        Self { session }
    }

    pub fn session(&self) -> &Session {
        &self.session
    }

    /// Handles one line. A leading `!` runs the command through the
    /// mishearing recognizer first.
    pub fn handle_line(&mut self, line: &str) -> LineOutcome {
        let line = line.trim();
        if line.is_empty() {
            return LineOutcome::text("");
        }
        if let Some(meta) = line.strip_prefix(':') {
            return match meta {
                "quit" | "q" => LineOutcome {
                    output: String::new(),
                    trace: None,
                    quit: true,
                },
                "scene" => LineOutcome::text(render_scene(&self.session)),
                "metrics" => LineOutcome::text(render_metrics(&self.session)),
                _ => LineOutcome::text(format!("unknown meta-command `:{meta}`\n{USAGE}\n")),
            };
        }
        let (text, corrupt) = match line.strip_prefix('!') {
            Some(rest) => (rest.trim(), true),
            None => (line, false),
        };
        let before = self.session.scene().to_document();
        let trace = self.session.run_command(text, corrupt);
        let mut out = render_trace(&trace);
        out.push_str(&render_diff(&before, &self.session.scene().to_document(), &trace));
        LineOutcome {
            output: out,
            trace: Some(trace),
            quit: false,
        }
    }

    /// Reads lines until `:quit` or end of input.
    pub fn run(&mut self, input: impl BufRead, mut output: impl Write) -> std::io::Result<()> {
        writeln!(output, "session {} ({})\n{USAGE}", self.session.id, self.session.baseline().name)?;
        write!(output, "> ")?;
        output.flush()?;
        for line in input.lines() {
            let outcome = self.handle_line(&line?);
            output.write_all(outcome.output.as_bytes())?;
            if outcome.quit {
                return Ok(());
            }
            write!(output, "> ")?;
            output.flush()?;
        }
        Ok(())
    }
}

/// The trace stage by stage, then the ledger, then the verdict.
pub fn render_trace(trace: &PipelineTrace) -> String {
    let mut out = String::new();
    let block = |out: &mut String, label: &str, body: &str| {
        let _ = writeln!(out, "[{label}]");
        for l in body.lines().map(str::trim_end) {
            if l.is_empty() {
                out.push('\n');
            } else {
                let _ = writeln!(out, "  {l}");
            }
        }
    };
    block(&mut out, "T", &trace.raw);
    if let Some(t0) = &trace.t0 {
        block(&mut out, "T0", t0);
    }
    if let Some(t1) = &trace.t1 {
        block(&mut out, "T1", t1);
    }
    if let Some(t2) = &trace.t2 {
        block(&mut out, "T2", t2);
    }
    if let Some(plan) = &trace.plan {
        block(&mut out, "plan", plan);
    }
    for (i, attempt) in trace.trials.attempts.iter().enumerate() {
        if !attempt.feedback.is_pass() {
            let _ = writeln!(out, "  trial {} failed: {}", i + 1, attempt.feedback.error_message);
        }
    }
    let l = &trace.ledger;
    let _ = writeln!(
        out,
        "ledger: N0={} N1={} N2={} N3={} N_trial={} N_token={}",
        l.n0, l.n1, l.n2, l.n3, l.n_trial, trace.n_token
    );
    let _ = writeln!(out, "rating: {}", trace.rating.level);
    if trace.passed() {
        let _ = writeln!(out, "feedback: pass");
    } else {
        let _ = writeln!(out, "feedback: fail: {}", trace.feedback.error_message);
    }
    out
}

fn render_diff(before: &SceneDocument, after: &SceneDocument, trace: &PipelineTrace) -> String {
    let mut out = String::new();
    for id in &trace.changed {
        let old = before.entities.iter().find(|e| &e.id == id);
        let new = after.entities.iter().find(|e| &e.id == id);
        if let (Some(o), Some(n)) = (old, new) {
            if o.position == n.position && o.scale == n.scale {
                continue;
            }
            let _ = writeln!(
                out,
                "  ~ {id}: position {:?} -> {:?}, scale {:?} -> {:?}",
                o.position, n.position, o.scale, n.scale
            );
        }
    }
    let _ = writeln!(out, "selected: {}", list(&trace.selection));
    out
}

fn list(ids: &[String]) -> String {
    if ids.is_empty() {
        "(none)".into()
    } else {
        ids.join(", ")
    }
}

fn render_scene(session: &Session) -> String {
    let scene = session.scene();
    let mut out = format!("frame {} | {} entities\n", scene.frame, scene.entities.len());
    for e in scene.entities.values() {
        let _ = writeln!(
            out,
            "{} {:<24} {:<8} pos {:?} scale {:?}",
            if e.selected { '*' } else { ' ' },
            e.id,
            e.kind.as_str(),
            e.position,
            e.scale
        );
    }
    out
}

fn render_metrics(session: &Session) -> String {
    let mut out = String::from("command  N0  N1  N2  N3  N_trial  N_token  rating\n");
    for row in session.ledgers() {
        let l = &row.ledger;
        let _ = writeln!(
            out,
            "{:<8} {} {} {} {} {} {} {}",
            row.command, l.n0, l.n1, l.n2, l.n3, l.n_trial, row.n_token, row.rating.level
        );
    }
    out
}
