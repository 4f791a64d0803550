//! A backend that grounds the height slot wrongly twice. Each failed trial
//! feeds its error back as a negative example until the third attempt
//! passes.
//!
//! `cargo run -p v2a-core --example retry_loop`

use std::sync::Arc;
use v2a_core::metrics::BaselineConfig;
use v2a_core::pipeline::{DeterministicBackend, Interpreter, ScriptedBackend, Task};
use v2a_core::scene::{builtin_registry, SceneState};

const WRONG_AXIS: &str = "entity: building\natomic action type: scale_getter\natomic action arg1: w: inf";
const RIGHT_AXIS: &str = "entity: building\natomic action type: scale_getter\natomic action arg1: y: inf";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let backend = ScriptedBackend::new(
        DeterministicBackend::new(&builtin_registry()),
        |t| matches!(t, Task::Extract { slot, .. } if slot == "superlative degree"),
        [WRONG_AXIS, WRONG_AXIS, RIGHT_AXIS].map(String::from),
    );
    let interpreter = Interpreter::new(Arc::new(backend))?;
    let mut scene = SceneState::fixture();
    let trace = interpreter.run_text(
        &BaselineConfig::voice2action(),
        &mut scene,
        "select the highest building on main street",
    );
    for (i, attempt) in trace.trials.attempts.iter().enumerate() {
        let verdict = if attempt.feedback.is_pass() { "pass".to_string() } else { attempt.feedback.error_message.clone() };
        println!("trial {}: {verdict}", i + 1);
    }
    println!("negative examples carried forward:");
    for n in trace.trials.negatives() {
        println!("  {n}");
    }
    println!("n_trial = {}, rating {}", trace.ledger.n_trial, trace.rating.level);
    Ok(())
}
