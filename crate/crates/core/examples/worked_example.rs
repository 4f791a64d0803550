//! The worked example: a misheard selection command through all four
//! stages on the fixture scene.
//!
//! `cargo run -p v2a-core --example worked_example`

use std::sync::Arc;
use v2a_core::ir::RawTranscript;
use v2a_core::metrics::BaselineConfig;
use v2a_core::pipeline::{DeterministicBackend, Interpreter, PipelineEvent, SubstitutionTable};
use v2a_core::scene::{builtin_registry, SceneState};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let table = SubstitutionTable::fixed(&[("building", "beauty"), ("main", "mean"), ("street", "sea")]);
    let interpreter = Interpreter::new(Arc::new(DeterministicBackend::new(&builtin_registry())))?.with_table(table);
    let mut scene = SceneState::fixture();
    let heard = RawTranscript::spoken("select the highest beauty on mean sea", 0);

    let trace = interpreter.run(&BaselineConfig::voice2action(), &mut scene, &heard, &mut |event| {
        if let PipelineEvent::StageCompleted { stage, tokens, .. } = event {
            println!("-- {stage} done ({tokens} tokens)");
        }
    });

    println!("T : {}", trace.raw);
    println!("T0: {}", trace.t0.as_deref().unwrap_or("-"));
    println!("T1:\n{}", trace.t1.as_deref().unwrap_or("-"));
    println!("T2:\n{}", trace.t2.as_deref().unwrap_or("-"));
    println!("plan:\n{}", trace.plan.as_deref().unwrap_or("-"));
    let l = &trace.ledger;
    println!(
        "N0={} N1={} N2={} N3={} N_trial={} -> N_token={}",
        l.n0, l.n1, l.n2, l.n3, l.n_trial, trace.n_token
    );
    println!("frames {:?}", trace.frames);
    println!("rating {} | selected {:?}", trace.rating.level, scene.selection());
    Ok(())
}
