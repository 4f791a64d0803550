//! Generates the 20-sample dataset and runs the four baselines over it.
//!
//! `cargo run -p v2a-core --example ablation [-- --learned]`

use std::sync::Arc;
use v2a_core::datagen::{confusion_table, generate_dataset, DatagenConfig, DatagenContext};
use v2a_core::ir::SchemaSet;
use v2a_core::metrics::{run_ablation, BaselineConfig};
use v2a_core::pipeline::{DeterministicBackend, Interpreter, PromptSet};
use v2a_core::scene::{builtin_registry, SceneState};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scene = SceneState::fixture();
    let registry = builtin_registry();
    let backend = Arc::new(DeterministicBackend::new(&registry));
    let ctx = DatagenContext {
        backend: backend.as_ref(),
        registry: &registry,
        schemas: &SchemaSet::default(),
        prompts: &PromptSet::default(),
        scene: &scene,
    };
    let dataset = generate_dataset(&DatagenConfig::default(), &ctx, 20, &mut |_| true)?;

    let mut interpreter = Interpreter::new(backend)?;
    if std::env::args().any(|a| a == "--learned") {
        let corpus: Vec<String> = dataset.samples.iter().map(|s| s.command.clone()).collect();
        interpreter.learn_substitutions(&corpus)?;
    } else {
        interpreter = interpreter.with_table(confusion_table());
    }
    let report = run_ablation(&interpreter, &dataset.samples, &scene, &BaselineConfig::all());
    print!("{}", report.to_csv()?);
    if std::env::args().any(|a| a == "--verbose") {
        for s in &dataset.samples {
            println!("{} | {} | {}", s.id, s.command, s.transcript);
        }
        for o in &report.samples {
            println!("{} {} trial={} tok={} {:?} {:?}", o.baseline, o.sample, o.ledger.n_trial, o.n_token, o.level, o.error);
        }
    }
    Ok(())
}
