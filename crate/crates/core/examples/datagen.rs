//! Generates a labelled dataset and writes it as JSONL to stdout.
//!
//! `cargo run -p v2a-core --example datagen -- 30 7`  (size, seed)

use std::sync::Arc;
use v2a_core::datagen::{generate_dataset, write_jsonl, DatagenConfig, DatagenContext, DatasetHeader};
use v2a_core::ir::SchemaSet;
use v2a_core::pipeline::{DeterministicBackend, PromptSet};
use v2a_core::scene::{builtin_registry, SceneState};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let size: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(20);
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0);

    let registry = builtin_registry();
    let backend = Arc::new(DeterministicBackend::new(&registry));
    let scene = SceneState::fixture();
    let ctx = DatagenContext {
        backend: backend.as_ref(),
        registry: &registry,
        schemas: &SchemaSet::default(),
        prompts: &PromptSet::default(),
        scene: &scene,
    };
    let config = DatagenConfig {
        seed,
        ..DatagenConfig::default()
    };
    // keep only samples that touch more than one entity kind or are mesh edits
    let dataset = generate_dataset(&config, &ctx, size, &mut |s| s.expected.entities.len() > 1 || s.action_type == "mesh")?;
    write_jsonl(std::io::stdout().lock(), &DatasetHeader::new(dataset.samples.len(), seed), &dataset.samples)?;
    let r = dataset.report;
    eprintln!(
        "{} accepted of {} candidates: {} duplicate, {} unsound, {} empty, {} filtered",
        r.accepted, r.candidates, r.duplicate, r.unsound, r.empty, r.filtered
    );
    Ok(())
}
