//! Learns a substitution table from example commands and uses it to undo
//! simulated mishearings.
//!
//! `cargo run -p v2a-core --example substitutions`

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;
use v2a_core::datagen::corrupt_transcript;
use v2a_core::pipeline::{preprocess, seeds, DeterministicBackend, Interpreter};
use v2a_core::scene::builtin_registry;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut interpreter = Interpreter::new(Arc::new(DeterministicBackend::new(&builtin_registry())))?;
    let corpus: Vec<String> = seeds::SEED_COMMANDS.iter().map(|s| s.command.to_string()).collect();
    let spent = interpreter.learn_substitutions(&corpus)?;
    let table = interpreter.table();
    println!("{} pairs proposed for {spent} tokens; alpha = {}", table.pairs().len(), table.alpha());
    for p in table.active() {
        println!("  active ({}, {})  weight {}/{}", p.supposed, p.wrong, p.proposals, p.occurrences);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for command in corpus.iter().take(4) {
        let heard = corrupt_transcript(command, table, 1.0, &mut rng);
        let fixed = preprocess(&heard, table);
        println!("\n  said  {command}\n  heard {}\n  fixed {}", heard.text, fixed.text);
    }
    Ok(())
}
