//! Ranks the registry against free-text spans by embedding similarity.
//!
//! `cargo run -p v2a-core --example matcher -- "make them twice as tall"`

use v2a_core::pipeline::{embed_registry, rank_atomic, DeterministicBackend};
use v2a_core::scene::builtin_registry;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut registry = builtin_registry();
    let backend = DeterministicBackend::new(&registry);
    embed_registry(&mut registry, &backend)?;
    let spans: Vec<String> = match std::env::args().skip(1).collect::<Vec<_>>() {
        args if !args.is_empty() => args,
        _ => ["tallest", "on oak street", "10 meters north", "nearest to the origin"].map(String::from).to_vec(),
    };
    for span in spans {
        println!("{span:?}");
        for (name, score) in rank_atomic(&span, &registry, &backend)?.iter().take(3) {
            println!("  {score:.3}  {name}");
        }
    }
    Ok(())
}
