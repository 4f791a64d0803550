//! Hierarchical interpreter for spoken scene-editing commands.
//!
//! A transcript is corrected, classified into an action type with slots,
//! grounded slot by slot into atomic engine calls, and executed through a
//! race of candidate plans checked against a simulated scene. Every stage
//! goes through a pluggable completion backend; [`pipeline::DeterministicBackend`]
//! answers offline.

pub mod datagen;
pub mod ir;
pub mod lexicon;
pub mod metrics;
pub mod pipeline;
pub mod scene;
