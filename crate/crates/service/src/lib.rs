//! HTTP service, REPL and batch commands around `v2a-core`.
//!
//! The server and the REPL both run commands through [`session::Session`],
//! so a command produces the same trace whichever way it arrives.

pub mod cli;
pub mod commands;
pub mod config;
pub mod repl;
pub mod server;
pub mod session;

pub use config::{BackendKind, ServiceConfig, SetupError, SubstitutionSource};
pub use session::{LedgerEntry, SceneSnapshot, Session, SessionEvent};
