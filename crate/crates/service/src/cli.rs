//! Argument parsing and dispatch for the `v2a` binary.

use crate::commands::{self, BenchArgs, CommandError, GenArgs, ReportFormat};
use crate::config::{BackendKind, ServiceConfig};
use crate::repl::Repl;
use crate::session::Session;
use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

#[derive(Debug, Parser)]
#[command(name = "v2a", version, about = "Spoken scene commands to engine actions")]
pub struct Cli {
    /// TOML config; defaults apply when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Backend {
    Mock,
    Remote,
}

impl From<Backend> for BackendKind {
    fn from(b: Backend) -> Self {
        match b {
            Backend::Mock => BackendKind::Mock,
            Backend::Remote => BackendKind::Remote,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the HTTP service.
    Serve {
        /// Overrides `listen` from the config.
        #[arg(long)]
        listen: Option<String>,
    },
    /// Interactive command loop on one scene.
    Repl {
        #[arg(long)]
        scene: Option<PathBuf>,
        #[arg(long, value_enum)]
        backend: Option<Backend>,
        #[arg(long)]
        baseline: Option<String>,
    },
    /// Generate a labelled dataset.
    Gen {
        #[arg(long, default_value_t = 20)]
        size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        backend: Option<Backend>,
    },
    /// Run baselines over a dataset and write the report.
    Bench {
        #[arg(long)]
        dataset: PathBuf,
        /// `all` or comma-separated names.
        #[arg(long, default_value = "all")]
        baselines: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long, value_enum)]
        backend: Option<Backend>,
    },
}

fn load_config(path: Option<&PathBuf>) -> Result<ServiceConfig, CommandError> {
    match path {
        Some(p) => Ok(ServiceConfig::load(p)?),
        None => Ok(ServiceConfig::default()),
    }
}

/// Runs a parsed command line.
pub fn run(cli: Cli) -> Result<(), CommandError> {
    let mut config = load_config(cli.config.as_ref())?;
    match cli.command {
        Command::Serve { listen } => {
            if let Some(l) = listen {
                config.listen = l;
            }
            let runtime = tokio::runtime::Runtime::new().map_err(anyhow::Error::from)?;
            runtime.block_on(crate::server::serve(config))?;
        }
        Command::Repl { scene, backend, baseline } => {
            if scene.is_some() {
                config.scene = scene;
            }
            if let Some(b) = baseline {
                config.baseline = b;
            }
            let kind = backend.map(Into::into).unwrap_or(config.backend);
            let session = Session::new(
                "repl",
                config.load_scene()?,
                config.baseline()?,
                Arc::new(config.interpreter(kind)?),
            );
            let stdin = std::io::stdin();
            Repl::new(session)
                .run(stdin.lock(), std::io::stdout())
                .map_err(anyhow::Error::from)?;
        }
        Command::Gen { size, seed, out, backend } => {
            let args = GenArgs {
                size,
                seed,
                out,
                backend: backend.map(Into::into).unwrap_or(config.backend),
            };
            eprintln!("{}", commands::gen(&config, &args)?);
        }
        Command::Bench {
            dataset,
            baselines,
            out,
            format,
            backend,
        } => {
            let args = BenchArgs {
                dataset,
                baselines,
                out,
                format: match format {
                    Format::Json => ReportFormat::Json,
                    Format::Csv => ReportFormat::Csv,
                },
                backend: backend.map(Into::into).unwrap_or(config.backend),
            };
            let report = commands::bench(&config, &args)?;
            for (name, s) in &report.baselines {
                eprintln!("{name:<16} n_token {:>6}  n_trial {:.2}", s.n_token, s.n_trial);
            }
        }
    }
    Ok(())
}

/// Entry point with the exit-code contract: 0 ok, 1 internal, 2 bad input.
pub fn main_with_args(args: impl IntoIterator<Item = std::ffi::OsString>) -> ExitCode {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(e.exit_code())
        }
    }
}
