//! Batch commands: dataset generation and the ablation benchmark.

use crate::config::{BackendKind, ServiceConfig, SetupError};
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use thiserror::Error;
use v2a_core::datagen::{generate_dataset, read_jsonl, write_jsonl, DatagenConfig, DatagenContext, DatasetHeader};
use v2a_core::metrics::{run_ablation, AblationReport, BaselineConfig};

/// Failure of a CLI command, split by exit code: 2 for bad input, 1 for
/// everything else.
#[derive(Debug, Error)]
pub enum CommandError {
    #[error("{0}")]
    BadInput(String),
    #[error(transparent)]
    Internal(#[from] anyhow::Error),
}

impl CommandError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CommandError::BadInput(_) => 2,
            CommandError::Internal(_) => 1,
        }
    }
}

impl From<SetupError> for CommandError {
    fn from(e: SetupError) -> Self {
        match e {
            SetupError::Backend(_) => CommandError::Internal(e.into()),
            other => CommandError::BadInput(other.to_string()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GenArgs {
    pub size: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub backend: BackendKind,
}

/// Generates a dataset and writes it as JSONL. Returns the rejection report
/// as a one-line summary.
pub fn gen(config: &ServiceConfig, args: &GenArgs) -> Result<String, CommandError> {
    if args.size == 0 {
        return Err(CommandError::BadInput("--size must be positive".into()));
    }
    let defaults = DatagenConfig::default();
    // large requests get more rounds; the first ten are unchanged
    let datagen = DatagenConfig {
        seed: args.seed,
        rounds: defaults.rounds.max(args.size.div_ceil(defaults.per_round)),
        ..defaults
    };
    datagen.validate(args.size).map_err(|e| CommandError::BadInput(e.to_string()))?;
    let interpreter = config.interpreter(args.backend)?;
    let scene = config.load_scene()?;
    let ctx = DatagenContext {
        backend: interpreter.backend(),
        registry: interpreter.registry(),
        schemas: interpreter.schemas(),
        prompts: interpreter.prompts(),
        scene: &scene,
    };
    let dataset = generate_dataset(&datagen, &ctx, args.size, &mut |_| true).map_err(anyhow::Error::from)?;
    if dataset.samples.len() < args.size {
        tracing::warn!(wanted = args.size, got = dataset.samples.len(), "generation came up short");
    }
    let mut out = create(&args.out)?;
    write_jsonl(&mut out, &DatasetHeader::new(dataset.samples.len(), args.seed), &dataset.samples)
        .map_err(anyhow::Error::from)?;
    out.flush().map_err(anyhow::Error::from)?;
    let r = &dataset.report;
    Ok(format!(
        "wrote {} samples to {} ({} candidates, {} duplicate, {} unsound, {} empty, rejection {:.1}%)",
        dataset.samples.len(),
        args.out.display(),
        r.candidates,
        r.duplicate,
        r.unsound,
        r.empty,
        100.0 * r.rejection_rate()
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone)]
pub struct BenchArgs {
    pub dataset: PathBuf,
    /// `all` or comma-separated baseline names.
    pub baselines: String,
    pub out: PathBuf,
    pub format: ReportFormat,
    pub backend: BackendKind,
}

pub fn parse_baselines(spec: &str) -> Result<Vec<BaselineConfig>, CommandError> {
    if spec.trim().eq_ignore_ascii_case("all") {
        return Ok(BaselineConfig::all());
    }
    let list: Vec<BaselineConfig> = spec
        .split(',')
        .map(|name| BaselineConfig::by_name(name.trim()))
        .collect::<Result<_, _>>()
        .map_err(|e| CommandError::BadInput(e.to_string()))?;
    if list.is_empty() {
        return Err(CommandError::BadInput("no baselines given".into()));
    }
    Ok(list)
}

/// Runs the baselines over a dataset file and writes the report.
pub fn bench(config: &ServiceConfig, args: &BenchArgs) -> Result<AblationReport, CommandError> {
    let baselines = parse_baselines(&args.baselines)?;
    let file = File::open(&args.dataset)
        .map_err(|e| CommandError::BadInput(format!("cannot read dataset {}: {e}", args.dataset.display())))?;
    let (_, samples) = read_jsonl(BufReader::new(file))
        .map_err(|e| CommandError::BadInput(format!("invalid dataset {}: {e}", args.dataset.display())))?;
    let interpreter = config.interpreter(args.backend)?;
    let scene = config.load_scene()?;
    let report = run_ablation(&interpreter, &samples, &scene, &baselines);
    let body = match args.format {
        ReportFormat::Json => report.to_json(),
        ReportFormat::Csv => report.to_csv().map_err(anyhow::Error::from)?,
    };
    let mut out = create(&args.out)?;
    out.write_all(body.as_bytes()).map_err(anyhow::Error::from)?;
    out.flush().map_err(anyhow::Error::from)?;
    Ok(report)
}

fn create(path: &Path) -> Result<BufWriter<File>, CommandError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CommandError::Internal(anyhow::anyhow!("cannot write {}: {e}", path.display())))
}
