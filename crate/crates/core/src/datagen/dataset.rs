use crate::scene::EntityKind;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};
use thiserror::Error;

pub const DATASET_FORMAT: &str = "v2a-dataset";
pub const DATASET_VERSION: u32 = 1;

/// What a correct run does: the kinds it touches and the records that
/// realize the command, in T₂ text form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expected {
    pub entities: Vec<EntityKind>,
    pub t2: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSample {
    pub id: String,
    /// Clean command text.
    pub command: String,
    /// The command as a recognizer heard it.
    pub transcript: String,
    pub action_type: String,
    pub expected: Expected,
    pub accepted: bool,
}

/// First line of a dataset file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetHeader {
    pub format: String,
    pub version: u32,
    pub size: usize,
    pub seed: u64,
}

impl DatasetHeader {
    pub fn new(size: usize, seed: u64) -> Self {
        Self {
            format: DATASET_FORMAT.into(),
            version: DATASET_VERSION,
            size,
            seed,
        }
    }
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("missing header line")]
    MissingHeader,
    #[error("unsupported dataset {format} version {version}")]
    Unsupported { format: String, version: u32 },
    #[error("header announces {announced} samples, file has {found}")]
    SizeMismatch { announced: usize, found: usize },
}

fn to_line<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("dataset values serialize")
}

/// Writes the header and one sample per line.
pub fn write_jsonl(mut out: impl Write, header: &DatasetHeader, samples: &[DatasetSample]) -> Result<(), DatasetError> {
    writeln!(out, "{}", to_line(header))?;
    for s in samples {
        writeln!(out, "{}", to_line(s))?;
    }
    Ok(())
}

/// Reads a dataset written by [`write_jsonl`]. Blank lines are ignored.
pub fn read_jsonl(input: impl BufRead) -> Result<(DatasetHeader, Vec<DatasetSample>), DatasetError> {
    let mut header: Option<DatasetHeader> = None;
    let mut samples = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let json = |source| DatasetError::Json { line: i + 1, source };
        match &header {
            None => {
                let h: DatasetHeader = serde_json::from_str(&line).map_err(json)?;
                if h.format != DATASET_FORMAT || h.version != DATASET_VERSION {
                    return Err(DatasetError::Unsupported {
                        format: h.format,
                        version: h.version,
                    });
                }
                header = Some(h);
            }
            Some(_) => samples.push(serde_json::from_str(&line).map_err(json)?),
        }
    }
    let header = header.ok_or(DatasetError::MissingHeader)?;
    if header.size != samples.len() {
        return Err(DatasetError::SizeMismatch {
            announced: header.size,
            found: samples.len(),
        });
    }
    Ok((header, samples))
}
