use super::baseline::BaselineConfig;
use super::ledger::{total_tokens, TokenLedger};
use super::rating::{rate_outcome, Level};
use crate::datagen::DatasetSample;
use crate::ir::{parse_t2, RawTranscript};
use crate::pipeline::Interpreter;
use crate::scene::SceneState;
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatingCounts {
    #[serde(rename = "A")]
    pub a: usize,
    #[serde(rename = "B")]
    pub b: usize,
    #[serde(rename = "C")]
    pub c: usize,
    #[serde(rename = "D")]
    pub d: usize,
}

impl RatingCounts {
    pub fn add(&mut self, level: Level) {
        match level {
            Level::A => self.a += 1,
            Level::B => self.b += 1,
            Level::C => self.c += 1,
            Level::D => self.d += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.a + self.b + self.c + self.d
    }
}

/// One baseline averaged over the dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineSummary {
    pub n0: f64,
    pub n1: f64,
    pub n2: f64,
    pub n3: f64,
    pub n_trial: f64,
    /// Token total of the mean components.
    pub n_token: u64,
    /// Mean of the per-sample token totals.
    pub mean_of_totals: f64,
    pub ratings: RatingCounts,
}

/// One sample under one baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleOutcome {
    pub sample: String,
    pub baseline: String,
    pub ledger: TokenLedger,
    pub n_token: u64,
    pub level: Level,
    pub error: Option<String>,
}

/// Summaries keyed by baseline name, in the order the baselines were given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AblationReport {
    pub baselines: IndexMap<String, BaselineSummary>,
    #[serde(skip)]
    pub samples: Vec<SampleOutcome>,
}

impl AblationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// Table with one row per baseline.
    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["baseline", "n0", "n1", "n2", "n3", "n_trial", "n_token", "A", "B", "C", "D"])?;
        for (name, s) in &self.baselines {
            w.write_record([
                name.clone(),
                format!("{:.1}", s.n0),
                format!("{:.1}", s.n1),
                format!("{:.1}", s.n2),
                format!("{:.1}", s.n3),
                format!("{:.2}", s.n_trial),
                s.n_token.to_string(),
                s.ratings.a.to_string(),
                s.ratings.b.to_string(),
                s.ratings.c.to_string(),
                s.ratings.d.to_string(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn evaluate(interpreter: &Interpreter, baseline: &BaselineConfig, sample: &DatasetSample, scene: &SceneState) -> SampleOutcome {
    let mut world = scene.clone();
    let transcript = RawTranscript::spoken(&sample.transcript, world.frame);
    let trace = interpreter.run(baseline, &mut world, &transcript, &mut |_| {});

    let expectation = parse_t2(&sample.expected.t2, interpreter.registry()).ok().map(|records| {
        let mut expected = scene.clone();
        for r in &records {
            expected.apply_atomic(interpreter.registry(), &r.call);
        }
        expected
    });
    let rating = rate_outcome(&trace.feedback, scene, &world, expectation.as_ref());
    SampleOutcome {
        sample: sample.id.clone(),
        baseline: baseline.name.clone(),
        n_token: trace.n_token,
        ledger: trace.ledger,
        level: rating.level,
        error: (!trace.feedback.is_pass()).then(|| trace.feedback.error_message.clone()),
    }
}

/// Runs every sample through every baseline, each on a fresh copy of
/// `scene`. Samples are evaluated on worker threads; results are merged in
/// sample order so the report does not depend on scheduling.
pub fn run_ablation(
    interpreter: &Interpreter,
    dataset: &[DatasetSample],
    scene: &SceneState,
    baselines: &[BaselineConfig],
) -> AblationReport {
    let jobs: Vec<(usize, usize)> = (0..baselines.len())
        .flat_map(|b| (0..dataset.len()).map(move |s| (b, s)))
        .collect();
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(jobs.len().max(1));
    let mut results: Vec<Option<SampleOutcome>> = vec![None; jobs.len()];
    std::thread::scope(|s| {
        let chunk = jobs.len().div_ceil(workers).max(1);
        let handles: Vec<_> = jobs
            .chunks(chunk)
            .enumerate()
            .map(|(c, part)| {
                s.spawn(move || {
                    let out: Vec<SampleOutcome> = part
                        .iter()
                        .map(|&(b, i)| evaluate(interpreter, &baselines[b], &dataset[i], scene))
                        .collect();
                    (c * chunk, out)
                })
            })
            .collect();
        for h in handles {
            let (offset, out) = h.join().expect("ablation worker panicked");
            for (k, o) in out.into_iter().enumerate() {
                results[offset + k] = Some(o);
            }
        }
    });
    let samples: Vec<SampleOutcome> = results.into_iter().map(|o| o.expect("every job ran")).collect();

    let mut summaries = IndexMap::new();
    for (b, baseline) in baselines.iter().enumerate() {
        let rows = &samples[b * dataset.len()..(b + 1) * dataset.len()];
        let Some(mean) = TokenLedger::mean(rows.iter().map(|r| &r.ledger)) else {
            continue;
        };
        let mut ratings = RatingCounts::default();
        for r in rows {
            ratings.add(r.level);
        }
        let mean_of_totals = rows.iter().map(|r| r.n_token as f64).sum::<f64>() / rows.len() as f64;
        summaries.insert(
            baseline.name.clone(),
            BaselineSummary {
                n0: mean.n0,
                n1: mean.n1,
                n2: mean.n2,
                n3: mean.n3,
                n_trial: mean.n_trial,
                n_token: total_tokens(&mean),
                mean_of_totals,
                ratings,
            },
        );
    }
    AblationReport {
        baselines: summaries,
        samples,
    }
}
