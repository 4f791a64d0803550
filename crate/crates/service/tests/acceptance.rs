//! Acceptance checks, one line per criterion.
//!
//! `cargo test -p v2a-service --test acceptance`
//!
//! Each check returns `Err(reason)` on failure and must also finish inside
//! its runtime budget. The process exits non-zero if any check fails.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::fs::File;
use std::io::BufReader;
use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::{Duration, Instant};
use v2a_core::datagen::{confusion_table, corrupt_transcript, fill_templates, read_jsonl, sample_task, DatagenConfig, SAMPLE_SEPARATOR};
use v2a_core::ir::{parse_t1, parse_t2, RawTranscript, SchemaSet};
use v2a_core::metrics::{run_ablation, total_tokens, BaselineConfig, Level, TokenLedger};
use v2a_core::pipeline::{
    embed_registry, match_atomic, preprocess, AgentBackend, AgentConfig, DeterministicBackend, Interpreter,
    ScriptedBackend, SubstitutionPair, SubstitutionTable, Task,
};
use v2a_core::scene::{builtin_registry, ActionRegistry, Arg, AtomicCall, EntityKind, Footprint, SceneState, Value};

type Check = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        {
            let ok: bool = $cond;
            if !ok {
                return Err(format!($($fmt)+));
            }
        }
    };
}

const DATASET: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/data/dataset_20.jsonl");
const MISHEARD: &str = "select the highest beauty on mean sea";

fn street_pairs() -> SubstitutionTable {
    SubstitutionTable::fixed(&[("building", "beauty"), ("main", "mean"), ("street", "sea")])
}

fn mock() -> Arc<DeterministicBackend> {
    Arc::new(DeterministicBackend::new(&builtin_registry()))
}

fn ledger_arithmetic() -> Check {
    for ((n0, n1, n2, n3, t), want) in [
        ((152.0, 92.0, 285.0, 140.0, 1.2), 754),
        ((152.0, 0.0, 402.0, 133.0, 1.3), 848),
        ((152.0, 0.0, 0.0, 355.0, 2.9), 1182),
        ((0.0, 0.0, 0.0, 368.0, 5.4), 1987),
    ] {
        let got = total_tokens(&TokenLedger::new(n0, n1, n2, n3, t));
        ensure!(got == want, "({n0},{n1},{n2},{n3},{t}) gave {got}, want {want}");
    }
    Ok(())
}

fn misheard_selection_end_to_end() -> Check {
    let interpreter = Interpreter::new(mock()).map_err(|e| e.to_string())?.with_table(street_pairs());
    let mut scene = SceneState::fixture();
    let trace = interpreter.run_text(&BaselineConfig::voice2action(), &mut scene, MISHEARD);
    let t0 = trace.t0.as_deref().unwrap_or_default();
    ensure!(t0 == "select the highest building on main street", "T0 = {t0:?}");
    let t1 = parse_t1(trace.t1.as_deref().unwrap_or_default(), &SchemaSet::default()).map_err(|e| e.to_string())?;
    ensure!(t1.action_type == "select", "action type {}", t1.action_type);
    let spans: Vec<&str> = t1.args.values().map(String::as_str).collect();
    ensure!(spans == ["height", "main street"], "T1 args {spans:?}");
    let t2 = trace.t2.as_deref().unwrap_or_default();
    let records = parse_t2(t2, &builtin_registry()).map_err(|e| e.to_string())?;
    ensure!(records.iter().any(|r| r.entity_kind == EntityKind::Building), "no building record in {t2:?}");
    ensure!(t2.contains("atomic action type: scale_getter"), "no scale_getter in {t2:?}");
    ensure!(t2.contains("atomic action arg1: y: inf"), "no `y: inf` in {t2:?}");
    ensure!(trace.passed(), "feedback {:?}", trace.feedback);
    ensure!(trace.rating.level == Level::A, "rating {}", trace.rating.level);
    // tallest main-street building of the fixture, computed from the scene itself
    let tallest = SceneState::fixture()
        .entities
        .values()
        .filter(|e| e.kind == EntityKind::Building && e.has_tag("main street"))
        .max_by(|a, b| a.scale[1].total_cmp(&b.scale[1]).then(b.id.cmp(&a.id)))
        .map(|e| e.id.clone())
        .unwrap();
    ensure!(scene.selection() == [tallest.clone()], "selected {:?}, want {tallest}", scene.selection());
    Ok(())
}

fn matcher_oracle() -> Check {
    let mut registry = builtin_registry();
    let backend = DeterministicBackend::new(&registry);
    embed_registry(&mut registry, &backend).map_err(|e| e.to_string())?;
    let mut vocab: Vec<String> = registry.iter().flat_map(|s| s.doc.split_whitespace().map(String::from).collect::<Vec<_>>()).collect();
    vocab.extend(["main", "street", "zebra", "3", "meters"].map(String::from));
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let oracle = |span: &str, registry: &ActionRegistry| -> String {
        let q = backend.embed(span).unwrap();
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut best: Option<(f64, &str)> = None;
        for spec in registry.iter() {
            let e = spec.embedding.as_ref().unwrap();
            let dot: f64 = q.iter().zip(e).map(|(a, b)| a * b).sum();
            let s = if norm(&q) == 0.0 || norm(e) == 0.0 { 0.0 } else { dot / (norm(&q) * norm(e)) };
            if best.is_none_or(|(b, n)| s > b || (s == b && spec.name.as_str() < n)) {
                best = Some((s, &spec.name));
            }
        }
        best.unwrap().1.to_string()
    };
    for i in 0..250 {
        let len = rng.gen_range(0..8);
        let span: Vec<&str> = (0..len).map(|_| vocab.choose(&mut rng).unwrap().as_str()).collect();
        let span = span.join(" ");
        let got = match_atomic(&span, &registry, &backend).map_err(|e| e.to_string())?;
        ensure!(got.name == oracle(&span, &registry), "case {i}: {span:?} matched {}", got.name);
    }
    Ok(())
}

fn time_invariance() -> Check {
    let registry = builtin_registry();
    let mut calls = vec![AtomicCall::new("deselect_all", vec![], None)];
    for k in EntityKind::ALL.map(Some) {
        let num = |key: &str, v: f64| Arg::new(key, Value::Num(v));
        calls.extend([
            AtomicCall::new("deselect_all", vec![], k),
            AtomicCall::new("select_by_tag", vec![Arg::new("tag", Value::Str("main street".into()))], k),
            AtomicCall::new("scale_getter", vec![Arg::new("y", Value::Inf)], k),
            AtomicCall::new("range", vec![num("start", 0.0), num("end", 50.0)], k),
            AtomicCall::new("locate", vec![num("x", 20.0), num("y", 0.0), num("z", 10.0)], k),
            AtomicCall::new("scale_setter", vec![num("x", 2.0), num("y", 1.0), num("z", 1.0)], k),
            AtomicCall::new("translate", vec![Arg::new("offset", Value::Vector([1.0, 0.0, -1.0]))], k),
        ]);
    }
    let base = SceneState::fixture();
    let n = calls.len();
    let mut plans = 0usize;
    // every subset of size <= 4 as a sorted index vector
    let mut stack: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    while let Some(set) = stack.pop() {
        let plan: Vec<AtomicCall> = set.iter().map(|&i| calls[i].clone()).collect();
        if !Footprint::plan_is_disjoint(&plan, &registry) {
            continue;
        }
        if set.len() < 4 {
            stack.extend((set[set.len() - 1] + 1..n).map(|j| [set.clone(), vec![j]].concat()));
        }
        let mut order = set.clone();
        let mut reference = None;
        // Heap's algorithm over all orderings
        let mut c = vec![0; order.len()];
        let mut i = 0;
        loop {
            let mut s = base.clone();
            for &k in &order {
                s.apply_atomic(&registry, &calls[k]);
            }
            let world = (s.entities, s.narrowed, s.frame);
            match &reference {
                None => reference = Some(world),
                Some(r) => ensure!(r == &world, "plan {plan:?} differs in order {order:?}"),
            }
            while i < order.len() && c[i] >= i {
                c[i] = 0;
                i += 1;
            }
            if i >= order.len() {
                break;
            }
            order.swap(if i % 2 == 0 { 0 } else { c[i] }, i);
            c[i] += 1;
            i = 0;
        }
        plans += 1;
    }
    ensure!(plans > 500, "only {plans} disjoint plans enumerated");
    Ok(())
}

fn retry_loop() -> Check {
    const BAD: &str = "entity: building\natomic action type: scale_getter\natomic action arg1: w: inf";
    const GOOD: &str = "entity: building\natomic action type: scale_getter\natomic action arg1: y: inf";
    let run = |max_trials| {
        let backend = ScriptedBackend::new(
            DeterministicBackend::new(&builtin_registry()),
            |t| matches!(t, Task::Extract { slot, .. } if slot == "superlative degree"),
            [BAD, BAD, GOOD].map(String::from),
        );
        let interpreter = Interpreter::new(Arc::new(backend))
            .unwrap()
            .with_table(street_pairs())
            .with_config(AgentConfig {
                max_trials,
                ..AgentConfig::default()
            });
        interpreter.run_text(&BaselineConfig::voice2action(), &mut SceneState::fixture(), MISHEARD)
    };
    let ok = run(8);
    ensure!(ok.ledger.n_trial == 3.0, "n_trial {}", ok.ledger.n_trial);
    ensure!(ok.trials.negatives().len() == 2, "negatives {:?}", ok.trials.negatives());
    ensure!(ok.passed(), "final feedback {:?}", ok.feedback);
    let capped = run(2);
    ensure!(!capped.passed(), "max_trials=2 still passed");
    ensure!(capped.rating.level == Level::D, "rating {}", capped.rating.level);
    Ok(())
}

fn substitution_table() -> Check {
    const WORDS: &[&str] = &["building", "beauty", "main", "mean", "street", "sea", "road", "rode", "car", "core"];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..200 {
        let mut seen = BTreeSet::new();
        let mut pairs = Vec::new();
        for _ in 0..rng.gen_range(0..16) {
            let (s, w) = (*WORDS.choose(&mut rng).unwrap(), *WORDS.choose(&mut rng).unwrap());
            if s != w && seen.insert((s, w)) {
                pairs.push(SubstitutionPair::new(s, w, rng.gen_range(1..6), rng.gen_range(1..10)));
            }
        }
        let percent = rng.gen_range(0..=100usize);
        let table = SubstitutionTable::new(pairs.clone(), percent as f64 / 100.0).map_err(|e| e.to_string())?;
        let mut want: Vec<&SubstitutionPair> = pairs.iter().collect();
        want.sort_by(|a, b| {
            let w = |p: &SubstitutionPair| p.proposals as f64 / p.occurrences as f64;
            w(b).partial_cmp(&w(a)).unwrap().then(a.wrong.cmp(&b.wrong)).then(a.supposed.cmp(&b.supposed))
        });
        want.truncate((percent * pairs.len()).div_ceil(100));
        ensure!(table.active() == want, "case {case}: active set differs");
        let text: Vec<&str> = (0..8).map(|_| *WORDS.choose(&mut rng).unwrap()).collect();
        let once = preprocess(&RawTranscript::spoken(text.join(" "), 0), &table);
        ensure!(preprocess(&once, &table).text == once.text, "case {case}: not idempotent on {:?}", once.text);
    }
    Ok(())
}

fn corrupt_recover() -> Check {
    let table = confusion_table();
    let names: Vec<String> = builtin_registry().names().into_iter().map(String::from).collect();
    let kinds: Vec<String> = EntityKind::ALL.iter().map(|k| k.to_string()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for i in 0..500u64 {
        let action_type = if i % 2 == 0 { "select" } else { "mesh" };
        let k = rng.gen_range(1..=kinds.len());
        let a = rng.gen_range(2..=names.len());
        let kinds: Vec<String> = kinds.choose_multiple(&mut rng, k).cloned().collect();
        let actions: Vec<String> = names.choose_multiple(&mut rng, a).cloned().collect();
        let text = fill_templates(action_type, &kinds, &actions, 1, i);
        let sample = text.split(SAMPLE_SEPARATOR).next().unwrap_or_default();
        let clean = sample.lines().next().and_then(|l| l.strip_prefix("command: ")).ok_or("template without command")?;
        let p = rng.gen_range(0.0..=1.0);
        let heard = corrupt_transcript(clean, &table, p, &mut rng);
        let back = preprocess(&heard, &table).text;
        ensure!(back == clean, "{clean:?} -> {:?} -> {back:?}", heard.text);
    }
    Ok(())
}

fn ablation_ordering() -> Check {
    let (_, samples) = read_jsonl(BufReader::new(File::open(DATASET).map_err(|e| e.to_string())?)).map_err(|e| e.to_string())?;
    ensure!(samples.len() == 20, "dataset has {} samples", samples.len());
    let interpreter = Interpreter::new(mock()).map_err(|e| e.to_string())?.with_table(confusion_table());
    let report = run_ablation(&interpreter, &samples, &SceneState::fixture(), &BaselineConfig::all());
    let rows: Vec<(&String, u64, f64)> = report.baselines.iter().map(|(n, s)| (n, s.n_token, s.n_trial)).collect();
    let names: Vec<&str> = rows.iter().map(|r| r.0.as_str()).collect();
    ensure!(names == ["LLM-Exe", "LLM-Pre-Exe", "LLM-Pre-Ext-Exe", "Voice2Action"], "baselines {names:?}");
    for w in rows.windows(2) {
        ensure!(w[0].1 > w[1].1, "n_token not decreasing: {rows:?}");
    }
    let v2a = rows[3].2;
    ensure!(rows.iter().all(|r| v2a <= r.2), "Voice2Action n_trial {v2a} above a baseline: {rows:?}");
    Ok(())
}

fn bench_determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut reports = Vec::new();
    for name in ["a.json", "b.json"] {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_v2a"))
            .args(["bench", "--dataset", DATASET, "--baselines", "all", "--out"])
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?;
        ensure!(status.status.success(), "bench failed: {}", String::from_utf8_lossy(&status.stderr));
        reports.push(std::fs::read(&out).map_err(|e| e.to_string())?);
    }
    ensure!(reports[0] == reports[1], "reports differ");
    Ok(())
}

fn dataset_sampling() -> Check {
    const N: usize = 10_000;
    let (config, schemas, registry) = (DatagenConfig::default(), SchemaSet::default(), builtin_registry());
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut d_ent = [0usize; 4];
    let mut d_atom = [0usize; 11];
    for _ in 0..N {
        let t = sample_task(&config, &schemas, &registry, &mut rng);
        ensure!((1..=3).contains(&t.d_ent) && (2..=10).contains(&t.d_atom), "draw out of range: {t:?}");
        ensure!(t.actions.len() == t.d_atom.min(registry.len()), "d_atom not capped: {t:?}");
        d_ent[t.d_ent] += 1;
        d_atom[t.d_atom] += 1;
    }
    let within = |counts: &[usize], label: &str| -> Check {
        let p = 1.0 / counts.len() as f64;
        let (mean, sigma) = (N as f64 * p, (N as f64 * p * (1.0 - p)).sqrt());
        for (i, &c) in counts.iter().enumerate() {
            let dev = (c as f64 - mean).abs();
            ensure!(dev <= 3.0 * sigma, "{label} bucket {i}: {c} vs {mean:.0} ± {:.1}", 3.0 * sigma);
        }
        Ok(())
    };
    within(&d_ent[1..], "d_ent")?;
    within(&d_atom[2..], "d_atom")
}

#[allow(clippy::type_complexity)]
fn main() -> ExitCode {
    // name, check, runtime budget in seconds
    let checks: [(&str, fn() -> Check, u64); 10] = [
        ("ledger arithmetic", ledger_arithmetic, 1),
        ("misheard selection end-to-end", misheard_selection_end_to_end, 1),
        ("matcher oracle equivalence", matcher_oracle, 5),
        ("time-invariance", time_invariance, 30),
        ("retry-loop contract", retry_loop, 1),
        ("substitution-table contract", substitution_table, 5),
        ("corrupt/recover round-trip", corrupt_recover, 5),
        ("ablation ordering", ablation_ordering, 60),
        ("bench determinism", bench_determinism, 60),
        ("dataset sampling", dataset_sampling, 10),
    ];
    let mut failed = 0;
    for (name, check, budget) in checks {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let result = result.and_then(|()| {
            if elapsed <= Duration::from_secs(budget) {
                Ok(())
            } else {
                Err(format!("took {elapsed:.2?}, budget {budget}s"))
            }
        });
        match result {
            Ok(()) => println!("PASS  {name:<30} {:>8.3}s", elapsed.as_secs_f64()),
            Err(reason) => {
                failed += 1;
                println!("FAIL  {name:<30} {:>8.3}s  {reason}", elapsed.as_secs_f64());
            }
        }
    }
    println!("{} of {} acceptance criteria passed", 10 - failed, 10);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
