use std::sync::Arc;
use v2a_core::ir::{parse_t1, parse_t2, RawTranscript, SchemaSet};
use v2a_core::metrics::{BaselineConfig, Level, Stage};
use v2a_core::pipeline::{
    AgentConfig, DeterministicBackend, Interpreter, PipelineEvent, ScriptedBackend, SubstitutionTable, Task,
};
use v2a_core::scene::{builtin_registry, SceneState, Value};

const RAW: &str = "select the highest beauty on mean sea";

fn street_example() -> SubstitutionTable {
    SubstitutionTable::fixed(&[("building", "beauty"), ("main", "mean"), ("street", "sea")])
}

fn interpreter() -> Interpreter {
    Interpreter::new(Arc::new(DeterministicBackend::new(&builtin_registry())))
        .unwrap()
        .with_table(street_example())
}

#[test]
fn misheard_selection_end_to_end() {
    let mut scene = SceneState::fixture();
    let mut events = Vec::new();
    let trace = interpreter().run(
        &BaselineConfig::voice2action(),
        &mut scene,
        &RawTranscript::spoken(RAW, 0),
        &mut |e| events.push(e),
    );
    assert_eq!(trace.t0.as_deref(), Some("select the highest building on main street"));
    let t1 = parse_t1(trace.t1.as_deref().unwrap(), &SchemaSet::default()).unwrap();
    assert_eq!(t1.action_type, "select");
    let spans: Vec<&str> = t1.args.values().map(String::as_str).collect();
    assert_eq!(spans, ["height", "main street"]);
    let t2 = trace.t2.as_deref().unwrap();
    let records = parse_t2(t2, &builtin_registry()).unwrap();
    assert!(records.iter().all(|r| r.entity_kind.as_str() == "building"));
    let getter = records.iter().find(|r| r.call.action == "scale_getter").expect("scale_getter record");
    assert_eq!(getter.call.args[0].key, "y");
    assert_eq!(getter.call.args[0].value, Value::Inf);
    assert!(t2.contains("atomic action arg1: y: inf"));
    assert!(trace.passed());
    assert_eq!(trace.rating.level, Level::A);
    assert_eq!(scene.selection(), ["b2"]);
    assert_eq!(trace.ledger.n_trial, 1.0);

    let stages: Vec<Stage> = events
        .iter()
        .filter_map(|e| match e {
            PipelineEvent::StageCompleted { stage, .. } => Some(*stage),
            _ => None,
        })
        .collect();
    assert_eq!(stages, [Stage::Pre, Stage::Cls, Stage::Ext, Stage::Exe]);
    assert!(matches!(events.last(), Some(PipelineEvent::Finished { pass: true, .. })));
}

#[test]
fn frame_stamps_are_ordered() {
    let mut scene = SceneState::fixture();
    let trace = interpreter().run_text(&BaselineConfig::voice2action(), &mut scene, RAW);
    let f = trace.frames;
    let f3 = f.f3.expect("winning plan applied");
    assert!(f.f <= f.f0 && f.f0 <= f.f1 && f.f1 <= f3 && f3 <= f.end, "{f:?}");
    assert_eq!(f.end, scene.frame);
    // every applied call is stamped with the frame the plan was fixed at
    assert!(scene.history.iter().all(|h| h.frame == f3));
}

#[test]
fn stages_present_exactly_when_enabled() {
    for baseline in BaselineConfig::all() {
        let mut scene = SceneState::fixture();
        let trace = interpreter().run_text(&baseline, &mut scene, RAW);
        assert_eq!(trace.t0.is_some(), baseline.enabled(Stage::Pre), "{}", baseline.name);
        assert_eq!(trace.t1.is_some(), baseline.enabled(Stage::Cls), "{}", baseline.name);
        assert_eq!(trace.t2.is_some(), baseline.enabled(Stage::Ext), "{}", baseline.name);
        assert_eq!(trace.ledger.n0 > 0.0, baseline.enabled(Stage::Pre));
        assert_eq!(trace.ledger.n1 > 0.0, baseline.enabled(Stage::Cls));
        assert_eq!(trace.ledger.n2 > 0.0, baseline.enabled(Stage::Ext));
        assert!(trace.ledger.n3 > 0.0);
        assert_eq!(trace.n_token, trace.ledger.total());
    }
}

/// Wrong axis key: parses, then fails when applied.
const BAD_HEIGHT: &str = "entity: building\natomic action type: scale_getter\natomic action arg1: w: inf";
const GOOD_HEIGHT: &str = "entity: building\natomic action type: scale_getter\natomic action arg1: y: inf";

fn scripted(max_trials: usize) -> Interpreter {
    let backend = ScriptedBackend::new(
        DeterministicBackend::new(&builtin_registry()),
        |t| matches!(t, Task::Extract { slot, .. } if slot == "superlative degree"),
        [BAD_HEIGHT, BAD_HEIGHT, GOOD_HEIGHT].map(String::from),
    );
    Interpreter::new(Arc::new(backend))
        .unwrap()
        .with_table(street_example())
        .with_config(AgentConfig {
            max_trials,
            ..AgentConfig::default()
        })
}

#[test]
fn retry_loop_recovers_after_two_failures() {
    let mut scene = SceneState::fixture();
    let trace = scripted(8).run_text(&BaselineConfig::voice2action(), &mut scene, RAW);
    assert_eq!(trace.ledger.n_trial, 3.0);
    assert_eq!(trace.trials.negatives().len(), 2);
    assert!(trace.passed(), "{:?}", trace.feedback);
    assert_eq!(trace.rating.level, Level::A);
    assert_eq!(scene.selection(), ["b2"]);
}

#[test]
fn retry_loop_gives_up_at_max_trials() {
    let mut scene = SceneState::fixture();
    let before = scene.entities.clone();
    let trace = scripted(2).run_text(&BaselineConfig::voice2action(), &mut scene, RAW);
    assert_eq!(trace.ledger.n_trial, 2.0);
    assert!(!trace.passed());
    assert_eq!(trace.rating.level, Level::D);
    assert_eq!(scene.entities, before, "failed commands leave the scene untouched");
    assert!(scene.history.is_empty());
}
