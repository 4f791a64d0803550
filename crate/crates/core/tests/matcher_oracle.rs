use proptest::prelude::*;
use v2a_core::pipeline::{embed_registry, match_atomic, rank_atomic, AgentBackend, DeterministicBackend};
use v2a_core::scene::{builtin_registry, ActionRegistry};

fn setup() -> (ActionRegistry, DeterministicBackend) {
    let mut registry = builtin_registry();
    let backend = DeterministicBackend::new(&registry);
    embed_registry(&mut registry, &backend).unwrap();
    (registry, backend)
}

/// Plain argmax over every spec; ties go to the smaller name.
fn brute_force(span: &str, registry: &ActionRegistry, backend: &dyn AgentBackend) -> String {
    let q = backend.embed(span).unwrap();
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut best: Option<(f64, String)> = None;
    for spec in registry.iter() {
        let e = spec.embedding.as_ref().unwrap();
        let dot: f64 = q.iter().zip(e).map(|(a, b)| a * b).sum();
        let (nq, ne) = (norm(&q), norm(e));
        let score = if nq == 0.0 || ne == 0.0 { 0.0 } else { dot / (nq * ne) };
        let better = match &best {
            None => true,
            Some((s, name)) => score > *s || (score == *s && spec.name < *name),
        };
        if better {
            best = Some((score, spec.name.clone()));
        }
    }
    best.unwrap().1
}

fn vocabulary() -> Vec<String> {
    let mut words: Vec<String> = builtin_registry()
        .iter()
        .flat_map(|s| s.doc.split_whitespace().map(|w| w.trim_matches(|c: char| !c.is_alphanumeric()).to_string()).collect::<Vec<_>>())
        .filter(|w| !w.is_empty())
        .collect();
    words.extend(["main", "street", "tallest", "the", "zebra", "quantum", "3", "meters"].map(String::from));
    words.sort();
    words.dedup();
    words
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn match_equals_brute_force_argmax(
        words in proptest::collection::vec(proptest::sample::select(vocabulary()), 0..8),
    ) {
        let (registry, backend) = setup();
        let span = words.join(" ");
        let got = match_atomic(&span, &registry, &backend).unwrap();
        prop_assert_eq!(&got.name, &brute_force(&span, &registry, &backend), "span {:?}", span);
    }

    #[test]
    fn ranking_is_sorted_and_complete(span in "[a-z ]{0,40}") {
        let (registry, backend) = setup();
        let ranked = rank_atomic(&span, &registry, &backend).unwrap();
        prop_assert_eq!(ranked.len(), registry.len());
        for w in ranked.windows(2) {
            prop_assert!(w[0].1 > w[1].1 || (w[0].1 == w[1].1 && w[0].0 < w[1].0));
        }
    }
}

#[test]
fn named_spans_hit_their_action() {
    let (registry, backend) = setup();
    for (span, want) in [
        ("height tallest", "scale_getter"),
        ("main street", "select_by_tag"),
        ("move 5 meters north", "translate"),
        ("make them 3 times taller", "scale_setter"),
        ("within 50 meters of the center", "range"),
        ("closest to the point", "locate"),
        ("clear the selection", "deselect_all"),
    ] {
        assert_eq!(match_atomic(span, &registry, &backend).unwrap().name, want, "{span}");
    }
}
