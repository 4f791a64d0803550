use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};
use v2a_core::datagen::{confusion_table, corrupt_transcript, fill_templates, SAMPLE_SEPARATOR};
use v2a_core::ir::RawTranscript;
use v2a_core::lexicon::CONFUSIONS;
use v2a_core::pipeline::{preprocess, SubstitutionPair, SubstitutionTable};
use v2a_core::scene::{builtin_registry, EntityKind};

const WORDS: &[&str] = &["building", "beauty", "main", "mean", "street", "sea", "road", "rode", "car", "core", "oak", "oke"];

fn pairs() -> impl Strategy<Value = Vec<SubstitutionPair>> {
    let word = || proptest::sample::select(WORDS.to_vec());
    proptest::collection::btree_map((word(), word()), (1u64..6, 1u64..10), 0..20).prop_map(|m| {
        m.into_iter()
            .filter(|((s, w), _)| s != w)
            .map(|((s, w), (p, o))| SubstitutionPair::new(s, w, p, o))
            .collect()
    })
}

/// Top `⌈percent·n/100⌉` by weight, then wrong token, then supposed token.
fn brute_force_active(pairs: &[SubstitutionPair], percent: usize) -> Vec<(String, String)> {
    let mut sorted: Vec<&SubstitutionPair> = pairs.iter().collect();
    sorted.sort_by(|a, b| {
        let (wa, wb) = (a.proposals as f64 / a.occurrences as f64, b.proposals as f64 / b.occurrences as f64);
        wb.partial_cmp(&wa)
            .unwrap()
            .then_with(|| a.wrong.cmp(&b.wrong))
            .then_with(|| a.supposed.cmp(&b.supposed))
    });
    let k = (percent * pairs.len()).div_ceil(100);
    sorted.into_iter().take(k).map(|p| (p.supposed.clone(), p.wrong.clone())).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn active_set_is_the_top_fraction(pairs in pairs(), percent in 0usize..=100) {
        let table = SubstitutionTable::new(pairs.clone(), percent as f64 / 100.0).unwrap();
        let active: Vec<(String, String)> = table.active().iter().map(|p| (p.supposed.clone(), p.wrong.clone())).collect();
        prop_assert_eq!(active, brute_force_active(&pairs, percent));
    }

    #[test]
    fn preprocess_is_idempotent(
        pairs in pairs(),
        percent in 0usize..=100,
        words in proptest::collection::vec(proptest::sample::select(WORDS.to_vec()), 0..12),
        seps in proptest::collection::vec(proptest::sample::select(vec![" ", "  ", "\t", "\n"]), 12),
    ) {
        let table = SubstitutionTable::new(pairs, percent as f64 / 100.0).unwrap();
        let text: String = words.iter().zip(&seps).map(|(w, s)| format!("{w}{s}")).collect();
        let once = preprocess(&RawTranscript::spoken(text.clone(), 0), &table);
        let twice = preprocess(&once, &table);
        prop_assert_eq!(&twice.text, &once.text);
        // only tokens change; the whitespace skeleton is kept byte for byte
        let skeleton = |t: &str| t.chars().filter(|c| c.is_whitespace()).collect::<String>();
        prop_assert_eq!(skeleton(&once.text), skeleton(&text));
    }
}

fn clean_command(action_type: &str, kinds: &[EntityKind], actions: &[String], seed: u64) -> String {
    let kinds: Vec<String> = kinds.iter().map(|k| k.to_string()).collect();
    let text = fill_templates(action_type, &kinds, actions, 1, seed);
    let sample = text.split(SAMPLE_SEPARATOR).next().unwrap();
    sample.lines().next().unwrap().strip_prefix("command: ").unwrap().to_string()
}

fn command() -> impl Strategy<Value = String> {
    let names: Vec<String> = builtin_registry().names().into_iter().map(String::from).collect();
    (
        proptest::sample::select(vec!["select", "mesh"]),
        proptest::sample::subsequence(EntityKind::ALL.to_vec(), 1..=3),
        proptest::sample::subsequence(names.clone(), 2..=names.len()),
        any::<u64>(),
    )
        .prop_map(|(t, kinds, actions, seed)| clean_command(t, &kinds, &actions, seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn corrupt_then_preprocess_recovers(x in command(), p in 0.0f64..=1.0, seed in any::<u64>()) {
        let table = confusion_table();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let heard = corrupt_transcript(&x, &table, p, &mut rng);
        prop_assert_eq!(preprocess(&heard, &table).text, x);
    }
}

#[test]
fn lexicon_table_is_collision_free() {
    let supposed: BTreeSet<&str> = CONFUSIONS.iter().map(|p| p.0).collect();
    let wrong: BTreeSet<&str> = CONFUSIONS.iter().map(|p| p.1).collect();
    assert_eq!(supposed.len(), CONFUSIONS.len(), "one wrong token per supposed token");
    assert_eq!(wrong.len(), CONFUSIONS.len(), "one supposed token per wrong token");
    assert!(supposed.is_disjoint(&wrong));
    // template commands never contain a wrong token
    let names: Vec<String> = builtin_registry().names().into_iter().map(String::from).collect();
    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    for seed in 0..300 {
        for t in ["select", "mesh"] {
            let c = clean_command(t, &EntityKind::ALL, &names, seed);
            for tok in c.split_whitespace() {
                assert!(!wrong.contains(tok), "{tok} in {c}");
                if let Some(s) = supposed.get(tok) {
                    *seen.entry(s).or_default() += 1;
                }
            }
        }
    }
    assert!(seen.len() >= 10, "templates exercise few confusable tokens: {seen:?}");
}
