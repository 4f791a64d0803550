use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};
use v2a_core::datagen::{sample_task, DatagenConfig};
use v2a_core::ir::SchemaSet;
use v2a_core::scene::builtin_registry;

const DRAWS: usize = 10_000;

/// Every value of `support` occurs within three binomial standard
/// deviations of `DRAWS / |support|`, and nothing else occurs.
fn assert_uniform<T: Ord + std::fmt::Debug + Clone>(label: &str, counts: &BTreeMap<T, usize>, support: &[T]) {
    let keys: BTreeSet<T> = counts.keys().cloned().collect();
    assert_eq!(keys, support.iter().cloned().collect(), "{label}: support");
    let p = 1.0 / support.len() as f64;
    let mean = DRAWS as f64 * p;
    let sigma = (DRAWS as f64 * p * (1.0 - p)).sqrt();
    for (v, &c) in counts {
        let dev = (c as f64 - mean).abs();
        assert!(dev <= 3.0 * sigma, "{label}: {v:?} seen {c} times, expected {mean:.0} ± {:.1}", 3.0 * sigma);
    }
}

#[test]
fn task_draws_are_uniform_and_capped() {
    let config = DatagenConfig::default();
    let schemas = SchemaSet::default();
    let registry = builtin_registry();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut d_ent = BTreeMap::new();
    let mut d_atom = BTreeMap::new();
    let mut types = BTreeMap::new();
    for _ in 0..DRAWS {
        let t = sample_task(&config, &schemas, &registry, &mut rng);
        *d_ent.entry(t.d_ent).or_insert(0) += 1;
        *d_atom.entry(t.d_atom).or_insert(0) += 1;
        *types.entry(t.action_type.clone()).or_insert(0) += 1;
        assert_eq!(t.kinds.len(), t.d_ent.min(3));
        assert_eq!(t.actions.len(), t.d_atom.min(registry.len()));
        assert_eq!(t.kinds.iter().collect::<BTreeSet<_>>().len(), t.kinds.len(), "kinds drawn without replacement");
        assert_eq!(t.actions.iter().collect::<BTreeSet<_>>().len(), t.actions.len(), "actions drawn without replacement");
        assert!(t.actions.iter().all(|a| registry.get(a).is_some()));
    }
    assert_uniform("d_ent", &d_ent, &[1, 2, 3]);
    assert_uniform("d_atom", &d_atom, &(2..=10).collect::<Vec<_>>());
    assert_uniform("action type", &types, &["mesh".to_string(), "select".to_string()]);
}

#[test]
fn same_seed_same_draws() {
    let config = DatagenConfig::default();
    let (schemas, registry) = (SchemaSet::default(), builtin_registry());
    let draw = |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..50).map(|_| sample_task(&config, &schemas, &registry, &mut rng)).collect::<Vec<_>>()
    };
    assert_eq!(draw(7), draw(7));
    assert_ne!(draw(7), draw(8));
}
