//! Offline command generator: a small grammar of select and mesh commands
//! that writes each command together with its extraction records.

use crate::ir::{serialize_t2, ExtractionRecord};
use crate::lexicon;
use crate::scene::{Arg, EntityKind, Value};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Separator between generated samples.
pub const SAMPLE_SEPARATOR: &str = "\n---\n";

const MAX_CLAUSES: usize = 4;
const RANGE_STARTS: &[u32] = &[0, 10, 20];
const RANGE_ENDS: &[u32] = &[30, 50, 70];
const POINTS: &[[i32; 3]] = &[[30, 0, -30], [0, 0, 0], [-20, 0, 40], [50, 0, 10], [20, 0, 10]];
const FACTORS: &[&str] = &["2", "3", "1.5"];
const DISTANCES: &[u32] = &[5, 10, 20];
const MUTATORS: &[&str] = &["scale_setter", "translate"];

struct Nouns {
    singular: &'static [&'static str],
    plural: &'static [&'static str],
    superlatives: &'static [&'static str],
    streets: &'static [&'static str],
    resize: &'static [&'static str],
}

fn nouns(kind: EntityKind) -> Nouns {
    match kind {
        EntityKind::Building => Nouns {
            singular: &["building", "tower"],
            plural: &["buildings", "towers"],
            superlatives: &["highest", "tallest", "lowest", "widest", "narrowest"],
            streets: &["main street", "oak avenue", "harbor street"],
            resize: &["taller", "wider", "bigger"],
        },
        EntityKind::Road => Nouns {
            singular: &["road"],
            plural: &["roads"],
            superlatives: &["longest", "widest", "narrowest"],
            streets: &["main street", "oak avenue"],
            resize: &["longer", "wider"],
        },
        EntityKind::Vehicle => Nouns {
            singular: &["car", "truck"],
            plural: &["cars", "trucks"],
            superlatives: &["longest", "highest", "widest"],
            streets: &["main street", "oak avenue"],
            resize: &["bigger", "longer"],
        },
    }
}

fn pick<'a, T: ?Sized>(rng: &mut ChaCha8Rng, items: &'a [&'a T]) -> &'a T {
    items.choose(rng).expect("non-empty word list")
}

/// Usable actions for `action_type`, at most four, in slot order.
fn plan_actions(action_type: &str, actions: &[String]) -> Vec<&'static str> {
    const SLOT_ORDER: &[&str] = &[
        "scale_getter",
        "select_by_tag",
        "range",
        "locate",
        "deselect_all",
        "scale_setter",
        "translate",
    ];
    let mesh = action_type == "mesh";
    let mut chosen: Vec<&'static str> = SLOT_ORDER
        .iter()
        .copied()
        .filter(|a| actions.iter().any(|x| x == a))
        .filter(|a| mesh || !MUTATORS.contains(a))
        .collect();
    if mesh && !chosen.iter().any(|a| MUTATORS.contains(a)) {
        chosen.push("scale_setter");
    }
    if chosen.iter().all(|a| *a == "deselect_all") {
        chosen.insert(0, "select_by_tag");
    }
    // keep the mutator when trimming to the clause limit
    while chosen.len() > MAX_CLAUSES {
        let drop = chosen.iter().position(|a| !MUTATORS.contains(a)).expect("at most two mutators");
        chosen.remove(drop);
    }
    chosen
}

fn record(kind: EntityKind, action: &str, args: Vec<Arg>) -> ExtractionRecord {
    ExtractionRecord::new(kind, action, args)
}

/// One command and its records for `kind` using `actions`.
fn sentence(rng: &mut ChaCha8Rng, action_type: &str, kind: EntityKind, actions: &[&str]) -> (String, Vec<ExtractionRecord>) {
    let n = nouns(kind);
    let has = |a: &str| actions.contains(&a);
    let single = has("scale_getter") || has("locate");
    let noun = if single { pick(rng, n.singular) } else { pick(rng, n.plural) };

    let mut words: Vec<String> = Vec::new();
    let mut records: Vec<(usize, ExtractionRecord)> = Vec::new();
    let push = |records: &mut Vec<(usize, ExtractionRecord)>, action: &str, args: Vec<Arg>| {
        let order = ["deselect_all", "select_by_tag", "range", "scale_getter", "locate", "scale_setter", "translate"]
            .iter()
            .position(|a| *a == action)
            .expect("known action");
        records.push((order, record(kind, action, args)));
    };

    if has("deselect_all") {
        words.push("clear the selection then".into());
        push(&mut records, "deselect_all", Vec::new());
    }
    let verb = if action_type == "mesh" {
        if has("scale_setter") {
            pick(rng, &["make", "resize", "stretch", "grow"])
        } else {
            pick(rng, &["move", "shift"])
        }
    } else {
        pick(rng, lexicon::SELECT_VERBS)
    };
    words.push(format!("{verb} the"));
    if has("scale_getter") {
        let sup = pick(rng, n.superlatives);
        let degree = lexicon::SUPERLATIVES.iter().find(|(w, _)| *w == sup).map(|(_, d)| *d).expect("lexicon superlative");
        let (axis, value) = lexicon::degree_argument(degree).expect("degree phrase");
        words.push(sup.to_string());
        push(&mut records, "scale_getter", vec![Arg::new(axis.as_str(), value)]);
    }
    words.push(noun.to_string());
    if has("select_by_tag") {
        let street = pick(rng, n.streets);
        words.push(format!("on {street}"));
        push(&mut records, "select_by_tag", vec![Arg::new("tag", Value::Str(street.to_string()))]);
    }
    if has("range") {
        let (a, b) = (*RANGE_STARTS.choose(rng).unwrap(), *RANGE_ENDS.choose(rng).unwrap());
        words.push(format!("between {a} and {b} meters from the center"));
        push(
            &mut records,
            "range",
            vec![Arg::new("start", Value::Num(a as f64)), Arg::new("end", Value::Num(b as f64))],
        );
    }
    if has("locate") {
        let p = *POINTS.choose(rng).unwrap();
        words.push(format!("closest to point {} {} {}", p[0], p[1], p[2]));
        push(
            &mut records,
            "locate",
            ["x", "y", "z"].iter().zip(p).map(|(k, v)| Arg::new(*k, Value::Num(v as f64))).collect(),
        );
    }
    if has("scale_setter") {
        let span = format!("{} times {}", pick(rng, FACTORS), pick(rng, n.resize));
        let [x, y, z] = lexicon::resize_factors(&span).expect("resize phrase");
        words.push(span);
        push(
            &mut records,
            "scale_setter",
            vec![Arg::new("x", Value::Num(x)), Arg::new("y", Value::Num(y)), Arg::new("z", Value::Num(z))],
        );
    }
    if has("translate") {
        let span = format!("{} meters {}", DISTANCES.choose(rng).unwrap(), lexicon::DIRECTIONS.choose(rng).unwrap().0);
        let offset = lexicon::movement_offset(&span).expect("movement phrase");
        if has("scale_setter") {
            let pronoun = if single { "it" } else { "them" };
            words.push(format!("and move {pronoun}"));
        }
        words.push(span);
        push(&mut records, "translate", vec![Arg::new("offset", Value::Vector(offset))]);
    }
    records.sort_by_key(|(order, _)| *order);
    (words.join(" "), records.into_iter().map(|(_, r)| r).collect())
}

/// Writes `count` samples for one sampled task. Each sample is a
/// `command:` line followed by its records; samples are separated by
/// [`SAMPLE_SEPARATOR`]. Unknown kinds and actions are ignored.
pub fn fill_templates(action_type: &str, kinds: &[String], actions: &[String], count: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kinds: Vec<EntityKind> = kinds.iter().filter_map(|k| k.parse().ok()).collect();
    let kinds = if kinds.is_empty() { vec![EntityKind::Building] } else { kinds };
    let planned = plan_actions(action_type, actions);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let kind = kinds[rng.gen_range(0..kinds.len())];
        // vary which of the planned clauses each sample uses
        let mut used: Vec<&str> = planned.clone();
        if used.len() > 1 && rng.gen_bool(0.5) {
            let keep_mutator = action_type == "mesh";
            let candidates: Vec<usize> = (0..used.len())
                .filter(|&i| !(keep_mutator && MUTATORS.contains(&used[i]) && used.iter().filter(|a| MUTATORS.contains(a)).count() == 1))
                .collect();
            if let Some(&i) = candidates.choose(&mut rng) {
                used.remove(i);
            }
        }
        if used.iter().all(|a| *a == "deselect_all") {
            used.insert(0, "select_by_tag");
        }
        let (command, records) = sentence(&mut rng, action_type, kind, &used);
        out.push(format!("command: {command}\n{}", serialize_t2(&records)));
    }
    out.join(SAMPLE_SEPARATOR)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::parse_t2;
    use crate::scene::builtin_registry;

    fn strings(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn samples_parse_and_are_reproducible() {
        let reg = builtin_registry();
        let text = fill_templates(
            "mesh",
            &strings(&["vehicle", "building"]),
            &strings(&["range", "translate", "select_by_tag", "deselect_all", "locate"]),
            12,
            7,
        );
        assert_eq!(text, fill_templates("mesh", &strings(&["vehicle", "building"]), &strings(&["range", "translate", "select_by_tag", "deselect_all", "locate"]), 12, 7));
        let samples: Vec<&str> = text.split(SAMPLE_SEPARATOR).collect();
        assert_eq!(samples.len(), 12);
        for s in samples {
            let (cmd, t2) = s.split_once('\n').unwrap();
            assert!(cmd.starts_with("command: "));
            let records = parse_t2(t2, &reg).unwrap();
            assert!(records.iter().any(|r| MUTATORS.contains(&r.call.action.as_str())), "{s}");
            assert!(records.len() <= MAX_CLAUSES);
        }
    }

    #[test]
    fn select_tasks_never_mutate() {
        let text = fill_templates("select", &strings(&["road"]), &strings(&["translate", "scale_setter"]), 5, 1);
        assert!(!text.contains("translate") && !text.contains("scale_setter"));
        assert!(text.contains("select_by_tag"));
    }
}
