//! Atomic calls on the fixture scene, footprints, and replay: two orderings
//! of a conflict-free plan end in the same world.

use v2a_core::scene::{builtin_registry, Arg, AtomicCall, EntityKind, Footprint, SceneState, Value};

fn main() {
    let registry = builtin_registry();
    let b = Some(EntityKind::Building);
    let v = Some(EntityKind::Vehicle);
    let plan = vec![
        AtomicCall::new("select_by_tag", vec![Arg::new("tag", Value::Str("main street".into()))], b),
        AtomicCall::new("translate", vec![Arg::new("offset", Value::Vector([0.0, 0.0, 5.0]))], v),
        AtomicCall::new("scale_setter", vec![Arg::new("x", Value::Num(1.0)), Arg::new("y", Value::Num(2.0)), Arg::new("z", Value::Num(1.0))], v),
    ];
    for call in &plan {
        let fp = Footprint::of(call, &registry).expect("registered");
        println!("{call}\n  reads {:?}\n  writes {:?}", fp.reads, fp.writes);
    }
    println!("disjoint: {}", Footprint::plan_is_disjoint(&plan, &registry));

    let run = |order: &[usize]| {
        let mut scene = SceneState::fixture();
        scene.advance_to(120);
        for &i in order {
            let applied = scene.apply_atomic(&registry, &plan[i]);
            println!("  {} -> {:?} {:?}", plan[i].action, applied.feedback.status, applied.result);
        }
        scene
    };
    let forward = run(&[0, 1, 2]);
    let backward = run(&[2, 1, 0]);
    println!("same world: {}", forward.entities == backward.entities);
    println!("history of the first run:");
    for h in &forward.history {
        println!("  frame {} {}", h.frame, h.call);
    }
}
