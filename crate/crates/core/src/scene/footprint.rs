//! Read/write footprints of atomic calls.
//!
//! Two calls commute when neither writes a cell the other reads or writes.
//! Cells are (kind, field) pairs; tags and ids are immutable and never part
//! of a footprint.

use super::actions::{ActionRegistry, AtomicCall, Effect};
use super::EntityKind;
use std::collections::BTreeSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Field {
    Selection,
    Position,
    Scale,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Footprint {
    pub reads: BTreeSet<(EntityKind, Field)>,
    pub writes: BTreeSet<(EntityKind, Field)>,
}

impl Footprint {
    /// `None` when the action is not registered.
    pub fn of(call: &AtomicCall, registry: &ActionRegistry) -> Option<Footprint> {
        let spec = registry.get(&call.action)?;
        let mut fp = Footprint::default();
        for kind in call.scope() {
            let (reads, writes): (&[Field], &[Field]) = match spec.effect {
                Effect::DeselectAll => (&[], &[Field::Selection]),
                Effect::SelectByTag => (&[Field::Selection], &[Field::Selection]),
                Effect::Range | Effect::Locate => {
                    (&[Field::Selection, Field::Position], &[Field::Selection])
                }
                Effect::ScaleGetter => (&[Field::Selection, Field::Scale], &[Field::Selection]),
                Effect::ScaleSetter => (&[Field::Selection, Field::Scale], &[Field::Scale]),
                Effect::Translate => (&[Field::Selection, Field::Position], &[Field::Position]),
            };
            fp.reads.extend(reads.iter().map(|f| (kind, *f)));
            fp.writes.extend(writes.iter().map(|f| (kind, *f)));
        }
        Some(fp)
    }

    pub fn conflicts_with(&self, other: &Footprint) -> bool {
        !self.writes.is_disjoint(&other.writes)
            || !self.writes.is_disjoint(&other.reads)
            || !other.writes.is_disjoint(&self.reads)
    }

    /// True when every pair of calls in the plan is conflict-free, so any
    /// ordering of the plan yields the same world.
    pub fn plan_is_disjoint(plan: &[AtomicCall], registry: &ActionRegistry) -> bool {
        let fps: Option<Vec<Footprint>> = plan.iter().map(|c| Footprint::of(c, registry)).collect();
        let Some(fps) = fps else { return false };
        fps.iter()
            .enumerate()
            .all(|(i, a)| fps[i + 1..].iter().all(|b| !a.conflicts_with(b)))
    }
}
