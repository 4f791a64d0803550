//! The simulated urban environment.
//!
//! A [`SceneState`] owns the entity store, the frame clock and the history of
//! applied atomic calls. It is the only thing in the crate that the
//! execution stage is allowed to mutate; every earlier stage is pure.
//!
//! Selection is scoped per entity kind. A kind is either *open* (no
//! selection has been made yet, every entity of the kind is a candidate) or
//! *narrowed* (only its selected entities are candidates). Selection-family
//! actions narrow, `deselect_all` re-opens.

mod actions;
mod footprint;

pub use actions::{
    builtin_registry, ActionFamily, ActionRegistry, Applied, Arg, AtomicActionSpec, AtomicCall, DuplicateAction, Effect,
    Axis, Feedback, FeedbackStatus, ParamSpec, ParamType, Value, ValueError, PARSE_FAILURE,
};
pub use footprint::{Field, Footprint};

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use thiserror::Error;

pub type Vec3 = [f64; 3];

pub const DEFAULT_FPS: u32 = 60;

/// The bundled city block: six buildings on three streets, two roads and
/// two vehicles.
pub const FIXTURE_SCENE: &str = include_str!("../../data/urban_main_street.json");

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("scene document is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("failed to read scene file {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("duplicate entity id `{0}`")]
    DuplicateId(String),
    #[error("entity `{id}`: {reason}")]
    InvalidEntity { id: String, reason: String },
}

/// The entity types available in the scene.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum EntityKind {
    Building,
    Road,
    Vehicle,
}

impl EntityKind {
    pub const ALL: [EntityKind; 3] = [EntityKind::Building, EntityKind::Road, EntityKind::Vehicle];

    pub fn as_str(self) -> &'static str {
        match self {
            EntityKind::Building => "building",
            EntityKind::Road => "road",
            EntityKind::Vehicle => "vehicle",
        }
    }
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown entity kind `{0}`")]
pub struct UnknownKind(pub String);

impl FromStr for EntityKind {
    type Err = UnknownKind;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "building" => Ok(EntityKind::Building),
            "road" => Ok(EntityKind::Road),
            "vehicle" => Ok(EntityKind::Vehicle),
            other => Err(UnknownKind(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entity {
    pub id: String,
    pub kind: EntityKind,
    /// Meters.
    pub position: Vec3,
    /// Axis-aligned extents in meters; `scale[1]` is the height.
    pub scale: Vec3,
    /// Degrees about the vertical axis.
    pub rotation: f64,
    pub tags: BTreeSet<String>,
    pub selected: bool,
}

impl Entity {
    pub fn has_tag(&self, tag: &str) -> bool {
        self.tags.contains(tag)
    }

    /// Euclidean distance of the position from the scene origin.
    pub fn distance_from_origin(&self) -> f64 {
        self.position.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

/// One applied atomic call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub frame: u64,
    pub call: AtomicCall,
    /// Identifier of the command that produced this call, if any.
    pub origin: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneState {
    pub entities: BTreeMap<String, Entity>,
    pub frame: u64,
    pub fps: u32,
    pub history: Vec<HistoryEntry>,
    /// Kinds whose selection has been narrowed since the last `deselect_all`.
    pub narrowed: BTreeSet<EntityKind>,
}

impl Default for SceneState {
    fn default() -> Self {
        Self {
            entities: BTreeMap::new(),
            frame: 0,
            fps: DEFAULT_FPS,
            history: Vec::new(),
            narrowed: BTreeSet::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneDocument {
    #[serde(default = "default_fps")]
    pub fps: u32,
    #[serde(default)]
    pub entities: Vec<EntityDocument>,
}

fn default_fps() -> u32 {
    DEFAULT_FPS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityDocument {
    pub id: String,
    pub kind: String,
    pub position: Vec3,
    pub scale: Vec3,
    #[serde(default)]
    pub rotation: f64,
    #[serde(default)]
    pub tags: Vec<String>,
}

impl SceneState {
    /// Parses a scene document. The scene starts at frame 0 with nothing selected.
    pub fn load(document: &str) -> Result<Self, SceneError> {
        let doc: SceneDocument = serde_json::from_str(document)?;
        Self::from_document(doc)
    }

    /// The bundled fixture scene.
    pub fn fixture() -> Self {
        Self::load(FIXTURE_SCENE).expect("bundled fixture is valid")
    }

    pub fn load_file(path: impl AsRef<Path>) -> Result<Self, SceneError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| SceneError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::load(&text)
    }

    pub fn from_document(doc: SceneDocument) -> Result<Self, SceneError> {
        if doc.fps == 0 {
            return Err(SceneError::InvalidEntity {
                id: "<scene>".into(),
                reason: "fps must be positive".into(),
            });
        }
        let mut entities = BTreeMap::new();
        for e in doc.entities {
            let invalid = |reason: String| SceneError::InvalidEntity {
                id: e.id.clone(),
                reason,
            };
            if e.id.is_empty() {
                return Err(invalid("empty id".into()));
            }
            let kind: EntityKind = e.kind.parse().map_err(|err: UnknownKind| invalid(err.to_string()))?;
            if e.scale.iter().any(|s| !s.is_finite() || *s <= 0.0) {
                return Err(invalid(format!("scale {:?} must be strictly positive", e.scale)));
            }
            if e.position.iter().chain(std::iter::once(&e.rotation)).any(|c| !c.is_finite()) {
                return Err(invalid("non-finite position or rotation".into()));
            }
            if entities.contains_key(&e.id) {
                return Err(SceneError::DuplicateId(e.id));
            }
            entities.insert(
                e.id.clone(),
                Entity {
                    id: e.id,
                    kind,
                    position: e.position,
                    scale: e.scale,
                    rotation: e.rotation,
                    tags: e.tags.into_iter().collect(),
                    selected: false,
                },
            );
        }
        Ok(Self {
            entities,
            fps: doc.fps,
            ..Self::default()
        })
    }

    pub fn to_document(&self) -> SceneDocument {
        SceneDocument {
            fps: self.fps,
            entities: self
                .entities
                .values()
                .map(|e| EntityDocument {
                    id: e.id.clone(),
                    kind: e.kind.to_string(),
                    position: e.position,
                    scale: e.scale,
                    rotation: e.rotation,
                    tags: e.tags.iter().cloned().collect(),
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.entities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Entity> {
        self.entities.get(id)
    }

    /// Ids of selected entities, in id order.
    pub fn selection(&self) -> Vec<String> {
        self.entities
            .values()
            .filter(|e| e.selected)
            .map(|e| e.id.clone())
            .collect()
    }

    pub fn advance_frames(&mut self, n: u64) {
        self.frame += n;
    }

    /// Moves the clock forward to `frame`; never moves it back.
    pub fn advance_to(&mut self, frame: u64) {
        self.frame = self.frame.max(frame);
    }

    /// Compares entity state, selection scopes, clock and fps. The history
    /// log is not part of the comparison.
    pub fn same_world(&self, other: &SceneState) -> bool {
        self.entities == other.entities
            && self.narrowed == other.narrowed
            && self.frame == other.frame
            && self.fps == other.fps
    }

    /// Ids of entities whose state differs between `self` and `other`,
    /// including entities present in only one of them.
    pub fn changed_entities(&self, other: &SceneState) -> BTreeSet<String> {
        let mut ids: BTreeSet<String> = BTreeSet::new();
        for (id, e) in &self.entities {
            if other.entities.get(id) != Some(e) {
                ids.insert(id.clone());
            }
        }
        for id in other.entities.keys() {
            if !self.entities.contains_key(id) {
                ids.insert(id.clone());
            }
        }
        ids
    }

    /// Candidate set for a call scoped to `kinds`: the selected entities of
    /// narrowed kinds plus every entity of open kinds.
    pub(crate) fn candidates(&self, kinds: &[EntityKind]) -> Vec<&Entity> {
        self.entities
            .values()
            .filter(|e| kinds.contains(&e.kind))
            .filter(|e| !self.narrowed.contains(&e.kind) || e.selected)
            .collect()
    }
}
