use serde::{Deserialize, Serialize};

/// One argument slot of an action type.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slot {
    pub name: String,
    /// Instruction given to the classifier for this slot; `{object}` is
    /// replaced by the entity the command talks about.
    pub hint: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionSchema {
    pub action_type: String,
    pub slots: Vec<Slot>,
    pub explanation: String,
}

impl ActionSchema {
    /// 1-based slot lookup.
    pub fn slot(&self, index: usize) -> Option<&Slot> {
        index.checked_sub(1).and_then(|i| self.slots.get(i))
    }

    pub fn slot_index(&self, name: &str) -> Option<usize> {
        self.slots.iter().position(|s| s.name == name).map(|i| i + 1)
    }
}

fn slot(name: &str, hint: &str) -> Slot {
    Slot {
        name: name.into(),
        hint: hint.into(),
    }
}

fn selection_slots() -> Vec<Slot> {
    vec![
        slot("superlative degree", "if applicable, extract superlative degree of \"{object}\""),
        slot("location", "if applicable, extract location of \"{object}\""),
        slot("distance", "if applicable, extract the distance range of \"{object}\" from the center"),
        slot("proximity", "if applicable, extract the point \"{object}\" is closest to"),
        slot("reset", "if applicable, extract the request to clear the selection"),
    ]
}

/// The registered action types.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemaSet {
    schemas: Vec<ActionSchema>,
}

impl Default for SchemaSet {
    /// `select` and `mesh`.
    fn default() -> Self {
        let mut mesh_slots = selection_slots();
        mesh_slots.push(slot("resize", "if applicable, extract how \"{object}\" is resized"));
        mesh_slots.push(slot("movement", "if applicable, extract how far and where \"{object}\" moves"));
        Self {
            schemas: vec![
                ActionSchema {
                    action_type: "select".into(),
                    slots: selection_slots(),
                    explanation: "choosing entities in the scene by their size, location, distance \
                                  or proximity without changing them"
                        .into(),
                },
                ActionSchema {
                    action_type: "mesh".into(),
                    slots: mesh_slots,
                    explanation: "manipulating the mesh of chosen entities by resizing, stretching \
                                  or moving them"
                        .into(),
                },
            ],
        }
    }
}

impl SchemaSet {
    pub fn new(schemas: Vec<ActionSchema>) -> Self {
        Self { schemas }
    }

    pub fn get(&self, action_type: &str) -> Option<&ActionSchema> {
        self.schemas.iter().find(|s| s.action_type == action_type)
    }

    pub fn iter(&self) -> impl Iterator<Item = &ActionSchema> {
        self.schemas.iter()
    }

    pub fn action_types(&self) -> Vec<&str> {
        self.schemas.iter().map(|s| s.action_type.as_str()).collect()
    }

    pub fn len(&self) -> usize {
        self.schemas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.schemas.is_empty()
    }
}
