use super::{Entity, EntityKind, HistoryEntry, SceneState, Vec3};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Prefix of every execution failure message.
pub const PARSE_FAILURE: &str = "illegal parse of the action arguments";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }

    pub fn parse(s: &str) -> Option<Axis> {
        match s {
            "x" => Some(Axis::X),
            "y" => Some(Axis::Y),
            "z" => Some(Axis::Z),
            _ => None,
        }
    }
}

/// Semantic type of an atomic action parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParamType {
    Number,
    NumberOrInf,
    #[serde(rename = "string")]
    Text,
    EntityKind,
    #[serde(rename = "3-vector")]
    Vector,
}

impl ParamType {
    fn accepts(self, value: &Value) -> bool {
        matches!(
            (self, value),
            (ParamType::Number, Value::Num(_))
                | (ParamType::NumberOrInf, Value::Num(_) | Value::Inf | Value::NegInf)
                | (ParamType::Text, Value::Str(_))
                | (ParamType::EntityKind, Value::Kind(_))
                | (ParamType::Vector, Value::Vector(_))
        )
    }

    fn describe(self) -> &'static str {
        match self {
            ParamType::Number => "a number",
            ParamType::NumberOrInf => "a number or inf sentinel",
            ParamType::Text => "a string",
            ParamType::EntityKind => "an entity kind",
            ParamType::Vector => "a 3-vector",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub name: String,
    pub ty: ParamType,
    /// The argument key names an axis (`x`, `y` or `z`) instead of the
    /// parameter name, as in `y: inf`.
    #[serde(default)]
    pub axis_keyed: bool,
}

impl ParamSpec {
    fn new(name: &str, ty: ParamType) -> Self {
        Self {
            name: name.to_string(),
            ty,
            axis_keyed: false,
        }
    }

    fn axis(ty: ParamType) -> Self {
        Self {
            name: "axis".to_string(),
            ty,
            axis_keyed: true,
        }
    }
}

/// Where an action sits in a plan: resets run before filters, filters
/// before pickers, pickers before mutators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActionFamily {
    Reset,
    Filter,
    Pick,
    Mutate,
}

impl ActionFamily {
    pub fn is_selection(self) -> bool {
        matches!(self, ActionFamily::Filter | ActionFamily::Pick)
    }
}

/// Engine semantics behind a registry entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Effect {
    Range,
    Locate,
    ScaleGetter,
    ScaleSetter,
    Translate,
    SelectByTag,
    DeselectAll,
}

impl Effect {
    pub fn family(self) -> ActionFamily {
        match self {
            Effect::DeselectAll => ActionFamily::Reset,
            Effect::Range | Effect::SelectByTag => ActionFamily::Filter,
            Effect::Locate | Effect::ScaleGetter => ActionFamily::Pick,
            Effect::ScaleSetter | Effect::Translate => ActionFamily::Mutate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomicActionSpec {
    pub name: String,
    pub params: Vec<ParamSpec>,
    pub doc: String,
    pub effect: Effect,
    /// Set when the registry is embedded by the pipeline.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<Vec<f64>>,
}

impl AtomicActionSpec {
    pub fn arity(&self) -> usize {
        self.params.len()
    }

    pub fn family(&self) -> ActionFamily {
        self.effect.family()
    }

    /// `name(p1, p2, ...)` as shown to agents.
    pub fn signature(&self) -> String {
        let params: Vec<String> = self
            .params
            .iter()
            .map(|p| {
                if p.axis_keyed {
                    "x|y|z".to_string()
                } else {
                    p.name.clone()
                }
            })
            .collect();
        format!("{}({})", self.name, params.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("atomic action `{0}` is already registered")]
pub struct DuplicateAction(pub String);

/// The set of atomic actions the engine exposes, keyed by name.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ActionRegistry {
    specs: BTreeMap<String, AtomicActionSpec>,
}

impl ActionRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, spec: AtomicActionSpec) -> Result<(), DuplicateAction> {
        if self.specs.contains_key(&spec.name) {
            return Err(DuplicateAction(spec.name));
        }
        self.specs.insert(spec.name.clone(), spec);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&AtomicActionSpec> {
        self.specs.get(name)
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut AtomicActionSpec> {
        self.specs.get_mut(name)
    }

    /// Specs in name order.
    pub fn iter(&self) -> impl Iterator<Item = &AtomicActionSpec> {
        self.specs.values()
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut AtomicActionSpec> {
        self.specs.values_mut()
    }

    pub fn names(&self) -> Vec<&str> {
        self.specs.keys().map(String::as_str).collect()
    }

    pub fn len(&self) -> usize {
        self.specs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.specs.is_empty()
    }

    pub fn is_embedded(&self) -> bool {
        !self.specs.is_empty() && self.specs.values().all(|s| s.embedding.is_some())
    }

    /// Keeps only the named actions.
    pub fn subset<'a>(&self, names: impl IntoIterator<Item = &'a str>) -> ActionRegistry {
        let keep: BTreeSet<&str> = names.into_iter().collect();
        ActionRegistry {
            specs: self
                .specs
                .iter()
                .filter(|(k, _)| keep.contains(k.as_str()))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }
}

/// The canonical selection and mesh-manipulation actions.
///
/// The doc strings are what the extraction matcher embeds, so they carry the
/// vocabulary a user would use for each action.
pub fn builtin_registry() -> ActionRegistry {
    use ParamType::*;
    let specs = vec![
        AtomicActionSpec {
            name: "deselect_all".into(),
            params: vec![],
            doc: "clear and reset the selection: deselect every entity of the target kind so \
                  nothing remains selected"
                .into(),
            effect: Effect::DeselectAll,
            embedding: None,
        },
        AtomicActionSpec {
            name: "locate".into(),
            params: vec![
                ParamSpec::new("x", Number),
                ParamSpec::new("y", Number),
                ParamSpec::new("z", Number),
            ],
            doc: "locate the single entity nearest or closest to a point given by x y z \
                  coordinates; proximity search around a position"
                .into(),
            effect: Effect::Locate,
            embedding: None,
        },
        AtomicActionSpec {
            name: "range".into(),
            params: vec![ParamSpec::new("start", Number), ParamSpec::new("end", Number)],
            doc: "keep entities whose distance from the scene origin or center lies between \
                  start and end meters; a distance range filter"
                .into(),
            effect: Effect::Range,
            embedding: None,
        },
        AtomicActionSpec {
            name: "scale_getter".into(),
            params: vec![ParamSpec::axis(NumberOrInf)],
            doc: "get entities by the superlative degree of their scale along one axis, keyed \
                  x for width, y for height, z for length; inf picks the highest tallest \
                  widest or longest, -inf picks the minimal lowest one, a number keeps \
                  entities whose extent is above that threshold"
                .into(),
            effect: Effect::ScaleGetter,
            embedding: None,
        },
        AtomicActionSpec {
            name: "scale_setter".into(),
            params: vec![
                ParamSpec::new("x", Number),
                ParamSpec::new("y", Number),
                ParamSpec::new("z", Number),
            ],
            doc: "resize or stretch the selected entities by multiplying their extents with x \
                  y z factors, making them times taller wider longer or bigger"
                .into(),
            effect: Effect::ScaleSetter,
            embedding: None,
        },
        AtomicActionSpec {
            name: "select_by_tag".into(),
            params: vec![ParamSpec::new("tag", Text)],
            doc: "select entities tagged with a location such as a street or avenue name".into(),
            effect: Effect::SelectByTag,
            embedding: None,
        },
        AtomicActionSpec {
            name: "translate".into(),
            params: vec![ParamSpec::new("offset", Vector)],
            doc: "move or translate the selected entities by adding an offset vector in meters; \
                  movement east west up down north or south"
                .into(),
            effect: Effect::Translate,
            embedding: None,
        },
    ];
    let mut registry = ActionRegistry::new();
    for spec in specs {
        registry.register(spec).expect("builtin names are unique");
    }
    registry
}

/// An argument value. Non-text forms are first class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Value {
    Num(f64),
    /// Extremal along the keyed axis (maximum).
    Inf,
    /// Minimal along the keyed axis.
    NegInf,
    Str(String),
    Vector(Vec3),
    Kind(EntityKind),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid argument value `{0}`")]
pub struct ValueError(pub String);

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Num(n) => write!(f, "num:{n}"),
            Value::Inf => f.write_str("inf"),
            Value::NegInf => f.write_str("-inf"),
            Value::Str(s) => write!(f, "str:{}", escape(s)),
            Value::Vector([x, y, z]) => write!(f, "vec:{x},{y},{z}"),
            Value::Kind(k) => write!(f, "kind:{k}"),
        }
    }
}

fn parse_finite(s: &str) -> Option<f64> {
    let v: f64 = s.parse().ok()?;
    v.is_finite().then_some(v)
}

impl FromStr for Value {
    type Err = ValueError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ValueError(s.to_string());
        if s == "inf" {
            return Ok(Value::Inf);
        }
        if s == "-inf" {
            return Ok(Value::NegInf);
        }
        let (sigil, body) = s.split_once(':').ok_or_else(err)?;
        match sigil {
            "num" => parse_finite(body).map(Value::Num).ok_or_else(err),
            "str" => unescape(body).map(Value::Str).ok_or_else(err),
            "vec" => {
                let parts: Vec<f64> = body
                    .split(',')
                    .map(parse_finite)
                    .collect::<Option<_>>()
                    .ok_or_else(err)?;
                match parts.as_slice() {
                    [x, y, z] => Ok(Value::Vector([*x, *y, *z])),
                    _ => Err(err()),
                }
            }
            "kind" => body.parse().map(Value::Kind).map_err(|_| err()),
            _ => Err(err()),
        }
    }
}

impl From<Value> for String {
    fn from(v: Value) -> String {
        v.to_string()
    }
}

impl TryFrom<String> for Value {
    type Error = ValueError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

fn unescape(s: &str) -> Option<String> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next()? {
                '\\' => out.push('\\'),
                'n' => out.push('\n'),
                'r' => out.push('\r'),
                _ => return None,
            }
        } else {
            out.push(c);
        }
    }
    Some(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Arg {
    pub key: String,
    pub value: Value,
}

impl Arg {
    pub fn new(key: impl Into<String>, value: Value) -> Self {
        Self {
            key: key.into(),
            value,
        }
    }
}

/// A call to a registered atomic action. Arity is checked when the call is
/// applied, not when it is built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomicCall {
    pub action: String,
    pub args: Vec<Arg>,
    /// `None` addresses every kind.
    pub target_kind: Option<EntityKind>,
}

impl AtomicCall {
    pub fn new(action: impl Into<String>, args: Vec<Arg>, target_kind: Option<EntityKind>) -> Self {
        Self {
            action: action.into(),
            args,
            target_kind,
        }
    }

    pub(crate) fn scope(&self) -> Vec<EntityKind> {
        match self.target_kind {
            Some(k) => vec![k],
            None => EntityKind::ALL.to_vec(),
        }
    }
}

impl fmt::Display for AtomicCall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.action)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}={}", a.key, a.value)?;
        }
        f.write_str(")")?;
        match self.target_kind {
            Some(k) => write!(f, " on {k}"),
            None => f.write_str(" on all"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeedbackStatus {
    Pass,
    Fail,
}

/// Environment feedback for one execution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Feedback {
    pub status: FeedbackStatus,
    /// Empty iff the status is pass.
    pub error_message: String,
    pub frames_consumed: u64,
}

impl Feedback {
    pub fn pass(frames_consumed: u64) -> Self {
        Self {
            status: FeedbackStatus::Pass,
            error_message: String::new(),
            frames_consumed,
        }
    }

    pub fn fail(message: impl Into<String>, frames_consumed: u64) -> Self {
        let mut error_message = message.into();
        if error_message.is_empty() {
            error_message = "execution failed".into();
        }
        Self {
            status: FeedbackStatus::Fail,
            error_message,
            frames_consumed,
        }
    }

    pub fn is_pass(&self) -> bool {
        self.status == FeedbackStatus::Pass
    }
}

/// Outcome of [`SceneState::apply_atomic`].
#[derive(Debug, Clone, PartialEq)]
pub struct Applied {
    pub feedback: Feedback,
    /// Entities the call selected or modified, in id order.
    pub result: Vec<String>,
}

fn fail(detail: String) -> Applied {
    Applied {
        feedback: Feedback::fail(format!("{PARSE_FAILURE}: {detail}"), 0),
        result: Vec::new(),
    }
}

fn num(value: &Value) -> f64 {
    match value {
        Value::Num(n) => *n,
        _ => unreachable!("validated as number"),
    }
}

/// Checks the call against its action spec; returns that spec on success and the
/// failure detail otherwise.
fn validate<'r>(registry: &'r ActionRegistry, call: &AtomicCall) -> Result<&'r AtomicActionSpec, String> {
    let spec = registry
        .get(&call.action)
        .ok_or_else(|| format!("unknown atomic action `{}`", call.action))?;
    if call.args.len() != spec.arity() {
        return Err(format!(
            "`{}` expects {} argument(s), got {} (arity mismatch)",
            spec.name,
            spec.arity(),
            call.args.len()
        ));
    }
    for (j, (arg, param)) in call.args.iter().zip(&spec.params).enumerate() {
        let position = j + 1;
        if param.axis_keyed {
            if Axis::parse(&arg.key).is_none() {
                return Err(format!(
                    "argument {position} of `{}` must be keyed by axis x, y or z, got `{}`",
                    spec.name, arg.key
                ));
            }
        } else if arg.key != param.name {
            return Err(format!(
                "argument {position} of `{}` must be `{}`, got `{}`",
                spec.name, param.name, arg.key
            ));
        }
        if matches!(arg.value, Value::Inf | Value::NegInf) && param.ty != ParamType::NumberOrInf {
            return Err(format!(
                "inf sentinel not accepted by argument {position} (`{}`) of `{}`",
                param.name, spec.name
            ));
        }
        if !param.ty.accepts(&arg.value) {
            return Err(format!(
                "argument {position} (`{}`) of `{}` must be {}, got `{}`",
                param.name,
                spec.name,
                param.ty.describe(),
                arg.value
            ));
        }
    }
    if spec.effect == Effect::ScaleSetter {
        if let Some(bad) = call.args.iter().find(|a| num(&a.value) <= 0.0) {
            return Err(format!(
                "scale factor `{}` of `{}` must be positive",
                bad.key, spec.name
            ));
        }
    }
    Ok(spec)
}

/// Lowest id wins ties; candidates arrive in id order.
fn extremal<'a>(candidates: &[&'a Entity], key: impl Fn(&Entity) -> f64, want_max: bool) -> Option<&'a Entity> {
    let mut best: Option<&Entity> = None;
    for e in candidates {
        let better = match best {
            None => true,
            Some(b) => {
                if want_max {
                    key(e) > key(b)
                } else {
                    key(e) < key(b)
                }
            }
        };
        if better {
            best = Some(e);
        }
    }
    best
}

impl SceneState {
    /// Applies one atomic call. On failure the scene is left untouched.
    pub fn apply_atomic(&mut self, registry: &ActionRegistry, call: &AtomicCall) -> Applied {
        self.apply_atomic_from(registry, call, None)
    }

    /// Like [`SceneState::apply_atomic`], recording `origin` in the history.
    pub fn apply_atomic_from(
        &mut self,
        registry: &ActionRegistry,
        call: &AtomicCall,
        origin: Option<&str>,
    ) -> Applied {
        let spec = match validate(registry, call) {
            Ok(spec) => spec,
            Err(detail) => return fail(detail),
        };
        let scope = call.scope();
        let candidates = self.candidates(&scope);
        let arg = |i: usize| &call.args[i].value;

        let result: Vec<String> = match spec.effect {
            Effect::DeselectAll => Vec::new(),
            Effect::SelectByTag => {
                let tag = match arg(0) {
                    Value::Str(s) => s.as_str(),
                    _ => unreachable!(),
                };
                candidates.iter().filter(|e| e.has_tag(tag)).map(|e| e.id.clone()).collect()
            }
            Effect::Range => {
                let (start, end) = (num(arg(0)), num(arg(1)));
                candidates
                    .iter()
                    .filter(|e| {
                        let d = e.distance_from_origin();
                        d >= start && d <= end
                    })
                    .map(|e| e.id.clone())
                    .collect()
            }
            Effect::Locate => {
                let p = [num(arg(0)), num(arg(1)), num(arg(2))];
                let dist = |e: &Entity| {
                    (0..3).map(|i| (e.position[i] - p[i]).powi(2)).sum::<f64>()
                };
                extremal(&candidates, dist, false).map(|e| e.id.clone()).into_iter().collect()
            }
            Effect::ScaleGetter => {
                let axis = Axis::parse(&call.args[0].key).expect("validated axis").index();
                match arg(0) {
                    Value::Inf => extremal(&candidates, |e| e.scale[axis], true)
                        .map(|e| e.id.clone())
                        .into_iter()
                        .collect(),
                    Value::NegInf => extremal(&candidates, |e| e.scale[axis], false)
                        .map(|e| e.id.clone())
                        .into_iter()
                        .collect(),
                    Value::Num(threshold) => candidates
                        .iter()
                        .filter(|e| e.scale[axis] >= *threshold)
                        .map(|e| e.id.clone())
                        .collect(),
                    _ => unreachable!(),
                }
            }
            Effect::ScaleSetter | Effect::Translate => {
                candidates.iter().map(|e| e.id.clone()).collect()
            }
        };

        match spec.family() {
            ActionFamily::Reset => {
                for e in self.entities.values_mut().filter(|e| scope.contains(&e.kind)) {
                    e.selected = false;
                }
                for k in &scope {
                    self.narrowed.remove(k);
                }
            }
            ActionFamily::Filter | ActionFamily::Pick => {
                let chosen: BTreeSet<&String> = result.iter().collect();
                for e in self.entities.values_mut().filter(|e| scope.contains(&e.kind)) {
                    e.selected = chosen.contains(&e.id);
                }
                self.narrowed.extend(scope.iter().copied());
            }
            ActionFamily::Mutate => {
                for id in &result {
                    let e = self.entities.get_mut(id).expect("candidate exists");
                    if spec.effect == Effect::ScaleSetter {
                        for i in 0..3 {
                            e.scale[i] *= num(arg(i));
                        }
                    } else {
                        let offset = match arg(0) {
                            Value::Vector(v) => *v,
                            _ => unreachable!(),
                        };
                        for (p, d) in e.position.iter_mut().zip(offset) {
                            *p += d;
                        }
                    }
                }
            }
        }

        self.history.push(HistoryEntry {
            frame: self.frame,
            call: call.clone(),
            origin: origin.map(str::to_string),
        });
        Applied {
            feedback: Feedback::pass(0),
            result,
        }
    }
}
