//! Vocabulary of the urban command language.
//!
//! The deterministic backend reads commands with this lexicon and the
//! template generator writes them with it. It also carries the phonetic
//! confusion pairs used to simulate speech-recognition errors.

use crate::scene::{Axis, EntityKind, Value};

/// Superlative word and the degree phrase the classifier extracts for it.
pub const SUPERLATIVES: &[(&str, &str)] = &[
    ("highest", "height"),
    ("tallest", "height"),
    ("lowest", "minimal height"),
    ("shortest", "minimal height"),
    ("widest", "width"),
    ("narrowest", "minimal width"),
    ("longest", "length"),
];

/// Comparative word and its dimension.
pub const COMPARATIVES: &[(&str, &str)] = &[("taller", "height"), ("wider", "width"), ("longer", "length")];

pub const KIND_WORDS: &[(&str, EntityKind)] = &[
    ("building", EntityKind::Building),
    ("buildings", EntityKind::Building),
    ("tower", EntityKind::Building),
    ("towers", EntityKind::Building),
    ("house", EntityKind::Building),
    ("houses", EntityKind::Building),
    ("road", EntityKind::Road),
    ("roads", EntityKind::Road),
    ("vehicle", EntityKind::Vehicle),
    ("vehicles", EntityKind::Vehicle),
    ("car", EntityKind::Vehicle),
    ("cars", EntityKind::Vehicle),
    ("bus", EntityKind::Vehicle),
    ("truck", EntityKind::Vehicle),
    ("trucks", EntityKind::Vehicle),
];

pub const STREETS: &[&str] = &["main street", "oak avenue", "harbor street", "park avenue"];
pub const STREET_SUFFIXES: &[&str] = &["street", "avenue"];

pub const DIRECTIONS: &[(&str, [f64; 3])] = &[
    ("east", [1.0, 0.0, 0.0]),
    ("west", [-1.0, 0.0, 0.0]),
    ("up", [0.0, 1.0, 0.0]),
    ("down", [0.0, -1.0, 0.0]),
    ("north", [0.0, 0.0, 1.0]),
    ("south", [0.0, 0.0, -1.0]),
];

/// Resize adjective and the axes it scales.
pub const RESIZE_WORDS: &[(&str, [bool; 3])] = &[
    ("taller", [false, true, false]),
    ("wider", [true, false, false]),
    ("longer", [false, false, true]),
    ("bigger", [true, true, true]),
];

pub const SELECT_VERBS: &[&str] = &["select", "find", "pick", "highlight", "show"];
pub const MESH_VERBS: &[&str] = &["make", "stretch", "resize", "move", "shift", "grow"];

const FUNCTION_WORDS: &[&str] = &[
    "the", "a", "on", "along", "of", "to", "and", "then", "it", "them", "all", "me", "from",
    "between", "within", "meters", "times", "than", "point", "center", "origin", "selection",
    "everything", "by", "at", "closest", "nearest", "clear", "deselect", "please", "that", "are",
    "is", "which",
];

/// `(supposed, wrongly pronounced)` pairs a speech recognizer confuses.
/// Every wrong token is outside the command vocabulary.
pub const CONFUSIONS: &[(&str, &str)] = &[
    ("building", "beauty"),
    ("buildings", "beauties"),
    ("main", "mean"),
    ("street", "sea"),
    ("avenue", "haven"),
    ("tallest", "talus"),
    ("highest", "heist"),
    ("lowest", "loess"),
    ("widest", "wildest"),
    ("road", "rode"),
    ("roads", "rhodes"),
    ("car", "core"),
    ("cars", "cores"),
    ("tower", "tour"),
    ("towers", "tours"),
    ("oak", "oke"),
    ("harbor", "harper"),
    ("park", "bark"),
    ("meters", "matters"),
    ("times", "dimes"),
    ("taller", "tailor"),
    ("wider", "whiter"),
    ("longer", "lounger"),
    ("east", "yeast"),
    ("west", "vest"),
    ("north", "forth"),
    ("south", "mouth"),
    ("closest", "closet"),
    ("nearest", "dearest"),
    ("center", "centaur"),
    ("select", "collect"),
    ("move", "groove"),
    ("stretch", "sketch"),
];

fn lookup<'a, T: Copy>(table: &'a [(&'a str, T)], word: &str) -> Option<T> {
    table.iter().find(|(w, _)| *w == word).map(|(_, v)| *v)
}

pub fn kind_of_word(word: &str) -> Option<EntityKind> {
    lookup(KIND_WORDS, word)
}

pub fn parse_number(token: &str) -> Option<f64> {
    let v: f64 = token.parse().ok()?;
    v.is_finite().then_some(v)
}

/// Whether the token belongs to the command language.
pub fn is_known(token: &str) -> bool {
    parse_number(token).is_some()
        || FUNCTION_WORDS.contains(&token)
        || SELECT_VERBS.contains(&token)
        || MESH_VERBS.contains(&token)
        || STREET_SUFFIXES.contains(&token)
        || STREETS.iter().any(|s| s.split(' ').any(|w| w == token))
        || lookup(SUPERLATIVES, token).is_some()
        || lookup(COMPARATIVES, token).is_some()
        || lookup(KIND_WORDS, token).is_some()
        || lookup(DIRECTIONS, token).is_some()
        || lookup(RESIZE_WORDS, token).is_some()
}

pub fn tokens(text: &str) -> Vec<String> {
    text.split_whitespace().map(str::to_lowercase).collect()
}

/// First entity-kind word in the text.
pub fn detect_kind(text: &str) -> Option<EntityKind> {
    tokens(text).iter().find_map(|t| kind_of_word(t))
}

/// Tokens outside the command vocabulary, in order of appearance.
pub fn unknown_tokens(text: &str) -> Vec<String> {
    tokens(text).into_iter().filter(|t| !is_known(t)).collect()
}

/// A recognized phrase of a command and the slot it fills.
#[derive(Debug, Clone, PartialEq)]
pub struct Clause {
    pub slot: &'static str,
    pub span: String,
    /// Token index where the phrase starts.
    pub start: usize,
}

/// Finds the first phrase for each slot, in order of appearance.
pub fn find_clauses(text: &str) -> Vec<Clause> {
    let t = tokens(text);
    let at = |i: usize| t.get(i).map(String::as_str).unwrap_or("");
    let num = |i: usize| parse_number(at(i)).map(|_| at(i).to_string());
    let mut clauses: Vec<Clause> = Vec::new();
    let push = |clauses: &mut Vec<Clause>, slot: &'static str, span: String, start: usize| {
        if !clauses.iter().any(|c| c.slot == slot) {
            clauses.push(Clause { slot, span, start });
        }
    };

    let mut i = 0;
    while i < t.len() {
        let w = at(i);
        if let Some(degree) = lookup(SUPERLATIVES, w) {
            push(&mut clauses, "superlative degree", degree.to_string(), i);
        } else if let (Some(dim), "than", Some(n)) = (lookup(COMPARATIVES, w), at(i + 1), num(i + 2)) {
            push(&mut clauses, "superlative degree", format!("{dim} above {n}"), i);
            i += 2;
        } else if w == "on" || w == "along" {
            if let Some(j) = (i + 2..=i + 3).find(|j| STREET_SUFFIXES.contains(&at(*j))) {
                push(&mut clauses, "location", t[i + 1..=j].join(" "), i);
                i = j;
            }
        } else if let ("between", Some(a), "and", Some(b), "meters") = (w, num(i + 1), at(i + 2), num(i + 3), at(i + 4)) {
            push(&mut clauses, "distance", format!("{a} to {b} meters from center"), i);
            i += 4;
        } else if let ("within", Some(a), "to", Some(b), "meters") = (w, num(i + 1), at(i + 2), num(i + 3), at(i + 4)) {
            push(&mut clauses, "distance", format!("{a} to {b} meters from center"), i);
            i += 4;
        } else if (w == "closest" || w == "nearest") && at(i + 1) == "to" {
            let k = if at(i + 2) == "point" { i + 3 } else { i + 2 };
            if let (Some(x), Some(y), Some(z)) = (num(k), num(k + 1), num(k + 2)) {
                push(&mut clauses, "proximity", format!("closest to {x} {y} {z}"), i);
                i = k + 2;
            }
        } else if (w == "clear" && at(i + 1) == "the" && at(i + 2) == "selection")
            || (w == "deselect" && matches!(at(i + 1), "everything" | "all"))
        {
            push(&mut clauses, "reset", "clear the selection".to_string(), i);
        } else if let (Some(n), "times", Some(_)) = (num(i), at(i + 1), lookup(RESIZE_WORDS, at(i + 2))) {
            push(&mut clauses, "resize", format!("{n} times {}", at(i + 2)), i);
            i += 2;
        } else if let (Some(d), "meters", Some(_)) = (num(i), at(i + 1), lookup(DIRECTIONS, at(i + 2))) {
            push(&mut clauses, "movement", format!("{d} meters {}", at(i + 2)), i);
            i += 2;
        }
        i += 1;
    }
    clauses
}

/// `select` unless the command manipulates meshes.
pub fn action_type(text: &str, clauses: &[Clause]) -> &'static str {
    let mesh_clause = clauses.iter().any(|c| c.slot == "resize" || c.slot == "movement");
    let mesh_verb = tokens(text).iter().any(|t| MESH_VERBS.contains(&t.as_str()));
    if mesh_clause || mesh_verb {
        "mesh"
    } else {
        "select"
    }
}

/// Axis and value for a superlative-degree span: `height` → (y, inf),
/// `minimal width` → (x, -inf), `length above 30` → (z, 30).
pub fn degree_argument(span: &str) -> Option<(Axis, Value)> {
    let axis_of = |dim: &str| match dim {
        "height" => Some(Axis::Y),
        "width" => Some(Axis::X),
        "length" => Some(Axis::Z),
        _ => None,
    };
    let words: Vec<&str> = span.split_whitespace().collect();
    match words.as_slice() {
        [dim] => Some((axis_of(dim)?, Value::Inf)),
        ["minimal", dim] => Some((axis_of(dim)?, Value::NegInf)),
        [dim, "above", n] => Some((axis_of(dim)?, Value::Num(parse_number(n)?))),
        _ => None,
    }
}

/// Factors for `N times taller` style spans.
pub fn resize_factors(span: &str) -> Option<[f64; 3]> {
    let words: Vec<&str> = span.split_whitespace().collect();
    let (n, adj) = match words.as_slice() {
        [n, "times", adj] => (parse_number(n)?, *adj),
        _ => return None,
    };
    let axes = lookup(RESIZE_WORDS, adj)?;
    Some(axes.map(|on| if on { n } else { 1.0 }))
}

/// Offset for `D meters east` style spans.
pub fn movement_offset(span: &str) -> Option<[f64; 3]> {
    let words: Vec<&str> = span.split_whitespace().collect();
    let (d, dir) = match words.as_slice() {
        [d, "meters", dir] => (parse_number(d)?, *dir),
        _ => return None,
    };
    let unit = lookup(DIRECTIONS, dir)?;
    Some(unit.map(|u| if u == 0.0 { 0.0 } else { u * d }))
}

/// Every number in the span, in order.
pub fn numbers(span: &str) -> Vec<f64> {
    span.split_whitespace().filter_map(parse_number).collect()
}
