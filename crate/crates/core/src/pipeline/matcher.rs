//! Nearest-documentation matching of spans to atomic actions.
//!
//! Documentation embeddings are computed once per registry; each span is
//! embedded on the fly and compared by cosine against every spec. The scan
//! is exhaustive so the result is always the exact argmax.

use super::backend::{AgentBackend, BackendError};
use crate::scene::{ActionRegistry, AtomicActionSpec};
use std::collections::BTreeMap;
use thiserror::Error;

const STOPWORDS: &[&str] = &[
    "a", "an", "and", "are", "as", "at", "be", "by", "each", "for", "from", "in", "is", "it", "its", "of", "on",
    "or", "the", "to", "with",
];

#[derive(Debug, Error)]
pub enum MatchError {
    #[error("atomic action registry is empty")]
    EmptyRegistry,
    #[error("`{0}` has no embedding; embed the registry first")]
    NotEmbedded(String),
    #[error(transparent)]
    Backend(#[from] BackendError),
}

/// Lower-cased alphanumeric words minus stopwords.
pub fn terms(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_ascii_alphanumeric() && c != '_')
        .filter(|w| !w.is_empty())
        .map(str::to_ascii_lowercase)
        .filter(|w| !STOPWORDS.contains(&w.as_str()))
        .collect()
}

/// Term-frequency vectors over a fixed vocabulary, L2-normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct TermFrequencyEmbedder {
    vocab: BTreeMap<String, usize>,
}

impl TermFrequencyEmbedder {
    /// Vocabulary = union of the terms of `docs`, in sorted order.
    pub fn from_docs<'a>(docs: impl IntoIterator<Item = &'a str>) -> Self {
        let mut words: Vec<String> = docs.into_iter().flat_map(terms).collect();
        words.sort();
        words.dedup();
        Self {
            vocab: words.into_iter().enumerate().map(|(i, w)| (w, i)).collect(),
        }
    }

    pub fn for_registry(registry: &ActionRegistry) -> Self {
        Self::from_docs(registry.iter().map(|s| s.doc.as_str()))
    }

    pub fn dim(&self) -> usize {
        self.vocab.len()
    }

    /// Out-of-vocabulary words are ignored; a text with no known word maps
    /// to the zero vector.
    pub fn embed(&self, text: &str) -> Vec<f64> {
        let mut v = vec![0.0; self.vocab.len()];
        for t in terms(text) {
            if let Some(&i) = self.vocab.get(&t) {
                v[i] += 1.0;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            v.iter_mut().for_each(|x| *x /= norm);
        }
        v
    }
}

/// Cosine similarity; 0 when either side is the zero vector.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Sets every spec's embedding to `backend.embed(doc)`.
pub fn embed_registry(registry: &mut ActionRegistry, backend: &dyn AgentBackend) -> Result<(), BackendError> {
    for spec in registry.iter_mut() {
        spec.embedding = Some(backend.embed(&spec.doc)?);
    }
    tracing::debug!(actions = registry.len(), "registry embedded");
    Ok(())
}

/// Every spec with its cosine against `span`, best first; equal scores go
/// to the lexicographically smaller name.
pub fn rank_atomic(
    span: &str,
    registry: &ActionRegistry,
    backend: &dyn AgentBackend,
) -> Result<Vec<(String, f64)>, MatchError> {
    if registry.is_empty() {
        return Err(MatchError::EmptyRegistry);
    }
    let query = backend.embed(span)?;
    let mut scored = registry
        .iter()
        .map(|spec| {
            let e = spec
                .embedding
                .as_ref()
                .ok_or_else(|| MatchError::NotEmbedded(spec.name.clone()))?;
            Ok((spec.name.clone(), cosine(&query, e)))
        })
        .collect::<Result<Vec<_>, MatchError>>()?;
    // registry iteration is name-ordered, so a stable sort keeps the tie-break
    scored.sort_by(|a, b| b.1.total_cmp(&a.1));
    Ok(scored)
}

/// The action spec whose documentation is closest to `span`.
pub fn match_atomic<'r>(
    span: &str,
    registry: &'r ActionRegistry,
    backend: &dyn AgentBackend,
) -> Result<&'r AtomicActionSpec, MatchError> {
    let ranked = rank_atomic(span, registry, backend)?;
    let best = &ranked[0].0;
    Ok(registry.get(best).expect("ranked names come from the registry"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::DeterministicBackend;
    use crate::scene::builtin_registry;

    fn setup() -> (ActionRegistry, DeterministicBackend) {
        let mut reg = builtin_registry();
        let backend = DeterministicBackend::new(&reg);
        embed_registry(&mut reg, &backend).unwrap();
        (reg, backend)
    }

    #[test]
    fn unit_norm_embeddings() {
        let (reg, _) = setup();
        assert_eq!(reg.len(), 7);
        for spec in reg.iter() {
            let e = spec.embedding.as_ref().unwrap();
            assert!(e.iter().all(|x| x.is_finite()));
            let norm = e.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-9, "{}", spec.name);
        }
    }

    #[test]
    fn slot_queries_reach_their_action() {
        let (reg, b) = setup();
        let cases = [
            ("superlative degree of building height", "scale_getter"),
            ("location of building main street", "select_by_tag"),
            ("distance of building 10 to 200 meters from center", "range"),
            ("proximity of vehicle closest to 30 0 -25", "locate"),
            ("reset of road clear the selection", "deselect_all"),
            ("resize of building 2 times taller", "scale_setter"),
            ("movement of vehicle 10 meters east", "translate"),
        ];
        for (span, want) in cases {
            assert_eq!(match_atomic(span, &reg, &b).unwrap().name, want, "{span}");
        }
    }

    #[test]
    fn self_match() {
        let (reg, b) = setup();
        for spec in reg.iter() {
            let (name, score) = rank_atomic(&spec.doc, &reg, &b).unwrap().remove(0);
            assert_eq!(name, spec.name);
            assert!((score - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn ties_go_to_smallest_name() {
        let (reg, b) = setup();
        // no known word: all cosines are zero
        assert_eq!(match_atomic("zzz qqq", &reg, &b).unwrap().name, "deselect_all");
    }

    #[test]
    fn empty_registry_is_an_error() {
        let (_, b) = setup();
        assert!(matches!(
            match_atomic("x", &ActionRegistry::new(), &b),
            Err(MatchError::EmptyRegistry)
        ));
    }
}
