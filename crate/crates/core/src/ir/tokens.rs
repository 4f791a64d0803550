use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TokenBasis {
    /// Maximal non-whitespace runs.
    Whitespace,
    /// Usage figures reported by a remote backend.
    BackendReported,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenCount {
    pub value: u64,
    pub basis: TokenBasis,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TokenError {
    #[error("backend-reported token basis requested but the backend reported no usage")]
    MissingReport,
}

pub fn count_tokens(text: &str, basis: TokenBasis, reported: Option<u64>) -> Result<TokenCount, TokenError> {
    let value = match basis {
        TokenBasis::Whitespace => text.split_whitespace().count() as u64,
        TokenBasis::BackendReported => reported.ok_or(TokenError::MissingReport)?,
    };
    Ok(TokenCount { value, basis })
}

pub(crate) fn whitespace_tokens(text: &str) -> u64 {
    text.split_whitespace().count() as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ws(text: &str) -> u64 {
        count_tokens(text, TokenBasis::Whitespace, None).unwrap().value
    }

    #[test]
    fn whitespace_counts() {
        assert_eq!(ws("select the highest building"), 4);
        assert_eq!(ws(""), 0);
        assert_eq!(ws("select the highest building on main street"), 7);
        assert_eq!(ws("  a\t\nb  "), 2);
    }

    #[test]
    fn backend_basis_needs_a_report() {
        assert_eq!(
            count_tokens("x", TokenBasis::BackendReported, None),
            Err(TokenError::MissingReport)
        );
        assert_eq!(count_tokens("x y", TokenBasis::BackendReported, Some(9)).unwrap().value, 9);
    }

    proptest! {
        #[test]
        fn additive_over_space_join(a in "[a-z ]{0,12}[a-z]", b in "[a-z][a-z \t]{0,12}") {
            prop_assert_eq!(ws(&format!("{a} {b}")), ws(&a) + ws(&b));
        }
    }
}
