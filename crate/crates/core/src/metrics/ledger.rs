use crate::ir::TokenBasis;
use serde::{Deserialize, Serialize};

/// Per-stage token counts of one run, or their means over a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TokenLedger {
    pub n0: f64,
    pub n1: f64,
    pub n2: f64,
    pub n3: f64,
    pub n_trial: f64,
    pub basis: TokenBasis,
}

impl TokenLedger {
    pub fn new(n0: f64, n1: f64, n2: f64, n3: f64, n_trial: f64) -> Self {
        Self {
            n0,
            n1,
            n2,
            n3,
            n_trial,
            basis: TokenBasis::Whitespace,
        }
    }

    pub fn total(&self) -> u64 {
        total_tokens(self)
    }

    /// Arithmetic mean of each component.
    pub fn mean<'a>(ledgers: impl IntoIterator<Item = &'a TokenLedger>) -> Option<TokenLedger> {
        let all: Vec<&TokenLedger> = ledgers.into_iter().collect();
        let first = all.first()?;
        let n = all.len() as f64;
        let avg = |f: fn(&TokenLedger) -> f64| all.iter().map(|l| f(l)).sum::<f64>() / n;
        Some(TokenLedger {
            n0: avg(|l| l.n0),
            n1: avg(|l| l.n1),
            n2: avg(|l| l.n2),
            n3: avg(|l| l.n3),
            n_trial: avg(|l| l.n_trial),
            basis: first.basis,
        })
    }
}

const MICRO: i128 = 1_000_000;

fn micros(x: f64) -> i128 {
    (x * MICRO as f64).round() as i128
}

/// `N₀ + N₁ + N_trial·(N₂ + N₃)` rounded half away from zero.
///
/// Components are taken to six decimals and combined in integers, so
/// decimal inputs such as `2.9 · 355 = 1029.5` are not pushed across the
/// rounding boundary by binary representation error.
pub fn total_tokens(ledger: &TokenLedger) -> u64 {
    let scale = MICRO * MICRO;
    let sum = (micros(ledger.n0) + micros(ledger.n1)) * MICRO
        + micros(ledger.n_trial) * (micros(ledger.n2) + micros(ledger.n3));
    let rounded = (sum + scale / 2).div_euclid(scale);
    rounded.max(0) as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_rows() {
        let rows = [
            ((152.0, 92.0, 285.0, 140.0, 1.2), 754),
            ((152.0, 0.0, 402.0, 133.0, 1.3), 848),
            ((152.0, 0.0, 0.0, 355.0, 2.9), 1182),
            ((0.0, 0.0, 0.0, 368.0, 5.4), 1987),
        ];
        for ((a, b, c, d, t), want) in rows {
            assert_eq!(total_tokens(&TokenLedger::new(a, b, c, d, t)), want);
        }
    }

    #[test]
    fn mean_of_components() {
        let a = TokenLedger::new(2.0, 0.0, 10.0, 4.0, 1.0);
        let b = TokenLedger::new(4.0, 0.0, 20.0, 8.0, 3.0);
        let m = TokenLedger::mean([&a, &b]).unwrap();
        assert_eq!((m.n0, m.n2, m.n3, m.n_trial), (3.0, 15.0, 6.0, 2.0));
        assert!(TokenLedger::mean([]).is_none());
    }
}
