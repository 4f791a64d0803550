use proptest::prelude::*;
use v2a_core::metrics::{total_tokens, TokenLedger};

#[test]
fn published_rows_total_exactly() {
    for ((n0, n1, n2, n3, n_trial), want) in [
        ((152.0, 92.0, 285.0, 140.0, 1.2), 754),
        ((152.0, 0.0, 402.0, 133.0, 1.3), 848),
        ((152.0, 0.0, 0.0, 355.0, 2.9), 1182),
        ((0.0, 0.0, 0.0, 368.0, 5.4), 1987),
    ] {
        let l = TokenLedger::new(n0, n1, n2, n3, n_trial);
        assert_eq!(total_tokens(&l), want, "{l:?}");
        assert_eq!(l.total(), want);
    }
}

#[test]
fn half_rounds_away_from_zero() {
    // 0.5 exactly: 1 + 1 * 0.5
    assert_eq!(total_tokens(&TokenLedger::new(1.0, 0.0, 0.0, 1.0, 0.5)), 2);
    assert_eq!(total_tokens(&TokenLedger::new(0.0, 0.0, 0.0, 3.0, 0.5)), 2);
    assert_eq!(total_tokens(&TokenLedger::new(0.0, 0.0, 0.0, 0.0, 0.0)), 0);
}

/// Exact oracle on tenths: every component and trial count is k/10.
fn oracle(n: [u64; 4], trial_tenths: u64) -> u64 {
    // tenths of a token; all values are non-negative, so half-up is half away from zero
    let tenths = (n[0] + n[1]) * 10 + (n[2] + n[3]) * trial_tenths;
    (tenths + 5) / 10
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn total_matches_integer_oracle(n in proptest::array::uniform4(0u64..5000), trial_tenths in 0u64..100) {
        let l = TokenLedger::new(n[0] as f64, n[1] as f64, n[2] as f64, n[3] as f64, trial_tenths as f64 / 10.0);
        prop_assert_eq!(total_tokens(&l), oracle(n, trial_tenths));
    }

    #[test]
    fn mean_of_identical_ledgers_is_the_ledger(n in proptest::array::uniform4(0u64..5000), trial in 1u64..9, k in 1usize..6) {
        let l = TokenLedger::new(n[0] as f64, n[1] as f64, n[2] as f64, n[3] as f64, trial as f64);
        let all = vec![l; k];
        let mean = TokenLedger::mean(&all).unwrap();
        prop_assert_eq!(mean.total(), l.total());
    }
}
