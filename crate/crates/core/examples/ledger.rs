//! Token accounting: totals for a few ledgers and their mean.

use v2a_core::metrics::{total_tokens, TokenLedger};

fn main() {
    let rows = [
        ("Voice2Action", TokenLedger::new(152.0, 92.0, 285.0, 140.0, 1.2)),
        ("LLM-Pre-Ext-Exe", TokenLedger::new(152.0, 0.0, 402.0, 133.0, 1.3)),
        ("LLM-Pre-Exe", TokenLedger::new(152.0, 0.0, 0.0, 355.0, 2.9)),
        ("LLM-Exe", TokenLedger::new(0.0, 0.0, 0.0, 368.0, 5.4)),
    ];
    for (name, l) in &rows {
        println!("{name:<16} {} + {} + {} x ({} + {}) = {}", l.n0, l.n1, l.n_trial, l.n2, l.n3, total_tokens(l));
    }
    let mean = TokenLedger::mean(rows.iter().map(|(_, l)| l)).expect("non-empty");
    println!("mean ledger total: {}", mean.total());
}
