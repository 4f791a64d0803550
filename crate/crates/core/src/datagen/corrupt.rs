use crate::ir::RawTranscript;
use crate::lexicon::CONFUSIONS;
use crate::pipeline::{replace_tokens, SubstitutionTable};
use rand::Rng;

/// Every lexicon confusion pair, all active.
pub fn confusion_table() -> SubstitutionTable {
    SubstitutionTable::fixed(CONFUSIONS)
}

/// Replaces each supposed token of the table's active pairs by its wrong
/// token with probability `p`, like a recognizer mishearing it. The span
/// starts at frame 0 and follows the token rate.
pub fn corrupt_transcript(t0: &str, table: &SubstitutionTable, p: f64, rng: &mut impl Rng) -> RawTranscript {
    let confusions = table.confusions();
    let text = replace_tokens(t0, |tok| {
        let wrong = confusions.get(tok)?;
        // draw only for confusable tokens so p = 0 consumes nothing
        rng.gen_bool(p).then(|| wrong.to_string())
    });
    RawTranscript::spoken(text, 0)
}

/// Every confusable token misheard; the deterministic extreme of
/// [`corrupt_transcript`].
pub fn mishear_all(t0: &str, table: &SubstitutionTable) -> String {
    let confusions = table.confusions();
    replace_tokens(t0, |tok| confusions.get(tok).map(|w| w.to_string()))
}
