use std::collections::{BTreeMap, BTreeSet};

use super::{normalize_lemma, Corpus, Layer, Period};
use crate::Result;

/// Universal POS tags of content words: nouns, verbs, adjectives, adverbs.
pub const CONTENT_POS: [&str; 4] = ["NOUN", "VERB", "ADJ", "ADV"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VocabStats {
    pub period: Period,
    /// Counts keyed by normalized lemma.
    pub lemma_freq: BTreeMap<String, usize>,
    /// Non-punctuation tokens, ignoring any POS filter.
    pub total_tokens: usize,
    /// POS filter the counts were restricted to, if any.
    pub pos_filter: Option<BTreeSet<String>>,
}

impl VocabStats {
    pub fn freq(&self, lemma: &str) -> usize {
        self.lemma_freq.get(&normalize_lemma(lemma)).copied().unwrap_or(0)
    }
}

/// Lemma frequencies, optionally restricted to tokens whose POS is in
/// `pos_filter`. Punctuation tokens never count.
pub fn frequency_counts(corpus: &Corpus, pos_filter: Option<&BTreeSet<String>>) -> Result<VocabStats> {
    corpus.require(Layer::Lemma)?;
    if pos_filter.is_some() {
        corpus.require(Layer::Pos)?;
    }
    let mut lemma_freq = BTreeMap::new();
    let mut total = 0;
    for tok in corpus.sentences.iter().flat_map(|s| &s.tokens) {
        if tok.is_punct() {
            continue;
        }
        total += 1;
        if pos_filter.is_some_and(|f| !f.contains(&tok.pos)) {
            continue;
        }
        *lemma_freq.entry(normalize_lemma(&tok.lemma)).or_insert(0) += 1;
    }
    Ok(VocabStats {
        period: corpus.period(),
        lemma_freq,
        total_tokens: total,
        pos_filter: pos_filter.cloned(),
    })
}

/// Lemmas present in both periods with `freq1 >= min1` and `freq2 >= min2`,
/// in lexicographic order.
pub fn select_targets(stats1: &VocabStats, stats2: &VocabStats, min1: usize, min2: usize) -> Vec<String> {
    stats1
        .lemma_freq
        .iter()
        .filter(|&(_, &f1)| f1 >= min1)
        .filter_map(|(lemma, _)| {
            let f2 = *stats2.lemma_freq.get(lemma)?;
            (f2 >= min2).then(|| lemma.clone())
        })
        .collect()
}

/// Second-period threshold proportional to corpus size:
/// `round(min1 * total2 / total1)`.
pub fn derive_second_threshold(min1: usize, stats1: &VocabStats, stats2: &VocabStats) -> usize {
    if stats1.total_tokens == 0 {
        return min1;
    }
    (min1 as f64 * stats2.total_tokens as f64 / stats1.total_tokens as f64).round() as usize
}
