//! Inter-annotator agreement and the agreement-based word exclusion rule.
//!
//! Units for Krippendorff's alpha are usage pairs, values are the 1..=4
//! judgments; "cannot decide" (0) is dropped before anything is computed.

use std::collections::{BTreeMap, BTreeSet};

use crate::stats;
use crate::wug::{Judgment, UsagePair};
use crate::{Error, Result, Scalar};

const SCALE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DistanceMetric {
    #[default]
    Ordinal,
    Interval,
}

/// Marginal value frequencies of a coincidence matrix (index 0 is value 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Marginals<T> {
    pub counts: [T; SCALE],
}

impl<T: Scalar> Marginals<T> {
    /// Marginals over all pairable values of `judgments` (the global pool).
    pub fn from_judgments(judgments: &[Judgment]) -> Self {
        let o: [[T; SCALE]; SCALE] = coincidences(judgments);
        let mut counts = [T::zero(); SCALE];
        for (c, row) in o.iter().enumerate() {
            counts[c] = row.iter().copied().sum();
        }
        Self { counts }
    }

    fn total(&self) -> T {
        self.counts.iter().copied().sum()
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Expected<'a, T> {
    /// Expected disagreement from the judged data itself.
    Local,
    /// Expected disagreement from a global value distribution.
    Pooled(&'a Marginals<T>),
}

fn units(judgments: &[Judgment]) -> BTreeMap<UsagePair, Vec<usize>> {
    let mut out: BTreeMap<UsagePair, Vec<usize>> = BTreeMap::new();
    for j in judgments.iter().filter(|j| (1..=4).contains(&j.value)) {
        out.entry(j.pair()).or_default().push(j.value as usize - 1);
    }
    out
}

/// Coincidence matrix: each unit with `m >= 2` values adds `1 / (m - 1)`
/// for every ordered pair of distinct positions.
fn coincidences<T: Scalar>(judgments: &[Judgment]) -> [[T; SCALE]; SCALE] {
    let mut o = [[T::zero(); SCALE]; SCALE];
    for values in units(judgments).values() {
        let m = values.len();
        if m < 2 {
            continue;
        }
        let mut hist = [0usize; SCALE];
        for &v in values {
            hist[v] += 1;
        }
        let w = T::one() / T::of_usize(m - 1);
        for c in 0..SCALE {
            for k in 0..SCALE {
                let pairs = if c == k { hist[c] * hist[c].saturating_sub(1) } else { hist[c] * hist[k] };
                o[c][k] += T::of_usize(pairs) * w;
            }
        }
    }
    o
}

fn squared_distance<T: Scalar>(metric: DistanceMetric, marg: &Marginals<T>, c: usize, k: usize) -> T {
    match metric {
        DistanceMetric::Interval => {
            let d = T::of_usize(c) - T::of_usize(k);
            d * d
        }
        DistanceMetric::Ordinal => {
            let (lo, hi) = (c.min(k), c.max(k));
            let span: T = marg.counts[lo..=hi].iter().copied().sum();
            let d = span - (marg.counts[c] + marg.counts[k]) / T::of(2.0);
            d * d
        }
    }
}

/// Krippendorff's alpha, `1 - D_o / D_e`. With [`Expected::Pooled`] the
/// expected disagreement (and the ordinal metric's rank positions) use the
/// supplied global marginals instead of the local ones.
pub fn krippendorff_alpha<T: Scalar>(judgments: &[Judgment], expected: Expected<'_, T>, metric: DistanceMetric) -> Result<T> {
    let o: [[T; SCALE]; SCALE] = coincidences(judgments);
    let local = {
        let mut counts = [T::zero(); SCALE];
        for (c, row) in o.iter().enumerate() {
            counts[c] = row.iter().copied().sum();
        }
        Marginals { counts }
    };
    let n = local.total();
    if n == T::zero() {
        return Err(Error::undefined("no usage pair judged by two or more annotators"));
    }
    let marg = match expected {
        Expected::Local => local,
        Expected::Pooled(m) => *m,
    };
    let n_exp = marg.total();
    if n_exp <= T::one() {
        return Err(Error::undefined("expected-disagreement pool has fewer than two values"));
    }
    let mut d_obs = T::zero();
    let mut d_exp = T::zero();
    for c in 0..SCALE {
        for k in 0..SCALE {
            let delta = squared_distance(metric, &marg, c, k);
            d_obs += o[c][k] * delta;
            d_exp += marg.counts[c] * marg.counts[k] * delta;
        }
    }
    d_obs /= n;
    d_exp /= n_exp * (n_exp - T::one());
    if d_exp <= T::zero() {
        return Err(Error::undefined("zero expected disagreement"));
    }
    Ok(T::one() - d_obs / d_exp)
}

/// Spearman correlation per annotator pair over their co-judged usage
/// pairs, averaged with the co-judged counts as weights. Annotator pairs
/// with fewer than two shared items, or a constant side, are skipped.
pub fn pairwise_spearman_mean<T: Scalar>(judgments: &[Judgment]) -> Result<T> {
    let mut by_annotator: BTreeMap<&str, BTreeMap<UsagePair, T>> = BTreeMap::new();
    for j in judgments.iter().filter(|j| (1..=4).contains(&j.value)) {
        by_annotator
            .entry(j.annotator.as_str())
            .or_default()
            .insert(j.pair(), T::of(j.value as f64));
    }
    let annotators: Vec<_> = by_annotator.iter().collect();
    let (mut num, mut den) = (T::zero(), T::zero());
    for (i, (_, a)) in annotators.iter().enumerate() {
        for (_, b) in &annotators[i + 1..] {
            let (xs, ys): (Vec<T>, Vec<T>) = a
                .iter()
                .filter_map(|(pair, &x)| b.get(pair).map(|&y| (x, y)))
                .unzip();
            if xs.len() < 2 {
                continue;
            }
            if let Ok(rho) = stats::spearman_rho(&xs, &ys) {
                let w = T::of_usize(xs.len());
                num += w * rho;
                den += w;
            }
        }
    }
    if den == T::zero() {
        return Err(Error::undefined("no annotator pair with two or more co-judged items"));
    }
    Ok(num / den)
}

#[derive(Debug, Clone, PartialEq)]
pub struct WordAgreement<T> {
    pub alpha_local: Option<T>,
    pub alpha_pooled: Option<T>,
    pub spearman_pairwise_weighted: Option<T>,
    pub judgment_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgreementReport<T> {
    pub per_word: BTreeMap<String, WordAgreement<T>>,
    pub global: WordAgreement<T>,
}

/// Agreement statistics per word, with the pooled alpha's expected
/// disagreement taken from all words together.
pub fn agreement_report<T: Scalar>(words: &BTreeMap<String, Vec<Judgment>>, metric: DistanceMetric) -> AgreementReport<T> {
    let all: Vec<Judgment> = words.values().flatten().cloned().collect();
    let pool = Marginals::from_judgments(&all);
    let stats_for = |js: &[Judgment]| WordAgreement {
        alpha_local: krippendorff_alpha(js, Expected::Local, metric).ok(),
        alpha_pooled: krippendorff_alpha(js, Expected::Pooled(&pool), metric).ok(),
        spearman_pairwise_weighted: pairwise_spearman_mean(js).ok(),
        judgment_count: js.iter().filter(|j| j.value != 0).count(),
    };
    AgreementReport {
        per_word: words.iter().map(|(w, js)| (w.clone(), stats_for(js))).collect(),
        global: stats_for(&all),
    }
}

/// Splits words into kept and discarded. A word is discarded when both
/// alphas fall below `threshold`; an undefined alpha only counts as below
/// when the other one is undefined too.
pub fn filter_words_by_agreement<T: Scalar>(report: &AgreementReport<T>, threshold: T) -> (Vec<String>, Vec<String>) {
    let mut kept = Vec::new();
    let mut discarded = Vec::new();
    for (word, a) in &report.per_word {
        let below = match (a.alpha_local, a.alpha_pooled) {
            (None, None) => true,
            (Some(l), Some(p)) => l < threshold && p < threshold,
            _ => false,
        };
        if below {
            discarded.push(word.clone());
        } else {
            kept.push(word.clone());
        }
    }
    (kept, discarded)
}

/// Per-word facts feeding a dataset overview row.
#[derive(Debug, Clone, PartialEq)]
pub struct WordRecord {
    pub lemma: String,
    pub pos: String,
    pub usages: usize,
    pub annotators: BTreeSet<String>,
    pub judged_pairs: usize,
    pub judgments: usize,
    pub uncompared: usize,
    pub normalized_loss: f64,
    pub binary: Option<bool>,
    pub graded: Option<f64>,
}

/// One overview row: n, N/V/A, |U|, AN, JUD, AV, KRI, SPR, UNC, LOSS,
/// LSC_B, LSC_G.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub name: String,
    pub words: usize,
    pub nouns: usize,
    pub verbs: usize,
    /// Adjectives and adverbs.
    pub adjectives: usize,
    pub mean_usages: f64,
    pub annotators: usize,
    pub judged_pairs: usize,
    pub judgments_per_pair: f64,
    pub kri: Option<f64>,
    pub spr: Option<f64>,
    pub mean_uncompared: f64,
    /// Mean normalized clustering loss times 10.
    pub loss_x10: f64,
    pub mean_binary: Option<f64>,
    pub mean_graded: Option<f64>,
}

pub fn summary_row(name: &str, records: &[WordRecord], judgments: &[Judgment], metric: DistanceMetric) -> SummaryRow {
    let n = records.len();
    let avg = |f: &dyn Fn(&WordRecord) -> f64| if n == 0 { 0.0 } else { records.iter().map(f).sum::<f64>() / n as f64 };
    let pos_count = |tags: &[&str]| records.iter().filter(|r| tags.contains(&r.pos.to_uppercase().as_str())).count();
    let mean_opt = |vals: Vec<f64>| (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64);
    let judged_pairs: usize = records.iter().map(|r| r.judged_pairs).sum();
    let total_judgments: usize = records.iter().map(|r| r.judgments).sum();
    SummaryRow {
        name: name.to_string(),
        words: n,
        nouns: pos_count(&["NOUN", "NN"]),
        verbs: pos_count(&["VERB", "VB"]),
        adjectives: pos_count(&["ADJ", "ADV", "JJ", "RB"]),
        mean_usages: avg(&|r| r.usages as f64),
        annotators: records.iter().flat_map(|r| r.annotators.iter()).collect::<BTreeSet<_>>().len(),
        judged_pairs,
        judgments_per_pair: if judged_pairs == 0 { 0.0 } else { total_judgments as f64 / judged_pairs as f64 },
        kri: krippendorff_alpha::<f64>(judgments, Expected::Local, metric).ok(),
        spr: pairwise_spearman_mean::<f64>(judgments).ok(),
        mean_uncompared: avg(&|r| r.uncompared as f64),
        loss_x10: avg(&|r| r.normalized_loss) * 10.0,
        mean_binary: mean_opt(records.iter().filter_map(|r| r.binary.map(|b| b as u8 as f64)).collect()),
        mean_graded: mean_opt(records.iter().filter_map(|r| r.graded).collect()),
    }
}

pub const SUMMARY_HEADER: [&str; 13] = [
    "dataset", "n", "N/V/A", "|U|", "AN", "JUD", "AV", "KRI", "SPR", "UNC", "LOSS", "LSC_B", "LSC_G",
];

pub fn render_summary(rows: &[SummaryRow], seed: Option<u64>) -> String {
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.2}")).unwrap_or_default();
    crate::tsv::render(
        seed,
        &SUMMARY_HEADER,
        rows.iter().map(|r| {
            vec![
                r.name.clone(),
                r.words.to_string(),
                format!("{}/{}/{}", r.nouns, r.verbs, r.adjectives),
                format!("{:.0}", r.mean_usages),
                r.annotators.to_string(),
                r.judged_pairs.to_string(),
                format!("{:.1}", r.judgments_per_pair),
                opt(r.kri),
                opt(r.spr),
                format!("{:.2}", r.mean_uncompared),
                format!("{:.2}", r.loss_x10),
                opt(r.mean_binary),
                opt(r.mean_graded),
            ]
        }),
    )
}

pub const WORD_AGREEMENT_HEADER: [&str; 5] = ["lemma", "alpha_local", "alpha_pooled", "spearman", "judgments"];

pub fn render_word_agreement<T: Scalar>(report: &AgreementReport<T>, seed: Option<u64>) -> String {
    let opt = |v: Option<T>| v.map(|x| format!("{x}")).unwrap_or_default();
    let global = std::iter::once(("<all>".to_string(), &report.global));
    crate::tsv::render(
        seed,
        &WORD_AGREEMENT_HEADER,
        report
            .per_word
            .iter()
            .map(|(w, a)| (w.clone(), a))
            .chain(global)
            .map(|(w, a)| {
                vec![
                    w,
                    opt(a.alpha_local),
                    opt(a.alpha_pooled),
                    opt(a.spearman_pairwise_weighted),
                    a.judgment_count.to_string(),
                ]
            }),
    )
}
