use super::{PredictionSet, Task};
use crate::corpus::VocabStats;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FreqNormalization {
    /// `log(freq) / log(total)`.
    #[default]
    LogRatio,
    /// `freq / log(total)`.
    Linear,
}

/// Frequency normalized by the log of the corpus size; `None` for a zero
/// frequency or a corpus too small for a positive log.
pub fn normalized_frequency<T: Scalar>(freq: T, total: T, mode: FreqNormalization) -> Option<T> {
    if freq <= T::zero() || total <= T::one() {
        return None;
    }
    let log_total = total.ln();
    let x = match mode {
        FreqNormalization::LogRatio => freq.ln() / log_total,
        FreqNormalization::Linear => freq / log_total,
    };
    x.is_finite().then_some(x)
}

fn normalized<T: Scalar>(freq: usize, total: usize, mode: FreqNormalization) -> Option<T> {
    normalized_frequency(T::of_usize(freq), T::of_usize(total), mode)
}

/// Signed change `x2 - x1` of the normalized frequencies; words with zero
/// frequency in a period are skipped.
pub fn freq_signed_diff<T: Scalar>(
    stats1: &VocabStats,
    stats2: &VocabStats,
    targets: &[String],
    mode: FreqNormalization,
) -> PredictionSet<T> {
    let mut out = PredictionSet::new(Task::Graded);
    for w in targets {
        let x1 = normalized::<T>(stats1.freq(w), stats1.total_tokens, mode);
        let x2 = normalized::<T>(stats2.freq(w), stats2.total_tokens, mode);
        match (x1, x2) {
            (Some(a), Some(b)) => {
                out.values.insert(w.clone(), b - a);
            }
            _ => out.skipped.push(w.clone()),
        }
    }
    out
}

/// Absolute difference of the normalized frequencies.
pub fn freq_diff_scores<T: Scalar>(
    stats1: &VocabStats,
    stats2: &VocabStats,
    targets: &[String],
    mode: FreqNormalization,
) -> PredictionSet<T> {
    let mut out: PredictionSet<T> = freq_signed_diff(stats1, stats2, targets, mode);
    out.values.values_mut().for_each(|v: &mut T| *v = v.abs());
    out
}

/// Gain and loss labels from binary change plus the direction of the
/// frequency change: changed words that became rarer lost a sense, the
/// others gained one.
pub fn freq_gain_loss<T: Scalar>(binary: &PredictionSet<T>, signed: &PredictionSet<T>) -> (PredictionSet<T>, PredictionSet<T>) {
    let mut gain = PredictionSet::new(Task::Gain);
    let mut loss = PredictionSet::new(Task::Loss);
    for (w, &b) in &binary.values {
        let Some(&d) = signed.values.get(w) else {
            gain.skipped.push(w.clone());
            loss.skipped.push(w.clone());
            continue;
        };
        let changed = b == T::one();
        let fell = d < T::zero();
        loss.values.insert(w.clone(), if changed && fell { T::one() } else { T::zero() });
        gain.values.insert(w.clone(), if changed && !fell { T::one() } else { T::zero() });
    }
    (gain, loss)
}
