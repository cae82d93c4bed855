use std::cmp::Ordering;

use super::{PredictionSet, Task};
use crate::{stats, Error, Result, Scalar};

fn finite_values<T: Scalar>(pred: &PredictionSet<T>) -> Result<Vec<(&String, T)>> {
    pred.values
        .iter()
        .map(|(w, &v)| {
            if v.is_finite() {
                Ok((w, v))
            } else {
                Err(Error::precondition(format!("non-finite score for `{w}`")))
            }
        })
        .collect()
}

/// Labels a word 1 when its score exceeds mean + population std of all
/// scores.
pub fn binarize_mean_std<T: Scalar>(pred: &PredictionSet<T>) -> Result<PredictionSet<T>> {
    let values = finite_values(pred)?;
    if values.len() < 2 {
        return Err(Error::precondition("mean/std thresholding needs at least two scores"));
    }
    let xs: Vec<T> = values.iter().map(|p| p.1).collect();
    let lo = xs.iter().copied().fold(T::infinity(), T::min);
    let hi = xs.iter().copied().fold(T::neg_infinity(), T::max);
    let mut out = PredictionSet::new(Task::Binary);
    out.skipped = pred.skipped.clone();
    if lo == hi {
        // threshold equals the common value; nothing exceeds it
        out.values = values.into_iter().map(|(w, _)| (w.clone(), T::zero())).collect();
        return Ok(out);
    }
    let threshold = stats::mean(&xs).unwrap() + stats::population_std(&xs).unwrap();
    out.values = values
        .into_iter()
        .map(|(w, v)| (w.clone(), if v > threshold { T::one() } else { T::zero() }))
        .collect();
    Ok(out)
}

fn sse<T: Scalar>(xs: &[T]) -> T {
    let m = stats::mean(xs).unwrap_or(T::zero());
    xs.iter().map(|&x| (x - m) * (x - m)).sum()
}

/// Best two-segment split of ascending `sorted` scores: the index `s` of
/// the first element of the upper segment minimizing the summed squared
/// deviations of `sorted[..s]` and `sorted[s..]`. Only positions between
/// distinct values are candidates; ties go to the largest `s`. `None` when
/// all values are equal.
pub fn changepoint_split<T: Scalar>(sorted: &[T]) -> Option<usize> {
    let eps = T::of(1e-12) * (T::one() + sse(sorted));
    let mut best: Option<(T, usize)> = None;
    for s in 1..sorted.len() {
        if sorted[s - 1] == sorted[s] {
            continue;
        }
        let cost = sse(&sorted[..s]) + sse(&sorted[s..]);
        if best.is_none_or(|(b, _)| cost <= b + eps) {
            best = Some((cost, s));
        }
    }
    best.map(|(_, s)| s)
}

/// Sorts the scores, places a single change point by minimal within-segment
/// squared error and labels the upper segment 1.
pub fn binarize_changepoint<T: Scalar>(pred: &PredictionSet<T>) -> Result<PredictionSet<T>> {
    let mut values = finite_values(pred)?;
    if values.len() < 3 {
        return Err(Error::precondition("change-point binarization needs at least three scores"));
    }
    values.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(Ordering::Equal).then_with(|| a.0.cmp(b.0)));
    let sorted: Vec<T> = values.iter().map(|p| p.1).collect();
    let split = changepoint_split(&sorted).unwrap_or(values.len());
    let mut out = PredictionSet::new(Task::Binary);
    out.skipped = pred.skipped.clone();
    out.values = values
        .into_iter()
        .enumerate()
        .map(|(i, (w, _))| (w.clone(), if i >= split { T::one() } else { T::zero() }))
        .collect();
    Ok(out)
}
