use nalgebra::{DMatrix, RealField};
use num_traits::Float;

use super::{EmbeddingMatrix, PredictionSet, SgnsParams, Task};
use crate::corpus::Corpus;
use crate::{stats, Error, Result, Scalar};

/// Unit-length rows, then column means subtracted. Zero rows stay zero.
pub fn preprocess<T: Scalar>(emb: &EmbeddingMatrix<T>) -> EmbeddingMatrix<T> {
    let mut out = emb.clone();
    normalize_rows(&mut out, None);
    center_columns(&mut out, None);
    out
}

fn normalize_rows<T: Scalar>(emb: &mut EmbeddingMatrix<T>, rows: Option<&[usize]>) {
    let all: Vec<usize> = (0..emb.len()).collect();
    for &i in rows.unwrap_or(&all) {
        let row = emb.row_mut(i);
        let norm = Float::sqrt(stats::dot(row, row));
        if norm > T::zero() {
            row.iter_mut().for_each(|x| *x /= norm);
        }
    }
}

fn center_columns<T: Scalar>(emb: &mut EmbeddingMatrix<T>, rows: Option<&[usize]>) {
    let all: Vec<usize> = (0..emb.len()).collect();
    let rows = rows.unwrap_or(&all);
    if rows.is_empty() {
        return;
    }
    let dim = emb.dim();
    let mut mean = vec![T::zero(); dim];
    for &i in rows {
        for (m, &x) in mean.iter_mut().zip(emb.row(i)) {
            *m += x;
        }
    }
    let n = T::of_usize(rows.len());
    mean.iter_mut().for_each(|m| *m /= n);
    for &i in rows {
        for (x, &m) in emb.row_mut(i).iter_mut().zip(&mean) {
            *x -= m;
        }
    }
}

/// Rotates `source` onto `target`. On the shared vocabulary both spaces are
/// length-normalized and mean-centered; `Q = U V^T` from the SVD of
/// `S^T T` minimizes `|S Q - T|_F` over orthogonal `Q`. Returns the full
/// (unpreprocessed) source multiplied by `Q`.
pub fn orthogonal_procrustes<T>(source: &EmbeddingMatrix<T>, target: &EmbeddingMatrix<T>) -> Result<EmbeddingMatrix<T>>
where
    T: Scalar + RealField,
{
    if source.dim() != target.dim() {
        return Err(Error::DimensionMismatch {
            expected: target.dim(),
            actual: source.dim(),
        });
    }
    let shared: Vec<(usize, usize)> = source
        .vocab()
        .iter()
        .enumerate()
        .filter_map(|(i, w)| target.index_of(w).map(|j| (i, j)))
        .collect();
    if shared.is_empty() {
        return Err(Error::precondition("source and target share no vocabulary"));
    }
    let dim = source.dim();
    let build = |emb: &EmbeddingMatrix<T>, rows: Vec<usize>| {
        let mut sub = EmbeddingMatrix::new(
            (0..rows.len()).map(|i| i.to_string()).collect(),
            dim,
            rows.iter().flat_map(|&r| emb.row(r).iter().copied()).collect(),
        )
        .expect("rows copied from a valid matrix");
        normalize_rows(&mut sub, None);
        center_columns(&mut sub, None);
        DMatrix::from_row_slice(rows.len(), dim, sub.data())
    };
    let s = build(source, shared.iter().map(|p| p.0).collect());
    let t = build(target, shared.iter().map(|p| p.1).collect());
    let m = s.transpose() * t;
    let svd = m.svd(true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::undefined("SVD did not converge")),
    };
    let q = u * v_t;
    let full = DMatrix::from_row_slice(source.len(), dim, source.data());
    let rotated = full * q;
    let data: Vec<T> = rotated.transpose().as_slice().to_vec();
    EmbeddingMatrix::new(source.vocab().to_vec(), dim, data)
}

/// Graded change as `1 - cos(v1, v2)` per target; words missing from either
/// space (or with a zero vector) are reported in `skipped`.
pub fn cosine_change_scores<T: Scalar>(
    aligned: &EmbeddingMatrix<T>,
    target: &EmbeddingMatrix<T>,
    words: &[String],
) -> PredictionSet<T> {
    let mut out = PredictionSet::new(Task::Graded);
    for w in words {
        match (aligned.get(w), target.get(w)) {
            (Some(a), Some(b)) => match stats::cosine_similarity(a, b) {
                Some(c) => {
                    out.values.insert(w.clone(), T::one() - c);
                }
                None => out.skipped.push(w.clone()),
            },
            _ => out.skipped.push(w.clone()),
        }
    }
    out
}

/// SGNS per period, Procrustes alignment of the preprocessed spaces, cosine
/// distance. Returns the graded predictions and both embedding spaces.
pub fn sgns_op_cd<T>(
    c1: &Corpus,
    c2: &Corpus,
    targets: &[String],
    params: &SgnsParams,
    seed: u64,
) -> Result<(PredictionSet<T>, EmbeddingMatrix<T>, EmbeddingMatrix<T>)>
where
    T: Scalar + RealField,
{
    let e1 = preprocess(&super::train_sgns::<T>(c1, params, seed)?);
    let e2 = preprocess(&super::train_sgns::<T>(c2, params, seed.wrapping_add(1))?);
    let aligned = orthogonal_procrustes(&e1, &e2)?;
    let scores = cosine_change_scores(&aligned, &e2, targets);
    Ok((scores, aligned, e2))
}
