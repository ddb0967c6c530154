use std::borrow::Cow;

use rayon::prelude::*;

use crate::corpus::{EmbeddingTable, TokenSequence};

use super::attention::dot;
use super::{Boundary, D2IConfig, D2IImage, Normalization, TransformError};

/// Neighbor offset stored in column `c`: `-k..=-1` for the first `k`
/// columns, then `+1..=+k`. Offset 0 never appears.
pub fn offset_of_column(c: usize, k: usize) -> isize {
    debug_assert!(c < 2 * k);
    if c < k {
        c as isize - k as isize
    } else {
        (c - k) as isize + 1
    }
}

/// Token position seen at `offset` from `i`, or `None` for padding.
pub(crate) fn neighbor(i: usize, offset: isize, n: usize, boundary: Boundary) -> Option<usize> {
    let j = i as isize + offset;
    if (0..n as isize).contains(&j) {
        Some(j as usize)
    } else {
        match boundary {
            Boundary::ZeroPad => None,
            Boundary::Circular => Some(j.rem_euclid(n as isize) as usize),
        }
    }
}

fn unit(v: &[f32]) -> Vec<f32> {
    let norm = v.iter().map(|&x| f64::from(x).powi(2)).sum::<f64>().sqrt();
    if norm == 0.0 {
        v.to_vec()
    } else {
        v.iter().map(|&x| (f64::from(x) / norm) as f32).collect()
    }
}

/// Builds the banded D2I image of `seq`.
///
/// Returns `Ok(None)` when every row is elided (the empty-image signal); an
/// empty token sequence is an error.
pub fn d2i(seq: &TokenSequence, table: &EmbeddingTable, cfg: &D2IConfig) -> Result<Option<D2IImage>, TransformError> {
    let n = seq.len();
    if n == 0 {
        return Err(TransformError::EmptyInput);
    }
    if cfg.k == 0 {
        return Err(TransformError::InvalidWindow);
    }
    let k = cfg.k;
    let cols = 2 * k;
    let boundary = cfg.effective_boundary(n);

    let vectors: Vec<Cow<'_, [f32]>> = seq
        .tokens
        .iter()
        .map(|t| {
            let v = table.lookup(t);
            if cfg.normalize == Normalization::Cosine {
                Cow::Owned(unit(v))
            } else {
                Cow::Borrowed(v)
            }
        })
        .collect();

    let mut data = Vec::with_capacity(n * cols);
    let mut kept = Vec::with_capacity(n);
    let mut row = vec![0.0f32; cols];
    for i in 0..n {
        for (c, slot) in row.iter_mut().enumerate() {
            *slot = match neighbor(i, offset_of_column(c, k), n, boundary) {
                Some(j) => dot(&vectors[i], &vectors[j]),
                None => 0.0,
            };
        }
        if cfg.drop_zero_rows && row.iter().all(|&v| v == 0.0) {
            continue;
        }
        data.extend_from_slice(&row);
        kept.push(i);
    }

    if kept.is_empty() {
        return Ok(None);
    }
    if cfg.normalize == Normalization::PerImageStandardize {
        standardize(&mut data);
    }
    Ok(Some(D2IImage {
        rows: kept.len(),
        cols,
        data,
        kept_word_indices: kept,
        k,
        config: *cfg,
        boundary_used: boundary,
        source_id: seq.source_id.clone(),
        resized_from: None,
    }))
}

fn standardize(data: &mut [f32]) {
    let n = data.len() as f64;
    let mean = data.iter().map(|&v| f64::from(v)).sum::<f64>() / n;
    let var = data.iter().map(|&v| (f64::from(v) - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    let scale = if std > 0.0 { 1.0 / std } else { 1.0 };
    for v in data.iter_mut() {
        *v = ((f64::from(*v) - mean) * scale) as f32;
    }
}

/// Transforms many documents; output order matches input order.
pub fn d2i_batch(
    docs: &[TokenSequence],
    table: &EmbeddingTable,
    cfg: &D2IConfig,
) -> Vec<Result<Option<D2IImage>, TransformError>> {
    docs.par_iter().map(|d| d2i(d, table, cfg)).collect()
}
