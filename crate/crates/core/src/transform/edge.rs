use serde::{Deserialize, Serialize};

use crate::corpus::{EmbeddingTable, TokenSequence};

use super::banded::{neighbor, offset_of_column};
use super::{D2IImage, Normalization, TransformError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeReport {
    pub max_discrepancy: f64,
    pub checked: usize,
}

/// Checks that the horizontal difference between adjacent columns of a raw
/// D2I image equals the projection of the neighbor difference onto the
/// center word: `img[i][c+1] - img[i][c] == x_i . (x_{i+d(c+1)} - x_{i+d(c)})`.
///
/// Every row and every adjacent column pair is checked, including the pair
/// straddling the removed diagonal (offsets -1 and +1).
pub fn edge_response(
    img: &D2IImage,
    seq: &TokenSequence,
    table: &EmbeddingTable,
) -> Result<EdgeReport, TransformError> {
    if img.config.drop_zero_rows || img.config.normalize != Normalization::None {
        return Err(TransformError::Precondition(
            "edge check needs an unelided, unnormalized image",
        ));
    }
    if img.resized_from.is_some() || img.rows != seq.len() || img.cols != 2 * img.k {
        return Err(TransformError::Precondition("image does not match the document"));
    }
    let n = seq.len();
    let k = img.k;
    let zero = vec![0.0f32; table.dim()];
    let vec_at = |j: Option<usize>| -> &[f32] {
        match j {
            Some(j) => table.lookup(&seq.tokens[j]),
            None => &zero,
        }
    };

    let mut max_discrepancy = 0.0f64;
    let mut checked = 0;
    for i in 0..n {
        let xi = table.lookup(&seq.tokens[i]);
        for c in 0..2 * k - 1 {
            let left = vec_at(neighbor(i, offset_of_column(c, k), n, img.boundary_used));
            let right = vec_at(neighbor(i, offset_of_column(c + 1, k), n, img.boundary_used));
            let expected: f64 = xi
                .iter()
                .zip(left.iter().zip(right))
                .map(|(&x, (&l, &r))| f64::from(x) * (f64::from(r) - f64::from(l)))
                .sum();
            let observed = f64::from(img.get(i, c + 1)) - f64::from(img.get(i, c));
            max_discrepancy = max_discrepancy.max((observed - expected).abs());
            checked += 1;
        }
    }
    Ok(EdgeReport {
        max_discrepancy,
        checked,
    })
}
