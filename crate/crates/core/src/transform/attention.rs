use crate::corpus::{EmbeddingTable, TokenSequence};

use super::TransformError;

/// Dense `N x N` matrix of pairwise embedding inner products.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionMatrix {
    pub n: usize,
    pub data: Vec<f32>,
}

impl AttentionMatrix {
    pub fn get(&self, i: usize, j: usize) -> f32 {
        self.data[i * self.n + j]
    }
}

pub(crate) fn dot(a: &[f32], b: &[f32]) -> f32 {
    a.iter().zip(b).map(|(&x, &y)| f64::from(x) * f64::from(y)).sum::<f64>() as f32
}

/// Full self-attention matrix, diagonal included.
pub fn self_attention_full(seq: &TokenSequence, table: &EmbeddingTable) -> Result<AttentionMatrix, TransformError> {
    let n = seq.len();
    if n == 0 {
        return Err(TransformError::EmptyInput);
    }
    let vectors: Vec<&[f32]> = seq.tokens.iter().map(|t| table.lookup(t)).collect();
    let mut data = vec![0.0f32; n * n];
    for i in 0..n {
        for j in i..n {
            let v = dot(vectors[i], vectors[j]);
            data[i * n + j] = v;
            data[j * n + i] = v;
        }
    }
    Ok(AttentionMatrix { n, data })
}
