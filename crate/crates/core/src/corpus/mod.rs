//! Input formats: embedding text files, tokenization, pair-classification TSV,
//! and IDX image files.

mod dataset;
mod embedding;
mod mnist;
mod tokenize;

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

pub use dataset::{parse_pair_tsv, PairDataset, PairRecord};
pub use embedding::{parse_embedding_file, EmbeddingTable};
pub use mnist::{load_mnist, write_idx, ImageDataset};
pub use tokenize::{tokenize, tokenize_with_id, TokenSequence};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("line {line}: dimension mismatch, expected {expected} values but found {found}")]
    DimensionMismatch { line: usize, expected: usize, found: usize },
    #[error("embedding file contains no vectors")]
    EmptyEmbeddings,
    #[error("embedding dimension must be positive")]
    ZeroDimension,
    #[error("IDX format: {0}")]
    Idx(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CorpusError {
    fn io_at(line: usize, e: std::io::Error) -> Self {
        CorpusError::Format {
            line,
            msg: e.to_string(),
        }
    }

    fn open(path: &Path, source: std::io::Error) -> Self {
        CorpusError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

pub fn load_embeddings(path: &Path) -> Result<EmbeddingTable, CorpusError> {
    let file = File::open(path).map_err(|e| CorpusError::open(path, e))?;
    parse_embedding_file(BufReader::new(file))
}

pub fn load_pair_tsv(path: &Path) -> Result<PairDataset, CorpusError> {
    let file = File::open(path).map_err(|e| CorpusError::open(path, e))?;
    parse_pair_tsv(BufReader::new(file))
}

pub fn load_mnist_files(images: &Path, labels: &Path) -> Result<ImageDataset, CorpusError> {
    let img = File::open(images).map_err(|e| CorpusError::open(images, e))?;
    let lab = File::open(labels).map_err(|e| CorpusError::open(labels, e))?;
    load_mnist(BufReader::new(img), BufReader::new(lab))
}
