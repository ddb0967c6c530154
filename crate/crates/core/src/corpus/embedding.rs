use std::collections::HashMap;
use std::io::{BufRead, Write};

use super::CorpusError;

/// Immutable token → vector map. Tokens that are not present resolve to the
/// all-zero vector (the UNK policy).
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    dim: usize,
    index: HashMap<String, usize>,
    tokens: Vec<String>,
    values: Vec<f32>,
    zero: Vec<f32>,
}

impl EmbeddingTable {
    /// Builds a table from `(token, vector)` pairs. The first occurrence of a
    /// token wins.
    pub fn from_entries<I, S>(dim: usize, entries: I) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = (S, Vec<f32>)>,
        S: Into<String>,
    {
        if dim == 0 {
            return Err(CorpusError::ZeroDimension);
        }
        let mut table = Self::empty(dim);
        for (i, (token, vector)) in entries.into_iter().enumerate() {
            if vector.len() != dim {
                return Err(CorpusError::DimensionMismatch {
                    line: i + 1,
                    expected: dim,
                    found: vector.len(),
                });
            }
            table.insert(token.into(), &vector);
        }
        Ok(table)
    }

    fn empty(dim: usize) -> Self {
        Self {
            dim,
            index: HashMap::new(),
            tokens: Vec::new(),
            values: Vec::new(),
            zero: vec![0.0; dim],
        }
    }

    fn insert(&mut self, token: String, vector: &[f32]) {
        if self.index.contains_key(&token) {
            return;
        }
        self.index.insert(token.clone(), self.tokens.len());
        self.tokens.push(token);
        self.values.extend_from_slice(vector);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    /// Vector for `token`, or the zero vector when the token is unknown.
    pub fn lookup(&self, token: &str) -> &[f32] {
        self.get(token).unwrap_or(&self.zero)
    }

    pub fn get(&self, token: &str) -> Option<&[f32]> {
        self.index
            .get(token)
            .map(|&i| &self.values[i * self.dim..(i + 1) * self.dim])
    }

    /// Tokens in insertion order.
    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(String::as_str)
    }

    /// Returns a copy with every vector replaced by `f(vector)`.
    pub fn map_vectors<F>(&self, mut f: F) -> Self
    where
        F: FnMut(&[f32]) -> Vec<f32>,
    {
        let mut values = Vec::with_capacity(self.values.len());
        for chunk in self.values.chunks(self.dim) {
            let mapped = f(chunk);
            assert_eq!(mapped.len(), self.dim, "mapped vector changed dimension");
            values.extend(mapped);
        }
        Self {
            dim: self.dim,
            index: self.index.clone(),
            tokens: self.tokens.clone(),
            values,
            zero: self.zero.clone(),
        }
    }

    /// Writes the table in the whitespace-separated text format accepted by
    /// [`parse_embedding_file`].
    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (i, token) in self.tokens.iter().enumerate() {
            write!(out, "{token}")?;
            for v in &self.values[i * self.dim..(i + 1) * self.dim] {
                // f64 display of an exact f32 value parses back to the same f32
                write!(out, " {}", f64::from(*v))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Parses `token v1 v2 ... vd` lines. Blank lines are skipped; the
/// dimension is fixed by the first record.
pub fn parse_embedding_file<R: BufRead>(reader: R) -> Result<EmbeddingTable, CorpusError> {
    let mut table: Option<EmbeddingTable> = None;
    let mut buf = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| CorpusError::io_at(line_no, e))?;
        let mut fields = line.split_whitespace();
        let Some(token) = fields.next() else {
            continue;
        };
        buf.clear();
        for field in fields {
            let v: f64 = field.parse().map_err(|_| CorpusError::Format {
                line: line_no,
                msg: format!("non-numeric value {field:?}"),
            })?;
            buf.push(v as f32);
        }
        if buf.is_empty() {
            return Err(CorpusError::Format {
                line: line_no,
                msg: format!("token {token:?} has no vector components"),
            });
        }
        let table = table.get_or_insert_with(|| EmbeddingTable::empty(buf.len()));
        if buf.len() != table.dim {
            return Err(CorpusError::DimensionMismatch {
                line: line_no,
                expected: table.dim,
                found: buf.len(),
            });
        }
        table.insert(token.to_string(), &buf);
    }
    table.ok_or(CorpusError::EmptyEmbeddings)
}
