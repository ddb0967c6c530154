use std::io::BufRead;

use serde::{Deserialize, Serialize};

use super::CorpusError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairRecord {
    pub group_id: String,
    pub label: usize,
    pub text_a: String,
    pub text_b: Option<String>,
}

/// Canonical container for (pair) classification data.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairDataset {
    pub records: Vec<PairRecord>,
}

impl PairDataset {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// One more than the largest label present (0 for an empty dataset).
    pub fn num_classes(&self) -> usize {
        self.records.iter().map(|r| r.label + 1).max().unwrap_or(0)
    }

    pub fn labels(&self) -> Vec<usize> {
        self.records.iter().map(|r| r.label).collect()
    }

    /// Serializes back to the TSV format read by [`parse_pair_tsv`].
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&r.group_id);
            out.push('\t');
            out.push_str(&r.label.to_string());
            out.push('\t');
            out.push_str(&r.text_a);
            if let Some(b) = &r.text_b {
                out.push('\t');
                out.push_str(b);
            }
            out.push('\n');
        }
        out
    }
}

/// Reads `group_id TAB label TAB text_a [TAB text_b]` lines. Blank lines are
/// skipped.
pub fn parse_pair_tsv<R: BufRead>(reader: R) -> Result<PairDataset, CorpusError> {
    let mut records = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| CorpusError::io_at(line_no, e))?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if !(3..=4).contains(&cols.len()) {
            return Err(CorpusError::Format {
                line: line_no,
                msg: format!("expected 3 or 4 tab-separated columns, found {}", cols.len()),
            });
        }
        if cols[0].is_empty() {
            return Err(CorpusError::Format {
                line: line_no,
                msg: "empty group id".into(),
            });
        }
        let label = cols[1].trim().parse::<usize>().map_err(|_| CorpusError::Format {
            line: line_no,
            msg: format!("label {:?} is not a non-negative integer", cols[1]),
        })?;
        records.push(PairRecord {
            group_id: cols[0].to_string(),
            label,
            text_a: cols[2].to_string(),
            text_b: cols.get(3).map(|s| s.to_string()),
        });
    }
    Ok(PairDataset { records })
}
