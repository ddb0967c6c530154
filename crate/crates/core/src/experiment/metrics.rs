use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

/// Label of the relevant class for F1 and MRR.
pub const POSITIVE: usize = 1;
/// Positive-class probability at or above which F1 counts a prediction as
/// positive.
pub const F1_THRESHOLD: f64 = 0.5;

pub fn accuracy(preds: &[usize], labels: &[usize]) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    preds.iter().zip(labels).filter(|(p, l)| p == l).count() as f64 / labels.len() as f64
}

/// F1 of the positive class; 0 when precision and recall are both 0.
pub fn f1_binary(preds: &[usize], labels: &[usize]) -> f64 {
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for (&p, &l) in preds.iter().zip(labels) {
        match (p == POSITIVE, l == POSITIVE) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    let precision = if tp + fp == 0 {
        0.0
    } else {
        tp as f64 / (tp + fp) as f64
    };
    let recall = if tp + fn_ == 0 {
        0.0
    } else {
        tp as f64 / (tp + fn_) as f64
    };
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Mean squared difference between probability rows and one-hot labels,
/// averaged over every entry.
pub fn mse_labels(probs: &[f32], classes: usize, labels: &[usize]) -> f64 {
    if labels.is_empty() || classes == 0 {
        return 0.0;
    }
    let total: f64 = probs
        .chunks(classes)
        .zip(labels)
        .map(|(row, &l)| {
            row.iter()
                .enumerate()
                .map(|(c, &p)| {
                    let target = if c == l { 1.0 } else { 0.0 };
                    (f64::from(p) - target).powi(2)
                })
                .sum::<f64>()
        })
        .sum();
    total / (labels.len() * classes) as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupDiagnostics {
    pub group: String,
    pub candidates: usize,
    pub positives: usize,
    /// 1-based rank of the first positive candidate.
    pub first_positive_rank: Option<usize>,
}

/// Ranks each group's candidates by descending score (ties keep input
/// order). Groups appear in order of first occurrence.
pub fn group_ranks(groups: &[String], scores: &[f64], labels: &[usize]) -> Vec<GroupDiagnostics> {
    let mut order: Vec<&str> = Vec::new();
    let mut members: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, g) in groups.iter().enumerate() {
        members
            .entry(g.as_str())
            .or_insert_with(|| {
                order.push(g.as_str());
                Vec::new()
            })
            .push(i);
    }
    order
        .into_iter()
        .map(|g| {
            let mut idx = members[g].clone();
            idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
            GroupDiagnostics {
                group: g.to_string(),
                candidates: idx.len(),
                positives: idx.iter().filter(|&&i| labels[i] == POSITIVE).count(),
                first_positive_rank: idx.iter().position(|&i| labels[i] == POSITIVE).map(|r| r + 1),
            }
        })
        .collect()
}

/// Mean reciprocal rank over groups holding at least one positive; `None`
/// when no group does.
pub fn mrr(groups: &[String], scores: &[f64], labels: &[usize]) -> Option<f64> {
    mrr_from_diagnostics(&group_ranks(groups, scores, labels))
}

fn mrr_from_diagnostics(diag: &[GroupDiagnostics]) -> Option<f64> {
    let ranks: Vec<usize> = diag.iter().filter_map(|d| d.first_positive_rank).collect();
    (!ranks.is_empty()).then(|| ranks.iter().map(|&r| 1.0 / r as f64).sum::<f64>() / ranks.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub examples: usize,
    pub accuracy: f64,
    /// Only for two-class problems.
    pub f1_positive: Option<f64>,
    pub mrr: Option<f64>,
    pub mse: f64,
    /// Records that produced an empty image and were scored on a blank one.
    pub empty_records: usize,
    pub groups: Vec<GroupDiagnostics>,
}

fn argmax(row: &[f32]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

impl MetricsReport {
    /// Computes every metric from a row-major `examples x classes`
    /// probability matrix.
    pub fn from_probabilities(probs: &[f32], classes: usize, labels: &[usize], groups: &[String]) -> Self {
        let preds: Vec<usize> = probs.chunks(classes).map(argmax).collect();
        let positive: Vec<f64> = probs
            .chunks(classes)
            .map(|row| row.get(POSITIVE).map_or(0.0, |&p| f64::from(p)))
            .collect();
        let thresholded: Vec<usize> = positive.iter().map(|&p| usize::from(p >= F1_THRESHOLD)).collect();
        let diag = group_ranks(groups, &positive, labels);
        Self {
            examples: labels.len(),
            accuracy: accuracy(&preds, labels),
            f1_positive: (classes == 2).then(|| f1_binary(&thresholded, labels)),
            mrr: mrr_from_diagnostics(&diag),
            mse: mse_labels(probs, classes, labels),
            empty_records: 0,
            groups: diag,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Aligned two-column table of the headline metrics.
    pub fn to_text(&self) -> String {
        let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"));
        let rows = [
            ("examples", self.examples.to_string()),
            ("accuracy", fmt(Some(self.accuracy))),
            ("f1_positive", fmt(self.f1_positive)),
            ("mrr", fmt(self.mrr)),
            ("mse", fmt(Some(self.mse))),
            ("empty_records", self.empty_records.to_string()),
            ("groups", self.groups.len().to_string()),
        ];
        let mut out = String::new();
        for (k, v) in rows {
            let _ = writeln!(out, "{k:<14} {v:>10}");
        }
        out
    }
}
