use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{glove_weight, CooccurrenceMatrix, GloveError, GloveParams};

/// Pairs with `|log X_ij - b_ij|` below this are left out of `W^G` and `C_i`.
pub const EXCLUSION_EPS: f64 = 1e-6;
/// Smallest usable scale `C_i`.
pub const MIN_SCALE: f64 = 1e-12;
/// Slack allowed when comparing the two sides of an inequality.
pub const BOUND_TOL: f64 = 1e-9;

fn neighborhood(counts: &CooccurrenceMatrix, i: usize) -> Vec<usize> {
    counts
        .row(i)
        .iter()
        .enumerate()
        .filter(|(_, &x)| x > 0.0)
        .map(|(j, _)| j)
        .collect()
}

/// `min ||center - sum_j w_j n_j||^2` subject to `sum_j w_j = 1`.
///
/// Writing `w = e_last + N z` with the null-space basis `e_j - e_last`
/// turns this into ordinary least squares in `z`.
pub fn constrained_recon_cost(center: &[f64], neighbors: &[&[f64]]) -> f64 {
    let d = center.len();
    let last = neighbors[neighbors.len() - 1];
    let b = DVector::from_iterator(d, center.iter().zip(last).map(|(c, l)| c - l));
    if neighbors.len() == 1 {
        return b.norm_squared();
    }
    let a = DMatrix::from_fn(d, neighbors.len() - 1, |r, c| neighbors[c][r] - last[r]);
    let svd = a.clone().svd(true, true);
    let tol = svd.singular_values.max() * 1e-12;
    let z = svd.solve(&b, tol).expect("svd computed with both factors");
    (b - a * z).norm_squared()
}

/// Scaled reconstruction cost of word `i` from its co-occurring words.
///
/// Unconstrained, `min over free w of (1 - sum_j w_j x_ij)^2`: zero as soon
/// as one inner product is nonzero, otherwise 1. Constrained, the LLE cost
/// with weights summing to one, divided by `x_ii`.
pub fn lle_recon_cost(
    p: &GloveParams,
    counts: &CooccurrenceMatrix,
    i: usize,
    constrained: bool,
) -> Result<f64, GloveError> {
    let hood = neighborhood(counts, i);
    if hood.is_empty() {
        return Err(GloveError::EmptyNeighborhood { word: i });
    }
    if !constrained {
        return Ok(if hood.iter().any(|&j| p.inner(i, j) != 0.0) {
            0.0
        } else {
            1.0
        });
    }
    let xii = p.inner(i, i);
    if xii <= 0.0 {
        return Err(GloveError::DegenerateScale { word: i, value: xii });
    }
    let neighbors: Vec<&[f64]> = hood.iter().map(|&j| p.vector(j)).collect();
    Ok(constrained_recon_cost(p.vector(i), &neighbors) / xii)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordCost {
    /// `J_i = sum_j f(X_ij) (x_ij + b_ij - log X_ij)^2`
    pub j_opt: f64,
    /// `C_i = sum_j (log X_ij - b_ij)^2` over non-excluded pairs.
    pub c_scale: f64,
    /// `(j, 1 / (log X_ij - b_ij))` over non-excluded pairs.
    pub weights: Vec<(usize, f64)>,
    pub excluded: usize,
}

fn word_objective(p: &GloveParams, counts: &CooccurrenceMatrix, i: usize) -> f64 {
    neighborhood(counts, i)
        .into_iter()
        .map(|j| {
            let x = counts.get(i, j);
            glove_weight(x, p.x_max, p.alpha) * (p.inner(i, j) + p.bias_pair(i, j) - x.ln()).powi(2)
        })
        .sum()
}

pub fn glove_word_cost(p: &GloveParams, counts: &CooccurrenceMatrix, i: usize) -> Result<WordCost, GloveError> {
    let j_opt = word_objective(p, counts, i);
    let mut c_scale = 0.0;
    let mut weights = Vec::new();
    let mut excluded = 0;
    for j in neighborhood(counts, i) {
        let x = counts.get(i, j);
        let target = x.ln() - p.bias_pair(i, j);
        if target.abs() < EXCLUSION_EPS {
            excluded += 1;
            continue;
        }
        c_scale += target * target;
        weights.push((j, 1.0 / target));
    }
    if c_scale < MIN_SCALE {
        return Err(GloveError::DegenerateScale {
            word: i,
            value: c_scale,
        });
    }
    Ok(WordCost {
        j_opt,
        c_scale,
        weights,
        excluded,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordBound {
    pub index: usize,
    pub word: String,
    pub neighbors: usize,
    /// Every co-occurrence count of the word is at least `x_max`.
    pub sealed: bool,
    /// Some `x_ij` with a neighbor is nonzero.
    pub nonzero_inner: bool,
    pub eps_unconstrained: Option<f64>,
    pub eps_constrained: Option<f64>,
    pub j_opt: Option<f64>,
    pub c_scale: Option<f64>,
    /// `J_i / C_i`
    pub ratio: Option<f64>,
    /// `(1 - sum_j W^G_ij x_ij)^2`
    pub wg_residual: Option<f64>,
    /// `sum_j (1 - W^G_ij x_ij)^2`
    pub sum_form: Option<f64>,
    pub excluded_pairs: usize,
}

impl WordBound {
    /// Scale and both reconstruction costs are available.
    pub fn evaluable(&self) -> bool {
        self.ratio.is_some() && self.eps_unconstrained.is_some() && self.eps_constrained.is_some()
    }

    pub fn unconstrained_holds(&self) -> Option<bool> {
        Some(self.ratio? >= self.eps_unconstrained? - BOUND_TOL)
    }

    pub fn constrained_holds(&self) -> Option<bool> {
        Some(self.ratio? >= self.eps_constrained? - BOUND_TOL)
    }

    pub fn dominance_holds(&self) -> Option<bool> {
        Some(self.eps_unconstrained? <= self.wg_residual? + BOUND_TOL)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundSummary {
    pub words: usize,
    pub evaluable: usize,
    pub sealed: usize,
    pub excluded_pairs: usize,
    /// Fraction of evaluable words with a nonzero inner product for which
    /// `J_i / C_i >= eps_unconstrained`.
    pub unconstrained_fraction: Option<f64>,
    /// Fraction of evaluable words with `eps_unconstrained <= wg_residual`.
    pub dominance_fraction: Option<f64>,
    /// Fraction of sealed evaluable words with `J_i / C_i >= eps_constrained`.
    pub sealed_constrained_fraction: Option<f64>,
    /// The same over every evaluable word.
    pub constrained_fraction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub words: Vec<WordBound>,
    pub summary: BoundSummary,
}

fn fraction<'a>(rows: impl Iterator<Item = &'a WordBound>, test: impl Fn(&WordBound) -> Option<bool>) -> Option<f64> {
    let (mut hit, mut total) = (0usize, 0usize);
    for r in rows {
        if let Some(ok) = test(r) {
            total += 1;
            hit += usize::from(ok);
        }
    }
    (total > 0).then(|| hit as f64 / total as f64)
}

fn word_bound(p: &GloveParams, counts: &CooccurrenceMatrix, i: usize) -> WordBound {
    let hood = neighborhood(counts, i);
    let mut row = WordBound {
        index: i,
        word: counts.vocab[i].clone(),
        neighbors: hood.len(),
        sealed: !hood.is_empty() && hood.iter().all(|&j| counts.get(i, j) >= p.x_max),
        nonzero_inner: hood.iter().any(|&j| p.inner(i, j) != 0.0),
        eps_unconstrained: lle_recon_cost(p, counts, i, false).ok(),
        eps_constrained: lle_recon_cost(p, counts, i, true).ok(),
        j_opt: None,
        c_scale: None,
        ratio: None,
        wg_residual: None,
        sum_form: None,
        excluded_pairs: 0,
    };
    if let Ok(cost) = glove_word_cost(p, counts, i) {
        let weighted: f64 = cost.weights.iter().map(|&(j, w)| w * p.inner(i, j)).sum();
        row.j_opt = Some(cost.j_opt);
        row.c_scale = Some(cost.c_scale);
        row.ratio = Some(cost.j_opt / cost.c_scale);
        row.wg_residual = Some((1.0 - weighted).powi(2));
        row.sum_form = Some(
            cost.weights
                .iter()
                .map(|&(j, w)| (1.0 - w * p.inner(i, j)).powi(2))
                .sum(),
        );
        row.excluded_pairs = cost.excluded;
    } else if !hood.is_empty() {
        row.j_opt = Some(word_objective(p, counts, i));
    }
    row
}

/// Evaluates both reconstruction costs and `J_i / C_i` for every word.
pub fn check_bound(p: &GloveParams, counts: &CooccurrenceMatrix) -> BoundReport {
    let words: Vec<WordBound> = (0..counts.vocab_size())
        .into_par_iter()
        .map(|i| word_bound(p, counts, i))
        .collect();
    let summary = BoundSummary {
        words: words.len(),
        evaluable: words.iter().filter(|w| w.evaluable()).count(),
        sealed: words.iter().filter(|w| w.sealed).count(),
        excluded_pairs: words.iter().map(|w| w.excluded_pairs).sum(),
        unconstrained_fraction: fraction(words.iter().filter(|w| w.evaluable() && w.nonzero_inner), |w| {
            w.unconstrained_holds()
        }),
        dominance_fraction: fraction(words.iter().filter(|w| w.evaluable()), |w| w.dominance_holds()),
        sealed_constrained_fraction: fraction(words.iter().filter(|w| w.evaluable() && w.sealed), |w| {
            w.constrained_holds()
        }),
        constrained_fraction: fraction(words.iter().filter(|w| w.evaluable()), |w| w.constrained_holds()),
    };
    BoundReport { words, summary }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.6}"))
}

impl BoundReport {
    /// Summary block followed by an aligned per-word table.
    pub fn to_text(&self) -> String {
        let s = &self.summary;
        let mut out = String::new();
        let lines = [
            ("words", s.words.to_string()),
            ("evaluable", s.evaluable.to_string()),
            ("sealed", s.sealed.to_string()),
            ("excluded pairs", s.excluded_pairs.to_string()),
            ("unconstrained bound", opt(s.unconstrained_fraction)),
            ("least-squares dominance", opt(s.dominance_fraction)),
            ("constrained bound (sealed)", opt(s.sealed_constrained_fraction)),
            ("constrained bound (all)", opt(s.constrained_fraction)),
        ];
        for (k, v) in lines {
            let _ = writeln!(out, "{k:<28} {v:>12}");
        }
        let _ = writeln!(
            out,
            "\n{:<10} {:>5} {:>6} {:>12} {:>12} {:>12} {:>12} {:>12}",
            "word", "nbrs", "sealed", "eps_free", "eps_sum1", "J/C", "wg_resid", "sum_form"
        );
        for w in &self.words {
            let _ = writeln!(
                out,
                "{:<10} {:>5} {:>6} {:>12} {:>12} {:>12} {:>12} {:>12}",
                w.word,
                w.neighbors,
                if w.sealed { "yes" } else { "no" },
                opt(w.eps_unconstrained),
                opt(w.eps_constrained),
                opt(w.ratio),
                opt(w.wg_residual),
                opt(w.sum_form)
            );
        }
        out
    }
}
