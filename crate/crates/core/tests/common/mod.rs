//! Brute-force oracles and randomized check suites shared by the integration
//! tests and the acceptance runner.
#![allow(dead_code)]

use std::collections::HashMap;

use d2i_core::corpus::{EmbeddingTable, TokenSequence};
use d2i_core::experiment::mrr;
use d2i_core::glove::count_cooccurrence;
use d2i_core::nn::{
    conv2d_forward, grad_check, maxpool_forward, ArchitectureConfig, CnnModel, EngineRng, GradCheckConfig, LayerSpec,
    Scalar, Shape3, Tensor4,
};
use d2i_core::transform::{
    d2i, edge_response, offset_of_column, self_attention_full, Boundary, D2IConfig, Normalization,
};
use rand::{Rng, SeedableRng};

/// Outcome of one named check: worst error seen and the number of cases run.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub cases: usize,
    pub max_error: f64,
    pub tolerance: f64,
    pub failures: Vec<String>,
}

impl Check {
    fn new(name: &str, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            cases: 0,
            max_error: 0.0,
            tolerance,
            failures: Vec::new(),
        }
    }

    fn record(&mut self, err: f64, context: impl FnOnce() -> String) {
        self.max_error = self.max_error.max(err);
        if (err.is_nan() || err > self.tolerance) && self.failures.len() < 5 {
            self.failures.push(format!("{} (error {err:e})", context()));
        }
    }

    fn fail(&mut self, context: String) {
        self.max_error = f64::INFINITY;
        if self.failures.len() < 5 {
            self.failures.push(context);
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.max_error <= self.tolerance
    }

    pub fn line(&self) -> String {
        format!(
            "{}: {} cases, max error {:.3e} (tolerance {:.0e}){}",
            self.name,
            self.cases,
            self.max_error,
            self.tolerance,
            if self.failures.is_empty() {
                String::new()
            } else {
                format!("; first failure: {}", self.failures[0])
            }
        )
    }
}

/// Error of `a` against `b`, relative once `|b|` exceeds one.
pub fn scaled_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

// ---------------------------------------------------------------- generators

pub fn random_table(rng: &mut EngineRng, vocab: usize, dim: usize) -> EmbeddingTable {
    let scale = 1.0 / (dim as f64).sqrt();
    let entries = (0..vocab).map(|i| {
        let v: Vec<f32> = (0..dim).map(|_| (rng.random_range(-1.0..1.0) * scale) as f32).collect();
        (format!("t{i}"), v)
    });
    EmbeddingTable::from_entries(dim, entries.collect::<Vec<_>>()).unwrap()
}

/// Document over `t0..t{vocab}`; each position is an out-of-table word with
/// probability `unk`.
pub fn random_doc(rng: &mut EngineRng, vocab: usize, len: usize, unk: f64) -> TokenSequence {
    let words: Vec<String> = (0..len)
        .map(|_| {
            if rng.random_bool(unk) {
                "unk".to_string()
            } else {
                format!("t{}", rng.random_range(0..vocab))
            }
        })
        .collect();
    TokenSequence::new("doc", words)
}

/// Applies a product of three random Householder reflections to every
/// vector, an orthogonal map.
pub fn rotate_table(rng: &mut EngineRng, table: &EmbeddingTable) -> EmbeddingTable {
    let d = table.dim();
    let reflections: Vec<Vec<f64>> = (0..3)
        .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    table.map_vectors(|v| {
        let mut x: Vec<f64> = v.iter().map(|&a| f64::from(a)).collect();
        for h in &reflections {
            let hh: f64 = h.iter().map(|a| a * a).sum();
            if hh == 0.0 {
                continue;
            }
            let hx: f64 = h.iter().zip(&x).map(|(a, b)| a * b).sum();
            for (xi, hi) in x.iter_mut().zip(h) {
                *xi -= 2.0 * hi * hx / hh;
            }
        }
        x.into_iter().map(|a| a as f32).collect()
    })
}

// ------------------------------------------------------------------- oracles

fn vector_of(table: &EmbeddingTable, token: &str) -> Vec<f64> {
    match table.get(token) {
        Some(v) => v.iter().map(|&a| f64::from(a)).collect(),
        None => vec![0.0; table.dim()],
    }
}

fn dot64(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        s += a[i] * b[i];
    }
    s
}

/// Dense inner-product matrix by direct double loop.
pub fn oracle_attention(seq: &TokenSequence, table: &EmbeddingTable) -> Vec<Vec<f64>> {
    let vs: Vec<Vec<f64>> = seq.tokens.iter().map(|t| vector_of(table, t)).collect();
    vs.iter().map(|a| vs.iter().map(|b| dot64(a, b)).collect()).collect()
}

/// Unelided, unnormalized banded image; columns hold offsets `-k..-1, 1..k`.
pub fn oracle_d2i(seq: &TokenSequence, table: &EmbeddingTable, k: usize, circular: bool) -> Vec<Vec<f64>> {
    let n = seq.len() as isize;
    let wrap = circular && seq.len() > 2 * k;
    let full = oracle_attention(seq, table);
    let mut offsets: Vec<isize> = (1..=k as isize).map(|m| -m).rev().collect();
    offsets.extend(1..=k as isize);
    (0..n)
        .map(|i| {
            offsets
                .iter()
                .map(|&o| {
                    let j = i + o;
                    if (0..n).contains(&j) {
                        full[i as usize][j as usize]
                    } else if wrap {
                        full[i as usize][j.rem_euclid(n) as usize]
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect()
}

/// Direct "same" cross-correlation with padding `(q-1)/2` before.
#[allow(clippy::too_many_arguments)]
pub fn oracle_conv(x: &[f64], dims: [usize; 4], w: &[f64], bias: &[f64], q: usize) -> Vec<f64> {
    let [b, c, h, wd] = dims;
    let oc = bias.len();
    let pad = ((q - 1) / 2) as isize;
    let mut out = vec![0.0; b * oc * h * wd];
    for n in 0..b {
        for o in 0..oc {
            for y in 0..h {
                for xx in 0..wd {
                    let mut s = bias[o];
                    for ch in 0..c {
                        for ky in 0..q {
                            for kx in 0..q {
                                let sy = y as isize + ky as isize - pad;
                                let sx = xx as isize + kx as isize - pad;
                                if sy < 0 || sx < 0 || sy >= h as isize || sx >= wd as isize {
                                    continue;
                                }
                                let xi = ((n * c + ch) * h + sy as usize) * wd + sx as usize;
                                let wi = ((o * c + ch) * q + ky) * q + kx;
                                s += x[xi] * w[wi];
                            }
                        }
                    }
                    out[((n * oc + o) * h + y) * wd + xx] = s;
                }
            }
        }
    }
    out
}

/// 2x2 stride-2 max pooling over a partial last window; returns values and
/// the in-item flat index of the first maximum in scan order.
pub fn oracle_maxpool(x: &[f64], dims: [usize; 4]) -> (Vec<f64>, Vec<u32>) {
    let [b, c, h, w] = dims;
    let (oh, ow) = (h.div_ceil(2), w.div_ceil(2));
    let mut vals = Vec::new();
    let mut idx = Vec::new();
    for n in 0..b {
        for ch in 0..c {
            for oy in 0..oh {
                for ox in 0..ow {
                    let mut cands = Vec::new();
                    for dy in 0..2 {
                        for dx in 0..2 {
                            let (y, xx) = (2 * oy + dy, 2 * ox + dx);
                            if y < h && xx < w {
                                cands.push((ch * h + y) * w + xx);
                            }
                        }
                    }
                    let item = &x[n * c * h * w..];
                    let best = cands.iter().map(|&i| item[i]).fold(f64::NEG_INFINITY, f64::max);
                    let first = *cands.iter().find(|&&i| item[i] == best).unwrap();
                    vals.push(best);
                    idx.push(first as u32);
                }
            }
        }
    }
    (vals, idx)
}

/// Directed co-occurrence counts by enumerating every ordered position pair.
pub fn oracle_cooccurrence(corpus: &[TokenSequence], window: usize) -> HashMap<(String, String), f64> {
    let mut counts = HashMap::new();
    for doc in corpus {
        let t = &doc.tokens;
        for p in 0..t.len() {
            for q in 0..t.len() {
                if p != q && p.abs_diff(q) <= window && t[p] != t[q] {
                    *counts.entry((t[p].clone(), t[q].clone())).or_insert(0.0) += 1.0;
                }
            }
        }
    }
    counts
}

/// Per group, the rank of the best-placed positive, where a candidate's rank
/// is one plus the number of candidates scoring higher or tying earlier.
pub fn oracle_first_ranks(groups: &[String], scores: &[f64], labels: &[usize]) -> Vec<(String, Option<usize>)> {
    let mut seen: Vec<String> = Vec::new();
    for g in groups {
        if !seen.contains(g) {
            seen.push(g.clone());
        }
    }
    seen.into_iter()
        .map(|g| {
            let members: Vec<usize> = (0..groups.len()).filter(|&i| groups[i] == g).collect();
            let rank = members
                .iter()
                .filter(|&&i| labels[i] == 1)
                .map(|&i| {
                    1 + members
                        .iter()
                        .filter(|&&j| scores[j] > scores[i] || (scores[j] == scores[i] && j < i))
                        .count()
                })
                .min();
            (g, rank)
        })
        .collect()
}

pub fn oracle_mrr(groups: &[String], scores: &[f64], labels: &[usize]) -> Option<f64> {
    let ranks: Vec<usize> = oracle_first_ranks(groups, scores, labels)
        .into_iter()
        .filter_map(|(_, r)| r)
        .collect();
    if ranks.is_empty() {
        None
    } else {
        Some(ranks.iter().map(|&r| 1.0 / r as f64).sum::<f64>() / ranks.len() as f64)
    }
}

// -------------------------------------------------------------------- suites

fn raw_cfg(k: usize, boundary: Boundary) -> D2IConfig {
    D2IConfig {
        k,
        boundary,
        drop_zero_rows: false,
        normalize: Normalization::None,
    }
}

fn image_rows(seq: &TokenSequence, table: &EmbeddingTable, cfg: &D2IConfig) -> Vec<Vec<f64>> {
    match d2i(seq, table, cfg).unwrap() {
        Some(img) => (0..img.rows)
            .map(|r| img.row(r).iter().map(|&v| f64::from(v)).collect())
            .collect(),
        None => Vec::new(),
    }
}

fn max_row_error(a: &[Vec<f64>], b: &[Vec<f64>], f: impl Fn(f64) -> f64) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut worst = 0.0f64;
    for (ra, rb) in a.iter().zip(b) {
        if ra.len() != rb.len() {
            return f64::INFINITY;
        }
        for (&x, &y) in ra.iter().zip(rb) {
            worst = worst.max(scaled_error(x, f(y)));
        }
    }
    worst
}

pub const KS: [usize; 3] = [1, 3, 25];

/// Randomized D2I property suite: every property runs once per trial, with
/// `k` cycling through [`KS`].
pub fn d2i_invariant_suite(trials: usize, seed: u64) -> Vec<Check> {
    let mut rng = EngineRng::seed_from_u64(seed);
    let mut construction = Check::new("brute-force construction", 1e-6);
    let mut orthogonal = Check::new("orthogonal invariance", 1e-6);
    let mut scaling = Check::new("scaling by c gives c^2", 1e-6);
    let mut symmetry = Check::new("neighbor symmetry", 0.0);
    let mut shift = Check::new("circular shift equivariance", 0.0);
    let mut elision = Check::new("zero-row elision", 0.0);
    let mut edge = Check::new("edge identity", 1e-6);

    for t in 0..trials {
        let k = KS[t % KS.len()];
        let dim = rng.random_range(1..=8);
        let vocab = rng.random_range(1..=12);
        let table = random_table(&mut rng, vocab, dim);
        let n = rng.random_range(1..=2 * k + 12);
        let unk = if rng.random_bool(0.3) { 0.4 } else { 0.05 };
        let seq = random_doc(&mut rng, vocab, n, unk);
        let ctx = || format!("trial {t}: k={k} n={n} dim={dim}");

        for circular in [false, true] {
            let b = if circular {
                Boundary::Circular
            } else {
                Boundary::ZeroPad
            };
            let got = image_rows(&seq, &table, &raw_cfg(k, b));
            construction.record(max_row_error(&got, &oracle_d2i(&seq, &table, k, circular), |v| v), ctx);
        }
        construction.cases += 1;

        let raw = image_rows(&seq, &table, &raw_cfg(k, Boundary::ZeroPad));
        let rotated = image_rows(&seq, &rotate_table(&mut rng, &table), &raw_cfg(k, Boundary::ZeroPad));
        orthogonal.record(max_row_error(&rotated, &raw, |v| v), ctx);
        orthogonal.cases += 1;

        let c: f64 = rng.random_range(0.25..3.0);
        let scaled_table = table.map_vectors(|v| v.iter().map(|&a| (f64::from(a) * c) as f32).collect());
        let scaled = image_rows(&seq, &scaled_table, &raw_cfg(k, Boundary::ZeroPad));
        scaling.record(max_row_error(&scaled, &raw, |v| v * c * c), ctx);
        scaling.cases += 1;

        let col = |o: isize| (0..2 * k).find(|&c| offset_of_column(c, k) == o).unwrap();
        for i in 0..n {
            for m in 1..=k {
                if i + m < n {
                    let a = raw[i][col(m as isize)];
                    let b = raw[i + m][col(-(m as isize))];
                    if a != b {
                        symmetry.fail(format!("{}: row {i} offset +{m}", ctx()));
                    }
                }
            }
        }
        symmetry.cases += 1;

        // circular needs n > 2k; build a long enough document
        let long_n = 2 * k + 1 + rng.random_range(0..10);
        let long = random_doc(&mut rng, vocab, long_n, unk);
        let r = rng.random_range(0..long_n);
        let mut rotated_tokens = long.tokens.clone();
        rotated_tokens.rotate_left(r);
        let base = image_rows(&long, &table, &raw_cfg(k, Boundary::Circular));
        let turned = image_rows(
            &TokenSequence::new("doc", rotated_tokens),
            &table,
            &raw_cfg(k, Boundary::Circular),
        );
        for i in 0..long_n {
            if turned[i] != base[(i + r) % long_n] {
                shift.fail(format!("{}: shift {r}, row {i}", ctx()));
                break;
            }
        }
        shift.cases += 1;

        let dropped = d2i(
            &seq,
            &table,
            &D2IConfig {
                drop_zero_rows: true,
                ..raw_cfg(k, Boundary::ZeroPad)
            },
        )
        .unwrap();
        let expect: Vec<usize> = (0..n).filter(|&i| raw[i].iter().any(|&v| v != 0.0)).collect();
        match dropped {
            None if expect.is_empty() => {}
            None => elision.fail(format!("{}: empty signal but {} nonzero rows", ctx(), expect.len())),
            Some(img) => {
                let rows_ok = img.kept_word_indices == expect
                    && expect
                        .iter()
                        .enumerate()
                        .all(|(r, &i)| img.row(r).iter().map(|&v| f64::from(v)).eq(raw[i].iter().copied()));
                if !rows_ok || img.cols != 2 * k {
                    elision.fail(format!(
                        "{}: kept {:?}, expected {:?}",
                        ctx(),
                        img.kept_word_indices,
                        expect
                    ));
                }
            }
        }
        elision.cases += 1;

        if let Some(img) = d2i(&seq, &table, &raw_cfg(k, Boundary::ZeroPad)).unwrap() {
            let report = edge_response(&img, &seq, &table).unwrap();
            edge.record(report.max_discrepancy, ctx);
        }
        edge.cases += 1;
    }
    vec![construction, orthogonal, scaling, symmetry, shift, elision, edge]
}

fn random_tensor(rng: &mut EngineRng, dims: [usize; 4], integer: bool) -> Vec<f64> {
    let n: usize = dims.iter().product();
    (0..n)
        .map(|_| {
            if integer {
                f64::from(rng.random_range(-2i32..=2))
            } else {
                rng.random_range(-1.0..1.0)
            }
        })
        .collect()
}

/// Compares library kernels with the brute-force oracles above on
/// `instances` random small inputs each.
pub fn oracle_suite(instances: usize, seed: u64) -> Vec<Check> {
    let mut rng = EngineRng::seed_from_u64(seed);
    let mut attention = Check::new("self_attention_full", 1e-6);
    let mut conv = Check::new("conv2d", 1e-6);
    let mut pool = Check::new("maxpool", 0.0);
    let mut cooc = Check::new("count_cooccurrence", 0.0);
    let mut ranks = Check::new("grouped MRR", 1e-12);

    for t in 0..instances {
        let dim = rng.random_range(1..=8);
        let vocab = rng.random_range(1..=10);
        let table = random_table(&mut rng, vocab, dim);
        let len = rng.random_range(1..=20);
        let seq = random_doc(&mut rng, vocab, len, 0.1);
        let m = self_attention_full(&seq, &table).unwrap();
        let want = oracle_attention(&seq, &table);
        let mut err = 0.0f64;
        for (i, row) in want.iter().enumerate() {
            for (j, &w) in row.iter().enumerate() {
                err = err.max(scaled_error(f64::from(m.get(i, j)), w));
            }
        }
        attention.record(err, || format!("instance {t}"));
        attention.cases += 1;

        let q = [1, 2, 3, 5][rng.random_range(0..4)];
        let dims = [
            rng.random_range(1..=3),
            rng.random_range(1..=3),
            rng.random_range(1..=7),
            rng.random_range(1..=7),
        ];
        let oc = rng.random_range(1..=4);
        let x = random_tensor(&mut rng, dims, false);
        let w: Vec<f64> = (0..oc * dims[1] * q * q).map(|_| rng.random_range(-1.0..1.0)).collect();
        let bias: Vec<f64> = (0..oc).map(|_| rng.random_range(-1.0..1.0)).collect();
        let got = conv2d_forward(&Tensor4::from_vec(dims, x.clone()).unwrap(), &w, &bias, q).unwrap();
        let want = oracle_conv(&x, dims, &w, &bias, q);
        let err = got
            .data()
            .iter()
            .zip(&want)
            .map(|(&a, &b)| scaled_error(a, b))
            .fold(0.0, f64::max);
        conv.record(err, || format!("instance {t}: dims {dims:?} q={q}"));
        // the f32 path agrees to single-precision accuracy
        let got32 = conv2d_forward(
            &Tensor4::from_vec(dims, x.iter().map(|&v| v as f32).collect()).unwrap(),
            &w.iter().map(|&v| v as f32).collect::<Vec<_>>(),
            &bias.iter().map(|&v| v as f32).collect::<Vec<_>>(),
            q,
        )
        .unwrap();
        let err32 = got32
            .data()
            .iter()
            .zip(&want)
            .map(|(&a, &b)| scaled_error(f64::from(a), b))
            .fold(0.0, f64::max);
        if err32 > 1e-5 {
            conv.fail(format!("instance {t}: f32 path off by {err32:e}"));
        }
        conv.cases += 1;

        let pdims = [
            rng.random_range(1..=2),
            rng.random_range(1..=3),
            rng.random_range(1..=7),
            rng.random_range(1..=7),
        ];
        let px = random_tensor(&mut rng, pdims, t % 2 == 0);
        let (pv, pi) = maxpool_forward(&Tensor4::from_vec(pdims, px.clone()).unwrap());
        let (wv, wi) = oracle_maxpool(&px, pdims);
        if pv.data() != &wv[..] || pi != wi {
            pool.fail(format!("instance {t}: dims {pdims:?}"));
        }
        pool.cases += 1;

        let docs: Vec<TokenSequence> = (0..rng.random_range(1..=4))
            .map(|_| {
                let len = rng.random_range(1..=15);
                random_doc(&mut rng, vocab.min(6), len, 0.0)
            })
            .collect();
        let window = rng.random_range(1..=4);
        let x = count_cooccurrence(&docs, window).unwrap();
        let want = oracle_cooccurrence(&docs, window);
        let mut first_seen: Vec<&String> = Vec::new();
        for d in &docs {
            for tok in &d.tokens {
                if !first_seen.contains(&tok) {
                    first_seen.push(tok);
                }
            }
        }
        let mut ok = x.vocab.iter().collect::<Vec<_>>() == first_seen;
        for (i, a) in x.vocab.iter().enumerate() {
            for (j, b) in x.vocab.iter().enumerate() {
                let expect = want.get(&(a.clone(), b.clone())).copied().unwrap_or(0.0);
                ok &= x.get(i, j) == expect;
            }
        }
        if !ok {
            cooc.fail(format!("instance {t}: window {window}"));
        }
        cooc.cases += 1;

        let items = rng.random_range(1..=30);
        let ngroups = rng.random_range(1..=5);
        let groups: Vec<String> = (0..items)
            .map(|_| format!("g{}", rng.random_range(0..ngroups)))
            .collect();
        let scores: Vec<f64> = (0..items).map(|_| f64::from(rng.random_range(0..6)) / 5.0).collect();
        let labels: Vec<usize> = (0..items).map(|_| usize::from(rng.random_bool(0.3))).collect();
        let lib_ranks: Vec<(String, Option<usize>)> = d2i_core::experiment::group_ranks(&groups, &scores, &labels)
            .into_iter()
            .map(|g| (g.group, g.first_positive_rank))
            .collect();
        if lib_ranks != oracle_first_ranks(&groups, &scores, &labels) {
            ranks.fail(format!("instance {t}: rankings differ"));
        }
        match (mrr(&groups, &scores, &labels), oracle_mrr(&groups, &scores, &labels)) {
            (None, None) => {}
            (Some(a), Some(b)) => ranks.record((a - b).abs(), || format!("instance {t}")),
            (a, b) => ranks.fail(format!("instance {t}: {a:?} vs {b:?}")),
        }
        ranks.cases += 1;
    }
    vec![attention, conv, pool, cooc, ranks]
}

fn uniform_batch<T: Scalar>(rng: &mut EngineRng, dims: [usize; 4]) -> Tensor4<T> {
    let n = dims.iter().product();
    Tensor4::from_vec(dims, (0..n).map(|_| T::from_f64(rng.random_range(-1.0..1.0))).collect()).unwrap()
}

/// Small models that together exercise every layer kind, plus the full
/// stack at reduced width.
pub fn gradcheck_models() -> Vec<(&'static str, Shape3, Vec<LayerSpec>)> {
    use LayerSpec::*;
    let conv = |out_channels, kernel| Conv2d { out_channels, kernel };
    vec![
        ("dense+softmax", Shape3::new(2, 3, 3), vec![Dense { units: 3 }, Softmax]),
        (
            "conv",
            Shape3::new(2, 5, 4),
            vec![conv(3, 3), Dense { units: 3 }, Softmax],
        ),
        (
            "conv even kernel",
            Shape3::new(1, 4, 5),
            vec![conv(2, 2), Dense { units: 3 }, Softmax],
        ),
        (
            "relu",
            Shape3::new(1, 3, 3),
            vec![Dense { units: 6 }, Relu, Dense { units: 3 }, Softmax],
        ),
        (
            "maxpool",
            Shape3::new(1, 5, 6),
            vec![conv(2, 3), MaxPool2, Dense { units: 3 }, Softmax],
        ),
        (
            "dropout",
            Shape3::new(1, 3, 3),
            vec![Dense { units: 8 }, Dropout { rate: 0.5 }, Dense { units: 3 }, Softmax],
        ),
        (
            "reduced stack",
            Shape3::new(1, 10, 8),
            ArchitectureConfig {
                conv1_channels: 3,
                conv2_channels: 4,
                kernel: 5,
                dense_units: 8,
                dropout: 0.4,
            }
            .layers(3),
        ),
    ]
}

fn run_gradcheck<T: Scalar>(
    name: &str,
    input: Shape3,
    specs: &[LayerSpec],
    cfg: &GradCheckConfig,
    tol: f64,
    seed: u64,
) -> Check {
    let mut rng = EngineRng::seed_from_u64(seed);
    let mut check = Check::new(name, tol);
    let model: CnnModel<T> = CnnModel::new(input, specs, &mut rng).unwrap();
    let x = uniform_batch::<T>(&mut rng, [4, input.channels, input.height, input.width]);
    let report = grad_check(&model, &x, &[0, 1, 2, 1], cfg).unwrap();
    check.cases = report.checked;
    check.record(report.max_rel_error, || {
        format!("{} skipped kinks", report.skipped_kinks)
    });
    if report.checked == 0 {
        check.fail("no coordinate checked".into());
    }
    check
}

/// Gradient checks at both precisions. Returns (f32 checks, f64 checks).
pub fn gradcheck_suite() -> (Vec<Check>, Vec<Check>) {
    let mut single = Vec::new();
    let mut double = Vec::new();
    for (i, (name, input, specs)) in gradcheck_models().into_iter().enumerate() {
        let seed = 100 + i as u64;
        single.push(run_gradcheck::<f32>(
            &format!("{name} (32-bit)"),
            input,
            &specs,
            &GradCheckConfig::single_precision(),
            1e-3,
            seed,
        ));
        double.push(run_gradcheck::<f64>(
            &format!("{name} (64-bit)"),
            input,
            &specs,
            &GradCheckConfig::double_precision(),
            1e-6,
            seed,
        ));
    }
    (single, double)
}
