//! Kernels for the fixed layer set. All functions work on whole batches.

use super::{NnError, Scalar, Tensor4};

/// Padding before/after for a "same" convolution with kernel size `q`.
pub(crate) fn same_padding(q: usize) -> (usize, usize) {
    let before = (q - 1) / 2;
    (before, q - 1 - before)
}

/// Images per im2col block. Batching several images into one patch matrix
/// keeps the GEMMs large without holding the whole batch unfolded.
const CONV_BLOCK: usize = 32;

/// Unfolds one `[c, h, w]` image into `[c*q*q, h*w]` patch columns. Rows of
/// `cols` are `ld` apart, so several images can share one patch matrix.
fn im2col<T: Scalar>(input: &[T], c: usize, h: usize, w: usize, q: usize, cols: &mut [T], ld: usize) {
    let (pad, _) = same_padding(q);
    let hw = h * w;
    for ch in 0..c {
        let plane = &input[ch * hw..(ch + 1) * hw];
        for ky in 0..q {
            for kx in 0..q {
                let row = &mut cols[((ch * q + ky) * q + kx) * ld..][..hw];
                for y in 0..h {
                    let sy = y as isize + ky as isize - pad as isize;
                    let dst = &mut row[y * w..(y + 1) * w];
                    if sy < 0 || sy >= h as isize {
                        dst.fill(T::ZERO);
                        continue;
                    }
                    let src = &plane[sy as usize * w..(sy as usize + 1) * w];
                    let shift = kx as isize - pad as isize;
                    let lo = (-shift).clamp(0, w as isize) as usize;
                    let hi = (w as isize - shift).clamp(0, w as isize) as usize;
                    dst[..lo].fill(T::ZERO);
                    dst[hi..].fill(T::ZERO);
                    if lo < hi {
                        let s0 = (lo as isize + shift) as usize;
                        dst[lo..hi].copy_from_slice(&src[s0..s0 + (hi - lo)]);
                    }
                }
            }
        }
    }
}

/// Adjoint of [`im2col`]: accumulates patch columns back into an image.
fn col2im<T: Scalar>(cols: &[T], c: usize, h: usize, w: usize, q: usize, out: &mut [T], ld: usize) {
    let (pad, _) = same_padding(q);
    let hw = h * w;
    for ch in 0..c {
        let plane = &mut out[ch * hw..(ch + 1) * hw];
        for ky in 0..q {
            for kx in 0..q {
                let row = &cols[((ch * q + ky) * q + kx) * ld..][..hw];
                for y in 0..h {
                    let sy = y as isize + ky as isize - pad as isize;
                    if sy < 0 || sy >= h as isize {
                        continue;
                    }
                    let shift = kx as isize - pad as isize;
                    let lo = (-shift).clamp(0, w as isize) as usize;
                    let hi = (w as isize - shift).clamp(0, w as isize) as usize;
                    if lo >= hi {
                        continue;
                    }
                    let s0 = (lo as isize + shift) as usize;
                    let dst = &mut plane[sy as usize * w + s0..][..hi - lo];
                    for (d, &v) in dst.iter_mut().zip(&row[y * w + lo..y * w + hi]) {
                        *d += v;
                    }
                }
            }
        }
    }
}

/// Stride-1 "same" cross-correlation plus bias.
///
/// `weights` is `[out_channels, in_channels, q, q]` flattened, `bias` has
/// `out_channels` entries.
pub fn conv2d_forward<T: Scalar>(
    x: &Tensor4<T>,
    weights: &[T],
    bias: &[T],
    kernel: usize,
) -> Result<Tensor4<T>, NnError> {
    let [b, c, h, w] = x.dims();
    let oc = bias.len();
    let patch = c * kernel * kernel;
    if kernel == 0 || weights.len() != oc * patch {
        return Err(NnError::Shape(format!(
            "conv weights hold {} values, expected {oc}x{c}x{kernel}x{kernel}",
            weights.len()
        )));
    }
    let hw = h * w;
    let mut out = Tensor4::zeros([b, oc, h, w]);
    let block = CONV_BLOCK.min(b.max(1));
    let mut cols = vec![T::ZERO; patch * hw * block];
    let mut res = vec![T::ZERO; oc * hw * block];
    for start in (0..b).step_by(block) {
        let nb = block.min(b - start);
        let ld = nb * hw;
        for j in 0..nb {
            im2col(x.item(start + j), c, h, w, kernel, &mut cols[j * hw..], ld);
        }
        T::gemm(
            oc,
            patch,
            ld,
            T::ONE,
            weights,
            (patch as isize, 1),
            &cols,
            (ld as isize, 1),
            T::ZERO,
            &mut res,
            (ld as isize, 1),
        );
        // [oc, nb, hw] -> [nb, oc, hw]
        let dst = &mut out.data_mut()[start * oc * hw..(start + nb) * oc * hw];
        for j in 0..nb {
            for o in 0..oc {
                let src = &res[o * ld + j * hw..][..hw];
                let bo = bias[o];
                for (d, &v) in dst[(j * oc + o) * hw..][..hw].iter_mut().zip(src) {
                    *d = v + bo;
                }
            }
        }
    }
    Ok(out)
}

/// Gradients of [`conv2d_forward`]. Weight and bias gradients are
/// accumulated into `dw`/`db`; the input gradient is returned when requested.
#[allow(clippy::too_many_arguments)]
pub(crate) fn conv2d_backward<T: Scalar>(
    x: &Tensor4<T>,
    weights: &[T],
    kernel: usize,
    dout: &Tensor4<T>,
    dw: &mut [T],
    db: &mut [T],
    want_input_grad: bool,
    fault: bool,
) -> Option<Tensor4<T>> {
    let [b, c, h, w] = x.dims();
    let oc = db.len();
    let hw = h * w;
    let patch = c * kernel * kernel;
    let block = CONV_BLOCK.min(b.max(1));
    let mut cols = vec![T::ZERO; patch * hw * block];
    let mut g = vec![T::ZERO; oc * hw * block];
    let mut dx = want_input_grad.then(|| Tensor4::zeros([b, c, h, w]));
    let flipped;
    let weights = if fault {
        flipped = transpose_kernels(weights, oc * c, kernel);
        &flipped[..]
    } else {
        weights
    };
    for start in (0..b).step_by(block) {
        let nb = block.min(b - start);
        let ld = nb * hw;
        // [nb, oc, hw] -> [oc, nb, hw]
        for j in 0..nb {
            let src = dout.item(start + j);
            for o in 0..oc {
                let plane = &src[o * hw..(o + 1) * hw];
                g[o * ld + j * hw..][..hw].copy_from_slice(plane);
                db[o] += plane.iter().copied().sum();
            }
        }
        for j in 0..nb {
            im2col(x.item(start + j), c, h, w, kernel, &mut cols[j * hw..], ld);
        }
        T::gemm(
            oc,
            ld,
            patch,
            T::ONE,
            &g,
            (ld as isize, 1),
            &cols,
            (1, ld as isize),
            T::ONE,
            dw,
            (patch as isize, 1),
        );
        if let Some(dx) = dx.as_mut() {
            // reuse the patch buffer for the column gradients
            T::gemm(
                patch,
                oc,
                ld,
                T::ONE,
                weights,
                (1, patch as isize),
                &g,
                (ld as isize, 1),
                T::ZERO,
                &mut cols,
                (ld as isize, 1),
            );
            for j in 0..nb {
                let img = start + j;
                col2im(
                    &cols[j * hw..],
                    c,
                    h,
                    w,
                    kernel,
                    &mut dx.data_mut()[img * c * hw..(img + 1) * c * hw],
                    ld,
                );
            }
        }
    }
    dx
}

pub(crate) fn transpose_kernels<T: Scalar>(weights: &[T], planes: usize, q: usize) -> Vec<T> {
    let mut out = weights.to_vec();
    for p in 0..planes {
        for ky in 0..q {
            for kx in 0..q {
                out[p * q * q + ky * q + kx] = weights[p * q * q + kx * q + ky];
            }
        }
    }
    out
}

/// 2x2, stride-2 max pooling. Odd sizes are handled as if padded with
/// negative infinity, so the output is `ceil(h/2) x ceil(w/2)`. Returns the
/// pooled tensor and, per output value, the flat index of the winning input
/// value within its batch item.
pub fn maxpool_forward<T: Scalar>(x: &Tensor4<T>) -> (Tensor4<T>, Vec<u32>) {
    let [b, c, h, w] = x.dims();
    let (oh, ow) = (h.div_ceil(2), w.div_ceil(2));
    let mut out = Tensor4::zeros([b, c, oh, ow]);
    let mut argmax = Vec::with_capacity(b * c * oh * ow);
    let item = c * h * w;
    for (bi, dst) in out.data_mut().chunks_mut(c * oh * ow).enumerate() {
        let src = x.item(bi);
        for ch in 0..c {
            for oy in 0..oh {
                for ox in 0..ow {
                    // first maximum in scan order wins ties
                    let mut best_idx = (ch * h + 2 * oy) * w + 2 * ox;
                    let mut best = src[best_idx];
                    for y in 2 * oy..(2 * oy + 2).min(h) {
                        for xx in 2 * ox..(2 * ox + 2).min(w) {
                            let idx = (ch * h + y) * w + xx;
                            if src[idx] > best {
                                best = src[idx];
                                best_idx = idx;
                            }
                        }
                    }
                    debug_assert!(best_idx < item);
                    dst[(ch * oh + oy) * ow + ox] = best;
                    argmax.push(best_idx as u32);
                }
            }
        }
    }
    (out, argmax)
}

/// Routes each output gradient to the recorded argmax input position.
pub(crate) fn maxpool_backward<T: Scalar>(in_dims: [usize; 4], argmax: &[u32], dout: &Tensor4<T>) -> Tensor4<T> {
    let mut dx = Tensor4::zeros(in_dims);
    let item = in_dims[1] * in_dims[2] * in_dims[3];
    let per_out = dout.item_len();
    for (bi, g) in dout.data().chunks(per_out).enumerate() {
        let dst = &mut dx.data_mut()[bi * item..(bi + 1) * item];
        for (&a, &v) in argmax[bi * per_out..(bi + 1) * per_out].iter().zip(g) {
            dst[a as usize] += v;
        }
    }
    dx
}

/// `out = x W^T + b` where `x` is flattened to `[batch, features]` and `W`
/// is `[units, features]`.
pub fn dense_forward<T: Scalar>(x: &Tensor4<T>, weights: &[T], bias: &[T]) -> Result<Tensor4<T>, NnError> {
    let b = x.batch();
    let f = x.item_len();
    let u = bias.len();
    if weights.len() != u * f {
        return Err(NnError::Shape(format!(
            "dense weights hold {} values, expected {u}x{f}",
            weights.len()
        )));
    }
    let mut out = Tensor4::zeros([b, u, 1, 1]);
    for row in out.data_mut().chunks_mut(u) {
        row.copy_from_slice(bias);
    }
    T::gemm(
        b,
        f,
        u,
        T::ONE,
        x.data(),
        (f as isize, 1),
        weights,
        (1, f as isize),
        T::ONE,
        out.data_mut(),
        (u as isize, 1),
    );
    Ok(out)
}

pub(crate) fn dense_backward<T: Scalar>(
    x: &Tensor4<T>,
    weights: &[T],
    dout: &Tensor4<T>,
    dw: &mut [T],
    db: &mut [T],
    want_input_grad: bool,
) -> Option<Tensor4<T>> {
    let b = x.batch();
    let f = x.item_len();
    let u = db.len();
    T::gemm(
        u,
        b,
        f,
        T::ONE,
        dout.data(),
        (1, u as isize),
        x.data(),
        (f as isize, 1),
        T::ONE,
        dw,
        (f as isize, 1),
    );
    for row in dout.data().chunks(u) {
        for (acc, &g) in db.iter_mut().zip(row) {
            *acc += g;
        }
    }
    want_input_grad.then(|| {
        let mut dx = Tensor4::zeros(x.dims());
        T::gemm(
            b,
            u,
            f,
            T::ONE,
            dout.data(),
            (u as isize, 1),
            weights,
            (f as isize, 1),
            T::ZERO,
            dx.data_mut(),
            (f as isize, 1),
        );
        dx
    })
}

/// Row-wise softmax over each batch item.
pub(crate) fn softmax<T: Scalar>(logits: &Tensor4<T>) -> Tensor4<T> {
    let n = logits.item_len();
    let mut out = logits.clone();
    for row in out.data_mut().chunks_mut(n) {
        let max = row.iter().fold(f64::NEG_INFINITY, |m, v| m.max(v.to_f64()));
        let exps: Vec<f64> = row.iter().map(|v| (v.to_f64() - max).exp()).collect();
        let sum: f64 = exps.iter().sum();
        for (o, e) in row.iter_mut().zip(exps) {
            *o = T::from_f64(e / sum);
        }
    }
    out
}
