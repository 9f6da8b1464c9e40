//! Dense, 3x3 same-padding convolution, 2x2 max-pool, and ELU primitives
//! with hand-rolled backward passes. Everything operates on flat `f64`
//! slices; channel-major layout `[ch][y][x]` for feature maps.

/// ELU activation, alpha = 1.
#[inline]
pub fn elu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        x.exp() - 1.0
    }
}

/// Derivative of ELU at the pre-activation value.
#[inline]
pub fn elu_prime(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else {
        x.exp()
    }
}

/// out = W x + b, with row-major W of shape [out_dim][in_dim].
///
/// The dot product uses eight fixed accumulator lanes so the reduction can
/// vectorize; the lane structure is part of the function's definition, so
/// results are bit-stable across machines and worker counts.
pub fn dense_forward(w: &[f64], b: &[f64], x: &[f64], out: &mut [f64]) {
    let in_dim = x.len();
    debug_assert_eq!(w.len(), b.len() * in_dim);
    let main = in_dim - in_dim % 8;
    for (o, out_o) in out.iter_mut().enumerate() {
        let row = &w[o * in_dim..(o + 1) * in_dim];
        let mut lanes = [0.0f64; 8];
        for (wc, xc) in row[..main].chunks_exact(8).zip(x[..main].chunks_exact(8)) {
            for k in 0..8 {
                lanes[k] += wc[k] * xc[k];
            }
        }
        let mut acc = ((lanes[0] + lanes[1]) + (lanes[2] + lanes[3]))
            + ((lanes[4] + lanes[5]) + (lanes[6] + lanes[7]));
        for (wi, xi) in row[main..].iter().zip(&x[main..]) {
            acc += wi * xi;
        }
        *out_o = acc + b[o];
    }
}

/// Accumulate dense gradients and propagate the delta to the input.
///
/// `delta` is dL/d(pre-activation) of this layer's output. `d_input`, when
/// present, is overwritten with W^T delta.
pub fn dense_backward(
    w: &[f64],
    x: &[f64],
    delta: &[f64],
    grad_w: &mut [f64],
    grad_b: &mut [f64],
    d_input: Option<&mut [f64]>,
) {
    let in_dim = x.len();
    for (o, d) in delta.iter().enumerate() {
        grad_b[o] += d;
        let grow = &mut grad_w[o * in_dim..(o + 1) * in_dim];
        for (g, xi) in grow.iter_mut().zip(x) {
            *g += d * xi;
        }
    }
    if let Some(dx) = d_input {
        dx.iter_mut().for_each(|v| *v = 0.0);
        for (o, d) in delta.iter().enumerate() {
            let row = &w[o * in_dim..(o + 1) * in_dim];
            for (dxi, wi) in dx.iter_mut().zip(row) {
                *dxi += wi * d;
            }
        }
    }
}

/// 3x3 convolution with zero padding 1 (same spatial size).
///
/// `input` is `[in_ch][h][w]`, `out` is `[out_ch][h][w]`, weights are
/// `[out_ch][in_ch][3][3]`.
pub fn conv3x3_forward(
    w: &[f64],
    b: &[f64],
    input: &[f64],
    in_ch: usize,
    h: usize,
    wd: usize,
    out_ch: usize,
    out: &mut [f64],
) {
    let plane = h * wd;
    for oc in 0..out_ch {
        let out_plane = &mut out[oc * plane..(oc + 1) * plane];
        out_plane.iter_mut().for_each(|v| *v = b[oc]);
        for ic in 0..in_ch {
            let in_plane = &input[ic * plane..(ic + 1) * plane];
            let k = &w[(oc * in_ch + ic) * 9..(oc * in_ch + ic) * 9 + 9];
            for ky in 0..3usize {
                for y in 0..h {
                    let iy = y as isize + ky as isize - 1;
                    if iy < 0 || iy >= h as isize {
                        continue;
                    }
                    let in_row = &in_plane[iy as usize * wd..(iy as usize + 1) * wd];
                    let out_row = &mut out_plane[y * wd..(y + 1) * wd];
                    for kx in 0..3usize {
                        let wk = k[ky * 3 + kx];
                        if wk == 0.0 {
                            continue;
                        }
                        // x + kx - 1 must stay within [0, wd)
                        let (x_lo, x_hi) = match kx {
                            0 => (1, wd),
                            1 => (0, wd),
                            _ => (0, wd - 1),
                        };
                        for x in x_lo..x_hi {
                            out_row[x] += wk * in_row[x + kx - 1];
                        }
                    }
                }
            }
        }
    }
}

/// Backward for [`conv3x3_forward`]: accumulates weight/bias gradients and,
/// when requested, writes the input gradient (overwritten).
#[allow(clippy::too_many_arguments)]
pub fn conv3x3_backward(
    w: &[f64],
    input: &[f64],
    in_ch: usize,
    h: usize,
    wd: usize,
    out_ch: usize,
    d_out: &[f64],
    grad_w: &mut [f64],
    grad_b: &mut [f64],
    d_input: Option<&mut [f64]>,
) {
    let plane = h * wd;
    for oc in 0..out_ch {
        let d_plane = &d_out[oc * plane..(oc + 1) * plane];
        grad_b[oc] += d_plane.iter().sum::<f64>();
        for ic in 0..in_ch {
            let in_plane = &input[ic * plane..(ic + 1) * plane];
            let gk = &mut grad_w[(oc * in_ch + ic) * 9..(oc * in_ch + ic) * 9 + 9];
            for ky in 0..3usize {
                for y in 0..h {
                    let iy = y as isize + ky as isize - 1;
                    if iy < 0 || iy >= h as isize {
                        continue;
                    }
                    let in_row = &in_plane[iy as usize * wd..(iy as usize + 1) * wd];
                    let d_row = &d_plane[y * wd..(y + 1) * wd];
                    for kx in 0..3usize {
                        let (x_lo, x_hi) = match kx {
                            0 => (1, wd),
                            1 => (0, wd),
                            _ => (0, wd - 1),
                        };
                        let mut acc = 0.0;
                        for x in x_lo..x_hi {
                            acc += d_row[x] * in_row[x + kx - 1];
                        }
                        gk[ky * 3 + kx] += acc;
                    }
                }
            }
        }
    }
    if let Some(dx) = d_input {
        dx.iter_mut().for_each(|v| *v = 0.0);
        for oc in 0..out_ch {
            let d_plane = &d_out[oc * plane..(oc + 1) * plane];
            for ic in 0..in_ch {
                let dx_plane = &mut dx[ic * plane..(ic + 1) * plane];
                let k = &w[(oc * in_ch + ic) * 9..(oc * in_ch + ic) * 9 + 9];
                for ky in 0..3usize {
                    for y in 0..h {
                        let iy = y as isize + ky as isize - 1;
                        if iy < 0 || iy >= h as isize {
                            continue;
                        }
                        let d_row = &d_plane[y * wd..(y + 1) * wd];
                        let dx_row = &mut dx_plane[iy as usize * wd..(iy as usize + 1) * wd];
                        for kx in 0..3usize {
                            let wk = k[ky * 3 + kx];
                            let (x_lo, x_hi) = match kx {
                                0 => (1, wd),
                                1 => (0, wd),
                                _ => (0, wd - 1),
                            };
                            for x in x_lo..x_hi {
                                dx_row[x + kx - 1] += wk * d_row[x];
                            }
                        }
                    }
                }
            }
        }
    }
}

/// 2x2 max pooling with stride 2 and floor semantics (odd trailing rows and
/// columns are dropped). Records the flat input index of each window's
/// argmax; ties take the first cell in scan order.
pub fn maxpool2_forward(
    input: &[f64],
    ch: usize,
    h: usize,
    wd: usize,
    out: &mut [f64],
    idx: &mut [u32],
) {
    let oh = h / 2;
    let ow = wd / 2;
    let plane = h * wd;
    let out_plane = oh * ow;
    for c in 0..ch {
        let in_plane = &input[c * plane..(c + 1) * plane];
        for oy in 0..oh {
            for ox in 0..ow {
                let base = (2 * oy) * wd + 2 * ox;
                let cands = [base, base + 1, base + wd, base + wd + 1];
                let mut best = cands[0];
                let mut best_v = in_plane[cands[0]];
                for &cand in &cands[1..] {
                    if in_plane[cand] > best_v {
                        best_v = in_plane[cand];
                        best = cand;
                    }
                }
                let o = c * out_plane + oy * ow + ox;
                out[o] = best_v;
                idx[o] = (c * plane + best) as u32;
            }
        }
    }
}

/// Scatter pooled gradients back to the argmax cells. `d_input` is zeroed.
pub fn maxpool2_backward(d_out: &[f64], idx: &[u32], d_input: &mut [f64]) {
    d_input.iter_mut().for_each(|v| *v = 0.0);
    for (d, i) in d_out.iter().zip(idx) {
        d_input[*i as usize] += d;
    }
}
