//! Layer forward/backward kernels. Convolution is cross-correlation (no
//! kernel flip); pooling routes gradients to the argmax (first index on
//! ties); layouts are channel-major with x-fastest spatial storage:
//! `index = c * (dx*dy*dz) + x + dx*(y + dy*z)`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::arch::{conv_out_len, pad_begin, Padding};
use super::network::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpatialShape {
    pub channels: usize,
    pub dims: (usize, usize, usize),
}

impl SpatialShape {
    pub fn len(&self) -> usize {
        self.channels * self.spatial_len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spatial_len(&self) -> usize {
        self.dims.0 * self.dims.1 * self.dims.2
    }
}

// ---------------------------------------------------------------------------
// Conv3d

pub(crate) struct ConvGeometry {
    pub in_shape: SpatialShape,
    pub out_shape: SpatialShape,
    pub kernel: usize,
    pub stride: usize,
    pub pad: (usize, usize, usize),
}

impl ConvGeometry {
    pub fn new(in_shape: SpatialShape, out_channels: usize, kernel: usize, stride: usize, padding: Padding) -> Self {
        let out = (
            conv_out_len(in_shape.dims.0, kernel, stride, padding),
            conv_out_len(in_shape.dims.1, kernel, stride, padding),
            conv_out_len(in_shape.dims.2, kernel, stride, padding),
        );
        let pad = match padding {
            Padding::Valid => (0, 0, 0),
            Padding::Same => (
                pad_begin(in_shape.dims.0, kernel, stride, out.0),
                pad_begin(in_shape.dims.1, kernel, stride, out.1),
                pad_begin(in_shape.dims.2, kernel, stride, out.2),
            ),
        };
        ConvGeometry {
            in_shape,
            out_shape: SpatialShape {
                channels: out_channels,
                dims: out,
            },
            kernel,
            stride,
            pad,
        }
    }

    pub fn weight_len(&self) -> usize {
        self.out_shape.channels * self.in_shape.channels * self.kernel.pow(3)
    }
}

pub(crate) fn conv3d_forward<T: Scalar>(g: &ConvGeometry, x: &[T], w: &[T]) -> Vec<T> {
    let (ix, iy, iz) = g.in_shape.dims;
    let (ox, oy, oz) = g.out_shape.dims;
    let ic = g.in_shape.channels;
    let k = g.kernel;
    let isl = ix * iy * iz;
    let osl = ox * oy * oz;
    let mut out = vec![T::zero(); g.out_shape.channels * osl];
    for oc in 0..g.out_shape.channels {
        let w_oc = oc * ic * k * k * k;
        for z in 0..oz {
            let z0 = (z * g.stride) as isize - g.pad.2 as isize;
            for y in 0..oy {
                let y0 = (y * g.stride) as isize - g.pad.1 as isize;
                for xo in 0..ox {
                    let x0 = (xo * g.stride) as isize - g.pad.0 as isize;
                    let mut acc = T::zero();
                    for c in 0..ic {
                        let xc = c * isl;
                        let wc = w_oc + c * k * k * k;
                        for kz in 0..k {
                            let izz = z0 + kz as isize;
                            if izz < 0 || izz >= iz as isize {
                                continue;
                            }
                            for ky in 0..k {
                                let iyy = y0 + ky as isize;
                                if iyy < 0 || iyy >= iy as isize {
                                    continue;
                                }
                                let row = xc + ix * (iyy as usize + iy * izz as usize);
                                let wrow = wc + (kz * k + ky) * k;
                                let kx_lo = (-x0).max(0) as usize;
                                let kx_hi = (ix as isize - x0).min(k as isize).max(0) as usize;
                                for kx in kx_lo..kx_hi {
                                    acc = acc
                                        + x[row + (x0 + kx as isize) as usize] * w[wrow + kx];
                                }
                            }
                        }
                    }
                    out[oc * osl + xo + ox * (y + oy * z)] = acc;
                }
            }
        }
    }
    out
}

/// Returns the input gradient and accumulates weight gradients into `gw`.
pub(crate) fn conv3d_backward<T: Scalar>(
    g: &ConvGeometry,
    x: &[T],
    w: &[T],
    gout: &[T],
    gw: &mut [T],
) -> Vec<T> {
    let (ix, iy, iz) = g.in_shape.dims;
    let (ox, oy, oz) = g.out_shape.dims;
    let ic = g.in_shape.channels;
    let k = g.kernel;
    let isl = ix * iy * iz;
    let osl = ox * oy * oz;
    let mut gx = vec![T::zero(); x.len()];
    for oc in 0..g.out_shape.channels {
        let w_oc = oc * ic * k * k * k;
        for z in 0..oz {
            let z0 = (z * g.stride) as isize - g.pad.2 as isize;
            for y in 0..oy {
                let y0 = (y * g.stride) as isize - g.pad.1 as isize;
                for xo in 0..ox {
                    let go = gout[oc * osl + xo + ox * (y + oy * z)];
                    if go == T::zero() {
                        continue;
                    }
                    let x0 = (xo * g.stride) as isize - g.pad.0 as isize;
                    for c in 0..ic {
                        let xc = c * isl;
                        let wc = w_oc + c * k * k * k;
                        for kz in 0..k {
                            let izz = z0 + kz as isize;
                            if izz < 0 || izz >= iz as isize {
                                continue;
                            }
                            for ky in 0..k {
                                let iyy = y0 + ky as isize;
                                if iyy < 0 || iyy >= iy as isize {
                                    continue;
                                }
                                let row = xc + ix * (iyy as usize + iy * izz as usize);
                                let wrow = wc + (kz * k + ky) * k;
                                let kx_lo = (-x0).max(0) as usize;
                                let kx_hi = (ix as isize - x0).min(k as isize).max(0) as usize;
                                for kx in kx_lo..kx_hi {
                                    let xi = row + (x0 + kx as isize) as usize;
                                    gx[xi] = gx[xi] + go * w[wrow + kx];
                                    gw[wrow + kx] = gw[wrow + kx] + go * x[xi];
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    gx
}

// ---------------------------------------------------------------------------
// MaxPool3d

pub(crate) struct PoolGeometry {
    pub in_shape: SpatialShape,
    pub out_shape: SpatialShape,
    pub window: usize,
    pub stride: usize,
    pub pad: (usize, usize, usize),
}

impl PoolGeometry {
    pub fn new(in_shape: SpatialShape, window: usize, stride: usize, padding: Padding) -> Self {
        let out = (
            conv_out_len(in_shape.dims.0, window, stride, padding),
            conv_out_len(in_shape.dims.1, window, stride, padding),
            conv_out_len(in_shape.dims.2, window, stride, padding),
        );
        let pad = match padding {
            Padding::Valid => (0, 0, 0),
            Padding::Same => (
                pad_begin(in_shape.dims.0, window, stride, out.0),
                pad_begin(in_shape.dims.1, window, stride, out.1),
                pad_begin(in_shape.dims.2, window, stride, out.2),
            ),
        };
        PoolGeometry {
            in_shape,
            out_shape: SpatialShape {
                channels: in_shape.channels,
                dims: out,
            },
            window,
            stride,
            pad,
        }
    }
}

/// Max over in-bounds window elements; `argmax` holds the flat input index
/// of the (first) maximum per output element.
pub(crate) fn maxpool_forward<T: Scalar>(g: &PoolGeometry, x: &[T]) -> (Vec<T>, Vec<u32>) {
    let (ix, iy, iz) = g.in_shape.dims;
    let (ox, oy, oz) = g.out_shape.dims;
    let isl = ix * iy * iz;
    let osl = ox * oy * oz;
    let mut out = vec![T::zero(); g.out_shape.channels * osl];
    let mut argmax = vec![0u32; out.len()];
    for c in 0..g.in_shape.channels {
        let xc = c * isl;
        for z in 0..oz {
            let z0 = (z * g.stride) as isize - g.pad.2 as isize;
            for y in 0..oy {
                let y0 = (y * g.stride) as isize - g.pad.1 as isize;
                for xo in 0..ox {
                    let x0 = (xo * g.stride) as isize - g.pad.0 as isize;
                    let mut best = T::neg_infinity();
                    let mut best_idx = usize::MAX;
                    for kz in 0..g.window {
                        let izz = z0 + kz as isize;
                        if izz < 0 || izz >= iz as isize {
                            continue;
                        }
                        for ky in 0..g.window {
                            let iyy = y0 + ky as isize;
                            if iyy < 0 || iyy >= iy as isize {
                                continue;
                            }
                            for kx in 0..g.window {
                                let ixx = x0 + kx as isize;
                                if ixx < 0 || ixx >= ix as isize {
                                    continue;
                                }
                                let idx =
                                    xc + ixx as usize + ix * (iyy as usize + iy * izz as usize);
                                if x[idx] > best {
                                    best = x[idx];
                                    best_idx = idx;
                                }
                            }
                        }
                    }
                    debug_assert_ne!(best_idx, usize::MAX, "pool window fully out of bounds");
                    let oi = c * osl + xo + ox * (y + oy * z);
                    out[oi] = best;
                    argmax[oi] = best_idx as u32;
                }
            }
        }
    }
    (out, argmax)
}

pub(crate) fn maxpool_backward<T: Scalar>(gout: &[T], argmax: &[u32], in_len: usize) -> Vec<T> {
    let mut gx = vec![T::zero(); in_len];
    for (i, &go) in gout.iter().enumerate() {
        let src = argmax[i] as usize;
        gx[src] = gx[src] + go;
    }
    gx
}

// ---------------------------------------------------------------------------
// MultiCrop

/// Branch geometry for multi-crop pooling. All three branches reach
/// `ceil(ceil(d/2)/2)` per axis: the full map pooled twice, the center
/// half-crop (size `ceil(d/2)`) pooled once, and the center quarter-crop
/// taken directly.
pub(crate) struct MultiCropGeometry {
    pub in_shape: SpatialShape,
    pub out_shape: SpatialShape,
    pub pool_a1: PoolGeometry,
    pub pool_a2: PoolGeometry,
    pub half_start: (usize, usize, usize),
    pub half_shape: SpatialShape,
    pub pool_b: PoolGeometry,
    pub quarter_start: (usize, usize, usize),
}

impl MultiCropGeometry {
    pub fn new(in_shape: SpatialShape) -> Self {
        let d = in_shape.dims;
        let half = (d.0.div_ceil(2), d.1.div_ceil(2), d.2.div_ceil(2));
        let target = (half.0.div_ceil(2), half.1.div_ceil(2), half.2.div_ceil(2));
        let pool_a1 = PoolGeometry::new(in_shape, 2, 2, Padding::Same);
        let pool_a2 = PoolGeometry::new(pool_a1.out_shape, 2, 2, Padding::Same);
        let half_shape = SpatialShape {
            channels: in_shape.channels,
            dims: half,
        };
        let pool_b = PoolGeometry::new(half_shape, 2, 2, Padding::Same);
        debug_assert_eq!(pool_a2.out_shape.dims, target);
        debug_assert_eq!(pool_b.out_shape.dims, target);
        MultiCropGeometry {
            in_shape,
            out_shape: SpatialShape {
                channels: 3 * in_shape.channels,
                dims: target,
            },
            pool_a1,
            pool_a2,
            half_start: center_start(d, half),
            half_shape,
            pool_b,
            quarter_start: center_start(d, target),
        }
    }
}

fn center_start(d: (usize, usize, usize), c: (usize, usize, usize)) -> (usize, usize, usize) {
    ((d.0 - c.0) / 2, (d.1 - c.1) / 2, (d.2 - c.2) / 2)
}

fn crop<T: Scalar>(
    x: &[T],
    shape: SpatialShape,
    start: (usize, usize, usize),
    out_dims: (usize, usize, usize),
) -> Vec<T> {
    let (ix, iy, iz) = shape.dims;
    let isl = ix * iy * iz;
    let osl = out_dims.0 * out_dims.1 * out_dims.2;
    let mut out = vec![T::zero(); shape.channels * osl];
    for c in 0..shape.channels {
        for z in 0..out_dims.2 {
            for y in 0..out_dims.1 {
                let src =
                    c * isl + start.0 + ix * ((y + start.1) + iy * (z + start.2));
                let dst = c * osl + out_dims.0 * (y + out_dims.1 * z);
                for xo in 0..out_dims.0 {
                    out[dst + xo] = x[src + xo];
                }
            }
        }
    }
    out
}

fn crop_scatter<T: Scalar>(
    gcrop: &[T],
    shape: SpatialShape,
    start: (usize, usize, usize),
    crop_dims: (usize, usize, usize),
    gx: &mut [T],
) {
    let (ix, iy, iz) = shape.dims;
    let isl = ix * iy * iz;
    let osl = crop_dims.0 * crop_dims.1 * crop_dims.2;
    for c in 0..shape.channels {
        for z in 0..crop_dims.2 {
            for y in 0..crop_dims.1 {
                let dst =
                    c * isl + start.0 + ix * ((y + start.1) + iy * (z + start.2));
                let src = c * osl + crop_dims.0 * (y + crop_dims.1 * z);
                for xo in 0..crop_dims.0 {
                    gx[dst + xo] = gx[dst + xo] + gcrop[src + xo];
                }
            }
        }
    }
}

pub(crate) struct MultiCropCache {
    pub arg_a1: Vec<u32>,
    pub arg_a2: Vec<u32>,
    pub arg_b: Vec<u32>,
}

pub(crate) fn multicrop_forward<T: Scalar>(
    g: &MultiCropGeometry,
    x: &[T],
) -> (Vec<T>, MultiCropCache) {
    let (a1, arg_a1) = maxpool_forward(&g.pool_a1, x);
    let (a2, arg_a2) = maxpool_forward(&g.pool_a2, &a1);
    let halfmap = crop(x, g.in_shape, g.half_start, g.half_shape.dims);
    let (b, arg_b) = maxpool_forward(&g.pool_b, &halfmap);
    let q = crop(x, g.in_shape, g.quarter_start, g.out_shape.dims);
    let branch_len = g.in_shape.channels
        * g.out_shape.dims.0
        * g.out_shape.dims.1
        * g.out_shape.dims.2;
    let mut out = Vec::with_capacity(3 * branch_len);
    out.extend_from_slice(&a2);
    out.extend_from_slice(&b);
    out.extend_from_slice(&q);
    (
        out,
        MultiCropCache {
            arg_a1,
            arg_a2,
            arg_b,
        },
    )
}

pub(crate) fn multicrop_backward<T: Scalar>(
    g: &MultiCropGeometry,
    cache: &MultiCropCache,
    gout: &[T],
) -> Vec<T> {
    let branch_len = g.in_shape.channels
        * g.out_shape.dims.0
        * g.out_shape.dims.1
        * g.out_shape.dims.2;
    let (ga2, gb, gq) = (
        &gout[..branch_len],
        &gout[branch_len..2 * branch_len],
        &gout[2 * branch_len..],
    );
    let mut gx = vec![T::zero(); g.in_shape.len()];
    // Branch A: two pool backwards.
    let ga1 = maxpool_backward(ga2, &cache.arg_a2, g.pool_a1.out_shape.len());
    let ga0 = maxpool_backward(&ga1, &cache.arg_a1, g.in_shape.len());
    for (dst, src) in gx.iter_mut().zip(&ga0) {
        *dst = *dst + *src;
    }
    // Branch B: pool backward into the half crop, scattered to the input.
    let ghalf = maxpool_backward(gb, &cache.arg_b, g.half_shape.len());
    crop_scatter(&ghalf, g.in_shape, g.half_start, g.half_shape.dims, &mut gx);
    // Branch C: direct scatter of the quarter crop.
    crop_scatter(gq, g.in_shape, g.quarter_start, g.out_shape.dims, &mut gx);
    gx
}

// ---------------------------------------------------------------------------
// Dense / Output

pub(crate) fn dense_forward<T: Scalar>(x: &[T], w: &[T], units: usize) -> Vec<T> {
    let mut out = vec![T::zero(); units];
    for (i, &xi) in x.iter().enumerate() {
        if xi == T::zero() {
            continue;
        }
        let row = i * units;
        for (j, o) in out.iter_mut().enumerate() {
            *o = *o + xi * w[row + j];
        }
    }
    out
}

pub(crate) fn dense_backward<T: Scalar>(
    x: &[T],
    w: &[T],
    units: usize,
    gout: &[T],
    gw: &mut [T],
) -> Vec<T> {
    let mut gx = vec![T::zero(); x.len()];
    for (i, &xi) in x.iter().enumerate() {
        let row = i * units;
        let mut acc = T::zero();
        for (j, &go) in gout.iter().enumerate() {
            acc = acc + go * w[row + j];
            gw[row + j] = gw[row + j] + go * xi;
        }
        gx[i] = acc;
    }
    gx
}

// ---------------------------------------------------------------------------
// LayerNormRelu

pub(crate) struct NormCache<T> {
    /// Normalized values (pre gamma/beta).
    pub y: Vec<T>,
    pub sigma: T,
    /// ReLU pass-through mask.
    pub active: Vec<bool>,
}

const NORM_EPS: f64 = 1e-5;

/// `relu((x - mean) / sqrt(var + 1e-5) * gamma + beta)`; statistics are
/// population moments over the whole buffer, gamma/beta indexed per unit
/// (`positions` consecutive values share one unit).
pub(crate) fn norm_forward<T: Scalar>(
    x: &[T],
    gamma: &[T],
    beta: &[T],
    positions: usize,
) -> (Vec<T>, NormCache<T>) {
    let n = T::from_f64(x.len() as f64).unwrap();
    let mut mean = T::zero();
    for &v in x {
        mean = mean + v;
    }
    mean = mean / n;
    let mut var = T::zero();
    for &v in x {
        let d = v - mean;
        var = var + d * d;
    }
    var = var / n;
    let sigma = (var + T::from_f64(NORM_EPS).unwrap()).sqrt();
    let mut y = Vec::with_capacity(x.len());
    let mut out = Vec::with_capacity(x.len());
    let mut active = Vec::with_capacity(x.len());
    for (i, &v) in x.iter().enumerate() {
        let u = i / positions;
        let yi = (v - mean) / sigma;
        let a = yi * gamma[u] + beta[u];
        let pass = a > T::zero();
        out.push(if pass { a } else { T::zero() });
        y.push(yi);
        active.push(pass);
    }
    (out, NormCache { y, sigma, active })
}

pub(crate) fn norm_backward<T: Scalar>(
    cache: &NormCache<T>,
    gamma: &[T],
    positions: usize,
    gout: &[T],
    ggamma: &mut [T],
    gbeta: &mut [T],
) -> Vec<T> {
    let n = cache.y.len();
    let nf = T::from_f64(n as f64).unwrap();
    // Gradient through ReLU, then gamma/beta, then the normalization.
    let mut h = vec![T::zero(); n];
    let mut sum_h = T::zero();
    let mut sum_hy = T::zero();
    for i in 0..n {
        if !cache.active[i] {
            continue;
        }
        let u = i / positions;
        let t = gout[i];
        ggamma[u] = ggamma[u] + t * cache.y[i];
        gbeta[u] = gbeta[u] + t;
        let hi = t * gamma[u];
        h[i] = hi;
        sum_h = sum_h + hi;
        sum_hy = sum_hy + hi * cache.y[i];
    }
    let mean_h = sum_h / nf;
    let mean_hy = sum_hy / nf;
    (0..n)
        .map(|i| (h[i] - mean_h - cache.y[i] * mean_hy) / cache.sigma)
        .collect()
}

// ---------------------------------------------------------------------------
// Dropout

/// Inverted dropout mask: `1/keep` with probability `keep`, else 0.
pub(crate) fn dropout_mask<T: Scalar>(len: usize, keep: f64, rng: &mut ChaCha8Rng) -> Vec<T> {
    let scale = T::from_f64(1.0 / keep).unwrap();
    (0..len)
        .map(|_| {
            if rng.gen::<f64>() < keep {
                scale
            } else {
                T::zero()
            }
        })
        .collect()
}
