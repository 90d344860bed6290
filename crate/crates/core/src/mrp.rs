//! Multiresolution recurrence plots.
//!
//! Each layer `k` (0..=6) looks at a block of `2^(5 + 2k)` samples starting at
//! an acquisition point and reduces it to a 32x32 image in two phases:
//!
//! 1. polarity-preserving 1-D max pooling with window `2^k`, leaving
//!    `32 * 2^k` samples;
//! 2. the recurrence plot `R(i, j) = |y[i] - y[j]|` of that sequence, reduced
//!    by 2-D max pooling with window `2^k`.
//!
//! The pooled image is then square-root compressed and zero-centred. Its
//! magnitude is deliberately left unnormalised.
//!
//! For the large layers the recurrence plot is never materialised: the
//! maximum of `|y[i] - y[j]|` over a block pair is
//! `max(max_I - min_J, max_J - min_I)`, and because IEEE subtraction is
//! monotone in both operands this equals the naive block maximum bit for bit.

use crate::audio_io::TimeSeries;
use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;

/// Side length of every feature image.
pub const IMAGE_SIDE: usize = 32;
/// Number of resolution layers per acquisition point.
pub const LAYERS: usize = 7;

/// Recurrence plot of a sequence.
pub type RpMatrix = SquareMatrix;

/// Block length (in samples) analysed by `layer`: 2^5, 2^7, ..., 2^17.
pub fn layer_block_len(layer: usize) -> usize {
    1 << (5 + 2 * layer)
}

/// Pooling window shared by the 1-D and 2-D phases of `layer`.
pub fn layer_pool_window(layer: usize) -> usize {
    1 << layer
}

/// `R(i, j) = |x[i] - x[j]|`.
pub fn recurrence_plot(x: &[f64]) -> Result<RpMatrix> {
    if x.is_empty() {
        return Err(Error::EmptyInput(
            "recurrence plot of an empty sequence".into(),
        ));
    }
    let n = x.len();
    let mut m = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = (x[i] - x[j]).abs();
            m.set(i, j, d);
            m.set(j, i, d);
        }
    }
    Ok(m)
}

/// Keep, per non-overlapping window of `window` samples, the sample with the
/// largest magnitude together with its sign. Ties go to the earliest sample.
pub fn maxpool_1d(x: &[f64], window: usize) -> Result<Vec<f64>> {
    if window < 1 {
        return Err(Error::Parameter(
            "1-D pooling window must be at least 1".into(),
        ));
    }
    if x.len() % window != 0 {
        return Err(Error::Shape(format!(
            "sequence length {} is not a multiple of pooling window {window}",
            x.len()
        )));
    }
    Ok(x.chunks_exact(window)
        .map(|w| {
            let mut best = w[0];
            for &v in &w[1..] {
                if v.abs() > best.abs() {
                    best = v;
                }
            }
            best
        })
        .collect())
}

/// Maximum over non-overlapping `k x k` blocks.
pub fn maxpool_2d(m: &SquareMatrix, k: usize) -> Result<SquareMatrix> {
    if k < 1 {
        return Err(Error::Parameter(
            "2-D pooling window must be at least 1".into(),
        ));
    }
    let side = m.side();
    if side % k != 0 {
        return Err(Error::Shape(format!(
            "matrix side {side} is not a multiple of pooling window {k}"
        )));
    }
    let out_side = side / k;
    let mut out = SquareMatrix::zeros(out_side);
    for bi in 0..out_side {
        for bj in 0..out_side {
            let mut best = f64::NEG_INFINITY;
            for i in bi * k..(bi + 1) * k {
                for j in bj * k..(bj + 1) * k {
                    let v = m.get(i, j);
                    if v > best {
                        best = v;
                    }
                }
            }
            out.set(bi, bj, best);
        }
    }
    Ok(out)
}

/// `sqrt(m) - mean(sqrt(m))`, element-wise, with no further scaling.
pub fn preprocess_image(m: &SquareMatrix) -> Result<SquareMatrix> {
    if let Some(v) = m.values().iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::Domain(format!(
            "square-root compression needs non-negative entries, found {v}"
        )));
    }
    let mut out = m.map(f64::sqrt);
    out.center();
    Ok(out)
}

/// Recurrence plot of `y` followed by `k x k` max pooling, computed from
/// per-block extrema without building the full plot.
pub fn pooled_recurrence_plot(y: &[f64], k: usize) -> Result<SquareMatrix> {
    if y.is_empty() {
        return Err(Error::EmptyInput(
            "recurrence plot of an empty sequence".into(),
        ));
    }
    if k < 1 {
        return Err(Error::Parameter(
            "2-D pooling window must be at least 1".into(),
        ));
    }
    if y.len() % k != 0 {
        return Err(Error::Shape(format!(
            "sequence length {} is not a multiple of pooling window {k}",
            y.len()
        )));
    }
    let (maxs, mins): (Vec<f64>, Vec<f64>) = y
        .chunks_exact(k)
        .map(|b| {
            b.iter()
                .fold((f64::NEG_INFINITY, f64::INFINITY), |(hi, lo), &v| {
                    (if v > hi { v } else { hi }, if v < lo { v } else { lo })
                })
        })
        .unzip();
    let side = maxs.len();
    let mut out = SquareMatrix::zeros(side);
    for i in 0..side {
        for j in i..side {
            let a = maxs[i] - mins[j];
            let b = maxs[j] - mins[i];
            // abs folds a possible -0.0 onto +0.0, matching |x - y|
            let d = if a >= b { a } else { b }.abs();
            out.set(i, j, d);
            out.set(j, i, d);
        }
    }
    Ok(out)
}

/// Copy `len` samples starting at `start`, zero-padding past the signal end.
pub fn extract_block(ts: &TimeSeries, start: usize, len: usize) -> Vec<f64> {
    let samples = ts.samples();
    let mut block = vec![0.0; len];
    if start < samples.len() {
        let end = (start + len).min(samples.len());
        block[..end - start].copy_from_slice(&samples[start..end]);
    }
    block
}

/// One preprocessed 32x32 MRP layer for the block beginning at `start`.
pub fn build_mrp_layer(ts: &TimeSeries, start: usize, layer: usize) -> Result<SquareMatrix> {
    if layer >= LAYERS {
        return Err(Error::Parameter(format!(
            "MRP layer {layer} out of range 0..{}",
            LAYERS - 1
        )));
    }
    let window = layer_pool_window(layer);
    let block = extract_block(ts, start, layer_block_len(layer));
    let pooled = maxpool_1d(&block, window)?;
    let image = pooled_recurrence_plot(&pooled, window)?;
    debug_assert_eq!(image.side(), IMAGE_SIDE);
    preprocess_image(&image)
}

/// Seven preprocessed layers for one acquisition point, shortest span first.
#[derive(Debug, Clone, PartialEq)]
pub struct MrpStack {
    layers: Vec<SquareMatrix>,
}

impl MrpStack {
    pub fn layers(&self) -> &[SquareMatrix] {
        &self.layers
    }

    pub fn into_layers(self) -> Vec<SquareMatrix> {
        self.layers
    }

    /// Largest absolute element difference across all layers.
    pub fn max_abs_diff(&self, other: &MrpStack) -> f64 {
        self.layers
            .iter()
            .zip(&other.layers)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }
}

/// All seven layers at `start`.
pub fn build_mrp_stack(ts: &TimeSeries, start: usize) -> Result<MrpStack> {
    let layers = (0..LAYERS)
        .map(|layer| build_mrp_layer(ts, start, layer))
        .collect::<Result<Vec<_>>>()?;
    Ok(MrpStack { layers })
}
