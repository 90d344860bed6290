//! 2x2 max pooling, stride 2.

use super::Tensor;
use crate::error::{Error, Result};

/// Flat input index of the maximum of every pooled cell.
#[derive(Debug, Clone, PartialEq)]
pub struct PoolArgmax {
    input_dims: Vec<usize>,
    indices: Vec<usize>,
}

impl PoolArgmax {
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }
}

/// Per-block maximum; ties go to the earliest row-major position.
pub fn maxpool2x2_forward(input: &Tensor) -> Result<(Tensor, PoolArgmax)> {
    let (c, h, w) = input.chw()?;
    if h % 2 != 0 || w % 2 != 0 {
        return Err(Error::Shape(format!(
            "2x2 pooling needs even spatial dims, got {h}x{w}"
        )));
    }
    let (oh, ow) = (h / 2, w / 2);
    let x = input.data();
    let mut out = Vec::with_capacity(c * oh * ow);
    let mut indices = Vec::with_capacity(c * oh * ow);
    for ci in 0..c {
        let base = ci * h * w;
        for oy in 0..oh {
            for ox in 0..ow {
                let r0 = base + 2 * oy * w + 2 * ox;
                let r1 = r0 + w;
                let mut best = r0;
                for idx in [r0 + 1, r1, r1 + 1] {
                    if x[idx] > x[best] {
                        best = idx;
                    }
                }
                out.push(x[best]);
                indices.push(best);
            }
        }
    }
    Ok((
        Tensor::from_vec(&[c, oh, ow], out)?,
        PoolArgmax {
            input_dims: input.dims().to_vec(),
            indices,
        },
    ))
}

/// Routes each upstream value to its recorded argmax.
pub fn maxpool2x2_backward(argmax: &PoolArgmax, upstream: &Tensor) -> Result<Tensor> {
    if upstream.len() != argmax.indices.len() {
        return Err(Error::Shape(format!(
            "upstream of {} values for {} pooled cells",
            upstream.len(),
            argmax.indices.len()
        )));
    }
    let mut g = Tensor::zeros(&argmax.input_dims);
    let gd = g.data_mut();
    for (&idx, &u) in argmax.indices.iter().zip(upstream.data()) {
        gd[idx] += u;
    }
    Ok(g)
}
