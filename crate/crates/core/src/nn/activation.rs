//! ReLU and inverted dropout.

use super::Tensor;
use crate::error::{Error, Result};
use crate::rng::Lcg;

pub fn relu(x: &Tensor) -> Tensor {
    let mut y = x.clone();
    y.data_mut().iter_mut().for_each(|v| *v = v.max(0.0));
    y
}

/// Passes `upstream` where `x > 0`; zero elsewhere, including at 0.
pub fn relu_backward(x: &Tensor, upstream: &Tensor) -> Result<Tensor> {
    if x.dims() != upstream.dims() {
        return Err(Error::Shape(format!(
            "relu input {:?} vs upstream {:?}",
            x.dims(),
            upstream.dims()
        )));
    }
    let data = x
        .data()
        .iter()
        .zip(upstream.data())
        .map(|(&a, &g)| if a > 0.0 { g } else { 0.0 })
        .collect();
    Tensor::from_vec(x.dims(), data)
}

/// Whether stochastic layers are active.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Which elements survived a dropout pass and their rescale factor.
#[derive(Debug, Clone, PartialEq)]
pub struct DropoutMask {
    keep: Vec<bool>,
    scale: f64,
}

impl DropoutMask {
    pub fn all_kept(len: usize) -> Self {
        DropoutMask {
            keep: vec![true; len],
            scale: 1.0,
        }
    }

    pub fn keep(&self) -> &[bool] {
        &self.keep
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn kept_fraction(&self) -> f64 {
        self.keep.iter().filter(|&&k| k).count() as f64 / self.keep.len().max(1) as f64
    }
}

fn check_rate(rate: f64) -> Result<()> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::Parameter(format!(
            "dropout rate must lie in [0, 1), got {rate}"
        )));
    }
    Ok(())
}

/// Inverted dropout. In train mode each element is zeroed with probability
/// `rate` and survivors are scaled by `1 / (1 - rate)`; eval mode is the
/// identity. The RNG is only consumed in train mode with `rate > 0`.
pub fn dropout(x: &Tensor, rate: f64, mode: Mode, rng: &mut Lcg) -> Result<(Tensor, DropoutMask)> {
    check_rate(rate)?;
    if mode == Mode::Eval || rate == 0.0 {
        return Ok((x.clone(), DropoutMask::all_kept(x.len())));
    }
    let scale = 1.0 / (1.0 - rate);
    let keep: Vec<bool> = (0..x.len()).map(|_| rng.next_f64() >= rate).collect();
    let mut y = x.clone();
    for (v, &k) in y.data_mut().iter_mut().zip(&keep) {
        *v = if k { *v * scale } else { 0.0 };
    }
    Ok((y, DropoutMask { keep, scale }))
}

pub fn dropout_backward(mask: &DropoutMask, upstream: &Tensor) -> Result<Tensor> {
    if mask.keep.len() != upstream.len() {
        return Err(Error::Shape(format!(
            "dropout mask of {} for upstream of {}",
            mask.keep.len(),
            upstream.len()
        )));
    }
    let mut g = upstream.clone();
    for (v, &k) in g.data_mut().iter_mut().zip(&mask.keep) {
        *v = if k { *v * mask.scale } else { 0.0 };
    }
    Ok(g)
}
