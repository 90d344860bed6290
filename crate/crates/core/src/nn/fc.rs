//! Fully-connected layer: `y = W x + b` with `W` of dims `out x in`.

use super::{Gradients, LayerParams, Tensor};
use crate::error::{Error, Result};

fn check(x: &Tensor, params: &LayerParams) -> Result<(usize, usize)> {
    let wd = params.weights.dims();
    let [out, inp] = wd[..] else {
        return Err(Error::Shape(format!("fc weights must be 2-D, got {wd:?}")));
    };
    if x.len() != inp {
        return Err(Error::Shape(format!(
            "fc expects {inp} inputs, got {}",
            x.len()
        )));
    }
    if params.biases.len() != out {
        return Err(Error::Shape(format!(
            "{} biases for {out} outputs",
            params.biases.len()
        )));
    }
    Ok((out, inp))
}

pub fn fc_forward(x: &Tensor, params: &LayerParams) -> Result<Tensor> {
    let (out, inp) = check(x, params)?;
    let w = params.weights.data();
    let y = (0..out)
        .map(|o| {
            let row = &w[o * inp..(o + 1) * inp];
            params.biases.data()[o] + row.iter().zip(x.data()).map(|(a, b)| a * b).sum::<f64>()
        })
        .collect();
    Tensor::from_vec(&[out], y)
}

/// Input gradient (same dims as `x`) and parameter gradients.
pub fn fc_backward(
    x: &Tensor,
    params: &LayerParams,
    upstream: &Tensor,
) -> Result<(Tensor, Gradients)> {
    let (out, inp) = check(x, params)?;
    if upstream.len() != out {
        return Err(Error::Shape(format!(
            "fc upstream of {} for {out} outputs",
            upstream.len()
        )));
    }
    let w = params.weights.data();
    let g = upstream.data();
    let mut dx = vec![0.0; inp];
    let mut dw = vec![0.0; out * inp];
    for o in 0..out {
        let go = g[o];
        let row = &w[o * inp..(o + 1) * inp];
        for ((d, &wv), (dwv, &xv)) in dx
            .iter_mut()
            .zip(row)
            .zip(dw[o * inp..(o + 1) * inp].iter_mut().zip(x.data()))
        {
            *d += wv * go;
            *dwv = go * xv;
        }
    }
    Ok((
        Tensor::from_vec(x.dims(), dx)?,
        Gradients {
            weights: Tensor::from_vec(&[out, inp], dw)?,
            biases: upstream.clone().reshape(&[out])?,
        },
    ))
}
