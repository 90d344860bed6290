//! 3x3 convolution (cross-correlation), zero padding 1, stride 1.
//!
//! Lowered to matrix products through an im2col buffer:
//! `out (F x HW) = W (F x 9C) · col (9C x HW)`.

use super::{Gradients, LayerParams, Tensor};
use crate::error::{Error, Result};

pub const KERNEL: usize = 3;
const TAPS: usize = KERNEL * KERNEL;

/// `C = A · B + beta · C` for row-major operands, where `A` is `m x k` (or
/// stored transposed when `a_t`) and `B` is `k x n` (or transposed when `b_t`).
#[allow(clippy::too_many_arguments)]
pub(crate) fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    a_t: bool,
    b: &[f64],
    b_t: bool,
    beta: f64,
    c: &mut [f64],
) {
    assert!(a.len() >= m * k && b.len() >= k * n && c.len() >= m * n);
    let (rsa, csa) = if a_t {
        (1, m as isize)
    } else {
        (k as isize, 1)
    };
    let (rsb, csb) = if b_t {
        (1, k as isize)
    } else {
        (n as isize, 1)
    };
    // SAFETY: the assertion above bounds every index touched by the strides.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

fn check_shapes(input: &Tensor, params: &LayerParams) -> Result<(usize, usize, usize, usize)> {
    let (c, h, w) = input.chw()?;
    let wd = params.weights.dims();
    if wd.len() != 4 || wd[2] != KERNEL || wd[3] != KERNEL {
        return Err(Error::Shape(format!(
            "convolution weights must be F x C x 3 x 3, got {wd:?}"
        )));
    }
    if wd[1] != c {
        return Err(Error::Shape(format!(
            "convolution expects {} input channels, got {c}",
            wd[1]
        )));
    }
    if params.biases.len() != wd[0] {
        return Err(Error::Shape(format!(
            "{} biases for {} filters",
            params.biases.len(),
            wd[0]
        )));
    }
    if h == 0 || w == 0 {
        return Err(Error::Shape(
            "convolution input has an empty spatial dim".into(),
        ));
    }
    Ok((c, h, w, wd[0]))
}

fn im2col(input: &[f64], c: usize, h: usize, w: usize) -> Vec<f64> {
    let hw = h * w;
    let mut col = vec![0.0; c * TAPS * hw];
    for ci in 0..c {
        let plane = &input[ci * hw..(ci + 1) * hw];
        for ky in 0..KERNEL {
            for kx in 0..KERNEL {
                let row = &mut col[((ci * TAPS) + ky * KERNEL + kx) * hw..][..hw];
                for y in 0..h {
                    let sy = y as isize + ky as isize - 1;
                    if sy < 0 || sy >= h as isize {
                        continue;
                    }
                    let src = &plane[sy as usize * w..(sy as usize + 1) * w];
                    let dst = &mut row[y * w..(y + 1) * w];
                    // dst[x] = src[x + kx - 1] where in range
                    match kx {
                        0 => dst[1..].copy_from_slice(&src[..w - 1]),
                        1 => dst.copy_from_slice(src),
                        _ => dst[..w - 1].copy_from_slice(&src[1..]),
                    }
                }
            }
        }
    }
    col
}

fn col2im(col: &[f64], c: usize, h: usize, w: usize) -> Vec<f64> {
    let hw = h * w;
    let mut out = vec![0.0; c * hw];
    for ci in 0..c {
        let plane = &mut out[ci * hw..(ci + 1) * hw];
        for ky in 0..KERNEL {
            for kx in 0..KERNEL {
                let row = &col[((ci * TAPS) + ky * KERNEL + kx) * hw..][..hw];
                for y in 0..h {
                    let sy = y as isize + ky as isize - 1;
                    if sy < 0 || sy >= h as isize {
                        continue;
                    }
                    let dst = &mut plane[sy as usize * w..(sy as usize + 1) * w];
                    let src = &row[y * w..(y + 1) * w];
                    match kx {
                        0 => dst[..w - 1]
                            .iter_mut()
                            .zip(&src[1..])
                            .for_each(|(d, s)| *d += s),
                        1 => dst.iter_mut().zip(src).for_each(|(d, s)| *d += s),
                        _ => dst[1..]
                            .iter_mut()
                            .zip(&src[..w - 1])
                            .for_each(|(d, s)| *d += s),
                    }
                }
            }
        }
    }
    out
}

/// `F x H x W` output of the 3x3 convolution of a `C x H x W` input.
pub fn conv2d_forward(input: &Tensor, params: &LayerParams) -> Result<Tensor> {
    let (c, h, w, f) = check_shapes(input, params)?;
    let hw = h * w;
    let col = im2col(input.data(), c, h, w);
    let mut out = vec![0.0; f * hw];
    for (fi, row) in out.chunks_exact_mut(hw).enumerate() {
        row.fill(params.biases.data()[fi]);
    }
    gemm(
        f,
        c * TAPS,
        hw,
        params.weights.data(),
        false,
        &col,
        false,
        1.0,
        &mut out,
    );
    Tensor::from_vec(&[f, h, w], out)
}

/// Gradients of the convolution given the upstream gradient of its output.
///
/// Returns the input gradient (skipped when `need_input_grad` is false, e.g.
/// for a layer that reads the data directly) and the parameter gradients.
pub fn conv2d_backward_opt(
    input: &Tensor,
    params: &LayerParams,
    upstream: &Tensor,
    need_input_grad: bool,
) -> Result<(Option<Tensor>, Gradients)> {
    let (c, h, w, f) = check_shapes(input, params)?;
    if upstream.dims() != [f, h, w] {
        return Err(Error::Shape(format!(
            "upstream gradient dims {:?} do not match output {:?}",
            upstream.dims(),
            [f, h, w]
        )));
    }
    let hw = h * w;
    let ck = c * TAPS;
    let dy = upstream.data();
    let col = im2col(input.data(), c, h, w);

    let mut dw = vec![0.0; f * ck];
    gemm(f, hw, ck, dy, false, &col, true, 0.0, &mut dw);
    let db: Vec<f64> = dy.chunks_exact(hw).map(|r| r.iter().sum()).collect();

    let dx = if need_input_grad {
        let mut dcol = vec![0.0; ck * hw];
        gemm(
            ck,
            f,
            hw,
            params.weights.data(),
            true,
            dy,
            false,
            0.0,
            &mut dcol,
        );
        Some(Tensor::from_vec(&[c, h, w], col2im(&dcol, c, h, w))?)
    } else {
        None
    };
    Ok((
        dx,
        Gradients {
            weights: Tensor::from_vec(params.weights.dims(), dw)?,
            biases: Tensor::from_vec(&[f], db)?,
        },
    ))
}

/// Input gradient and parameter gradients of the convolution.
pub fn conv2d_backward(
    input: &Tensor,
    params: &LayerParams,
    upstream: &Tensor,
) -> Result<(Tensor, Gradients)> {
    let (dx, grads) = conv2d_backward_opt(input, params, upstream, true)?;
    Ok((dx.expect("input gradient requested"), grads))
}
