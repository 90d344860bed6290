//! Softmax and softmax cross-entropy.

use super::Tensor;
use crate::error::{Error, Result};

/// Max-subtracted softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - m).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Negative log-likelihood of `label` under `softmax(logits)` and its
/// gradient `softmax(logits) - one_hot(label)`.
pub fn softmax_xent(logits: &Tensor, label: usize) -> Result<(f64, Tensor)> {
    let z = logits.data();
    if z.is_empty() {
        return Err(Error::Shape("softmax over empty logits".into()));
    }
    if label >= z.len() {
        return Err(Error::Parameter(format!(
            "label {label} out of range for {} classes",
            z.len()
        )));
    }
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_sum = z.iter().map(|&v| (v - m).exp()).sum::<f64>().ln();
    let loss = log_sum - (z[label] - m);
    let mut grad = softmax(z);
    grad[label] -= 1.0;
    Ok((loss, Tensor::from_vec(logits.dims(), grad)?))
}
