//! Stochastic gradient descent with momentum and decay.

use serde::{Deserialize, Serialize};

use super::{Gradients, LayerParams};
use crate::error::{Error, Result};

/// How `decay` is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayMode {
    /// `η_t = lr / (1 + decay · t)`.
    #[default]
    LearningRate,
    /// Constant `lr`; `decay · w` is added to every weight gradient.
    L2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SgdConfig {
    pub learning_rate: f64,
    pub decay: f64,
    pub momentum: f64,
    #[serde(default)]
    pub decay_mode: DecayMode,
}

impl Default for SgdConfig {
    fn default() -> Self {
        SgdConfig {
            learning_rate: 1e-2,
            decay: 1e-4,
            momentum: 0.8,
            decay_mode: DecayMode::LearningRate,
        }
    }
}

impl SgdConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(Error::Config(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::Config(format!(
                "momentum must lie in [0, 1), got {}",
                self.momentum
            )));
        }
        if !(self.decay >= 0.0) {
            return Err(Error::Config(format!(
                "decay must be non-negative, got {}",
                self.decay
            )));
        }
        Ok(())
    }

    /// Step size at update `iteration`.
    pub fn rate_at(&self, iteration: u64) -> f64 {
        match self.decay_mode {
            DecayMode::LearningRate => self.learning_rate / (1.0 + self.decay * iteration as f64),
            DecayMode::L2 => self.learning_rate,
        }
    }
}

/// `v <- m·v - η_t·g; p <- p + v` for every layer.
pub fn sgd_step(
    params: &mut [LayerParams],
    grads: &[Gradients],
    cfg: &SgdConfig,
    iteration: u64,
) -> Result<()> {
    if params.len() != grads.len() {
        return Err(Error::Shape(format!(
            "{} layers but {} gradients",
            params.len(),
            grads.len()
        )));
    }
    let eta = cfg.rate_at(iteration);
    let l2 = match cfg.decay_mode {
        DecayMode::L2 => cfg.decay,
        DecayMode::LearningRate => 0.0,
    };
    for (p, g) in params.iter_mut().zip(grads) {
        if p.weights.dims() != g.weights.dims() || p.biases.dims() != g.biases.dims() {
            return Err(Error::Shape(
                "gradient dims differ from parameter dims".into(),
            ));
        }
        update(
            p.weights.data_mut(),
            p.weight_velocity.data_mut(),
            g.weights.data(),
            cfg.momentum,
            eta,
            l2,
        );
        update(
            p.biases.data_mut(),
            p.bias_velocity.data_mut(),
            g.biases.data(),
            cfg.momentum,
            eta,
            0.0,
        );
    }
    Ok(())
}

fn update(w: &mut [f64], v: &mut [f64], g: &[f64], momentum: f64, eta: f64, l2: f64) {
    for ((w, v), &g) in w.iter_mut().zip(v.iter_mut()).zip(g) {
        let g = if l2 != 0.0 { g + l2 * *w } else { g };
        *v = momentum * *v - eta * g;
        *w += *v;
    }
}
