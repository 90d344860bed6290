use super::Tensor;
use crate::error::{Error, Result};
use crate::rng::Lcg;

/// Weights, biases and their momentum buffers for one layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    pub weights: Tensor,
    pub biases: Tensor,
    pub weight_velocity: Tensor,
    pub bias_velocity: Tensor,
}

impl LayerParams {
    /// Zero biases and zero momentum.
    pub fn new(weights: Tensor, biases: Tensor) -> Self {
        let weight_velocity = Tensor::zeros(weights.dims());
        let bias_velocity = Tensor::zeros(biases.dims());
        LayerParams {
            weights,
            biases,
            weight_velocity,
            bias_velocity,
        }
    }

    /// All-zero weights and biases.
    pub fn zeros(weight_dims: &[usize], bias_len: usize) -> Self {
        LayerParams::new(Tensor::zeros(weight_dims), Tensor::zeros(&[bias_len]))
    }

    /// Weights uniform in `±sqrt(6 / fan_in)`, biases zero. `fan_in` is the
    /// product of all weight dims except the first (output) one.
    pub fn uniform_fan_in(weight_dims: &[usize], rng: &mut Lcg) -> Self {
        let fan_in: usize = weight_dims[1..].iter().product();
        let limit = (6.0 / fan_in as f64).sqrt();
        let mut w = Tensor::zeros(weight_dims);
        for v in w.data_mut() {
            *v = rng.uniform(-limit, limit);
        }
        LayerParams::new(w, Tensor::zeros(&[weight_dims[0]]))
    }

    pub fn check(&self) -> Result<()> {
        if self.weight_velocity.dims() != self.weights.dims()
            || self.bias_velocity.dims() != self.biases.dims()
        {
            return Err(Error::Shape(
                "velocity dims differ from parameter dims".into(),
            ));
        }
        Ok(())
    }

    pub fn zero_grads(&self) -> Gradients {
        Gradients {
            weights: Tensor::zeros(self.weights.dims()),
            biases: Tensor::zeros(self.biases.dims()),
        }
    }

    pub fn num_values(&self) -> usize {
        self.weights.len() + self.biases.len()
    }
}

/// Gradient of a scalar loss with respect to one layer's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Tensor,
    pub biases: Tensor,
}

impl Gradients {
    pub fn add_scaled(&mut self, other: &Gradients, alpha: f64) {
        self.weights.add_scaled(&other.weights, alpha);
        self.biases.add_scaled(&other.biases, alpha);
    }

    pub fn scale(&mut self, alpha: f64) {
        self.weights.scale(alpha);
        self.biases.scale(alpha);
    }
}
