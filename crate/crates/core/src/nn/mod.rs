//! Minimal deterministic neural-network engine in `f64`.

mod activation;
mod conv;
mod fc;
mod gradcheck;
mod loss;
mod params;
mod pool;
mod sgd;
mod tensor;

pub use activation::{dropout, dropout_backward, relu, relu_backward, DropoutMask, Mode};
pub use conv::{conv2d_backward, conv2d_backward_opt, conv2d_forward, KERNEL};
pub use fc::{fc_backward, fc_forward};
pub use gradcheck::{gradient_check, rel_error, Differentiable, GradCheckReport, MAX_PROBES, STEP};
pub use loss::{softmax, softmax_xent};
pub use params::{Gradients, LayerParams};
pub use pool::{maxpool2x2_backward, maxpool2x2_forward, PoolArgmax};
pub use sgd::{sgd_step, DecayMode, SgdConfig};
pub use tensor::Tensor;
