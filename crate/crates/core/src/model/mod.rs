//! Multi-column network, training, evaluation and cross-validation.

mod check;
mod eval;
mod net;
mod persist;
mod train;

pub use check::NetLoss;
pub use eval::{
    cross_validate, evaluate, evaluate_with, ConfusionMatrix, CvConfig, CvOutcome, CvResult,
    Evaluation, FoldOutcome,
};
pub use net::{
    ColumnConfig, InputNorm, InputSource, MultiColumnNet, NetConfig, NetShape, Variant, NUM_LAYERS,
};
pub use persist::{decode_params, encode_params, read_params, write_params, PARAMS_KIND};
pub use train::{train, TrainConfig};
