//! Musical instrument timbre classification from multiresolution recurrence
//! plots (MRPs) and spectrogram images.
//!
//! The pipeline:
//!
//! ```text
//! WAV -> TimeSeries -> onset -> 8 acquisition points
//!     -> per point: 7 MRP layers + 1 spectrogram image (32x32 each)
//!     -> Example (56 + 8 channels)
//!     -> two-column CNN, columns summed at the fully-connected head
//! ```
//!
//! MRPs keep the waveform's phase structure, which a magnitude spectrogram
//! discards; the two-column network lets the classifier use both.

pub mod audio_io;
pub mod dataset;
pub mod error;
pub mod matrix;
pub mod model;
pub mod mrp;
pub mod nn;
pub mod pgm;
pub mod rng;
pub mod spectrogram;

pub use audio_io::{decode_wav, require_rate, TimeSeries};
pub use dataset::Example;
pub use error::{Error, Result};
pub use matrix::SquareMatrix;
pub use model::{cross_validate, MultiColumnNet, NetConfig, Variant};
pub use mrp::{build_mrp_layer, build_mrp_stack, MrpStack};
pub use rng::Lcg;
pub use spectrogram::{spectrogram_image, SpectrogramImage};
