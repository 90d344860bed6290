//! 32x32 log-magnitude spectrogram images.
//!
//! 64-sample frames at a hop of 16 samples, linear frequency axis, bins 0..31
//! (the Nyquist bin is dropped), `ln(|X| + 1e-10)`, then the image is
//! centred on its mean. Rows are frequency bins, columns are time frames.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::audio_io::TimeSeries;
use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;
use crate::mrp::{extract_block, IMAGE_SIDE};

pub const FRAME_LEN: usize = 64;
pub const HOP: usize = FRAME_LEN / 4;
pub const NUM_BINS: usize = FRAME_LEN / 2 + 1;
pub const LOG_FLOOR: f64 = 1e-10;

/// Analysis window applied to each frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    #[default]
    Rectangular,
    /// Periodic Hann, `0.5 - 0.5 cos(2πn/64)`.
    Hann,
}

impl Window {
    fn coefficients(self) -> [f64; FRAME_LEN] {
        let mut w = [1.0; FRAME_LEN];
        if self == Window::Hann {
            for (n, c) in w.iter_mut().enumerate() {
                *c = 0.5 - 0.5 * (2.0 * std::f64::consts::PI * n as f64 / FRAME_LEN as f64).cos();
            }
        }
        w
    }
}

/// Spectrogram settings. Only the window is configurable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectrogramConfig {
    pub window: Window,
    /// Subtract the image mean after log compression.
    #[serde(default = "default_true")]
    pub center: bool,
}

fn default_true() -> bool {
    true
}

impl Default for SpectrogramConfig {
    fn default() -> Self {
        SpectrogramConfig::rectangular()
    }
}

impl SpectrogramConfig {
    pub fn rectangular() -> Self {
        SpectrogramConfig {
            window: Window::Rectangular,
            center: true,
        }
    }
}

/// Frame transformer holding a planned 64-point FFT.
pub struct FrameTransform {
    fft: Arc<dyn Fft<f64>>,
    window: [f64; FRAME_LEN],
}

impl FrameTransform {
    pub fn new(window: Window) -> Self {
        let fft = FftPlanner::new().plan_fft_forward(FRAME_LEN);
        FrameTransform {
            fft,
            window: window.coefficients(),
        }
    }

    /// `|X[k]|` for `k = 0..=32` of the windowed frame.
    pub fn magnitudes(&self, frame: &[f64]) -> Result<Vec<f64>> {
        if frame.len() != FRAME_LEN {
            return Err(Error::Shape(format!(
                "frame has {} samples, expected {FRAME_LEN}",
                frame.len()
            )));
        }
        let mut buf: Vec<Complex<f64>> = frame
            .iter()
            .zip(&self.window)
            .map(|(&s, &w)| Complex::new(s * w, 0.0))
            .collect();
        self.fft.process(&mut buf);
        Ok(buf[..NUM_BINS].iter().map(|c| c.norm()).collect())
    }
}

/// Rectangular-window DFT magnitudes of one 64-sample frame.
pub fn dft_magnitudes(frame: &[f64]) -> Result<Vec<f64>> {
    FrameTransform::new(Window::Rectangular).magnitudes(frame)
}

/// A 32x32 time-frequency image; rows are bins 0..31, columns frames 0..31.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrogramImage {
    values: SquareMatrix,
}

impl SpectrogramImage {
    pub fn matrix(&self) -> &SquareMatrix {
        &self.values
    }

    pub fn into_matrix(self) -> SquareMatrix {
        self.values
    }
}

/// Spectrogram image of the 32 frames starting at `start`.
pub fn spectrogram_image(
    ts: &TimeSeries,
    start: usize,
    config: &SpectrogramConfig,
) -> Result<SpectrogramImage> {
    let transform = FrameTransform::new(config.window);
    // frames reach 16 * 31 + 64 samples past `start`
    let span = HOP * (IMAGE_SIDE - 1) + FRAME_LEN;
    let block = extract_block(ts, start, span);
    let mut m = SquareMatrix::zeros(IMAGE_SIDE);
    for frame in 0..IMAGE_SIDE {
        let mags = transform.magnitudes(&block[frame * HOP..frame * HOP + FRAME_LEN])?;
        for bin in 0..IMAGE_SIDE {
            m.set(bin, frame, (mags[bin] + LOG_FLOOR).ln());
        }
    }
    if config.center {
        m.center();
    }
    Ok(SpectrogramImage { values: m })
}
