//! Network-ready examples: acquisition points, augmentation, fold splits,
//! the FTC feature container and the synthetic tone corpus.

pub mod folds;
pub mod ftc;
pub mod onset;
pub mod synth;

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::audio_io::{decode_wav, require_rate, TimeSeries, SAMPLE_RATE};
use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;
use crate::mrp::{build_mrp_stack, IMAGE_SIDE, LAYERS};
use crate::spectrogram::{spectrogram_image, SpectrogramConfig};

pub use folds::{make_folds, make_k_folds, FoldSplit, NUM_FOLDS};
pub use ftc::{
    decode_container, decode_features, encode_container, encode_features, read_features,
    read_payload, write_features, FeatureSet,
};
pub use onset::detect_onset;
pub use synth::{synth_corpus, SynthSpec, SynthTone};

/// Acquisition points per recording.
pub const NUM_POINTS: usize = 8;
/// Offsets of the acquisition points after the onset, dense near the onset.
pub const POINT_OFFSETS: [usize; NUM_POINTS] = [0, 1024, 2048, 4096, 8192, 16384, 32768, 65536];
pub const MRP_CHANNELS: usize = NUM_POINTS * LAYERS;
pub const SPEC_CHANNELS: usize = NUM_POINTS;
pub const CHANNEL_LEN: usize = IMAGE_SIDE * IMAGE_SIDE;
/// Number of temporally shifted variants per recording.
pub const AUGMENT_VARIANTS: usize = 13;
/// Shift between consecutive variants, in samples.
pub const AUGMENT_STRIDE: usize = 13;

/// One network input: 56 MRP channels, 8 spectrogram channels, a label.
///
/// Channel data are stored as `f32`, the precision of the feature files.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    mrp: Vec<f32>,
    spec: Vec<f32>,
    label: usize,
    source_id: String,
    shift: usize,
}

impl Example {
    pub fn from_parts(
        mrp: Vec<f32>,
        spec: Vec<f32>,
        label: usize,
        source_id: String,
        shift: usize,
    ) -> Result<Self> {
        if mrp.len() != MRP_CHANNELS * CHANNEL_LEN {
            return Err(Error::Shape(format!(
                "expected {MRP_CHANNELS} MRP channels of {CHANNEL_LEN} values, got {} values",
                mrp.len()
            )));
        }
        if spec.len() != SPEC_CHANNELS * CHANNEL_LEN {
            return Err(Error::Shape(format!(
                "expected {SPEC_CHANNELS} spectrogram channels of {CHANNEL_LEN} values, got {} values",
                spec.len()
            )));
        }
        Ok(Example {
            mrp,
            spec,
            label,
            source_id,
            shift,
        })
    }

    /// Example whose channels are all zero.
    pub fn zeros(label: usize, source_id: impl Into<String>) -> Self {
        Example {
            mrp: vec![0.0; MRP_CHANNELS * CHANNEL_LEN],
            spec: vec![0.0; SPEC_CHANNELS * CHANNEL_LEN],
            label,
            source_id: source_id.into(),
            shift: 0,
        }
    }

    /// MRP channel index for an acquisition point and layer.
    pub fn mrp_index(point: usize, layer: usize) -> usize {
        point * LAYERS + layer
    }

    pub fn mrp_channel(&self, index: usize) -> &[f32] {
        &self.mrp[index * CHANNEL_LEN..(index + 1) * CHANNEL_LEN]
    }

    pub fn spec_channel(&self, point: usize) -> &[f32] {
        &self.spec[point * CHANNEL_LEN..(point + 1) * CHANNEL_LEN]
    }

    /// Channel by global index: MRP channels 0..56, then spectrograms 56..64.
    pub fn channel(&self, index: usize) -> Option<&[f32]> {
        if index < MRP_CHANNELS {
            Some(self.mrp_channel(index))
        } else if index < MRP_CHANNELS + SPEC_CHANNELS {
            Some(self.spec_channel(index - MRP_CHANNELS))
        } else {
            None
        }
    }

    pub fn mrp_data(&self) -> &[f32] {
        &self.mrp
    }

    pub fn mrp_data_mut(&mut self) -> &mut [f32] {
        &mut self.mrp
    }

    pub fn spec_data(&self) -> &[f32] {
        &self.spec
    }

    pub fn spec_data_mut(&mut self) -> &mut [f32] {
        &mut self.spec
    }

    pub fn label(&self) -> usize {
        self.label
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    /// Augmentation shift in samples (0 for the original).
    pub fn shift(&self) -> usize {
        self.shift
    }
}

/// Feature extraction settings shared by every example.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ExtractConfig {
    pub spectrogram: SpectrogramConfig,
}

/// The eight acquisition points for a tone whose onset is `onset`.
pub fn acquisition_points(onset: usize) -> [usize; NUM_POINTS] {
    POINT_OFFSETS.map(|o| onset + o)
}

fn narrow(m: SquareMatrix) -> impl Iterator<Item = f32> {
    m.into_values().into_iter().map(|v| v as f32)
}

/// Build the 64-channel example for `ts` with every acquisition point moved
/// `shift` samples later.
pub fn assemble_example(
    ts: &TimeSeries,
    label: usize,
    source_id: &str,
    shift: usize,
    config: &ExtractConfig,
) -> Result<Example> {
    let points = acquisition_points(detect_onset(ts));
    assemble_at(ts, &points, label, source_id, shift, config)
}

fn assemble_at(
    ts: &TimeSeries,
    points: &[usize; NUM_POINTS],
    label: usize,
    source_id: &str,
    shift: usize,
    config: &ExtractConfig,
) -> Result<Example> {
    let mut mrp = Vec::with_capacity(MRP_CHANNELS * CHANNEL_LEN);
    let mut spec = Vec::with_capacity(SPEC_CHANNELS * CHANNEL_LEN);
    for &p in points {
        let start = p + shift;
        for layer in build_mrp_stack(ts, start)?.into_layers() {
            mrp.extend(narrow(layer));
        }
        spec.extend(narrow(
            spectrogram_image(ts, start, &config.spectrogram)?.into_matrix(),
        ));
    }
    Example::from_parts(mrp, spec, label, source_id.to_string(), shift)
}

/// The 13 temporally shifted variants (shifts 0, 13, ..., 156 samples).
pub fn augment(
    ts: &TimeSeries,
    label: usize,
    source_id: &str,
    config: &ExtractConfig,
) -> Result<Vec<Example>> {
    let points = acquisition_points(detect_onset(ts));
    (0..AUGMENT_VARIANTS)
        .map(|k| assemble_at(ts, &points, label, source_id, AUGMENT_STRIDE * k, config))
        .collect()
}

/// Extract examples for many labelled recordings in parallel. Output order
/// follows input order; with `augmented` each source yields 13 variants.
pub fn extract_all(
    items: &[(TimeSeries, usize, String)],
    augmented: bool,
    config: &ExtractConfig,
) -> Result<Vec<Example>> {
    let per_source: Vec<Vec<Example>> = items
        .par_iter()
        .map(|(ts, label, id)| {
            if augmented {
                augment(ts, *label, id, config)
            } else {
                assemble_example(ts, *label, id, 0, config).map(|e| vec![e])
            }
        })
        .collect::<Result<_>>()?;
    Ok(per_source.into_iter().flatten().collect())
}

/// One corpus manifest entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// WAV path, relative to the manifest's directory unless absolute.
    pub path: PathBuf,
    pub label: usize,
    pub source_id: String,
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestEntry>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
    let entries: Vec<ManifestEntry> =
        serde_json::from_str(&text).map_err(|e| Error::from(e).in_file(path))?;
    if entries.is_empty() {
        return Err(Error::EmptyInput("manifest lists no recordings".into()).in_file(path));
    }
    Ok(entries)
}

/// Decode every manifest entry at the standard rate, naming the file on error.
pub fn load_manifest_audio(
    manifest_path: impl AsRef<Path>,
    entries: &[ManifestEntry],
) -> Result<Vec<(TimeSeries, usize, String)>> {
    let base = manifest_path
        .as_ref()
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default();
    entries
        .par_iter()
        .map(|e| {
            let path = if e.path.is_absolute() {
                e.path.clone()
            } else {
                base.join(&e.path)
            };
            let load = || -> Result<TimeSeries> {
                let bytes = std::fs::read(&path)?;
                require_rate(decode_wav(&bytes)?, SAMPLE_RATE)
            };
            load()
                .map(|ts| (ts, e.label, e.source_id.clone()))
                .map_err(|err| err.in_file(&path))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mrp::build_mrp_layer;
    use crate::rng::Lcg;

    fn noise(n: usize, seed: u64) -> TimeSeries {
        let mut rng = Lcg::new(seed);
        TimeSeries::new((0..n).map(|_| rng.uniform(-0.5, 0.5)).collect(), 44100).unwrap()
    }

    #[test]
    fn points_from_onset() {
        assert_eq!(acquisition_points(0), POINT_OFFSETS);
        let shifted = acquisition_points(500);
        for (a, b) in shifted.iter().zip(POINT_OFFSETS) {
            assert_eq!(*a, b + 500);
        }
        assert!(shifted.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn zero_signal_example_is_zero() {
        let ts = TimeSeries::new(vec![0.0; 3000], 44100).unwrap();
        let e = assemble_example(&ts, 1, "z", 26, &ExtractConfig::default()).unwrap();
        assert!(e.mrp_data().iter().all(|&v| v == 0.0));
        assert!(e.spec_data().iter().all(|&v| v == 0.0));
        assert_eq!(e.shift(), 26);
    }

    #[test]
    fn channel_matches_standalone_layer() {
        let ts = noise(20000, 3);
        let cfg = ExtractConfig::default();
        let e = assemble_example(&ts, 0, "n", 7, &cfg).unwrap();
        let again = assemble_example(&ts, 0, "n", 7, &cfg).unwrap();
        assert_eq!(e, again);
        let p2 = acquisition_points(detect_onset(&ts))[2];
        let standalone: Vec<f32> = build_mrp_layer(&ts, p2 + 7, 3)
            .unwrap()
            .values()
            .iter()
            .map(|&v| v as f32)
            .collect();
        assert_eq!(
            e.mrp_channel(Example::mrp_index(2, 3)),
            standalone.as_slice()
        );
        assert_eq!(Example::mrp_index(2, 3), 17);
    }

    #[test]
    fn augment_produces_thirteen_shifted_variants() {
        let ts = noise(6000, 8);
        let cfg = ExtractConfig::default();
        let vars = augment(&ts, 2, "n", &cfg).unwrap();
        assert_eq!(vars.len(), AUGMENT_VARIANTS);
        assert_eq!(vars[0], assemble_example(&ts, 2, "n", 0, &cfg).unwrap());
        assert_eq!(vars[3], assemble_example(&ts, 2, "n", 39, &cfg).unwrap());
        assert!(vars.iter().all(|v| v.source_id() == "n" && v.label() == 2));
    }

    #[test]
    fn channel_lookup() {
        let e = Example::zeros(0, "x");
        assert!(e.channel(63).is_some());
        assert!(e.channel(64).is_none());
    }
}
