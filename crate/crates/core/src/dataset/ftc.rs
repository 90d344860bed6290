//! FTC container: `"FTC1"`, version `u32` LE (= 1), header length `u32` LE,
//! UTF-8 JSON header, then a payload of IEEE-754 binary32 little-endian
//! values.
//!
//! Feature files carry, per example, 64 channels of 32x32 values in row-major
//! order, MRP channels first (`point * 7 + layer`), then the 8 spectrogram
//! channels by acquisition point.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Example, CHANNEL_LEN, MRP_CHANNELS, SPEC_CHANNELS};
use crate::error::{Error, Result};
use crate::mrp::{IMAGE_SIDE, LAYERS};

pub const MAGIC: &[u8; 4] = b"FTC1";
pub const VERSION: u32 = 1;
const PREAMBLE: usize = 12;

fn format_err(offset: usize, reason: impl Into<String>) -> Error {
    Error::Format {
        offset: offset as u64,
        reason: reason.into(),
    }
}

/// Serialise a header and a binary32 payload into one buffer.
pub fn encode_container(header: &[u8], payload: impl IntoIterator<Item = f32>) -> Vec<u8> {
    let mut out = Vec::with_capacity(PREAMBLE + header.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(header.len() as u32).to_le_bytes());
    out.extend_from_slice(header);
    for v in payload {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Split a container into its JSON header bytes and payload bytes, returning
/// the payload's byte offset as well.
pub fn decode_container(bytes: &[u8]) -> Result<(&[u8], &[u8], usize)> {
    if bytes.len() < PREAMBLE {
        return Err(format_err(
            bytes.len(),
            "file shorter than the 12-byte preamble",
        ));
    }
    if &bytes[0..4] != MAGIC {
        return Err(format_err(0, "bad magic, expected \"FTC1\""));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(format_err(4, format!("unsupported version {version}")));
    }
    let header_len = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let payload_start = PREAMBLE + header_len;
    if bytes.len() < payload_start {
        return Err(format_err(
            bytes.len(),
            format!("truncated header: declared {header_len} bytes"),
        ));
    }
    Ok((
        &bytes[PREAMBLE..payload_start],
        &bytes[payload_start..],
        payload_start,
    ))
}

/// Decode `count` binary32 values, checking the payload length exactly.
pub fn read_payload(payload: &[u8], payload_offset: usize, count: usize) -> Result<Vec<f32>> {
    let expected = count * 4;
    if payload.len() < expected {
        return Err(format_err(
            payload_offset + payload.len(),
            format!(
                "truncated payload: expected {expected} bytes, found {}",
                payload.len()
            ),
        ));
    }
    if payload.len() > expected {
        return Err(format_err(
            payload_offset + expected,
            format!("{} trailing bytes after payload", payload.len() - expected),
        ));
    }
    Ok(payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect())
}

/// Channel layout descriptor stored in feature headers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub mrp_channels: usize,
    pub spec_channels: usize,
    pub layers: usize,
    pub height: usize,
    pub width: usize,
    pub order: String,
}

impl Default for ChannelSpec {
    fn default() -> Self {
        ChannelSpec {
            mrp_channels: MRP_CHANNELS,
            spec_channels: SPEC_CHANNELS,
            layers: LAYERS,
            height: IMAGE_SIDE,
            width: IMAGE_SIDE,
            order: "mrp[point*7+layer], spec[point]; row-major".into(),
        }
    }
}

/// JSON header of a feature file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureHeader {
    pub example_count: usize,
    pub num_classes: usize,
    pub channel_spec: ChannelSpec,
    pub labels: Vec<usize>,
    pub source_ids: Vec<String>,
    pub seed: u64,
    /// Augmentation shift of each example in samples; absent means all 0.
    #[serde(default)]
    pub shifts: Vec<usize>,
}

/// A set of examples plus the metadata persisted with them.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    pub examples: Vec<Example>,
    pub num_classes: usize,
    pub seed: u64,
}

impl FeatureSet {
    /// Distinct source ids in first-appearance order.
    pub fn source_ids(&self) -> Vec<&str> {
        let mut seen = std::collections::HashSet::new();
        self.examples
            .iter()
            .map(|e| e.source_id())
            .filter(|s| seen.insert(*s))
            .collect()
    }
}

pub fn encode_features(set: &FeatureSet) -> Result<Vec<u8>> {
    if set.examples.is_empty() {
        return Err(Error::EmptyInput(
            "cannot write an empty feature set".into(),
        ));
    }
    if let Some(e) = set.examples.iter().find(|e| e.label() >= set.num_classes) {
        return Err(Error::Config(format!(
            "example '{}' has label {} but num_classes is {}",
            e.source_id(),
            e.label(),
            set.num_classes
        )));
    }
    let header = FeatureHeader {
        example_count: set.examples.len(),
        num_classes: set.num_classes,
        channel_spec: ChannelSpec::default(),
        labels: set.examples.iter().map(|e| e.label()).collect(),
        source_ids: set
            .examples
            .iter()
            .map(|e| e.source_id().to_string())
            .collect(),
        seed: set.seed,
        shifts: set.examples.iter().map(|e| e.shift()).collect(),
    };
    let json = serde_json::to_vec(&header)?;
    let payload = set
        .examples
        .iter()
        .flat_map(|e| e.mrp_data().iter().chain(e.spec_data()).copied());
    Ok(encode_container(&json, payload))
}

pub fn decode_features(bytes: &[u8]) -> Result<FeatureSet> {
    let (header, payload, payload_offset) = decode_container(bytes)?;
    let header: FeatureHeader = serde_json::from_slice(header)
        .map_err(|e| format_err(PREAMBLE, format!("invalid JSON header: {e}")))?;
    if header.channel_spec != ChannelSpec::default() {
        return Err(format_err(PREAMBLE, "unsupported channel layout"));
    }
    let n = header.example_count;
    if header.labels.len() != n || header.source_ids.len() != n {
        return Err(format_err(
            PREAMBLE,
            "label/source_id count disagrees with example_count",
        ));
    }
    if !header.shifts.is_empty() && header.shifts.len() != n {
        return Err(format_err(
            PREAMBLE,
            "shift count disagrees with example_count",
        ));
    }
    let per_example = (MRP_CHANNELS + SPEC_CHANNELS) * CHANNEL_LEN;
    let values = read_payload(payload, payload_offset, n * per_example)?;
    let mut examples = Vec::with_capacity(n);
    for (i, chunk) in values.chunks_exact(per_example).enumerate() {
        let (mrp, spec) = chunk.split_at(MRP_CHANNELS * CHANNEL_LEN);
        let label = header.labels[i];
        if label >= header.num_classes {
            return Err(format_err(PREAMBLE, format!("label {label} out of range")));
        }
        examples.push(Example::from_parts(
            mrp.to_vec(),
            spec.to_vec(),
            label,
            header.source_ids[i].clone(),
            header.shifts.get(i).copied().unwrap_or(0),
        )?);
    }
    Ok(FeatureSet {
        examples,
        num_classes: header.num_classes,
        seed: header.seed,
    })
}

/// Write a feature file. The file is written in one piece.
pub fn write_features(path: impl AsRef<Path>, set: &FeatureSet) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_features(set)?;
    fs::write(path, bytes).map_err(|e| Error::from(e).in_file(path))
}

/// Read a feature file; any defect yields an error and no partial result.
pub fn read_features(path: impl AsRef<Path>) -> Result<FeatureSet> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::from(e).in_file(path))?;
    decode_features(&bytes).map_err(|e| e.in_file(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example(label: usize, id: &str, fill: f32) -> Example {
        Example::from_parts(
            vec![fill; MRP_CHANNELS * CHANNEL_LEN],
            vec![-fill; SPEC_CHANNELS * CHANNEL_LEN],
            label,
            id.into(),
            0,
        )
        .unwrap()
    }

    fn set() -> FeatureSet {
        FeatureSet {
            examples: vec![example(0, "a", 0.0), example(1, "b", 1.5)],
            num_classes: 2,
            seed: 99,
        }
    }

    #[test]
    fn round_trip() {
        let s = set();
        let bytes = encode_features(&s).unwrap();
        assert_eq!(&bytes[0..4], b"FTC1");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        assert_eq!(decode_features(&bytes).unwrap(), s);
    }

    #[test]
    fn payload_layout() {
        let bytes = encode_features(&set()).unwrap();
        let header_len = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
        let per = 64 * 1024 * 4;
        assert_eq!(bytes.len(), 12 + header_len + 2 * per);
        // second example, first MRP value, then first spectrogram value
        let second = 12 + header_len + per;
        assert_eq!(
            f32::from_le_bytes(bytes[second..second + 4].try_into().unwrap()),
            1.5
        );
        let spec0 = second + 56 * 1024 * 4;
        assert_eq!(
            f32::from_le_bytes(bytes[spec0..spec0 + 4].try_into().unwrap()),
            -1.5
        );
    }

    #[test]
    fn header_keys() {
        let bytes = encode_features(&set()).unwrap();
        let (header, _, _) = decode_container(&bytes).unwrap();
        let v: serde_json::Value = serde_json::from_slice(header).unwrap();
        for key in [
            "example_count",
            "num_classes",
            "channel_spec",
            "labels",
            "source_ids",
            "seed",
        ] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
    }

    #[test]
    fn truncation_reports_offset() {
        let bytes = encode_features(&set()).unwrap();
        let cut = bytes.len() - 10;
        match decode_features(&bytes[..cut]) {
            Err(Error::Format { offset, .. }) => assert_eq!(offset as usize, cut),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_magic_and_version() {
        let mut bytes = encode_features(&set()).unwrap();
        bytes[4] = 2;
        assert!(matches!(
            decode_features(&bytes),
            Err(Error::Format { offset: 4, .. })
        ));
        bytes[0] = b'X';
        assert!(matches!(
            decode_features(&bytes),
            Err(Error::Format { offset: 0, .. })
        ));
    }

    #[test]
    fn empty_set_rejected() {
        let s = FeatureSet {
            examples: vec![],
            num_classes: 2,
            seed: 0,
        };
        assert!(encode_features(&s).is_err());
    }
}
