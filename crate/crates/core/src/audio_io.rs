//! WAV decoding into mono `f64` time series.
//!
//! Supports RIFF/WAVE with 16-bit PCM, 24-bit PCM or 32-bit IEEE float
//! payloads, mono or stereo. Stereo is averaged to mono. No resampling is
//! performed; callers that need a fixed rate use [`require_rate`].

use crate::error::{Error, Result};

/// Sampling rate every feature extractor assumes.
pub const SAMPLE_RATE: u32 = 44_100;

const FORMAT_PCM: u16 = 1;
const FORMAT_IEEE_FLOAT: u16 = 3;
const FORMAT_EXTENSIBLE: u16 = 0xFFFE;

/// Mono sample sequence with its sampling rate.
///
/// Samples are non-empty and lie in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl TimeSeries {
    /// Build a series, validating the invariants.
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyInput("time series has no samples".into()));
        }
        if sample_rate == 0 {
            return Err(Error::Parameter("sample rate must be positive".into()));
        }
        if let Some((i, s)) = samples
            .iter()
            .enumerate()
            .find(|(_, s)| !(-1.0..=1.0).contains(*s))
        {
            return Err(Error::Domain(format!(
                "sample {i} = {s} lies outside [-1, 1]"
            )));
        }
        Ok(TimeSeries {
            samples,
            sample_rate,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    /// Always false; kept for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Sample at `index`, or `0.0` past the end (silence padding).
    #[inline]
    pub fn sample_or_zero(&self, index: usize) -> f64 {
        self.samples.get(index).copied().unwrap_or(0.0)
    }

    /// Element-wise negation (polarity inversion).
    pub fn negated(&self) -> TimeSeries {
        TimeSeries {
            samples: self.samples.iter().map(|s| -s).collect(),
            sample_rate: self.sample_rate,
        }
    }

    /// Multiply every sample by `gain`; fails if the result leaves `[-1, 1]`.
    pub fn scaled(&self, gain: f64) -> Result<TimeSeries> {
        TimeSeries::new(
            self.samples.iter().map(|s| s * gain).collect(),
            self.sample_rate,
        )
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }
}

/// Return `ts` unchanged when it is sampled at `rate`, otherwise fail.
pub fn require_rate(ts: TimeSeries, rate: u32) -> Result<TimeSeries> {
    if ts.sample_rate == rate {
        Ok(ts)
    } else {
        Err(Error::RateMismatch {
            found: ts.sample_rate,
            expected: rate,
        })
    }
}

#[derive(Debug, Clone, Copy)]
struct FmtChunk {
    format: u16,
    channels: u16,
    sample_rate: u32,
    bits: u16,
    block_align: u16,
}

fn decode_err(chunk: &str, reason: impl Into<String>) -> Error {
    Error::Decode {
        chunk: chunk.to_string(),
        reason: reason.into(),
    }
}

fn u16_at(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

fn parse_fmt(body: &[u8]) -> Result<FmtChunk> {
    if body.len() < 16 {
        return Err(decode_err(
            "fmt ",
            format!("chunk is {} bytes, need at least 16", body.len()),
        ));
    }
    let mut format = u16_at(body, 0);
    let channels = u16_at(body, 2);
    let sample_rate = u32_at(body, 4);
    let block_align = u16_at(body, 12);
    let bits = u16_at(body, 14);
    if format == FORMAT_EXTENSIBLE {
        // cbSize(2) validBits(2) channelMask(4) then the sub-format GUID,
        // whose first two bytes carry the actual format tag.
        if body.len() < 26 {
            return Err(decode_err("fmt ", "extensible format without sub-format"));
        }
        format = u16_at(body, 24);
    }
    if sample_rate == 0 {
        return Err(decode_err("fmt ", "sample rate is zero"));
    }
    Ok(FmtChunk {
        format,
        channels,
        sample_rate,
        bits,
        block_align,
    })
}

/// Decode a RIFF/WAVE byte buffer into a mono [`TimeSeries`].
pub fn decode_wav(bytes: &[u8]) -> Result<TimeSeries> {
    if bytes.len() < 12 {
        return Err(decode_err("RIFF", "file shorter than the 12-byte header"));
    }
    if &bytes[0..4] != b"RIFF" {
        return Err(decode_err("RIFF", "missing RIFF magic"));
    }
    if &bytes[8..12] != b"WAVE" {
        return Err(decode_err("RIFF", "missing WAVE form type"));
    }

    let mut fmt: Option<FmtChunk> = None;
    let mut data: Option<&[u8]> = None;
    let mut pos = 12usize;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32_at(bytes, pos + 4) as usize;
        let body_start = pos + 8;
        let name = String::from_utf8_lossy(id).into_owned();
        let body_end = body_start
            .checked_add(size)
            .filter(|&end| end <= bytes.len())
            .ok_or_else(|| {
                decode_err(
                    &name,
                    format!(
                        "declares {size} bytes but only {} remain",
                        bytes.len() - body_start
                    ),
                )
            })?;
        let body = &bytes[body_start..body_end];
        match id {
            b"fmt " => fmt = Some(parse_fmt(body)?),
            b"data" => data = Some(body),
            _ => {}
        }
        // chunks are word aligned
        pos = body_end + (size & 1);
    }

    let fmt = fmt.ok_or_else(|| decode_err("fmt ", "chunk not found"))?;
    let data = data.ok_or_else(|| decode_err("data", "chunk not found"))?;

    if fmt.channels != 1 && fmt.channels != 2 {
        return Err(Error::UnsupportedFormat(format!(
            "{} channels (only mono and stereo are supported)",
            fmt.channels
        )));
    }
    let bytes_per_sample = match (fmt.format, fmt.bits) {
        (FORMAT_PCM, 16) => 2,
        (FORMAT_PCM, 24) => 3,
        (FORMAT_IEEE_FLOAT, 32) => 4,
        (format, bits) => {
            return Err(Error::UnsupportedFormat(format!(
                "format tag {format} with {bits} bits per sample"
            )))
        }
    };
    let channels = fmt.channels as usize;
    let frame_bytes = bytes_per_sample * channels;
    if fmt.block_align as usize != frame_bytes {
        return Err(decode_err(
            "fmt ",
            format!(
                "block align {} does not match {} channels x {} bytes",
                fmt.block_align, channels, bytes_per_sample
            ),
        ));
    }
    let frames = data.len() / frame_bytes;
    if frames == 0 {
        return Err(Error::EmptyInput("WAV data chunk holds no frames".into()));
    }

    let read_sample = |at: usize| -> Result<f64> {
        let b = &data[at..at + bytes_per_sample];
        Ok(match bytes_per_sample {
            2 => i16::from_le_bytes([b[0], b[1]]) as f64 / 32768.0,
            3 => {
                // sign-extend by placing the 24 bits in the top of an i32
                let v = i32::from_le_bytes([0, b[0], b[1], b[2]]) >> 8;
                v as f64 / 8_388_608.0
            }
            _ => {
                let v = f32::from_le_bytes([b[0], b[1], b[2], b[3]]);
                if !v.is_finite() {
                    return Err(decode_err(
                        "data",
                        format!("non-finite sample at byte {at}"),
                    ));
                }
                (v as f64).clamp(-1.0, 1.0)
            }
        })
    };

    let mut samples = Vec::with_capacity(frames);
    for frame in 0..frames {
        let at = frame * frame_bytes;
        let s = if channels == 1 {
            read_sample(at)?
        } else {
            let l = read_sample(at)?;
            let r = read_sample(at + bytes_per_sample)?;
            (l + r) * 0.5
        };
        samples.push(s);
    }
    TimeSeries::new(samples, fmt.sample_rate)
}

/// Encode mono `f64` samples as a 32-bit IEEE-float WAV file.
///
/// Samples are narrowed to `f32`; a series whose samples are already `f32`
/// values round-trips through [`decode_wav`] bit-exactly.
pub fn encode_wav_f32(samples: &[f64], sample_rate: u32) -> Vec<u8> {
    encode_wav_f32_channels(samples, 1, sample_rate)
}

/// Interleaved multi-channel variant of [`encode_wav_f32`].
pub fn encode_wav_f32_channels(interleaved: &[f64], channels: u16, sample_rate: u32) -> Vec<u8> {
    let data_len = interleaved.len() * 4;
    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&((36 + data_len) as u32).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&FORMAT_IEEE_FLOAT.to_le_bytes());
    out.extend_from_slice(&channels.to_le_bytes());
    out.extend_from_slice(&sample_rate.to_le_bytes());
    let block_align = channels * 4;
    out.extend_from_slice(&(sample_rate * block_align as u32).to_le_bytes());
    out.extend_from_slice(&block_align.to_le_bytes());
    out.extend_from_slice(&32u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    for &s in interleaved {
        out.extend_from_slice(&(s as f32).to_le_bytes());
    }
    out
}
