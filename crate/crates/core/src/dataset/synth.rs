//! Additive-synthesis tone corpus.
//!
//! Classes are defined by harmonic amplitudes, a phase rule, an amplitude
//! envelope and a set of fundamentals. Tones of a class cycle through the
//! fundamentals and draw a per-tone gain. With `exact_phase` on, every
//! fundamental must fall on a bin of the 64-sample analysis frame, so two
//! classes that share amplitudes and envelope but differ in phase have
//! matching magnitude spectra.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::audio_io::{TimeSeries, SAMPLE_RATE};
use crate::error::{Error, Result};
use crate::rng::Lcg;
use crate::spectrogram::FRAME_LEN;

/// Minimum tone length in seconds: the rearmost acquisition point plus the
/// longest MRP block stays mostly inside the tone.
pub const MIN_DURATION_S: f64 = 3.5;

/// Per-harmonic phase assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseRule {
    /// All harmonics in cosine phase.
    Zero,
    /// Even harmonics inverted (phase π), odd harmonics at 0.
    Alternating,
    /// Phases drawn once per class from the seeded generator.
    RandomFixed,
    /// Quadratic phase `φ_h = -π h (h - 1) / H`, which flattens the waveform.
    Schroeder,
    /// Fresh random phases for every tone.
    RandomPerTone,
}

impl PhaseRule {
    pub fn phases(self, harmonics: usize, rng: &mut Lcg) -> Vec<f64> {
        let count = harmonics as f64;
        (1..=harmonics)
            .map(|h| match self {
                PhaseRule::Zero => 0.0,
                PhaseRule::Alternating => {
                    if h % 2 == 0 {
                        PI
                    } else {
                        0.0
                    }
                }
                PhaseRule::RandomFixed | PhaseRule::RandomPerTone => rng.phase(),
                PhaseRule::Schroeder => {
                    let h = h as f64;
                    -PI * h * (h - 1.0) / count
                }
            })
            .collect()
    }
}

/// Linear attack followed by exponential decay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct Envelope {
    /// Linear ramp length in milliseconds; 0 starts at full level.
    #[serde(default)]
    pub attack_ms: f64,
    /// Exponential decay time constant in milliseconds, applied after the
    /// attack; `None` holds the level.
    #[serde(default)]
    pub decay_ms: Option<f64>,
}

impl Envelope {
    pub fn none() -> Self {
        Envelope::default()
    }

    pub fn gain_at(&self, t_s: f64) -> f64 {
        let attack = self.attack_ms / 1000.0;
        let mut g = if attack > 0.0 && t_s < attack {
            t_s / attack
        } else {
            1.0
        };
        if let Some(decay) = self.decay_ms {
            let after = (t_s - attack).max(0.0);
            g *= (-after / (decay / 1000.0)).exp();
        }
        g
    }
}

/// Everything needed to render one harmonic tone.
#[derive(Debug, Clone, PartialEq)]
pub struct ToneParams {
    pub fundamental_hz: f64,
    /// Amplitude of harmonic `h` at index `h - 1`.
    pub amplitudes: Vec<f64>,
    /// Phase of harmonic `h` at index `h - 1`.
    pub phases: Vec<f64>,
    pub dc_offset: f64,
    pub gain: f64,
    pub envelope: Envelope,
    pub sample_rate: u32,
    pub num_samples: usize,
}

/// `gain · env(t) · (dc + Σ a_h cos(2π h f0 t / fs + φ_h))`.
pub fn render_tone(p: &ToneParams) -> Result<TimeSeries> {
    if p.amplitudes.len() != p.phases.len() {
        return Err(Error::Config(
            "one phase per harmonic amplitude required".into(),
        ));
    }
    let fs = p.sample_rate as f64;
    let steps: Vec<f64> = (1..=p.amplitudes.len())
        .map(|h| 2.0 * PI * h as f64 * p.fundamental_hz / fs)
        .collect();
    let samples = (0..p.num_samples)
        .map(|t| {
            let tf = t as f64;
            let mut v = p.dc_offset;
            for ((a, phi), w) in p.amplitudes.iter().zip(&p.phases).zip(&steps) {
                v += a * (w * tf + phi).cos();
            }
            (p.gain * p.envelope.gain_at(tf / fs) * v).clamp(-1.0, 1.0)
        })
        .collect();
    TimeSeries::new(samples, p.sample_rate)
}

fn default_rate() -> u32 {
    SAMPLE_RATE
}

fn default_true() -> bool {
    true
}

fn default_gain() -> [f64; 2] {
    [1.0, 1.0]
}

/// One tone class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSpec {
    pub name: String,
    pub count: usize,
    /// Amplitude of harmonic `h` at index `h - 1`.
    pub harmonics: Vec<f64>,
    pub phase: PhaseRule,
    #[serde(flatten)]
    pub envelope: Envelope,
    pub fundamentals_hz: Vec<f64>,
    #[serde(default)]
    pub dc_offset: f64,
    /// Per-tone gain is uniform in `[lo, hi]`.
    #[serde(default = "default_gain")]
    pub gain_range: [f64; 2],
}

/// Corpus synthesis configuration (the JSON accepted by `mrp-timbre synth`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    #[serde(default = "default_rate")]
    pub sample_rate: u32,
    pub duration_s: f64,
    #[serde(default)]
    pub seed: u64,
    /// Require on-bin fundamentals so phase-contrast classes have identical
    /// magnitude spectra.
    #[serde(default = "default_true")]
    pub exact_phase: bool,
    pub classes: Vec<ClassSpec>,
}

/// A rendered tone with its label and provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthTone {
    pub series: TimeSeries,
    pub label: usize,
    pub source_id: String,
}

/// True when `f0` completes an integer number of cycles per analysis frame.
pub fn is_on_bin(f0: f64, sample_rate: u32) -> bool {
    let bin = f0 * FRAME_LEN as f64 / sample_rate as f64;
    (bin - bin.round()).abs() < 1e-9 && bin.round() >= 1.0
}

/// Frequency of analysis bin `bin` at `sample_rate`.
pub fn bin_frequency(bin: usize, sample_rate: u32) -> f64 {
    bin as f64 * sample_rate as f64 / FRAME_LEN as f64
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.classes.len() < 2 {
            return Err(Error::Config("synthesis needs at least 2 classes".into()));
        }
        if self.sample_rate == 0 {
            return Err(Error::Config("sample rate must be positive".into()));
        }
        if !(self.duration_s >= MIN_DURATION_S) {
            return Err(Error::Config(format!(
                "tones must last at least {MIN_DURATION_S} s, got {}",
                self.duration_s
            )));
        }
        let nyquist = self.sample_rate as f64 / 2.0;
        for c in &self.classes {
            let ctx = |msg: String| Error::Config(format!("class '{}': {msg}", c.name));
            if c.count == 0 {
                return Err(ctx("count must be positive".into()));
            }
            if c.harmonics.is_empty() {
                return Err(ctx("at least one harmonic amplitude required".into()));
            }
            if c.fundamentals_hz.is_empty() {
                return Err(ctx("at least one fundamental required".into()));
            }
            let [lo, hi] = c.gain_range;
            if !(0.0 < lo && lo <= hi) {
                return Err(ctx(format!("invalid gain range [{lo}, {hi}]")));
            }
            let peak = hi * (c.dc_offset.abs() + c.harmonics.iter().map(|a| a.abs()).sum::<f64>());
            if peak > 1.0 {
                return Err(ctx(format!("peak amplitude bound {peak} exceeds 1")));
            }
            if c.envelope.attack_ms < 0.0 || c.envelope.decay_ms.is_some_and(|d| d <= 0.0) {
                return Err(ctx("envelope times must be positive".into()));
            }
            for &f0 in &c.fundamentals_hz {
                if !(f0 > 0.0) {
                    return Err(ctx(format!("fundamental {f0} Hz is not positive")));
                }
                if self.exact_phase && !is_on_bin(f0, self.sample_rate) {
                    return Err(ctx(format!(
                        "fundamental {f0} Hz is not on a {FRAME_LEN}-sample frame bin \
                         (multiples of {} Hz) while exact_phase is on",
                        bin_frequency(1, self.sample_rate)
                    )));
                }
                let top = f0 * c.harmonics.len() as f64;
                if top >= nyquist {
                    return Err(ctx(format!(
                        "harmonic {} of {f0} Hz reaches {top} Hz, above Nyquist",
                        c.harmonics.len()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Render the whole corpus. Deterministic in `spec.seed`; the tones of class
/// `c` are labelled `c` and named `<class name>_<index>`.
pub fn synth_corpus(spec: &SynthSpec) -> Result<Vec<SynthTone>> {
    spec.validate()?;
    let root = Lcg::new(spec.seed);
    let num_samples = (spec.duration_s * spec.sample_rate as f64).round() as usize;
    let mut tones = Vec::new();
    for (label, class) in spec.classes.iter().enumerate() {
        let mut phase_rng = root.derive(0x5048_4153_4500_0000 | label as u64);
        let phases = class.phase.phases(class.harmonics.len(), &mut phase_rng);
        for i in 0..class.count {
            let mut tone_rng = root.derive(((label as u64) << 32) | i as u64);
            let [lo, hi] = class.gain_range;
            let gain = if lo == hi {
                lo
            } else {
                tone_rng.uniform(lo, hi)
            };
            let phases = match class.phase {
                PhaseRule::RandomPerTone => {
                    class.phase.phases(class.harmonics.len(), &mut tone_rng)
                }
                _ => phases.clone(),
            };
            let params = ToneParams {
                fundamental_hz: class.fundamentals_hz[i % class.fundamentals_hz.len()],
                amplitudes: class.harmonics.clone(),
                phases,
                dc_offset: class.dc_offset,
                gain,
                envelope: class.envelope,
                sample_rate: spec.sample_rate,
                num_samples,
            };
            tones.push(SynthTone {
                series: render_tone(&params)?,
                label,
                source_id: format!("{}_{i:03}", class.name),
            });
        }
    }
    Ok(tones)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn class(name: &str, phase: PhaseRule) -> ClassSpec {
        ClassSpec {
            name: name.into(),
            count: 2,
            harmonics: vec![0.4, 0.2, 0.1],
            phase,
            envelope: Envelope::none(),
            fundamentals_hz: vec![bin_frequency(2, 44100)],
            dc_offset: 0.0,
            gain_range: [1.0, 1.0],
        }
    }

    fn spec(classes: Vec<ClassSpec>) -> SynthSpec {
        SynthSpec {
            sample_rate: 44100,
            duration_s: 3.5,
            seed: 17,
            exact_phase: true,
            classes,
        }
    }

    #[test]
    fn single_cosine_peak() {
        let mut a = class("a", PhaseRule::Zero);
        a.harmonics = vec![0.7];
        let s = spec(vec![a, class("b", PhaseRule::Zero)]);
        let tones = synth_corpus(&s).unwrap();
        let x = tones[0].series.samples();
        let peak = x.iter().cloned().fold(0.0, f64::max);
        assert_eq!(x[0], 0.7);
        assert!((peak - 0.7).abs() < 1e-12);
        // period of bin-2 tone is 32 samples
        assert!((x[32] - 0.7).abs() < 1e-12);
        assert!((x[16] + 0.7).abs() < 1e-12);
    }

    #[test]
    fn deterministic_and_labelled() {
        let s = spec(vec![
            class("a", PhaseRule::RandomFixed),
            class("b", PhaseRule::Schroeder),
        ]);
        let a = synth_corpus(&s).unwrap();
        let b = synth_corpus(&s).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 4);
        assert_eq!(a[2].label, 1);
        assert_eq!(a[3].source_id, "b_001");
    }

    #[test]
    fn off_bin_rejected_in_exact_mode() {
        let mut a = class("a", PhaseRule::Zero);
        a.fundamentals_hz = vec![440.0];
        let mut s = spec(vec![a, class("b", PhaseRule::Zero)]);
        assert!(matches!(synth_corpus(&s), Err(Error::Config(_))));
        s.exact_phase = false;
        assert!(synth_corpus(&s).is_ok());
    }

    #[test]
    fn validation_errors() {
        let s = spec(vec![class("a", PhaseRule::Zero)]);
        assert!(s.validate().is_err());
        let mut loud = class("a", PhaseRule::Zero);
        loud.harmonics = vec![0.8, 0.8];
        assert!(spec(vec![loud, class("b", PhaseRule::Zero)])
            .validate()
            .is_err());
        let mut short = spec(vec![
            class("a", PhaseRule::Zero),
            class("b", PhaseRule::Zero),
        ]);
        short.duration_s = 1.0;
        assert!(short.validate().is_err());
    }

    #[test]
    fn envelope_shape() {
        let e = Envelope {
            attack_ms: 10.0,
            decay_ms: Some(100.0),
        };
        assert_eq!(e.gain_at(0.0), 0.0);
        assert!((e.gain_at(0.005) - 0.5).abs() < 1e-12);
        assert!((e.gain_at(0.110) - (-1.0f64).exp()).abs() < 1e-12);
        assert_eq!(Envelope::none().gain_at(2.0), 1.0);
    }

    #[test]
    fn phase_rules() {
        let mut rng = Lcg::new(0);
        assert_eq!(PhaseRule::Zero.phases(3, &mut rng), vec![0.0; 3]);
        assert_eq!(
            PhaseRule::Alternating.phases(3, &mut rng),
            vec![0.0, PI, 0.0]
        );
        let s = PhaseRule::Schroeder.phases(4, &mut rng);
        assert_eq!(s[0], 0.0);
        assert!((s[1] + PI * 2.0 / 4.0).abs() < 1e-15);
    }

    #[test]
    fn spec_json_round_trip() {
        let s = spec(vec![
            class("a", PhaseRule::Zero),
            class("b", PhaseRule::Alternating),
        ]);
        let json = serde_json::to_string(&s).unwrap();
        let back: SynthSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
    }
}
