#![allow(dead_code)]

pub mod grad_suite;

use std::f64::consts::PI;

use mrp_timbre::dataset::synth::{bin_frequency, ClassSpec, Envelope, PhaseRule, SynthSpec};
use mrp_timbre::dataset::{extract_all, synth_corpus, ExtractConfig, FeatureSet};
use mrp_timbre::nn::Differentiable;
use mrp_timbre::{Lcg, SquareMatrix, TimeSeries};

pub const RATE: u32 = 44100;

pub fn random_signal(rng: &mut Lcg, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect()
}

pub fn series(samples: Vec<f64>) -> TimeSeries {
    TimeSeries::new(samples, RATE).unwrap()
}

// ---- brute-force oracles -------------------------------------------------

pub fn rp_oracle(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = (x[i] - x[j]).abs();
        }
    }
    out
}

pub fn maxpool_1d_oracle(x: &[f64], w: usize) -> Vec<f64> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < x.len() {
        let mut best = i;
        for j in i..i + w {
            if x[j].abs() > x[best].abs() {
                best = j;
            }
        }
        out.push(x[best]);
        i += w;
    }
    out
}

pub fn maxpool_2d_oracle(m: &[f64], side: usize, k: usize) -> Vec<f64> {
    let o = side / k;
    let mut out = vec![f64::NEG_INFINITY; o * o];
    for i in 0..side {
        for j in 0..side {
            let cell = &mut out[(i / k) * o + j / k];
            if m[i * side + j] > *cell {
                *cell = m[i * side + j];
            }
        }
    }
    out
}

/// Full route: block, 1-D pool, full plot, 2-D pool, sqrt, subtract mean.
pub fn mrp_layer_oracle(x: &[f64], start: usize, layer: usize) -> Vec<f64> {
    let len = 1usize << (5 + 2 * layer);
    let w = 1usize << layer;
    let block: Vec<f64> = (start..start + len)
        .map(|i| x.get(i).copied().unwrap_or(0.0))
        .collect();
    let pooled = maxpool_1d_oracle(&block, w);
    let rp = rp_oracle(&pooled);
    let img = maxpool_2d_oracle(&rp, pooled.len(), w);
    let mut m = SquareMatrix::from_vec(32, img.iter().map(|v| v.sqrt()).collect()).unwrap();
    m.center();
    m.into_values()
}

pub fn dft_oracle(frame: &[f64]) -> Vec<f64> {
    let n = frame.len();
    (0..=n / 2)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (t, &x) in frame.iter().enumerate() {
                let a = -2.0 * PI * (k * t % n) as f64 / n as f64;
                re += x * a.cos();
                im += x * a.sin();
            }
            (re * re + im * im).sqrt()
        })
        .collect()
}

// ---- synthetic material --------------------------------------------------

/// Harmonic complex on analysis bin 1 with a DC offset and every bin 1..31
/// occupied, so no bin of a 64-sample frame sits at the log floor.
pub struct PhasePair {
    pub a: TimeSeries,
    pub b: TimeSeries,
}

pub fn phase_pair(rng: &mut Lcg, num_samples: usize) -> PhasePair {
    let f0 = bin_frequency(1, RATE);
    let amps: Vec<f64> = (0..31).map(|_| rng.uniform(0.01, 0.03)).collect();
    let pa: Vec<f64> = (0..31).map(|_| rng.phase()).collect();
    let pb: Vec<f64> = (0..31).map(|_| rng.phase()).collect();
    let render = |phases: &[f64]| {
        let samples = (0..num_samples)
            .map(|t| {
                let mut v = 0.05;
                for (h, (a, p)) in amps.iter().zip(phases).enumerate() {
                    let w = 2.0 * PI * (h + 1) as f64 * f0 / RATE as f64;
                    v += a * (w * t as f64 + p).cos();
                }
                v
            })
            .collect();
        series(samples)
    };
    PhasePair {
        a: render(&pa),
        b: render(&pb),
    }
}

fn class(name: &str, harmonics: Vec<f64>, phase: PhaseRule, count: usize) -> ClassSpec {
    ClassSpec {
        name: name.into(),
        count,
        harmonics,
        phase,
        envelope: Envelope::none(),
        fundamentals_hz: [1, 2, 3].iter().map(|&b| bin_frequency(b, RATE)).collect(),
        dc_offset: 0.0,
        gain_range: [0.5, 1.0],
    }
}

/// Two pairs of classes; the members of a pair share amplitudes, envelope
/// and fundamentals and differ only in harmonic phases.
pub fn phase_pair_corpus(per_class: usize, seed: u64) -> SynthSpec {
    let full = vec![0.3, 0.2, 0.15, 0.1, 0.08, 0.06, 0.04];
    let odd = vec![0.35, 0.0, 0.25, 0.0, 0.15, 0.0, 0.1];
    SynthSpec {
        sample_rate: RATE,
        duration_s: 3.5,
        seed,
        exact_phase: true,
        classes: vec![
            class("full_zero", full.clone(), PhaseRule::Zero, per_class),
            class("full_schroeder", full, PhaseRule::Schroeder, per_class),
            class("odd_zero", odd.clone(), PhaseRule::Zero, per_class),
            class("odd_alternating", odd, PhaseRule::Alternating, per_class),
        ],
    }
}

/// Four spectral envelopes, fresh random phases on every tone.
pub fn spectral_envelope_corpus(per_class: usize, seed: u64) -> SynthSpec {
    let r = PhaseRule::RandomPerTone;
    SynthSpec {
        sample_rate: RATE,
        duration_s: 3.5,
        seed,
        exact_phase: true,
        classes: vec![
            class(
                "falling",
                vec![0.5, 0.25, 0.12, 0.06, 0.03, 0.02, 0.01],
                r,
                per_class,
            ),
            class(
                "odd",
                vec![0.4, 0.0, 0.3, 0.0, 0.15, 0.0, 0.1],
                r,
                per_class,
            ),
            class(
                "second",
                vec![0.15, 0.4, 0.1, 0.25, 0.05, 0.04, 0.0],
                r,
                per_class,
            ),
            class(
                "flat",
                vec![0.1, 0.1, 0.15, 0.2, 0.2, 0.15, 0.1],
                r,
                per_class,
            ),
        ],
    }
}

/// Unshifted features of a synthetic corpus.
pub fn features(spec: &SynthSpec) -> FeatureSet {
    let tones = synth_corpus(spec).unwrap();
    let items: Vec<_> = tones
        .into_iter()
        .map(|t| (t.series, t.label, t.source_id))
        .collect();
    FeatureSet {
        examples: extract_all(&items, false, &ExtractConfig::default()).unwrap(),
        num_classes: spec.classes.len(),
        seed: spec.seed,
    }
}

// ---- gradient-check fragments --------------------------------------------

/// A scalar function of a flat parameter vector given by closures.
pub struct Fragment<L, G, P>
where
    L: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
    P: Fn(&[f64]) -> Vec<u64>,
{
    pub params: Vec<f64>,
    pub loss: L,
    pub grad: G,
    pub pattern: P,
}

impl<L, G, P> Differentiable for Fragment<L, G, P>
where
    L: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
    P: Fn(&[f64]) -> Vec<u64>,
{
    fn num_params(&self) -> usize {
        self.params.len()
    }
    fn param(&self, i: usize) -> f64 {
        self.params[i]
    }
    fn set_param(&mut self, i: usize, v: f64) {
        self.params[i] = v;
    }
    fn loss(&self) -> f64 {
        (self.loss)(&self.params)
    }
    fn gradient(&self) -> Vec<f64> {
        (self.grad)(&self.params)
    }
    fn activation_pattern(&self) -> Vec<u64> {
        (self.pattern)(&self.params)
    }
}

pub fn no_pattern(_: &[f64]) -> Vec<u64> {
    Vec::new()
}
