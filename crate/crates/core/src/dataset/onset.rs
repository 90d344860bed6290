use crate::audio_io::TimeSeries;

/// Length of the RMS analysis window used for onset detection.
pub const ONSET_WINDOW: usize = 512;
/// Fraction of the loudest window's RMS that marks the onset.
pub const ONSET_THRESHOLD: f64 = 0.01;

/// Start of the first 512-sample window whose RMS exceeds 1% of the largest
/// 512-sample window RMS in the signal. Windows are taken at every start
/// position; signals shorter than one window (and silent signals) give 0.
pub fn detect_onset(ts: &TimeSeries) -> usize {
    let x = ts.samples();
    if x.len() <= ONSET_WINDOW {
        return 0;
    }
    let starts = x.len() - ONSET_WINDOW + 1;

    // Sliding sums of squares. Each window sum is recomputed from an exact
    // running total of squares to avoid drift over long signals.
    let mut prefix = Vec::with_capacity(x.len() + 1);
    prefix.push(0.0f64);
    let mut acc = 0.0f64;
    for s in x {
        acc += s * s;
        prefix.push(acc);
    }
    let energy = |start: usize| (prefix[start + ONSET_WINDOW] - prefix[start]).max(0.0);

    let max_energy = (0..starts).map(energy).fold(0.0, f64::max);
    if max_energy <= 0.0 {
        return 0;
    }
    // rms > t * max_rms  <=>  energy > t^2 * max_energy
    let limit = ONSET_THRESHOLD * ONSET_THRESHOLD * max_energy;
    (0..starts).find(|&s| energy(s) > limit).unwrap_or(0)
}
