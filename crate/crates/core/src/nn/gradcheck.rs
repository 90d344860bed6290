//! Central finite-difference gradient checker.

use crate::rng::Lcg;

pub const STEP: f64 = 1e-5;
pub const MAX_PROBES: usize = 200;
/// Denominator floor for the relative error, so exact zeros compare cleanly.
pub const REL_FLOOR: f64 = 1e-6;

/// A scalar function of a flat parameter vector with an analytic gradient.
pub trait Differentiable {
    fn num_params(&self) -> usize;
    fn param(&self, i: usize) -> f64;
    fn set_param(&mut self, i: usize, v: f64);
    fn loss(&self) -> f64;
    /// Analytic gradient, one entry per parameter.
    fn gradient(&self) -> Vec<f64>;
    /// Discrete state of piecewise operations (ReLU signs, pooling argmaxes).
    /// A probe whose perturbation changes it straddles a kink and is skipped.
    fn activation_pattern(&self) -> Vec<u64> {
        Vec::new()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub probes: usize,
    pub skipped: usize,
    pub max_rel_error: f64,
    /// Parameter index of the worst probe.
    pub worst_index: Option<usize>,
}

impl GradCheckReport {
    pub fn passed(&self, tolerance: f64) -> bool {
        self.probes > self.skipped && self.max_rel_error < tolerance
    }
}

pub fn rel_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_FLOOR)
}

/// Compares the analytic gradient to central differences on up to
/// [`MAX_PROBES`] parameters chosen with `seed` (all of them when fewer).
pub fn gradient_check<D: Differentiable>(f: &mut D, seed: u64) -> GradCheckReport {
    let n = f.num_params();
    let mut idx: Vec<usize> = (0..n).collect();
    if n > MAX_PROBES {
        Lcg::new(seed).shuffle(&mut idx);
        idx.truncate(MAX_PROBES);
    }
    let analytic = f.gradient();
    let base = f.activation_pattern();
    let mut report = GradCheckReport {
        probes: idx.len(),
        skipped: 0,
        max_rel_error: 0.0,
        worst_index: None,
    };
    for i in idx {
        let orig = f.param(i);
        f.set_param(i, orig + STEP);
        let plus = f.loss();
        let kink_plus = f.activation_pattern() != base;
        f.set_param(i, orig - STEP);
        let minus = f.loss();
        let kink_minus = f.activation_pattern() != base;
        f.set_param(i, orig);
        if kink_plus || kink_minus {
            report.skipped += 1;
            continue;
        }
        let numeric = (plus - minus) / (2.0 * STEP);
        let e = rel_error(analytic[i], numeric);
        if e > report.max_rel_error || report.worst_index.is_none() {
            report.max_rel_error = report.max_rel_error.max(e);
            report.worst_index = Some(i);
        }
    }
    report
}
