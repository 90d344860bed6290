use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{train, MultiColumnNet, NetConfig, NetShape, TrainConfig, Variant};
use crate::dataset::{make_k_folds, Example, FeatureSet, NUM_FOLDS};
use crate::error::{Error, Result};
use crate::nn::Mode;
use crate::rng::Lcg;

/// Counts indexed `[true class][predicted class]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConfusionMatrix {
    counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(num_classes: usize) -> Self {
        ConfusionMatrix {
            counts: vec![vec![0; num_classes]; num_classes],
        }
    }

    pub fn record(&mut self, truth: usize, predicted: usize) {
        self.counts[truth][predicted] += 1;
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn num_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..self.counts.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn error_rate(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            return 0.0;
        }
        (total - self.correct()) as f64 / total as f64
    }

    pub fn add(&mut self, other: &ConfusionMatrix) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub error_rate: f64,
    pub confusion: ConfusionMatrix,
}

/// Per-source voting: the class with the highest mean probability over the
/// source's examples is the prediction; ties go to the lower class index.
pub fn evaluate_with<F>(examples: &[&Example], num_classes: usize, predict: F) -> Result<Evaluation>
where
    F: Fn(&Example) -> Result<Vec<f64>> + Sync,
{
    if examples.is_empty() {
        return Err(Error::Config("test set is empty".into()));
    }
    let probs: Vec<Vec<f64>> = examples
        .par_iter()
        .map(|e| predict(e))
        .collect::<Result<_>>()?;

    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut sources: Vec<(usize, Vec<f64>)> = Vec::new();
    for (e, p) in examples.iter().zip(&probs) {
        if e.label() >= num_classes || p.len() != num_classes {
            return Err(Error::Config(format!(
                "example '{}' does not fit a {num_classes}-class evaluation",
                e.source_id()
            )));
        }
        let slot = *index.entry(e.source_id()).or_insert_with(|| {
            sources.push((e.label(), vec![0.0; num_classes]));
            sources.len() - 1
        });
        let (label, acc) = &mut sources[slot];
        if *label != e.label() {
            return Err(Error::Config(format!(
                "source '{}' carries conflicting labels",
                e.source_id()
            )));
        }
        acc.iter_mut().zip(p).for_each(|(a, b)| *a += b);
    }

    let mut confusion = ConfusionMatrix::new(num_classes);
    for (label, acc) in &sources {
        let mut best = 0;
        for (k, &v) in acc.iter().enumerate() {
            if v > acc[best] {
                best = k;
            }
        }
        confusion.record(*label, best);
    }
    Ok(Evaluation {
        error_rate: confusion.error_rate(),
        confusion,
    })
}

/// Eval-mode evaluation of a trained net.
pub fn evaluate(net: &MultiColumnNet, examples: &[&Example]) -> Result<Evaluation> {
    evaluate_with(examples, net.num_classes(), |e| {
        net.forward(e, Mode::Eval, &mut Lcg::new(0))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub folds: usize,
    pub shape: NetShape,
    pub train: TrainConfig,
    pub seed: u64,
    /// Standardise inputs element-wise with the fold's training statistics.
    pub standardize: bool,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            folds: NUM_FOLDS,
            shape: NetShape::default(),
            train: TrainConfig::default(),
            seed: 0,
            standardize: true,
        }
    }
}

/// Summary written as the results JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub variant: Variant,
    pub per_fold_errors: Vec<f64>,
    pub mean_error: f64,
    pub confusion_matrix: ConfusionMatrix,
}

#[derive(Debug, Clone)]
pub struct FoldOutcome {
    pub net: MultiColumnNet,
    pub loss_trace: Vec<f64>,
    pub evaluation: Evaluation,
    pub train_sources: Vec<String>,
    pub test_sources: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct CvOutcome {
    pub result: CvResult,
    pub folds: Vec<FoldOutcome>,
}

/// K-fold cross-validation by source. Each fold trains a freshly initialised
/// net on every example (all shifts) of the other folds and tests on the
/// unshifted examples of its own sources. Folds run in parallel.
pub fn cross_validate(set: &FeatureSet, variant: Variant, cfg: &CvConfig) -> Result<CvOutcome> {
    let ids: Vec<&str> = set.examples.iter().map(|e| e.source_id()).collect();
    let split = make_k_folds(&ids, cfg.folds, cfg.seed)?;
    let net_config = NetConfig::new(variant, cfg.shape, set.num_classes);
    net_config.validate()?;
    let base = Lcg::new(cfg.seed);

    let folds: Vec<FoldOutcome> = (0..cfg.folds)
        .into_par_iter()
        .map(|f| {
            let mut train_set = Vec::new();
            let mut test_set = Vec::new();
            for (e, &fold) in set.examples.iter().zip(split.assignments()) {
                if fold != f {
                    train_set.push(e);
                } else if e.shift() == 0 {
                    test_set.push(e);
                }
            }
            if test_set.is_empty() {
                return Err(Error::Config(format!(
                    "fold {f} has no unshifted test examples"
                )));
            }
            let init_seed = base.derive(1000 + f as u64).next_u64();
            let train_cfg = TrainConfig {
                seed: base.derive(2000 + f as u64).next_u64(),
                ..cfg.train
            };
            let mut net = MultiColumnNet::new(net_config.clone(), init_seed)?;
            if cfg.standardize {
                net.fit_input_norms(&train_set);
            }
            let loss_trace = train(&mut net, &train_set, &train_cfg)?;
            let evaluation = evaluate(&net, &test_set)?;
            Ok(FoldOutcome {
                net,
                loss_trace,
                evaluation,
                train_sources: distinct(&train_set),
                test_sources: distinct(&test_set),
            })
        })
        .collect::<Result<_>>()?;

    let per_fold_errors: Vec<f64> = folds.iter().map(|f| f.evaluation.error_rate).collect();
    let mean_error = per_fold_errors.iter().sum::<f64>() / per_fold_errors.len() as f64;
    let mut confusion_matrix = ConfusionMatrix::new(set.num_classes);
    for f in &folds {
        confusion_matrix.add(&f.evaluation.confusion);
    }
    Ok(CvOutcome {
        result: CvResult {
            variant,
            per_fold_errors,
            mean_error,
            confusion_matrix,
        },
        folds,
    })
}

fn distinct(examples: &[&Example]) -> Vec<String> {
    let mut seen = std::collections::HashSet::new();
    examples
        .iter()
        .filter(|e| seen.insert(e.source_id()))
        .map(|e| e.source_id().to_string())
        .collect()
}
