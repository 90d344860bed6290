use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::MultiColumnNet;
use crate::dataset::Example;
use crate::error::{Error, Result};
use crate::nn::{sgd_step, Gradients, Mode, SgdConfig};
use crate::rng::Lcg;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub sgd: SgdConfig,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 30,
            batch_size: 16,
            sgd: SgdConfig::default(),
            seed: 0,
        }
    }
}

/// Mini-batch SGD. Returns the mean training loss of every epoch.
///
/// Per-example gradients of a batch are computed in parallel and summed in
/// batch order, so results do not depend on the thread count.
pub fn train(
    net: &mut MultiColumnNet,
    examples: &[&Example],
    cfg: &TrainConfig,
) -> Result<Vec<f64>> {
    if examples.is_empty() {
        return Err(Error::Config("training set is empty".into()));
    }
    if cfg.batch_size == 0 {
        return Err(Error::Config("batch size must be positive".into()));
    }
    cfg.sgd.validate()?;
    if let Some(e) = examples.iter().find(|e| e.label() >= net.num_classes()) {
        return Err(Error::Config(format!(
            "example '{}' has label {} but the net has {} classes",
            e.source_id(),
            e.label(),
            net.num_classes()
        )));
    }

    let base = Lcg::new(cfg.seed);
    let mut iteration = 0u64;
    let mut trace = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs as u64 {
        let mut order: Vec<usize> = (0..examples.len()).collect();
        base.derive(2 * epoch).shuffle(&mut order);
        let noise = base.derive(2 * epoch + 1);
        let mut total = 0.0;
        for (b, batch) in order.chunks(cfg.batch_size).enumerate() {
            let net_ref = &*net;
            let results: Vec<(f64, Vec<Gradients>)> = batch
                .par_iter()
                .enumerate()
                .map(|(i, &ex)| {
                    let mut rng = noise.derive((b * cfg.batch_size + i) as u64);
                    net_ref
                        .forward_backward(examples[ex], Mode::Train, &mut rng)
                        .map(|(loss, _, g)| (loss, g))
                })
                .collect::<Result<_>>()?;
            let mut results = results.into_iter();
            let (loss, mut sum) = results.next().expect("batches are non-empty");
            total += loss;
            for (loss, grads) in results {
                total += loss;
                for (s, g) in sum.iter_mut().zip(&grads) {
                    s.add_scaled(g, 1.0);
                }
            }
            let inv = 1.0 / batch.len() as f64;
            sum.iter_mut().for_each(|g| g.scale(inv));
            sgd_step(net.layers_mut(), &sum, &cfg.sgd, iteration)?;
            iteration += 1;
        }
        let mean = total / examples.len() as f64;
        log::debug!("epoch {epoch}: mean loss {mean:.6}");
        trace.push(mean);
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{NetConfig, NetShape, Variant};

    fn toy(n: usize) -> Vec<Example> {
        let mut rng = Lcg::new(11);
        (0..n)
            .map(|i| {
                let label = i % 2;
                let mut ex = Example::zeros(label, format!("s{i}"));
                let sign = if label == 0 { 1.0 } else { -1.0 };
                for v in ex.spec_data_mut().iter_mut() {
                    *v = (sign * 0.5 + rng.uniform(-0.1, 0.1)) as f32;
                }
                ex
            })
            .collect()
    }

    fn small_net(seed: u64) -> MultiColumnNet {
        let shape = NetShape {
            f1: 2,
            f2: 2,
            hidden: 8,
        };
        MultiColumnNet::new(NetConfig::new(Variant::Spectrogram, shape, 2), seed).unwrap()
    }

    #[test]
    fn zero_epochs_leaves_net_unchanged() {
        let data = toy(4);
        let refs: Vec<&Example> = data.iter().collect();
        let mut net = small_net(1);
        let before = net.clone();
        let cfg = TrainConfig {
            epochs: 0,
            ..TrainConfig::default()
        };
        assert!(train(&mut net, &refs, &cfg).unwrap().is_empty());
        assert_eq!(net, before);
    }

    #[test]
    fn empty_set_rejected() {
        let mut net = small_net(1);
        assert!(matches!(
            train(&mut net, &[], &TrainConfig::default()),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn deterministic() {
        let data = toy(20);
        let refs: Vec<&Example> = data.iter().collect();
        let cfg = TrainConfig {
            epochs: 2,
            seed: 5,
            ..TrainConfig::default()
        };
        let (mut a, mut b) = (small_net(2), small_net(2));
        let ta = train(&mut a, &refs, &cfg).unwrap();
        let tb = train(&mut b, &refs, &cfg).unwrap();
        assert_eq!(ta, tb);
        assert_eq!(a, b);
    }
}
