use super::MultiColumnNet;
use crate::dataset::Example;
use crate::nn::{Differentiable, Mode};
use crate::rng::Lcg;

/// Eval-mode loss of one example as a function of every net parameter
/// (weights then biases, layer by layer), for gradient checking.
pub struct NetLoss<'a> {
    pub net: MultiColumnNet,
    pub example: &'a Example,
}

impl NetLoss<'_> {
    fn locate(&self, mut i: usize) -> (usize, bool, usize) {
        for (k, l) in self.net.layers().iter().enumerate() {
            if i < l.weights.len() {
                return (k, true, i);
            }
            i -= l.weights.len();
            if i < l.biases.len() {
                return (k, false, i);
            }
            i -= l.biases.len();
        }
        panic!("parameter index out of range");
    }
}

impl Differentiable for NetLoss<'_> {
    fn num_params(&self) -> usize {
        self.net.layers().iter().map(|l| l.num_values()).sum()
    }

    fn param(&self, i: usize) -> f64 {
        let (k, w, j) = self.locate(i);
        let l = &self.net.layers()[k];
        if w {
            l.weights.data()[j]
        } else {
            l.biases.data()[j]
        }
    }

    fn set_param(&mut self, i: usize, v: f64) {
        let (k, w, j) = self.locate(i);
        let l = &mut self.net.layers_mut()[k];
        if w {
            l.weights.data_mut()[j] = v;
        } else {
            l.biases.data_mut()[j] = v;
        }
    }

    fn loss(&self) -> f64 {
        self.net
            .loss(self.example, Mode::Eval, &mut Lcg::new(0))
            .expect("shapes fixed at construction")
    }

    fn gradient(&self) -> Vec<f64> {
        let (_, _, grads) = self
            .net
            .forward_backward(self.example, Mode::Eval, &mut Lcg::new(0))
            .expect("shapes fixed at construction");
        grads
            .iter()
            .flat_map(|g| g.weights.data().iter().chain(g.biases.data()).copied())
            .collect()
    }

    fn activation_pattern(&self) -> Vec<u64> {
        self.net
            .activation_pattern(self.example)
            .expect("shapes fixed at construction")
    }
}
