use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{Example, MRP_CHANNELS, SPEC_CHANNELS};
use crate::error::{Error, Result};
use crate::mrp::IMAGE_SIDE;
use crate::nn::{
    conv2d_backward, conv2d_backward_opt, conv2d_forward, dropout, dropout_backward, fc_backward,
    fc_forward, maxpool2x2_backward, maxpool2x2_forward, relu, relu_backward, softmax,
    softmax_xent, DropoutMask, Gradients, LayerParams, Mode, PoolArgmax, Tensor,
};
use crate::rng::Lcg;

const CONVS_PER_COLUMN: usize = 4;
const FC_HIDDEN: usize = 2 * CONVS_PER_COLUMN;
const FC_OUT: usize = FC_HIDDEN + 1;
/// Layers in a net: 4 convolutions per column, then two fully-connected.
pub const NUM_LAYERS: usize = FC_OUT + 1;

/// Which half of an [`Example`] a column reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputSource {
    Mrp,
    Spectrogram,
}

impl InputSource {
    pub fn channels(self) -> usize {
        match self {
            InputSource::Mrp => MRP_CHANNELS,
            InputSource::Spectrogram => SPEC_CHANNELS,
        }
    }

    pub fn data(self, ex: &Example) -> &[f32] {
        match self {
            InputSource::Mrp => ex.mrp_data(),
            InputSource::Spectrogram => ex.spec_data(),
        }
    }

    /// Values per example.
    pub fn len(self) -> usize {
        self.channels() * IMAGE_SIDE * IMAGE_SIDE
    }
}

/// Per-element affine input map `(x - mean) * scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct InputNorm {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl InputNorm {
    pub fn identity(len: usize) -> Self {
        InputNorm {
            mean: vec![0.0; len],
            scale: vec![1.0; len],
        }
    }

    /// Mean and inverse population standard deviation of every input element
    /// over `examples`. Elements that never vary get scale 0.
    pub fn fit(source: InputSource, examples: &[&Example]) -> Self {
        let len = source.len();
        if examples.is_empty() {
            return InputNorm::identity(len);
        }
        let n = examples.len() as f64;
        let mut mean = vec![0.0; len];
        for e in examples {
            for (m, &v) in mean.iter_mut().zip(source.data(e)) {
                *m += v as f64;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; len];
        for e in examples {
            for ((s, &v), m) in var.iter_mut().zip(source.data(e)).zip(&mean) {
                let d = v as f64 - m;
                *s += d * d;
            }
        }
        let scale = var
            .into_iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd > 1e-8 {
                    1.0 / sd
                } else {
                    0.0
                }
            })
            .collect();
        InputNorm { mean, scale }
    }

    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    fn apply(&self, source: InputSource, ex: &Example) -> Tensor {
        let data = source
            .data(ex)
            .iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(&v, (m, s))| (v as f64 - m) * s)
            .collect();
        Tensor::from_vec(&[source.channels(), IMAGE_SIDE, IMAGE_SIDE], data)
            .expect("example channel layout is fixed")
    }
}

/// Ablation variants: both columns on MRPs, both on spectrograms, or one each.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "mrp")]
    Mrp,
    #[serde(rename = "spec")]
    Spectrogram,
    #[serde(rename = "combined")]
    Combined,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Mrp, Variant::Spectrogram, Variant::Combined];

    pub fn sources(self) -> [InputSource; 2] {
        match self {
            Variant::Mrp => [InputSource::Mrp, InputSource::Mrp],
            Variant::Spectrogram => [InputSource::Spectrogram, InputSource::Spectrogram],
            Variant::Combined => [InputSource::Mrp, InputSource::Spectrogram],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Mrp => "mrp",
            Variant::Spectrogram => "spec",
            Variant::Combined => "combined",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mrp" => Ok(Variant::Mrp),
            "spec" | "spectrogram" => Ok(Variant::Spectrogram),
            "combined" => Ok(Variant::Combined),
            _ => Err(Error::Config(format!(
                "unknown variant '{s}' (expected mrp, spec or combined)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnConfig {
    pub source: InputSource,
    pub f1: usize,
    pub f2: usize,
}

/// Filter and unit counts shared by every variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetShape {
    pub f1: usize,
    pub f2: usize,
    pub hidden: usize,
}

impl Default for NetShape {
    fn default() -> Self {
        NetShape {
            f1: 16,
            f2: 32,
            hidden: 128,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetConfig {
    pub columns: [ColumnConfig; 2],
    pub hidden: usize,
    pub num_classes: usize,
    pub conv_dropout: f64,
    pub head_dropout: f64,
}

impl NetConfig {
    pub fn new(variant: Variant, shape: NetShape, num_classes: usize) -> Self {
        let [a, b] = variant.sources();
        let col = |source| ColumnConfig {
            source,
            f1: shape.f1,
            f2: shape.f2,
        };
        NetConfig {
            columns: [col(a), col(b)],
            hidden: shape.hidden,
            num_classes,
            conv_dropout: 0.25,
            head_dropout: 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let [a, b] = &self.columns;
        if a.f2 != b.f2 {
            return Err(Error::Config(format!(
                "column outputs must have equal length to merge (f2 {} vs {})",
                a.f2, b.f2
            )));
        }
        if [a.f1, a.f2, b.f1, b.f2, self.hidden].contains(&0) {
            return Err(Error::Config(
                "filter and unit counts must be positive".into(),
            ));
        }
        if self.num_classes < 2 {
            return Err(Error::Config(format!(
                "need at least 2 classes, got {}",
                self.num_classes
            )));
        }
        for rate in [self.conv_dropout, self.head_dropout] {
            if !(0.0..1.0).contains(&rate) {
                return Err(Error::Config(format!("dropout rate {rate} outside [0, 1)")));
            }
        }
        Ok(())
    }

    /// Length of each column's flattened output.
    pub fn merge_len(&self) -> usize {
        let side = IMAGE_SIDE / 4;
        self.columns[0].f2 * side * side
    }

    /// Weight dims of every layer, in storage order.
    pub fn layer_dims(&self) -> Vec<Vec<usize>> {
        let mut dims = Vec::with_capacity(NUM_LAYERS);
        for c in &self.columns {
            let k = crate::nn::KERNEL;
            dims.push(vec![c.f1, c.source.channels(), k, k]);
            dims.push(vec![c.f1, c.f1, k, k]);
            dims.push(vec![c.f2, c.f1, k, k]);
            dims.push(vec![c.f2, c.f2, k, k]);
        }
        dims.push(vec![self.hidden, self.merge_len()]);
        dims.push(vec![self.num_classes, self.hidden]);
        dims
    }
}

fn identity_norms(config: &NetConfig) -> [InputNorm; 2] {
    config.columns.map(|c| InputNorm::identity(c.source.len()))
}

/// Two convolutional columns merged by element-wise sum, then a shared
/// fully-connected head.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiColumnNet {
    config: NetConfig,
    layers: Vec<LayerParams>,
    norms: [InputNorm; 2],
}

struct ColumnCache {
    input: Tensor,
    z1: Tensor,
    r1: Tensor,
    z2: Tensor,
    pool1: PoolArgmax,
    mask1: DropoutMask,
    d1: Tensor,
    z3: Tensor,
    r3: Tensor,
    z4: Tensor,
    pool2: PoolArgmax,
    mask2: DropoutMask,
    pooled_dims: Vec<usize>,
    out: Tensor,
}

struct Trace {
    columns: [ColumnCache; 2],
    merged: Tensor,
    hidden: Tensor,
    head_mask: DropoutMask,
    dropped: Tensor,
    logits: Tensor,
}

impl Trace {
    fn pattern(&self) -> Vec<u64> {
        let signs = |t: &Tensor| {
            t.data()
                .iter()
                .map(|&v| (v > 0.0) as u64)
                .collect::<Vec<_>>()
        };
        let mut p = Vec::new();
        for c in &self.columns {
            for z in [&c.z1, &c.z2, &c.z3, &c.z4] {
                p.extend(signs(z));
            }
            p.extend(c.pool1.indices().iter().map(|&i| i as u64));
            p.extend(c.pool2.indices().iter().map(|&i| i as u64));
        }
        p.extend(signs(&self.hidden));
        p
    }
}

impl MultiColumnNet {
    /// Seeded fan-in uniform weights, zero biases and velocities.
    pub fn new(config: NetConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = Lcg::new(seed);
        let layers = config
            .layer_dims()
            .iter()
            .map(|d| LayerParams::uniform_fan_in(d, &mut rng))
            .collect();
        let norms = identity_norms(&config);
        Ok(MultiColumnNet {
            config,
            layers,
            norms,
        })
    }

    /// All weights and biases zero.
    pub fn zeros(config: NetConfig) -> Result<Self> {
        config.validate()?;
        let layers = config
            .layer_dims()
            .iter()
            .map(|d| LayerParams::zeros(d, d[0]))
            .collect();
        let norms = identity_norms(&config);
        Ok(MultiColumnNet {
            config,
            layers,
            norms,
        })
    }

    pub fn from_parts(
        config: NetConfig,
        layers: Vec<LayerParams>,
        norms: [InputNorm; 2],
    ) -> Result<Self> {
        config.validate()?;
        let dims = config.layer_dims();
        if layers.len() != dims.len()
            || layers.iter().zip(&dims).any(|(l, d)| {
                l.weights.dims() != &d[..] || l.biases.dims() != [d[0]] || l.check().is_err()
            })
        {
            return Err(Error::Shape(
                "layer dims do not match the net config".into(),
            ));
        }
        for (n, c) in norms.iter().zip(&config.columns) {
            if n.mean.len() != c.source.len() || n.scale.len() != c.source.len() {
                return Err(Error::Shape(
                    "input normalisation does not match the column input".into(),
                ));
            }
        }
        Ok(MultiColumnNet {
            config,
            layers,
            norms,
        })
    }

    pub fn config(&self) -> &NetConfig {
        &self.config
    }

    pub fn layers(&self) -> &[LayerParams] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [LayerParams] {
        &mut self.layers
    }

    pub fn input_norms(&self) -> &[InputNorm; 2] {
        &self.norms
    }

    /// Standardise every column input element-wise with statistics of
    /// `examples` (normally the training set).
    pub fn fit_input_norms(&mut self, examples: &[&Example]) {
        for (n, c) in self.norms.iter_mut().zip(&self.config.columns) {
            *n = InputNorm::fit(c.source, examples);
        }
    }

    pub fn num_classes(&self) -> usize {
        self.config.num_classes
    }

    /// Ablation net whose columns read the sources of `which`. Columns whose
    /// source changes get a freshly initialised first convolution (its input
    /// channel count changes); every other layer is kept.
    pub fn single_column_variant(&self, which: Variant, seed: u64) -> Result<MultiColumnNet> {
        let mut net = self.clone();
        for (c, source) in which.sources().into_iter().enumerate() {
            if net.config.columns[c].source == source {
                continue;
            }
            net.config.columns[c].source = source;
            net.norms[c] = InputNorm::identity(source.len());
            let dims = net.config.layer_dims()[c * CONVS_PER_COLUMN].clone();
            let mut rng = Lcg::new(seed).derive(c as u64);
            net.layers[c * CONVS_PER_COLUMN] = LayerParams::uniform_fan_in(&dims, &mut rng);
        }
        Ok(net)
    }

    /// Class probabilities.
    pub fn forward(&self, ex: &Example, mode: Mode, rng: &mut Lcg) -> Result<Vec<f64>> {
        self.forward_masked(ex, mode, rng, [true, true])
    }

    /// Forward pass where a column whose `merge` flag is false contributes a
    /// zero vector to the merge.
    pub fn forward_masked(
        &self,
        ex: &Example,
        mode: Mode,
        rng: &mut Lcg,
        merge: [bool; 2],
    ) -> Result<Vec<f64>> {
        let t = self.trace(ex, mode, rng, merge)?;
        Ok(softmax(t.logits.data()))
    }

    /// Loss, probabilities and the gradient of every layer for one example.
    pub fn forward_backward(
        &self,
        ex: &Example,
        mode: Mode,
        rng: &mut Lcg,
    ) -> Result<(f64, Vec<f64>, Vec<Gradients>)> {
        let t = self.trace(ex, mode, rng, [true, true])?;
        let (loss, g_logits) = softmax_xent(&t.logits, ex.label())?;
        let probs = softmax(t.logits.data());

        let mut grads: Vec<Option<Gradients>> = vec![None; NUM_LAYERS];
        let (g, g_out) = fc_backward(&t.dropped, &self.layers[FC_OUT], &g_logits)?;
        grads[FC_OUT] = Some(g_out);
        let g = dropout_backward(&t.head_mask, &g)?;
        let g = relu_backward(&t.hidden, &g)?;
        let (g_merged, g_hidden) = fc_backward(&t.merged, &self.layers[FC_HIDDEN], &g)?;
        grads[FC_HIDDEN] = Some(g_hidden);
        for (c, cache) in t.columns.iter().enumerate() {
            let cg = self.column_backward(c, cache, &g_merged)?;
            for (k, g) in cg.into_iter().enumerate() {
                grads[c * CONVS_PER_COLUMN + k] = Some(g);
            }
        }
        Ok((
            loss,
            probs,
            grads
                .into_iter()
                .map(|g| g.expect("all layers visited"))
                .collect(),
        ))
    }

    /// Cross-entropy loss of one example.
    pub fn loss(&self, ex: &Example, mode: Mode, rng: &mut Lcg) -> Result<f64> {
        let t = self.trace(ex, mode, rng, [true, true])?;
        Ok(softmax_xent(&t.logits, ex.label())?.0)
    }

    /// ReLU signs and pooling argmaxes of an eval-mode pass.
    pub fn activation_pattern(&self, ex: &Example) -> Result<Vec<u64>> {
        Ok(self
            .trace(ex, Mode::Eval, &mut Lcg::new(0), [true, true])?
            .pattern())
    }

    fn trace(&self, ex: &Example, mode: Mode, rng: &mut Lcg, merge: [bool; 2]) -> Result<Trace> {
        let a = self.column_forward(0, ex, mode, rng)?;
        let b = self.column_forward(1, ex, mode, rng)?;
        let n = self.config.merge_len();
        let mut merged = Tensor::zeros(&[n]);
        for (on, col) in merge.iter().zip([&a, &b]) {
            if *on {
                merged.add_scaled(&col.out, 1.0);
            }
        }
        let hidden = fc_forward(&merged, &self.layers[FC_HIDDEN])?;
        let (dropped, head_mask) = dropout(&relu(&hidden), self.config.head_dropout, mode, rng)?;
        let logits = fc_forward(&dropped, &self.layers[FC_OUT])?;
        Ok(Trace {
            columns: [a, b],
            merged,
            hidden,
            head_mask,
            dropped,
            logits,
        })
    }

    fn column_forward(
        &self,
        c: usize,
        ex: &Example,
        mode: Mode,
        rng: &mut Lcg,
    ) -> Result<ColumnCache> {
        let l = &self.layers[c * CONVS_PER_COLUMN..(c + 1) * CONVS_PER_COLUMN];
        let rate = self.config.conv_dropout;
        let input = self.norms[c].apply(self.config.columns[c].source, ex);
        let z1 = conv2d_forward(&input, &l[0])?;
        let r1 = relu(&z1);
        let z2 = conv2d_forward(&r1, &l[1])?;
        let (p1, pool1) = maxpool2x2_forward(&relu(&z2))?;
        let (d1, mask1) = dropout(&p1, rate, mode, rng)?;
        let z3 = conv2d_forward(&d1, &l[2])?;
        let r3 = relu(&z3);
        let z4 = conv2d_forward(&r3, &l[3])?;
        let (p2, pool2) = maxpool2x2_forward(&relu(&z4))?;
        let (d2, mask2) = dropout(&p2, rate, mode, rng)?;
        let pooled_dims = d2.dims().to_vec();
        let n = d2.len();
        Ok(ColumnCache {
            input,
            z1,
            r1,
            z2,
            pool1,
            mask1,
            d1,
            z3,
            r3,
            z4,
            pool2,
            mask2,
            pooled_dims,
            out: d2.reshape(&[n])?,
        })
    }

    fn column_backward(
        &self,
        c: usize,
        k: &ColumnCache,
        upstream: &Tensor,
    ) -> Result<Vec<Gradients>> {
        let l = &self.layers[c * CONVS_PER_COLUMN..(c + 1) * CONVS_PER_COLUMN];
        let g = upstream.clone().reshape(&k.pooled_dims)?;
        let g = dropout_backward(&k.mask2, &g)?;
        let g = maxpool2x2_backward(&k.pool2, &g)?;
        let g = relu_backward(&k.z4, &g)?;
        let (g, g4) = conv2d_backward(&k.r3, &l[3], &g)?;
        let g = relu_backward(&k.z3, &g)?;
        let (g, g3) = conv2d_backward(&k.d1, &l[2], &g)?;
        let g = dropout_backward(&k.mask1, &g)?;
        let g = maxpool2x2_backward(&k.pool1, &g)?;
        let g = relu_backward(&k.z2, &g)?;
        let (g, g2) = conv2d_backward(&k.r1, &l[1], &g)?;
        let g = relu_backward(&k.z1, &g)?;
        let (_, g1) = conv2d_backward_opt(&k.input, &l[0], &g, false)?;
        Ok(vec![g1, g2, g3, g4])
    }
}
