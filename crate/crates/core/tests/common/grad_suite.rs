//! Finite-difference checks of every layer, shared by the gradient tests and
//! the acceptance run.

use mrp_timbre::dataset::Example;
use mrp_timbre::model::{MultiColumnNet, NetConfig, NetLoss, NetShape, Variant};
use mrp_timbre::nn::*;
use mrp_timbre::Lcg;

use super::{no_pattern, Fragment};

fn random(rng: &mut Lcg, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect()
}

fn t(dims: &[usize], v: &[f64]) -> Tensor {
    Tensor::from_vec(dims, v.to_vec()).unwrap()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn signs(v: &[f64]) -> Vec<u64> {
    v.iter().map(|&x| (x > 0.0) as u64).collect()
}

/// Loss `<r, conv(x)>` over input, weights and biases.
pub fn conv(seed: u64) -> GradCheckReport {
    let (c, h, w, f) = (2, 5, 6, 3);
    let mut rng = Lcg::new(seed);
    let nx = c * h * w;
    let nw = f * c * 9;
    let params = random(&mut rng, nx + nw + f);
    let r = random(&mut rng, f * h * w);
    let split = move |p: &[f64]| {
        let x = t(&[c, h, w], &p[..nx]);
        let lp = LayerParams::new(t(&[f, c, 3, 3], &p[nx..nx + nw]), t(&[f], &p[nx + nw..]));
        (x, lp)
    };
    let r2 = r.clone();
    let mut frag = Fragment {
        params,
        loss: move |p: &[f64]| {
            let (x, lp) = split(p);
            dot(conv2d_forward(&x, &lp).unwrap().data(), &r)
        },
        grad: move |p: &[f64]| {
            let (x, lp) = split(p);
            let (dx, g) = conv2d_backward(&x, &lp, &t(&[f, h, w], &r2)).unwrap();
            [dx.data(), g.weights.data(), g.biases.data()].concat()
        },
        pattern: no_pattern,
    };
    gradient_check(&mut frag, seed)
}

/// Loss `<r, relu(x)>`; inputs within 1e-4 of the kink are pushed away.
pub fn relu_layer(seed: u64) -> GradCheckReport {
    let mut rng = Lcg::new(seed);
    let params: Vec<f64> = random(&mut rng, 60)
        .into_iter()
        .map(|v| if v.abs() < 1e-4 { 0.5 } else { v })
        .collect();
    let r = random(&mut rng, 60);
    let r2 = r.clone();
    let mut frag = Fragment {
        params,
        loss: move |p: &[f64]| dot(relu(&t(&[60], p)).data(), &r),
        grad: move |p: &[f64]| {
            relu_backward(&t(&[60], p), &t(&[60], &r2))
                .unwrap()
                .into_data()
        },
        pattern: |p: &[f64]| signs(p),
    };
    gradient_check(&mut frag, seed)
}

/// Loss `<r, maxpool(x)>`.
pub fn maxpool(seed: u64) -> GradCheckReport {
    let dims = [2, 4, 6];
    let mut rng = Lcg::new(seed);
    let params = random(&mut rng, 48);
    let r = random(&mut rng, 12);
    let r2 = r.clone();
    let mut frag = Fragment {
        params,
        loss: move |p: &[f64]| dot(maxpool2x2_forward(&t(&dims, p)).unwrap().0.data(), &r),
        grad: move |p: &[f64]| {
            let (_, am) = maxpool2x2_forward(&t(&dims, p)).unwrap();
            maxpool2x2_backward(&am, &t(&[2, 2, 3], &r2))
                .unwrap()
                .into_data()
        },
        pattern: move |p: &[f64]| {
            let (_, am) = maxpool2x2_forward(&t(&dims, p)).unwrap();
            am.indices().iter().map(|&i| i as u64).collect()
        },
    };
    gradient_check(&mut frag, seed)
}

/// Loss `<r, dropout(x)>` with the mask fixed by a reseeded generator.
pub fn dropout_layer(seed: u64) -> GradCheckReport {
    let mut rng = Lcg::new(seed);
    let params = random(&mut rng, 50);
    let r = random(&mut rng, 50);
    let r2 = r.clone();
    let fwd =
        move |p: &[f64]| dropout(&t(&[50], p), 0.25, Mode::Train, &mut Lcg::new(seed)).unwrap();
    let mut frag = Fragment {
        params,
        loss: move |p: &[f64]| dot(fwd(p).0.data(), &r),
        grad: move |p: &[f64]| {
            let (_, mask) = fwd(p);
            dropout_backward(&mask, &t(&[50], &r2)).unwrap().into_data()
        },
        pattern: no_pattern,
    };
    gradient_check(&mut frag, seed)
}

/// Loss `<r, W x + b>` over input, weights and biases.
pub fn linear(seed: u64) -> GradCheckReport {
    linear_with(seed, false)
}

/// Same as [`linear`] but the weight gradient uses the wrong input element.
pub fn corrupted_linear(seed: u64) -> GradCheckReport {
    linear_with(seed, true)
}

fn linear_with(seed: u64, corrupt: bool) -> GradCheckReport {
    let (o, i) = (4, 7);
    let mut rng = Lcg::new(seed);
    let params = random(&mut rng, i + o * i + o);
    let r = random(&mut rng, o);
    let split = move |p: &[f64]| {
        (
            t(&[i], &p[..i]),
            LayerParams::new(t(&[o, i], &p[i..i + o * i]), t(&[o], &p[i + o * i..])),
        )
    };
    let r2 = r.clone();
    let mut frag = Fragment {
        params,
        loss: move |p: &[f64]| {
            let (x, lp) = split(p);
            dot(fc_forward(&x, &lp).unwrap().data(), &r)
        },
        grad: move |p: &[f64]| {
            let (mut x, lp) = split(p);
            if corrupt {
                x.data_mut().rotate_left(1);
            }
            let (dx, g) = fc_backward(&x, &lp, &t(&[o], &r2)).unwrap();
            [dx.data(), g.weights.data(), g.biases.data()].concat()
        },
        pattern: no_pattern,
    };
    gradient_check(&mut frag, seed)
}

/// Softmax cross-entropy over the logits.
pub fn softmax_loss(seed: u64) -> GradCheckReport {
    let mut rng = Lcg::new(seed);
    let params: Vec<f64> = random(&mut rng, 6).iter().map(|v| 3.0 * v).collect();
    let label = rng.below(6);
    let mut frag = Fragment {
        params,
        loss: move |p: &[f64]| softmax_xent(&t(&[6], p), label).unwrap().0,
        grad: move |p: &[f64]| softmax_xent(&t(&[6], p), label).unwrap().1.into_data(),
        pattern: no_pattern,
    };
    gradient_check(&mut frag, seed)
}

/// Whole two-column net at F1=2, F2=2, H=8, dropout off.
pub fn tiny_net(seed: u64) -> GradCheckReport {
    let shape = NetShape {
        f1: 2,
        f2: 2,
        hidden: 8,
    };
    let net = MultiColumnNet::new(NetConfig::new(Variant::Combined, shape, 3), seed).unwrap();
    let mut rng = Lcg::new(seed ^ 0xabc);
    let mut ex = Example::zeros(rng.below(3), "probe");
    ex.mrp_data_mut()
        .iter_mut()
        .for_each(|v| *v = rng.uniform(-0.5, 0.5) as f32);
    ex.spec_data_mut()
        .iter_mut()
        .for_each(|v| *v = rng.uniform(-0.5, 0.5) as f32);
    let mut f = NetLoss { net, example: &ex };
    gradient_check(&mut f, seed)
}

/// Every check with the tolerance it must meet.
pub fn all(seed: u64) -> Vec<(&'static str, GradCheckReport, f64)> {
    vec![
        ("conv2d", conv(seed), 1e-4),
        ("relu", relu_layer(seed), 1e-4),
        ("maxpool2x2", maxpool(seed), 1e-4),
        ("dropout", dropout_layer(seed), 1e-4),
        ("fully-connected", linear(seed), 1e-7),
        ("softmax cross-entropy", softmax_loss(seed), 1e-6),
        ("two-column net", tiny_net(seed), 1e-4),
    ]
}
