mod common;

use common::*;
use mrp_timbre::mrp::*;
use mrp_timbre::{build_mrp_stack, Lcg};
use proptest::prelude::*;

fn signal() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..=1.0, 1..200)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn plot_is_symmetric_with_zero_diagonal(x in signal()) {
        let m = recurrence_plot(&x).unwrap();
        for i in 0..x.len() {
            prop_assert_eq!(m.get(i, i), 0.0);
            for j in 0..x.len() {
                prop_assert_eq!(m.get(i, j), m.get(j, i));
                prop_assert!(m.get(i, j) >= 0.0);
            }
        }
        prop_assert_eq!(m.values(), &rp_oracle(&x)[..]);
    }

    #[test]
    fn one_d_pooling_matches_scan(x in prop::collection::vec(-1.0f64..=1.0, 1..64), w in 1usize..5) {
        let n = x.len() / w * w;
        prop_assume!(n > 0);
        prop_assert_eq!(maxpool_1d(&x[..n], w).unwrap(), maxpool_1d_oracle(&x[..n], w));
    }

    #[test]
    fn pooled_plot_matches_full_plot(x in prop::collection::vec(-1.0f64..=1.0, 1..48), k in 1usize..5) {
        let n = x.len() / k * k;
        prop_assume!(n > 0);
        let fast = pooled_recurrence_plot(&x[..n], k).unwrap();
        let slow = maxpool_2d_oracle(&rp_oracle(&x[..n]), n, k);
        prop_assert_eq!(fast.values(), &slow[..]);
    }

    #[test]
    fn stack_is_negation_invariant(seed in any::<u64>(), len in 1usize..40_000, start in 0usize..1000) {
        let mut rng = Lcg::new(seed);
        let ts = series(random_signal(&mut rng, len));
        let a = build_mrp_stack(&ts, start).unwrap();
        let b = build_mrp_stack(&ts.negated(), start).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn stack_scales_with_root_gain(seed in any::<u64>(), gain in 0.01f64..=1.0) {
        let mut rng = Lcg::new(seed);
        let ts = series(random_signal(&mut rng, 20_000));
        let a = build_mrp_stack(&ts, 0).unwrap();
        let b = build_mrp_stack(&ts.scaled(gain).unwrap(), 0).unwrap();
        for (la, lb) in a.layers().iter().zip(b.layers()) {
            let peak = la.values().iter().fold(0.0f64, |m, v| m.max(v.abs())) * gain.sqrt();
            for (va, vb) in la.values().iter().zip(lb.values()) {
                prop_assert!((va * gain.sqrt() - vb).abs() <= 1e-9 * peak.max(f64::MIN_POSITIVE));
            }
        }
    }

    #[test]
    fn layers_match_naive_route(seed in any::<u64>(), layer in 0usize..5, start in 0usize..3000) {
        let mut rng = Lcg::new(seed);
        let x = random_signal(&mut rng, 1 << (5 + 2 * layer));
        let fast = build_mrp_layer(&series(x.clone()), start, layer).unwrap();
        prop_assert_eq!(fast.values(), &mrp_layer_oracle(&x, start, layer)[..]);
    }
}

#[test]
fn deep_layers_match_naive_route() {
    let mut rng = Lcg::new(77);
    let x = random_signal(&mut rng, 140_000);
    let ts = series(x.clone());
    for layer in [5, 6] {
        assert_eq!(
            build_mrp_layer(&ts, 123, layer).unwrap().values(),
            &mrp_layer_oracle(&x, 123, layer)[..]
        );
    }
}

#[test]
fn centred_layers_have_zero_mean() {
    let mut rng = Lcg::new(3);
    let ts = series(random_signal(&mut rng, 140_000));
    for l in build_mrp_stack(&ts, 0).unwrap().layers() {
        assert!(l.mean().abs() < 1e-12);
        assert_eq!(l.side(), IMAGE_SIDE);
    }
}
