mod common;

use common::*;
use mrp_timbre::spectrogram::SpectrogramConfig;
use mrp_timbre::{build_mrp_stack, spectrogram_image, Lcg};

#[test]
fn spectrogram_is_blind_to_phase_and_mrp_is_not() {
    let mut rng = Lcg::new(2024);
    for _ in 0..10 {
        let pair = phase_pair(&mut rng, 8192);
        for start in [0, 1000] {
            let sa = spectrogram_image(&pair.a, start, &SpectrogramConfig::default()).unwrap();
            let sb = spectrogram_image(&pair.b, start, &SpectrogramConfig::default()).unwrap();
            assert!(sa.matrix().max_abs_diff(sb.matrix()) < 1e-6);
            let ma = build_mrp_stack(&pair.a, start).unwrap();
            let mb = build_mrp_stack(&pair.b, start).unwrap();
            assert!(ma.max_abs_diff(&mb) > 0.01);
        }
    }
}

#[test]
fn phase_pair_classes_share_magnitude_spectra() {
    use mrp_timbre::dataset::synth_corpus;
    let mut spec = phase_pair_corpus(3, 5);
    spec.classes
        .iter_mut()
        .for_each(|c| c.gain_range = [0.8, 0.8]);
    let tones = synth_corpus(&spec).unwrap();
    // tone i of class 0 and class 1 share fundamental and gain
    for i in 0..3 {
        let a = &tones[i].series;
        let b = &tones[3 + i].series;
        for frame_start in [0usize, 4096, 20_000] {
            let fa = dft_oracle(&a.samples()[frame_start..frame_start + 64]);
            let fb = dft_oracle(&b.samples()[frame_start..frame_start + 64]);
            for (x, y) in fa.iter().zip(&fb) {
                assert!((x - y).abs() < 1e-6, "{x} vs {y}");
            }
        }
        assert!(
            build_mrp_stack(a, 0)
                .unwrap()
                .max_abs_diff(&build_mrp_stack(b, 0).unwrap())
                > 0.01
        );
    }
}
