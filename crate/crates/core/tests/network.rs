use std::f64::consts::TAU;

use netcap_core::network::{sample_inputs, Channel};
use netcap_core::rng::stream_rng;
use netcap_core::stats::{ks_two_sample, Moments};
use netcap_core::{AlphaSequence, InputDistribution, NetworkConfig, Truncation};
use num_complex::Complex64;
use rand::Rng;

const N: usize = 100_000;

fn fixed_inputs(l: usize) -> Vec<Complex64> {
    (0..=l).map(|i| Complex64::from_polar(1.0 + 0.3 * i as f64, 0.7 * i as f64)).collect()
}

#[test]
fn output_is_circularly_symmetric_for_fixed_inputs() {
    let ch = Channel::new(&AlphaSequence::exponential(0.5).unwrap(), 1.0, 8);
    let x = fixed_inputs(8);
    let mut rng = stream_rng(5, 0);
    let plain: Vec<f64> = (0..N).map(|_| ch.sample(&x, &mut rng).unwrap().y.re).collect();
    let rotated: Vec<f64> = (0..N)
        .map(|_| {
            let theta = TAU * rng.gen::<f64>();
            (ch.sample(&x, &mut rng).unwrap().y * Complex64::from_polar(1.0, theta)).re
        })
        .collect();
    let ks = ks_two_sample(plain, rotated);
    assert!(ks.p_value > 0.01, "{ks:?}");
}

#[test]
fn conditional_variance_matches_fading_draws() {
    for (alphas, l) in [
        (AlphaSequence::exponential(0.5).unwrap(), 6),
        (AlphaSequence::polynomial(2.0).unwrap(), 12),
        (AlphaSequence::explicit(vec![0.9, 0.4, 0.3], 0.5).unwrap().with_alpha0(2.0).unwrap(), 3),
    ] {
        let ch = Channel::new(&alphas, 0.7, l);
        let x = fixed_inputs(l);
        let mut rng = stream_rng(6, l as u64);
        let mut m = Moments::default();
        let mut target = 0.0;
        for _ in 0..N {
            let s = ch.sample(&x, &mut rng).unwrap();
            target = s.conditional_variance;
            m.push(s.y.norm_sqr());
        }
        let rel = (m.mean() - target).abs() / target;
        assert!(rel < 0.02, "relative error {rel} for {alphas:?}");
    }
}

#[test]
fn extra_interferers_beyond_truncation_are_negligible() {
    let eps = 1e-6;
    let power = 10.0;
    let cfg = NetworkConfig::new(AlphaSequence::exponential(0.5).unwrap(), 1.0, power)
        .unwrap()
        .with_truncation(Truncation::Tolerance(eps));
    let l = cfg.interferers().unwrap();
    let dist = InputDistribution::circular_gaussian(power).unwrap();
    let var = |len: usize, stream: u64| {
        let ch = Channel::new(&cfg.alphas, cfg.sigma2, len);
        let mut rng = stream_rng(7, stream);
        let m: Moments = (0..N)
            .map(|_| {
                let x = sample_inputs(&dist, len, &mut rng);
                ch.sample(&x, &mut rng).unwrap().y.norm_sqr()
            })
            .collect();
        m
    };
    let a = var(l, 1);
    let b = var(l + 10, 2);
    let mc = 4.0 * a.std_error().hypot(b.std_error());
    assert!((a.mean() - b.mean()).abs() <= eps * cfg.sigma2 + mc);
    // the deterministic part of the change is below the tolerance
    let added: f64 = (l + 1..=l + 10).map(|k| cfg.alphas.value(k)).sum::<f64>() * power;
    assert!(added <= eps * cfg.sigma2);
}

#[test]
fn y_bar_shares_fading_and_noise_with_y() {
    // silent inputs: Y and Y-bar are the same noise sample
    let ch = Channel::new(&AlphaSequence::exponential(0.5).unwrap(), 2.0, 0);
    let mut rng = stream_rng(8, 0);
    let zero = [Complex64::new(0.0, 0.0)];
    let mut m = Moments::default();
    for _ in 0..N {
        let s = ch.sample(&zero, &mut rng).unwrap();
        m.push((s.y * s.y_bar.conj()).re);
    }
    assert!((m.mean() - 2.0).abs() < 4.0 * m.std_error());
}
