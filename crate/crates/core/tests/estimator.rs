mod common;

use common::{two_point_mixture_entropy, RadialOracle};
use netcap_core::bounds::BoundKind;
use netcap_core::mi::{
    check_bar_identity, estimate_entropy_mixture, estimate_mi, saturation_profile, DiscreteVariances, EstimatorSettings,
};
use netcap_core::{AlphaSequence, InputDistribution, NetworkConfig, Truncation};

fn settings(outer: usize, mixture: usize) -> EstimatorSettings {
    EstimatorSettings {
        outer,
        mixture,
        max_doublings: 0,
        ..Default::default()
    }
}

fn exp_config(rho: f64, power: f64) -> NetworkConfig {
    NetworkConfig::new(AlphaSequence::exponential(rho).unwrap(), 1.0, power).unwrap()
}

#[test]
fn two_point_mixture_matches_quadrature() {
    let oracle = two_point_mixture_entropy([1.0, 2.0], [0.5, 0.5], 1_000_000);
    let s = DiscreteVariances::new(vec![vec![1.0], vec![2.0]], vec![0.5, 0.5]).unwrap();
    let h = estimate_entropy_mixture(&s, 100_000, 10_000, 3, 1).unwrap();
    let (lo, hi) = h.ci();
    assert!(lo <= oracle && oracle <= hi, "{oracle} outside {h:?}");
    assert!(!h.exact);
}

#[test]
fn larger_mixture_sets_agree() {
    let s = DiscreteVariances::new(vec![vec![1.0], vec![2.0], vec![9.0]], vec![0.2, 0.5, 0.3]).unwrap();
    let a = estimate_entropy_mixture(&s, 20_000, 100_000, 0, 2).unwrap();
    let b = estimate_entropy_mixture(&s, 20_000, 200_000, 0, 2).unwrap();
    assert!((a.entropy - b.entropy).abs() <= a.half_width, "{a:?} {b:?}");
}

#[test]
fn doubling_outer_samples_shrinks_ci_by_root_two() {
    let cfg = exp_config(0.5, 1.0);
    let d = InputDistribution::circular_gaussian(1.0).unwrap();
    let a = estimate_mi(&cfg, &d, &settings(10_000, 2_000)).unwrap();
    let b = estimate_mi(&cfg, &d, &settings(20_000, 2_000)).unwrap();
    let ratio = a.half_width() / b.half_width();
    assert!((ratio / 2f64.sqrt() - 1.0).abs() < 0.2, "ratio {ratio}");
}

#[test]
fn matches_radial_oracle_at_zero_db() {
    let cfg = exp_config(0.5, 1.0);
    let alphas = cfg.alphas.variances(cfg.interferers().unwrap());
    let (_, _, mi) = RadialOracle::new(0.1).gaussian_input_mi(&alphas, 1.0, 1.0);
    let est = estimate_mi(&cfg, &InputDistribution::circular_gaussian(1.0).unwrap(), &settings(30_000, 5_000)).unwrap();
    assert!(est.ci_low <= mi && mi <= est.ci_high, "oracle {mi} vs {est:?}");
}

#[test]
fn extra_interferer_does_not_raise_mi() {
    let d = InputDistribution::circular_gaussian(10.0).unwrap();
    let lone = estimate_mi(&exp_config(0.5, 10.0).with_truncation(Truncation::Fixed(0)), &d, &settings(20_000, 4_000)).unwrap();
    let busy = estimate_mi(&exp_config(0.5, 10.0).with_truncation(Truncation::Fixed(5)), &d, &settings(20_000, 4_000)).unwrap();
    assert!(busy.mi_nats <= lone.mi_nats + lone.half_width() + busy.half_width(), "{lone:?} {busy:?}");
}

#[test]
fn estimates_are_nonnegative_within_ci() {
    let cfg = exp_config(0.7, 100.0);
    for d in [
        InputDistribution::circular_gaussian(100.0).unwrap(),
        InputDistribution::constant_modulus(100.0).unwrap(),
        InputDistribution::qam(16, 100.0).unwrap(),
        InputDistribution::on_off(0.1, 100.0).unwrap(),
    ] {
        let e = estimate_mi(&cfg, &d, &settings(5_000, 2_000)).unwrap();
        assert!(e.ci_high >= 0.0, "{e:?}");
    }
}

#[test]
fn snr_dependent_peaky_input_stays_below_bounds() {
    let cfg = exp_config(0.5, 1.0);
    let d = InputDistribution::on_off(1.0, 1.0)
        .unwrap()
        .with_snr_rule(netcap_core::input::SnrRule::InverseSnrDuty)
        .unwrap();
    let profile = saturation_profile(&cfg, &d, &[0.0, 20.0, 40.0, 60.0], &settings(5_000, 2_000)).unwrap();
    for e in &profile {
        for b in &e.bound_refs {
            if matches!(b.kind, BoundKind::ExponentialProof | BoundKind::Proposition) {
                assert!(e.dominated_by(b.value), "{e:?}");
            }
        }
    }
}

#[test]
fn bar_identity_holds_at_half() {
    let cfg = exp_config(0.5, 10.0);
    let r = check_bar_identity(&cfg, &InputDistribution::circular_gaussian(10.0).unwrap(), 20_000).unwrap();
    assert!(r.passed(), "{r:?}");
}
