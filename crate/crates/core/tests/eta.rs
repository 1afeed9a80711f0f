use netcap_core::eta::{eta_squared, EtaSampler};
use netcap_core::rng::stream_rng;
use netcap_core::stats::Moments;
use netcap_core::{eta_bounds, eta_star, AlphaModel, AlphaSequence, InputDistribution};
use proptest::prelude::*;

fn objective(x: f64, r: f64) -> f64 {
    let d = r * r + x;
    x / (d * d)
}

#[test]
fn averaged_objective_dominates_endpoint_choice() {
    let cases = [
        (AlphaSequence::exponential(0.5).unwrap(), InputDistribution::circular_gaussian(10.0).unwrap()),
        (AlphaSequence::exponential(0.9).unwrap(), InputDistribution::on_off(0.1, 100.0).unwrap()),
        (AlphaSequence::polynomial(2.5).unwrap(), InputDistribution::qam(16, 3.0).unwrap()),
        (
            AlphaSequence::exponential(0.3).unwrap().with_alpha0(4.0).unwrap(),
            InputDistribution::circular_gaussian(1.0).unwrap(),
        ),
    ];
    for (k, (alphas, dist)) in cases.into_iter().enumerate() {
        let bounds = eta_bounds(&alphas);
        let sampler = EtaSampler::new(&alphas, 1.0, dist, 30);
        let eta2 = sampler.draw(100_000, 3, k as u64);
        for i in 0..100 {
            let r = 10f64.powf(-2.0 + 4.0 * i as f64 / 99.0);
            let m: Moments = eta2.iter().map(|&e| objective(e, r)).collect();
            let star = eta_star(r, &bounds);
            let floor = objective(star, r);
            assert!(
                m.mean() + 4.0 * m.std_error() >= floor * (1.0 - 1e-12),
                "case {k}, r = {r}: {} < {floor}",
                m.mean()
            );
        }
    }
}

#[test]
fn random_powers_stay_within_bounds_for_many_models() {
    let mut rng = stream_rng(4, 0);
    use rand::Rng;
    for model in [
        AlphaModel::Exponential { rho: 0.2 },
        AlphaModel::Exponential { rho: 0.99 },
        AlphaModel::Polynomial { beta: 1.5 },
        AlphaModel::Explicit { values: vec![0.8, 0.5, 0.45, 0.1] },
    ] {
        let alphas = AlphaSequence::build(model, 1.3, 0.5).unwrap();
        let b = eta_bounds(&alphas);
        for _ in 0..20_000 {
            let len = rng.gen_range(1..40);
            let p: Vec<f64> = (0..len).map(|_| 10f64.powf(rng.gen_range(-4.0..4.0))).collect();
            let e = eta_squared(&p, &alphas, 0.5);
            assert!(e >= b.eta_min2 * (1.0 - 1e-12) && e <= b.eta_max2 * (1.0 + 1e-12));
        }
    }
}

proptest! {
    #[test]
    fn successive_ratios_are_bounded(rho in 0.01f64..0.99, beta in 1.01f64..6.0, k in 1usize..200) {
        for alphas in [AlphaSequence::exponential(rho).unwrap(), AlphaSequence::polynomial(beta).unwrap()] {
            let q = alphas.value(k) / alphas.value(k + 1);
            prop_assert!(q >= 1.0 - 1e-12 && q <= 1.0 / alphas.rho() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn eta_squared_is_scale_free(
        p in prop::collection::vec(0.0f64..1e3, 1..20),
        c in prop::sample::select(vec![1e-6, 1e-3, 7.0, 1e6]),
    ) {
        let a = AlphaSequence::exponential(0.6).unwrap();
        let e1 = eta_squared(&p, &a, 1.0);
        let scaled: Vec<f64> = p.iter().map(|x| x * c).collect();
        let e2 = eta_squared(&scaled, &a, c);
        prop_assert!((e1 - e2).abs() <= 1e-12 * e1);
    }

    #[test]
    fn eta_star_lies_in_bounds(r in 1e-4f64..1e4, rho in 0.05f64..0.95, a0 in 0.1f64..10.0) {
        let b = eta_bounds(&AlphaSequence::exponential(rho).unwrap().with_alpha0(a0).unwrap());
        let s = eta_star(r, &b);
        prop_assert!(s >= b.eta_min2 && s <= b.eta_max2);
    }
}
