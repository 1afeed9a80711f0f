//! Acceptance suite: one `PASS`/`FAIL` line per criterion, nonzero exit on any failure.

mod common;

use std::f64::consts::{FRAC_PI_2, LN_2, PI};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use common::{tanh_sinh_entropy, RadialOracle};
use netcap_core::bounds::{exponential_bound, geometric_bound, proposition_bound};
use netcap_core::eta::{eta_squared_with, verify_lemma1};
use netcap_core::experiment::{parse_config, run_mi_sweep};
use netcap_core::mi::{check_bar_identity, estimate_mi, saturation_profile, EstimatorSettings};
use netcap_core::quadrature::QuadSpec;
use netcap_core::ratio::{appendix_a_integral, ratio_entropy, AppendixCase};
use netcap_core::rng::stream_rng;
use netcap_core::stats::Moments;
use netcap_core::{eta_bounds, AlphaSequence, Channel, EtaSampler, InputDistribution, NetworkConfig, RatioLaw};
use num_complex::Complex64;

type Outcome = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn bound_formulas() -> Outcome {
    let alphas = AlphaSequence::exponential(0.5).unwrap();
    let eb = eta_bounds(&alphas);
    let formula = (PI / 2.0).ln() + 3.0 + 1.5 * LN_2;
    let prop = proposition_bound(&eb).value;
    let geo = geometric_bound(0.5).unwrap().value;
    let (proof, _) = exponential_bound(0.5).unwrap();
    let ok = eb.eta_min2 == 1.0
        && eb.eta_max2 == 2.0
        && (prop - formula).abs() <= 1e-12
        && (geo - formula).abs() <= 1e-12
        && (proof.value - LN_2).abs() <= 1e-12
        && (prop - 4.4913).abs() < 1e-4;
    ensure(
        ok,
        format!(
            "eta^2 in [{}, {}], proposition {prop:.12}, geometric {geo:.12}, formula {formula:.12}, exponential {:.12}",
            eb.eta_min2, eb.eta_max2, proof.value
        ),
    )
}

fn eta_bound_certification() -> Outcome {
    let models = [
        AlphaSequence::exponential(0.5).unwrap(),
        AlphaSequence::exponential(0.9).unwrap(),
        AlphaSequence::exponential(0.3).unwrap().with_alpha0(4.0).unwrap(),
        AlphaSequence::polynomial(2.0).unwrap(),
        AlphaSequence::polynomial(4.5).unwrap().with_alpha0(0.2).unwrap(),
        AlphaSequence::explicit(vec![0.9, 0.5, 0.45, 0.1, 0.02], 0.5).unwrap(),
    ];
    let trials = 1_000_000;
    let mut parts = Vec::new();
    for (i, a) in models.iter().enumerate() {
        match verify_lemma1(a, 1.0, trials, 100 + i as u64) {
            Ok(r) if r.bounds.contains(r.min_seen) && r.bounds.contains(r.max_seen) => {
                parts.push(format!("[{:.4}, {:.4}]", r.min_seen, r.max_seen))
            }
            Ok(r) => return Err(format!("model {i}: extremes {} {} outside {:?}", r.min_seen, r.max_seen, r.bounds)),
            Err(e) => return Err(format!("model {i}: {e}")),
        }
    }
    Ok(format!("{} models x {trials} trials, zero violations, extremes {}", models.len(), parts.join(" ")))
}

fn ratio_machinery() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;

    let h = ratio_entropy(&RatioLaw::constant(1.0), QuadSpec::default()).unwrap();
    let oracle = tanh_sinh_entropy(1.0);
    let exact = 2.0 - LN_2;
    ok &= (h - oracle).abs() <= 1e-4 && (h - exact).abs() <= 1e-4;
    notes.push(format!("h(R) {h:.10} oracle {oracle:.10}"));

    let alphas = AlphaSequence::exponential(0.5).unwrap();
    let sampled = RatioLaw::from_samples(
        EtaSampler::new(&alphas, 1.0, InputDistribution::on_off(0.1, 10.0).unwrap(), 20).draw(5000, 3, 0),
    );
    let spec = QuadSpec::with_abs_tol(1e-10);
    let mut worst = 0.0f64;
    for law in [RatioLaw::constant(1.0), RatioLaw::constant(1.7), sampled] {
        worst = worst.max((law.first_integral(spec).unwrap() - law.first_integral_closed()).abs());
    }
    ok &= worst <= 1e-8;
    notes.push(format!("first integral err {worst:.2e}"));

    let ch = Channel::new(&alphas, 1.0, 12);
    let x: Vec<Complex64> = (0..=12).map(|i| Complex64::from_polar(3.0 / (1.0 + i as f64), 0.7 * i as f64)).collect();
    let powers: Vec<f64> = x.iter().map(|v| v.norm_sqr()).collect();
    let eta = eta_squared_with(&powers, ch.variances(), 1.0).sqrt();
    let mut rng = stream_rng(17, 0);
    let m: Moments = (0..200_000)
        .map(|_| {
            let c = ch.sample(&x, &mut rng).unwrap();
            (c.y / c.y_tilde).norm()
        })
        .collect();
    let z = (m.mean() - FRAC_PI_2 * eta).abs() / m.std_error();
    ok &= z <= 3.0;
    notes.push(format!("E[R] z {z:.2}"));

    let grid: Vec<f64> = (0..32).map(|i| (0.1f64.ln() + (100f64).ln() * i as f64 / 31.0).exp()).collect();
    let mut closed_err = 0.0f64;
    let mut excess = f64::NEG_INFINITY;
    let mut pairs = 0;
    for &e in &grid {
        for &star in &grid {
            let r = appendix_a_integral(&AppendixCase::new(e, star).unwrap(), QuadSpec::with_abs_tol(1e-12)).unwrap();
            closed_err = closed_err.max((r.closed_form - r.numeric).abs());
            excess = excess.max(r.closed_form - r.bound);
            pairs += 1;
        }
    }
    ok &= closed_err <= 1e-8 && excess <= 1e-12;
    notes.push(format!("{pairs} pairs closed-form err {closed_err:.2e} max excess over bound {excess:.2e}"));
    ensure(ok, notes.join(", "))
}

fn bar_identity() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (i, rho) in [0.3, 0.5, 0.9].into_iter().enumerate() {
        let cfg = NetworkConfig::new(AlphaSequence::exponential(rho).unwrap(), 1.0, 1.0)
            .unwrap()
            .with_seed(40 + i as u64);
        let r = check_bar_identity(&cfg, &InputDistribution::circular_gaussian(1.0).unwrap(), 100_000).unwrap();
        ok &= r.modulus.p_value > 1e-3 && r.real.p_value > 1e-3 && r.imag.p_value > 1e-3;
        parts.push(format!(
            "rho {rho}: p = {:.3}/{:.3}/{:.3}",
            r.modulus.p_value, r.real.p_value, r.imag.p_value
        ));
    }
    ensure(ok, parts.join(", "))
}

fn boundedness() -> Outcome {
    let alphas = AlphaSequence::exponential(0.5).unwrap();
    let prop = proposition_bound(&eta_bounds(&alphas)).value;
    let log_inv_rho = 2f64.ln();
    let cfg = NetworkConfig::new(alphas, 1.0, 1.0).unwrap().with_seed(2024);
    let snr_db = [0.0, 10.0, 20.0, 30.0, 40.0, 50.0, 60.0];
    let settings = EstimatorSettings::default();
    let laws: Vec<(&str, InputDistribution)> = vec![
        ("gaussian", InputDistribution::circular_gaussian(1.0).unwrap()),
        ("constant-modulus", InputDistribution::constant_modulus(1.0).unwrap()),
        ("qam16", InputDistribution::qam(16, 1.0).unwrap()),
        ("on-off 1", InputDistribution::on_off(1.0, 1.0).unwrap()),
        ("on-off 0.1", InputDistribution::on_off(0.1, 1.0).unwrap()),
        ("on-off 0.01", InputDistribution::on_off(0.01, 1.0).unwrap()),
        (
            "on-off 1/(1+snr)",
            InputDistribution::on_off(1.0, 1.0)
                .unwrap()
                .with_snr_rule(netcap_core::input::SnrRule::InverseSnrDuty)
                .unwrap(),
        ),
    ];
    let mut ok = true;
    let mut notes = Vec::new();
    let mut worst_margin = f64::INFINITY;
    for (name, law) in &laws {
        let rows = saturation_profile(&cfg, law, &snr_db, &settings).unwrap();
        for est in &rows {
            let upper = est.mi_nats - 3.0 * est.sigma();
            worst_margin = worst_margin.min(log_inv_rho - upper);
            if upper > log_inv_rho || upper > prop {
                ok = false;
                notes.push(format!("{name} at {} dB: mi {:.4} sigma {:.4}", est.snr_db, est.mi_nats, est.sigma()));
            }
        }
        if *name == "gaussian" {
            let diff = (rows[5].mi_nats - rows[6].mi_nats).abs();
            ok &= diff < 0.05;
            notes.push(format!("gaussian MI 50/60 dB {:.4}/{:.4}", rows[5].mi_nats, rows[6].mi_nats));
        }
        let peak = rows.iter().map(|e| e.mi_nats).fold(f64::NEG_INFINITY, f64::max);
        notes.push(format!("{name} max {peak:.4}"));
    }
    notes.push(format!("smallest margin to log(1/rho) {worst_margin:.4}"));
    ensure(ok, notes.join(", "))
}

fn estimator_validity() -> Outcome {
    let cfg = NetworkConfig::new(AlphaSequence::exponential(0.5).unwrap(), 1.0, 10.0)
        .unwrap()
        .with_seed(6);
    let dist = InputDistribution::circular_gaussian(10.0).unwrap();
    let alphas = cfg.alphas.variances(cfg.interferers().unwrap());
    let (_, _, oracle) = RadialOracle::new(0.1).gaussian_input_mi(&alphas, 10.0, 1.0);
    let base = EstimatorSettings::default();
    let est = estimate_mi(&cfg, &dist, &base).unwrap();
    let doubled = estimate_mi(&cfg, &dist, &EstimatorSettings { outer: 2 * base.outer, ..base }).unwrap();
    let shrink = est.half_width() / doubled.half_width();
    let ok = est.ci_low <= oracle && oracle <= est.ci_high && (shrink / 2f64.sqrt() - 1.0).abs() <= 0.2;
    ensure(
        ok,
        format!(
            "oracle {oracle:.5}, estimate {:.5} [{:.5}, {:.5}], CI shrink on doubling N {shrink:.3}",
            est.mi_nats, est.ci_low, est.ci_high
        ),
    )
}

fn reproducibility() -> Outcome {
    let text = "mode = mi-sweep\nnetwork.rho = 0.5\nnetwork.seed = 77\nsweep.snr_db = 0, 20, 40\n\
                input.family = qam\ninput.qam = 16\nestimator.N = 10000\nestimator.M = 2000\n";
    let cfg = parse_config(text).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(2).build().unwrap();
    let a = pool.install(|| run_mi_sweep(&cfg)).unwrap().csv.unwrap();
    let b = pool.install(|| run_mi_sweep(&cfg)).unwrap().csv.unwrap();
    ensure(a.as_bytes() == b.as_bytes(), format!("{} bytes, identical = {}", a.len(), a == b))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("bound formulas", bound_formulas),
        ("eta^2 bound certification", eta_bound_certification),
        ("ratio machinery", ratio_machinery),
        ("Y-bar law identity", bar_identity),
        ("boundedness across input laws", boundedness),
        ("estimator validity", estimator_validity),
        ("reproducibility", reproducibility),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("acceptance {} {name}: PASS ({secs:.1} s) {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("acceptance {} {name}: FAIL ({secs:.1} s) {d}", i + 1)
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
