use std::time::Instant;

use netcap_core::experiment::{parse_config, run, run_mi_sweep, run_verify, ExitStatus, Mode};

fn verify_passes(text: &str) {
    let cfg = parse_config(text).unwrap();
    let t = Instant::now();
    let out = run_verify(&cfg).unwrap();
    eprintln!("{}({:.1?})", out.report, t.elapsed());
    assert_eq!(out.status, ExitStatus::Success, "{}", out.report);
    assert!(out.report.lines().filter(|l| l.starts_with("CHECK")).count() >= 18);
}

#[test]
fn verify_suite_passes_at_default_rho() {
    verify_passes("network.rho = 0.5\n");
}

#[test]
fn verify_suite_passes_near_degenerate_rho() {
    verify_passes("network.rho = 0.99\nverify.samples = 20000\nverify.trials = 200000\n");
}

#[test]
fn verify_suite_passes_for_other_models() {
    for text in [
        "network.alpha_model = polynomial\nnetwork.beta = 3\nnetwork.L = 60\ninput.family = qam\ninput.qam = 16\n\
         verify.samples = 20000\nverify.trials = 100000\n",
        "network.alpha_model = explicit\nnetwork.alphas = 0.8, 0.3, 0.25, 0.05\nnetwork.alpha0 = 0.5\n\
         input.family = on-off\ninput.delta = 0.1\nverify.samples = 20000\nverify.trials = 100000\n",
    ] {
        verify_passes(text);
    }
}

#[test]
fn sweep_is_reproducible_and_seed_sensitive() {
    let text = "network.rho = 0.5\nnetwork.eps = 1e-4\nsweep.snr_db = 0, 20\nestimator.N = 4000\nestimator.M = 2000\n";
    let a = run_mi_sweep(&parse_config(text).unwrap()).unwrap();
    let b = run(&parse_config(text).unwrap(), Mode::MiSweep).unwrap();
    assert_eq!(a.csv, b.csv);
    let c = run_mi_sweep(&parse_config(&format!("{text}network.seed = 9\n")).unwrap()).unwrap();
    assert_ne!(a.csv, c.csv);
}
