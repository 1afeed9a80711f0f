//! Bounds tables, MI sweeps, raw channel draws and the `Y-bar` law check.

use std::fmt::Write as _;

use crate::bounds::{applicable_bounds, BoundKind, CapacityBound};
use crate::error::{Error, Result};
use crate::eta::{eta_bounds, eta_squared_with};
use crate::experiment::config::{ExperimentConfig, Mode};
use crate::experiment::verify::run_verify;
use crate::mi::{check_bar_identity, saturation_profile, MIEstimate};
use crate::network::{multivariate_sample, AlphaModel};
use crate::rng::{stream_rng, tag};

/// Process exit status of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success,
    ConfigError,
    BoundViolation,
    VerificationFailure,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        match self {
            ExitStatus::Success => 0,
            ExitStatus::ConfigError => 1,
            ExitStatus::BoundViolation => 2,
            ExitStatus::VerificationFailure => 3,
        }
    }
}

/// Human-readable report, optional CSV table and exit status.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub report: String,
    pub csv: Option<String>,
    pub status: ExitStatus,
}

/// Dispatches on `mode`.
pub fn run(cfg: &ExperimentConfig, mode: Mode) -> Result<RunOutput> {
    match mode {
        Mode::Bounds => run_bounds(cfg),
        Mode::Simulate => run_simulate(cfg),
        Mode::MiSweep => run_mi_sweep(cfg),
        Mode::Verify => run_verify(cfg),
        Mode::DistCheck => run_dist_check(cfg),
    }
}

pub(crate) fn describe_model(model: &AlphaModel) -> String {
    match model {
        AlphaModel::Exponential { rho } => format!("exponential, rho = {rho}"),
        AlphaModel::Polynomial { beta } => format!("polynomial, beta = {beta}"),
        AlphaModel::Explicit { values } => format!("explicit, {} values", values.len()),
    }
}

/// `eta` bounds and every applicable capacity bound, in nats and bits.
pub fn run_bounds(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let alphas = cfg.alphas()?;
    let eb = eta_bounds(&alphas);
    let bounds = applicable_bounds(&alphas);

    let mut report = String::new();
    let _ = writeln!(report, "alpha model      {}", describe_model(alphas.model()));
    let _ = writeln!(report, "alpha_0/alpha_1  {:.12}", eb.direct_ratio);
    let _ = writeln!(report, "rho              {:.12}", alphas.rho());
    let _ = writeln!(report, "eta_min^2        {:.12}", eb.eta_min2);
    let _ = writeln!(report, "eta_max^2        {:.12}", eb.eta_max2);
    let _ = writeln!(report);
    let _ = writeln!(report, "{:<20}{:>20}{:>20}", "bound", "nats", "bits");
    for b in &bounds {
        let _ = writeln!(report, "{:<20}{:>20.12}{:>20.12}", b.kind.name(), b.value, b.bits());
    }

    let mut csv = String::from("quantity,value,unit\n");
    let _ = writeln!(csv, "eta_min2,{:.12},ratio", eb.eta_min2);
    let _ = writeln!(csv, "eta_max2,{:.12},ratio", eb.eta_max2);
    for b in &bounds {
        let _ = writeln!(csv, "{},{:.12},nats", b.kind.name(), b.value);
        let _ = writeln!(csv, "{},{:.12},bits", b.kind.name(), b.bits());
    }
    Ok(RunOutput {
        report,
        csv: Some(csv),
        status: ExitStatus::Success,
    })
}

pub const SWEEP_HEADER: &str = "snr_db,mi_nats,ci_low,ci_high,bound_proposition,bound_geometric,\
bound_exponential_proof,bound_exponential_stated,flags";

/// The capacity bounds an MI estimate has to respect.
const DOMINATING: [BoundKind; 3] = [BoundKind::Proposition, BoundKind::Geometric, BoundKind::ExponentialProof];

fn find(bounds: &[CapacityBound], kind: BoundKind) -> Option<f64> {
    bounds.iter().find(|b| b.kind == kind).map(|b| b.value)
}

fn optional(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.12}")).unwrap_or_default()
}

/// MI at every `sweep.snr_db` point. Rows whose estimate exceeds a bound by
/// more than three standard errors are flagged `bound_violation` and make the
/// run exit with [`ExitStatus::BoundViolation`].
pub fn run_mi_sweep(cfg: &ExperimentConfig) -> Result<RunOutput> {
    if cfg.sweep_db.is_empty() {
        return Err(Error::Precondition("sweep.snr_db is empty".into()));
    }
    let net = cfg.network_config()?;
    let dist = cfg.input_distribution()?;
    let bounds = applicable_bounds(&net.alphas);
    let rows = saturation_profile(&net, &dist, &cfg.sweep_db, &cfg.estimator)?;

    let mut csv = format!("{SWEEP_HEADER}\n");
    let mut report = String::new();
    let _ = writeln!(
        report,
        "alpha model {}; input {:?}; n = {}, N = {}, M = {}",
        describe_model(net.alphas.model()),
        cfg.input.family,
        cfg.estimator.n,
        cfg.estimator.outer,
        cfg.estimator.mixture
    );
    let _ = writeln!(
        report,
        "{:>8}{:>14}{:>14}{:>14}{:>10}  flags",
        "snr_db", "mi_nats", "ci_low", "ci_high", "M"
    );
    let mut violated = false;
    for est in &rows {
        let flags = row_flags(est, &bounds);
        violated |= flags.contains("bound_violation");
        let _ = writeln!(
            csv,
            "{},{:.8},{:.8},{:.8},{},{},{},{},{}",
            est.snr_db,
            est.mi_nats,
            est.ci_low,
            est.ci_high,
            optional(find(&bounds, BoundKind::Proposition)),
            optional(find(&bounds, BoundKind::Geometric)),
            optional(find(&bounds, BoundKind::ExponentialProof)),
            optional(find(&bounds, BoundKind::ExponentialStated)),
            flags
        );
        let _ = writeln!(
            report,
            "{:>8}{:>14.6}{:>14.6}{:>14.6}{:>10}  {}",
            est.snr_db, est.mi_nats, est.ci_low, est.ci_high, est.samples_mixture, flags
        );
    }
    for b in &bounds {
        let _ = writeln!(report, "bound {:<20}{:.6} nats", b.kind.name(), b.value);
    }
    Ok(RunOutput {
        report,
        csv: Some(csv),
        status: if violated {
            ExitStatus::BoundViolation
        } else {
            ExitStatus::Success
        },
    })
}

fn row_flags(est: &MIEstimate, bounds: &[CapacityBound]) -> String {
    let mut flags = est.flags.label();
    let broken = DOMINATING
        .iter()
        .filter_map(|&k| find(bounds, k))
        .any(|b| !est.dominated_by(b));
    if broken {
        if !flags.is_empty() {
            flags.push(';');
        }
        flags.push_str("bound_violation");
    }
    flags
}

/// Raw draws of `Y`, `Y-tilde` and `Y-bar` for `simulate.blocks` blocks of
/// length `estimator.n`.
pub fn run_simulate(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let net = cfg.network_config()?;
    let dist = cfg.input_distribution()?;
    let n = cfg.estimator.n;
    let l = net.interferers()?;
    let variances = net.alphas.variances(l + 1);
    let eb = eta_bounds(&net.alphas);
    let mut rng = stream_rng(net.seed, tag::SIMULATE);

    let mut csv = String::from(
        "block,time,y_re,y_im,y_tilde_re,y_tilde_im,y_bar_re,y_bar_im,conditional_variance,eta2\n",
    );
    let (mut sum_y2, mut sum_var, mut sum_eta) = (0.0, 0.0, 0.0);
    let (mut eta_lo, mut eta_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut powers = vec![0.0; l + 1];
    for block in 0..cfg.simulate_blocks {
        for (k, s) in multivariate_sample(&net, &dist, n, &mut rng)?.into_iter().enumerate() {
            for (p, x) in powers.iter_mut().zip(&s.inputs) {
                *p = x.norm_sqr();
            }
            let eta2 = eta_squared_with(&powers, &variances, net.sigma2);
            sum_y2 += s.y.norm_sqr();
            sum_var += s.conditional_variance;
            sum_eta += eta2;
            eta_lo = eta_lo.min(eta2);
            eta_hi = eta_hi.max(eta2);
            let _ = writeln!(
                csv,
                "{block},{k},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.12}",
                s.y.re, s.y.im, s.y_tilde.re, s.y_tilde.im, s.y_bar.re, s.y_bar.im, s.conditional_variance, eta2
            );
        }
    }
    let count = (cfg.simulate_blocks * n) as f64;
    let mut report = String::new();
    let _ = writeln!(report, "alpha model      {}", describe_model(net.alphas.model()));
    let _ = writeln!(report, "interferers L    {l}");
    let _ = writeln!(report, "channel uses     {}", cfg.simulate_blocks * n);
    let _ = writeln!(report, "mean |Y|^2       {:.6}", sum_y2 / count);
    let _ = writeln!(report, "mean Var(Y|X)    {:.6}", sum_var / count);
    let _ = writeln!(report, "mean eta^2       {:.6}", sum_eta / count);
    let _ = writeln!(
        report,
        "eta^2 range      [{:.6}, {:.6}] within [{:.6}, {:.6}]",
        eta_lo, eta_hi, eb.eta_min2, eb.eta_max2
    );
    Ok(RunOutput {
        report,
        csv: Some(csv),
        status: ExitStatus::Success,
    })
}

/// Two-sample KS check of `Y-bar` against `sqrt(rho) Y + sqrt(1 - rho) Z2`.
pub fn run_dist_check(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let net = cfg.network_config()?;
    let dist = cfg.input_distribution()?;
    let r = check_bar_identity(&net, &dist, cfg.verify.samples)?;
    let mut report = String::new();
    let mut csv = String::from("statistic,ks_d,p_value\n");
    let _ = writeln!(report, "rho = {}, samples = {}", r.rho, r.samples);
    for (name, ks) in [("modulus", r.modulus), ("real", r.real), ("imag", r.imag)] {
        let _ = writeln!(report, "KS {name:<8} D = {:.6}  p = {:.4}", ks.statistic, ks.p_value);
        let _ = writeln!(csv, "{name},{:.8},{:.8}", ks.statistic, ks.p_value);
    }
    let passed = r.passed();
    let _ = writeln!(report, "{}", if passed { "PASS" } else { "FAIL" });
    Ok(RunOutput {
        report,
        csv: Some(csv),
        status: if passed {
            ExitStatus::Success
        } else {
            ExitStatus::VerificationFailure
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::config::parse_config;

    #[test]
    fn bounds_table_for_half() {
        let cfg = parse_config("network.rho = 0.5\n").unwrap();
        let out = run_bounds(&cfg).unwrap();
        let csv = out.csv.unwrap();
        assert!(csv.contains("proposition,4.491"), "{csv}");
        assert!(csv.contains("geometric,4.491"));
        assert!(csv.contains("eta_max2,2.000000000000,ratio"));
        assert_eq!(out.status, ExitStatus::Success);
    }

    #[test]
    fn polynomial_bounds_omit_exponential_rows() {
        let cfg = parse_config("network.alpha_model = polynomial\nnetwork.beta = 2\n").unwrap();
        let csv = run_bounds(&cfg).unwrap().csv.unwrap();
        assert!(csv.contains("proposition"));
        assert!(!csv.contains("geometric") && !csv.contains("exponential"));
    }

    #[test]
    fn empty_sweep_is_an_error() {
        let cfg = parse_config("network.rho = 0.5\n").unwrap();
        assert!(run_mi_sweep(&cfg).is_err());
    }

    #[test]
    fn small_sweep_rows() {
        let cfg = parse_config(
            "network.rho = 0.5\nnetwork.eps = 1e-3\nsweep.snr_db = 0, 10\nestimator.N = 2000\nestimator.M = 1000\n",
        )
        .unwrap();
        let out = run_mi_sweep(&cfg).unwrap();
        let csv = out.csv.unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], SWEEP_HEADER);
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("0,"));
        assert_eq!(lines[1].split(',').count(), 9);
        assert_eq!(out.status, ExitStatus::Success);
    }

    #[test]
    fn simulate_emits_one_row_per_use() {
        let cfg = parse_config("network.rho = 0.5\nnetwork.L = 4\nestimator.n = 2\nsimulate.blocks = 5\n").unwrap();
        let out = run_simulate(&cfg).unwrap();
        assert_eq!(out.csv.unwrap().lines().count(), 11);
    }

    #[test]
    fn dist_check_needs_pure_exponential() {
        let cfg = parse_config("network.alpha_model = polynomial\nnetwork.beta = 2\nnetwork.L = 5\n").unwrap();
        assert!(matches!(run_dist_check(&cfg), Err(Error::Precondition(_))));
        let cfg = parse_config("network.rho = 0.5\nverify.samples = 5000\n").unwrap();
        assert_eq!(run_dist_check(&cfg).unwrap().status, ExitStatus::Success);
    }

    #[test]
    fn estimates_above_a_bound_are_flagged() {
        use crate::mi::{EstimateFlags, MIEstimate};
        let alphas = crate::network::AlphaSequence::exponential(0.5).unwrap();
        let bounds = applicable_bounds(&alphas);
        let mut est = MIEstimate {
            mi_nats: 0.5,
            ci_low: 0.49,
            ci_high: 0.51,
            n: 1,
            samples_outer: 1000,
            samples_mixture: 1000,
            snr_db: 0.0,
            bound_refs: bounds.clone(),
            flags: EstimateFlags::default(),
            h_y: 1.0,
            h_y_given_x: 0.5,
        };
        assert_eq!(row_flags(&est, &bounds), "");
        est.mi_nats = 0.8;
        est.ci_low = 0.79;
        est.ci_high = 0.81;
        est.flags.negative = true;
        assert_eq!(row_flags(&est, &bounds), "negative;bound_violation");
    }
}
