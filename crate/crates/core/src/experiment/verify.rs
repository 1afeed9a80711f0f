//! Self-checks of the model, the bounds and the ratio machinery against
//! closed forms and simulation. Each check prints one line:
//! `CHECK <name> PASS|FAIL <measured> <tolerance>`, with `seed=<seed>`
//! appended on failure.

use std::f64::consts::{FRAC_PI_2, LN_2, TAU};
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::Rng;

use crate::bounds::{applicable_bounds, bound_k, proposition_bound, BoundKind};
use crate::error::{Error, Result};
use crate::eta::{eta_bounds, eta_squared_with, eta_star, verify_lemma1, EtaBounds, EtaSampler};
use crate::experiment::config::ExperimentConfig;
use crate::experiment::run::{ExitStatus, RunOutput};
use crate::mi::{check_bar_identity, IDENTITY_P_FLOOR};
use crate::network::{sample_inputs, AlphaModel, AlphaSequence};
use crate::quadrature::QuadSpec;
use crate::ratio::{appendix_a_integral, ratio_entropy, ratio_entropy_upper_bound_at, AppendixCase, RatioLaw};
use crate::rng::{stream_rng, tag};
use crate::stats::{ks_one_sample, Moments};

/// Largest sampled ratio law used for quadrature checks.
const MAX_QUAD_LAW: usize = 10_000;
const SCALE_TRIALS: usize = 1000;
const STAR_GRID: usize = 1001;
const ENDPOINT_GRID: usize = 100;
const LOG_INTEGRAL_SIDE: usize = 32;
const BOUND_GRID: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Direction {
    AtMost,
    AtLeast,
}

/// Outcome of one named check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub measured: f64,
    /// Upper limit, or lower limit for p-values.
    pub tolerance: f64,
    pub seed: u64,
}

impl Check {
    fn new(name: &'static str, measured: f64, tolerance: f64, dir: Direction, seed: u64) -> Self {
        let passed = match dir {
            Direction::AtMost => measured <= tolerance,
            Direction::AtLeast => measured >= tolerance,
        };
        Self {
            name,
            passed,
            measured,
            tolerance,
            seed,
        }
    }

    pub fn line(&self) -> String {
        let mut s = format!(
            "CHECK {} {} {:.6e} {:.6e}",
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.measured,
            self.tolerance
        );
        if !self.passed {
            let _ = write!(s, " seed={}", self.seed);
        }
        s
    }
}

struct Suite {
    seed: u64,
    checks: Vec<Check>,
}

impl Suite {
    fn at_most(&mut self, name: &'static str, measured: f64, tolerance: f64) {
        self.checks.push(Check::new(name, measured, tolerance, Direction::AtMost, self.seed));
    }

    fn at_least(&mut self, name: &'static str, measured: f64, floor: f64) {
        self.checks.push(Check::new(name, measured, floor, Direction::AtLeast, self.seed));
    }

    fn rng(&self, k: u64) -> crate::rng::StreamRng {
        stream_rng(self.seed, tag::VERIFY + k)
    }
}

fn relative_excursion(x: f64, b: &EtaBounds) -> f64 {
    ((b.eta_min2 - x) / b.eta_min2).max((x - b.eta_max2) / b.eta_max2).max(0.0)
}

fn log_space(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(move |i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
}

fn lin_space(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
}

/// Largest `alpha_{l+1} / alpha_l` in the configured model.
fn largest_successive_ratio(model: &AlphaModel) -> f64 {
    match model {
        AlphaModel::Explicit { values } => values
            .windows(2)
            .map(|w| w[1] / w[0])
            .fold(f64::NAN, f64::max),
        AlphaModel::Exponential { rho } => *rho,
        AlphaModel::Polynomial { beta } => 2f64.powf(-beta),
    }
}

fn objective(x: f64, r2: f64) -> f64 {
    x / ((r2 + x) * (r2 + x))
}

/// Runs every applicable check. A broken alpha sequence is reported as a
/// failed `alpha_sequence` check and ends the suite.
pub fn verification_checks(cfg: &ExperimentConfig) -> Result<Vec<Check>> {
    let mut s = Suite {
        seed: cfg.network.seed,
        checks: Vec::new(),
    };
    let ratio = largest_successive_ratio(&cfg.network.model);
    let alphas = match cfg.alphas() {
        Ok(a) => {
            s.at_most("alpha_sequence", ratio.max(0.0), 1.0);
            a
        }
        Err(Error::InvalidAlpha(_)) => {
            s.checks.push(Check {
                name: "alpha_sequence",
                passed: false,
                measured: ratio,
                tolerance: 1.0,
                seed: s.seed,
            });
            return Ok(s.checks);
        }
        Err(e) => return Err(e),
    };
    let net = cfg.network_config()?;
    let dist = cfg.input_distribution()?;
    let sigma2 = net.sigma2;
    let eb = eta_bounds(&alphas);
    let l = net.interferers()?;

    successive_ratios(&mut s, &alphas);

    let random_excursion = match verify_lemma1(&alphas, sigma2, cfg.verify.trials, s.seed) {
        Ok(r) => relative_excursion(r.min_seen, &eb).max(relative_excursion(r.max_seen, &eb)),
        Err(Error::EtaBoundViolation { eta2, .. }) => relative_excursion(eta2, &eb),
        Err(e) => return Err(e),
    };
    s.at_most("eta_bounds_random_inputs", random_excursion, 1e-12);

    let sampler = EtaSampler::new(&alphas, sigma2, dist.clone(), l);
    let draws = sampler.draw(cfg.verify.samples, s.seed, tag::VERIFY + 1);
    let excursion = draws.iter().map(|&e| relative_excursion(e, &eb)).fold(0.0, f64::max);
    s.at_most("eta_bounds_input_law", excursion, 1e-12);

    scale_invariance(&mut s, &alphas, sigma2);
    eta_star_checks(&mut s, &eb, &draws);
    ratio_law_checks(&mut s, &eb, &draws)?;
    log_integral_checks(&mut s, &eb)?;
    paired_ratio_checks(&mut s, cfg, &net, &dist, l)?;

    if alphas.is_pure_exponential() {
        let r = check_bar_identity(&net, &dist, cfg.verify.samples)?;
        s.at_least("bar_identity", r.min_p(), IDENTITY_P_FLOOR);
    }

    bound_relations(&mut s, &alphas, &eb)?;
    Ok(s.checks)
}

fn successive_ratios(s: &mut Suite, alphas: &AlphaSequence) {
    let rho = alphas.rho();
    let len = match alphas.model() {
        AlphaModel::Explicit { values } => values.len() + 50,
        _ => 200,
    };
    let worst = (1..=len)
        .map(|l| {
            let q = alphas.value(l) / alphas.value(l + 1);
            (1.0 - q).max(q * rho - 1.0).max(0.0)
        })
        .fold(0.0, f64::max);
    s.at_most("successive_ratios", worst, 1e-12);
}

fn scale_invariance(s: &mut Suite, alphas: &AlphaSequence, sigma2: f64) {
    let mut rng = s.rng(2);
    let variances = alphas.variances(65);
    let mut worst = 0.0f64;
    for _ in 0..SCALE_TRIALS {
        let len = rng.gen_range(1..=64);
        let p: Vec<f64> = (0..len).map(|_| 10f64.powf(rng.gen_range(-4.0..4.0))).collect();
        let e = eta_squared_with(&p, &variances, sigma2);
        for c in [1e-6, 1e6] {
            let scaled: Vec<f64> = p.iter().map(|x| x * c).collect();
            let ec = eta_squared_with(&scaled, &variances, sigma2 * c);
            worst = worst.max((ec - e).abs() / e);
        }
    }
    s.at_most("eta_scale_invariance", worst, 1e-12);
}

fn eta_star_checks(s: &mut Suite, eb: &EtaBounds, draws: &[f64]) {
    let misplaced = log_space(1e-4, 1e4, STAR_GRID)
        .filter(|&r| {
            let star = eta_star(r, eb);
            let r2 = r * r;
            let best = objective(eb.eta_min2, r2).min(objective(eb.eta_max2, r2));
            !eb.contains(star) || objective(star, r2) > best
        })
        .count();
    s.at_most("eta_star_in_bounds", misplaced as f64, 0.0);

    let scale = (eb.eta_min2 * eb.eta_max2).sqrt().sqrt();
    let worst_z = log_space(scale / 10.0, scale * 10.0, ENDPOINT_GRID)
        .map(|r| {
            let r2 = r * r;
            let floor = objective(eta_star(r, eb), r2);
            let m: Moments = draws.iter().map(|&e| objective(e, r2)).collect();
            if floor <= m.mean() {
                0.0
            } else {
                (floor - m.mean()) / m.std_error()
            }
        })
        .fold(0.0, f64::max);
    s.at_most("endpoint_expectation", worst_z, 4.0);
}

fn ratio_law_checks(s: &mut Suite, eb: &EtaBounds, draws: &[f64]) -> Result<()> {
    let tight = QuadSpec::with_abs_tol(1e-10);
    let constants: Vec<RatioLaw> = [eb.eta_min2, 1.0, (eb.eta_min2 * eb.eta_max2).sqrt(), eb.eta_max2]
        .into_iter()
        .map(RatioLaw::constant)
        .collect();
    let sampled = RatioLaw::from_samples(draws[..draws.len().min(MAX_QUAD_LAW)].to_vec());

    let mut worst = 0.0f64;
    for law in &constants {
        worst = worst.max((law.total_mass(tight)? - 1.0).abs());
    }
    s.at_most("ratio_normalization_constant", worst, 1e-8);
    s.at_most(
        "ratio_normalization_sampled",
        (sampled.total_mass(tight)? - 1.0).abs(),
        1e-4,
    );

    let unit = ratio_entropy(&RatioLaw::constant(1.0), QuadSpec::default())?;
    s.at_most("ratio_entropy_unit", (unit - (2.0 - LN_2)).abs(), 1e-4);

    let mut worst = 0.0f64;
    for law in constants.iter().chain(std::iter::once(&sampled)) {
        worst = worst.max((law.first_integral(tight)? - law.first_integral_closed()).abs());
    }
    s.at_most("first_integral", worst, 1e-8);

    let bound = ratio_entropy_upper_bound_at(eb, eb.eta_min2);
    let mut worst = f64::NEG_INFINITY;
    for law in [&constants[0], &constants[3], &sampled] {
        worst = worst.max(ratio_entropy(law, QuadSpec::default())? - bound);
    }
    s.at_most("ratio_entropy_below_bound", worst, 0.0);
    Ok(())
}

fn log_integral_checks(s: &mut Suite, eb: &EtaBounds) -> Result<()> {
    let spec = QuadSpec::with_abs_tol(1e-12);
    let mut closed_err = 0.0f64;
    let mut over_bound = f64::NEG_INFINITY;
    for e in lin_space(eb.eta_min2, eb.eta_max2, LOG_INTEGRAL_SIDE) {
        for star in lin_space(eb.eta_min2, eb.eta_max2, LOG_INTEGRAL_SIDE) {
            let r = appendix_a_integral(&AppendixCase::new(e, star)?, spec)?;
            closed_err = closed_err.max((r.closed_form - r.numeric).abs());
            over_bound = over_bound.max(r.closed_form - r.bound);
        }
    }
    s.at_most("log_integral_closed_form", closed_err, 1e-8);
    s.at_most("log_integral_bound", over_bound, 1e-12);
    Ok(())
}

/// `R = |Y / Y-tilde|` for one fixed draw of all node inputs.
fn paired_ratio_checks(
    s: &mut Suite,
    cfg: &ExperimentConfig,
    net: &crate::network::NetworkConfig,
    dist: &crate::input::InputDistribution,
    l: usize,
) -> Result<()> {
    let channel = net.channel()?;
    let mut rng = s.rng(3);
    let inputs = sample_inputs(dist, l, &mut rng);
    let powers: Vec<f64> = inputs.iter().map(|x| x.norm_sqr()).collect();
    let eta2 = eta_squared_with(&powers, channel.variances(), net.sigma2);
    let w: Vec<Complex64> = (0..cfg.verify.samples)
        .map(|_| channel.sample(&inputs, &mut rng).map(|c| c.y / c.y_tilde))
        .collect::<Result<_>>()?;

    let m: Moments = w.iter().map(|z| z.norm()).collect();
    let z = (m.mean() - FRAC_PI_2 * eta2.sqrt()).abs() / m.std_error();
    s.at_most("ratio_mean", z, 3.0);

    let ks = ks_one_sample(w.iter().map(|z| z.arg().rem_euclid(TAU)).collect(), |t| {
        (t / TAU).clamp(0.0, 1.0)
    });
    s.at_least("ratio_phase_uniform", ks.p_value, 0.01);

    let law = RatioLaw::constant(eta2);
    let quad = law.mean_log(QuadSpec::with_abs_tol(1e-10))?;
    let m: Moments = w.iter().map(|z| z.norm().ln()).collect();
    s.at_most("mean_log_ratio", (m.mean() - quad).abs() / m.std_error(), 3.0);
    Ok(())
}

fn bound_relations(s: &mut Suite, alphas: &AlphaSequence, eb: &EtaBounds) -> Result<()> {
    let prop = proposition_bound(eb).value;
    let mut worst = f64::NEG_INFINITY;
    for star in lin_space(eb.eta_min2, eb.eta_max2, BOUND_GRID) {
        worst = worst.max(bound_k(eb, star)?.value - prop);
    }
    s.at_most("proposition_dominates_k", worst, 1e-12);

    let all = applicable_bounds(alphas);
    let get = |k: BoundKind| all.iter().find(|b| b.kind == k).map(|b| b.value);
    if let (Some(g), Some(proof)) = (get(BoundKind::Geometric), get(BoundKind::ExponentialProof)) {
        s.at_most("geometric_matches_proposition", (g - prop).abs(), 1e-12 * prop.max(1.0));
        s.at_most("exponential_below_geometric", proof - g, 0.0);
    }
    Ok(())
}

/// Runs the checks and formats them; any failure gives
/// [`ExitStatus::VerificationFailure`].
pub fn run_verify(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let checks = verification_checks(cfg)?;
    let mut report = String::new();
    let mut csv = String::from("check,status,measured,tolerance,seed\n");
    for c in &checks {
        let _ = writeln!(report, "{}", c.line());
        let _ = writeln!(
            csv,
            "{},{},{:e},{:e},{}",
            c.name,
            if c.passed { "PASS" } else { "FAIL" },
            c.measured,
            c.tolerance,
            c.seed
        );
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    let _ = writeln!(report, "{} checks, {} failed", checks.len(), failed);
    Ok(RunOutput {
        report,
        csv: Some(csv),
        status: if failed == 0 {
            ExitStatus::Success
        } else {
            ExitStatus::VerificationFailure
        },
    })
}
