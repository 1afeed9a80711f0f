//! The conditional variance ratio `eta^2` between the true output and the
//! index-shifted output, its input-independent bounds, and the minimizer
//! `eta*^2` used to bound the ratio entropy.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::input::InputDistribution;
use crate::network::AlphaSequence;
use crate::rng::{stream_rng, tag};

/// `(sum_l alpha_l p_l + sigma2) / (sum_l alpha_{l+1} p_l + sigma2)` for
/// input powers `p_l = |x_l|^2`, `l = 0, 1, ...`.
pub fn eta_squared(powers: &[f64], alphas: &AlphaSequence, sigma2: f64) -> f64 {
    let variances = alphas.variances(powers.len());
    eta_squared_with(powers, &variances, sigma2)
}

/// As [`eta_squared`] with `variances = alpha_0, ..., alpha_{powers.len()}` precomputed.
#[inline]
pub fn eta_squared_with(powers: &[f64], variances: &[f64], sigma2: f64) -> f64 {
    debug_assert!(variances.len() > powers.len());
    let mut num = sigma2;
    let mut den = sigma2;
    for (l, p) in powers.iter().enumerate() {
        num += variances[l] * p;
        den += variances[l + 1] * p;
    }
    num / den
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaBounds {
    pub eta_min2: f64,
    pub eta_max2: f64,
    /// `alpha_0 / alpha_1`.
    pub direct_ratio: f64,
    /// `1 / rho`.
    pub inv_rho: f64,
}

impl EtaBounds {
    pub fn new(direct_ratio: f64, rho: f64) -> Self {
        let inv_rho = 1.0 / rho;
        Self {
            eta_min2: direct_ratio.min(1.0),
            eta_max2: direct_ratio.max(inv_rho),
            direct_ratio,
            inv_rho,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.eta_min2 && x <= self.eta_max2
    }
}

/// `eta_min^2 = min(1, alpha_0/alpha_1)`, `eta_max^2 = max(alpha_0/alpha_1, 1/rho)`.
pub fn eta_bounds(alphas: &AlphaSequence) -> EtaBounds {
    EtaBounds::new(alphas.value(0) / alphas.value(1), alphas.rho())
}

#[inline]
fn objective(x: f64, r2: f64) -> f64 {
    x / ((r2 + x) * (r2 + x))
}

/// Minimizer of `x / (r^2 + x)^2` over `[eta_min^2, eta_max^2]`.
///
/// The map rises for `x < r^2` and falls beyond, so the minimum sits at an
/// endpoint. Ties go to `eta_min^2`.
pub fn eta_star(r: f64, bounds: &EtaBounds) -> f64 {
    let r2 = r * r;
    let lo = objective(bounds.eta_min2, r2);
    let hi = objective(bounds.eta_max2, r2);
    if hi < lo {
        bounds.eta_max2
    } else {
        bounds.eta_min2
    }
}

/// Draws `eta^2({X_l})` with the direct node and `L` interferers all
/// drawing i.i.d. from one input law.
#[derive(Debug, Clone)]
pub struct EtaSampler {
    variances: Vec<f64>,
    sigma2: f64,
    dist: InputDistribution,
}

impl EtaSampler {
    pub fn new(alphas: &AlphaSequence, sigma2: f64, dist: InputDistribution, interferers: usize) -> Self {
        Self {
            variances: alphas.variances(interferers + 1),
            sigma2,
            dist,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let nodes = self.variances.len() - 1;
        let mut num = self.sigma2;
        let mut den = self.sigma2;
        for l in 0..nodes {
            let p = self.dist.sample_power(rng);
            num += self.variances[l] * p;
            den += self.variances[l + 1] * p;
        }
        num / den
    }

    /// `m` draws from stream `(seed, stream)`.
    pub fn draw(&self, m: usize, seed: u64, stream: u64) -> Vec<f64> {
        let mut rng = stream_rng(seed, stream);
        (0..m).map(|_| self.sample(&mut rng)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EtaBoundReport {
    pub trials: usize,
    pub min_seen: f64,
    pub max_seen: f64,
    pub bounds: EtaBounds,
}

const PATTERN_CHUNK: usize = 4096;
const PATTERN_MAX_LEN: usize = 64;
const REL_SLACK: f64 = 1e-12;

/// Draws `trials` random input-power vectors (sparse, dense, heavy-tailed
/// and single-dominant patterns) and checks every `eta^2` against the
/// bounds. Any violation aborts with the offending vector.
pub fn verify_lemma1(alphas: &AlphaSequence, sigma2: f64, trials: usize, seed: u64) -> Result<EtaBoundReport> {
    if trials == 0 {
        return Err(Error::Precondition("verify_lemma1 needs at least one trial".into()));
    }
    let bounds = eta_bounds(alphas);
    let variances = alphas.variances(PATTERN_MAX_LEN + 1);
    check_random_patterns(bounds, &variances, sigma2, trials, seed)
}

fn check_random_patterns(
    bounds: EtaBounds,
    variances: &[f64],
    sigma2: f64,
    trials: usize,
    seed: u64,
) -> Result<EtaBoundReport> {
    let chunks = trials.div_ceil(PATTERN_CHUNK);
    let partial: Vec<Result<(f64, f64)>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(seed, tag::ETA_PATTERNS + c as u64);
            let count = PATTERN_CHUNK.min(trials - c * PATTERN_CHUNK);
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            let mut powers = Vec::with_capacity(PATTERN_MAX_LEN);
            for _ in 0..count {
                random_pattern(&mut rng, &mut powers);
                let e = eta_squared_with(&powers, variances, sigma2);
                if !(e >= bounds.eta_min2 * (1.0 - REL_SLACK) && e <= bounds.eta_max2 * (1.0 + REL_SLACK)) {
                    return Err(Error::EtaBoundViolation {
                        eta2: e,
                        eta_min2: bounds.eta_min2,
                        eta_max2: bounds.eta_max2,
                        inputs: powers.clone(),
                    });
                }
                lo = lo.min(e);
                hi = hi.max(e);
            }
            Ok((lo, hi))
        })
        .collect();
    let mut min_seen = f64::INFINITY;
    let mut max_seen = f64::NEG_INFINITY;
    for p in partial {
        let (lo, hi) = p?;
        min_seen = min_seen.min(lo);
        max_seen = max_seen.max(hi);
    }
    Ok(EtaBoundReport {
        trials,
        min_seen,
        max_seen,
        bounds,
    })
}

fn log_uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // [1e-6, 1e6]
    10f64.powf(rng.gen_range(-6.0..=6.0))
}

fn random_pattern<R: Rng + ?Sized>(rng: &mut R, out: &mut Vec<f64>) {
    let len = rng.gen_range(1..=PATTERN_MAX_LEN);
    out.clear();
    match rng.gen_range(0..5) {
        // sparse: a few active nodes
        0 => {
            out.resize(len, 0.0);
            for _ in 0..rng.gen_range(1..=3) {
                let i = rng.gen_range(0..len);
                out[i] = log_uniform(rng);
            }
        }
        // dense heavy-tailed
        1 => out.extend((0..len).map(|_| log_uniform(rng))),
        // one dominant node over a weak background
        2 => {
            out.extend((0..len).map(|_| rng.gen::<f64>() * 1e-3));
            let i = rng.gen_range(0..len);
            out[i] = 1e6 * (1.0 + rng.gen::<f64>());
        }
        // exponential powers at a random common scale
        3 => {
            let scale = log_uniform(rng);
            out.extend((0..len).map(|_| -scale * (1.0 - rng.gen::<f64>()).ln()));
        }
        // silent prefix, then a loud suffix
        _ => {
            let cut = rng.gen_range(0..len);
            out.extend((0..len).map(|i| if i < cut { 0.0 } else { log_uniform(rng) }));
        }
    }
}
