//! Monte Carlo mutual information for the fading interference channel.
//!
//! Given every node's input, the outputs are independent `CN(0, s_k)` with
//! `s_k = sum_l alpha_l |x_{l,k}|^2 + sigma2`. Both `h(Y^n)` and
//! `h(Y^n | X^n)` are therefore entropies of Gaussian scale mixtures, whose
//! densities are evaluated against a frozen set of `M` variance-vector draws.

use std::collections::HashMap;
use std::f64::consts::{E, PI};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;

use crate::bounds::{applicable_bounds, CapacityBound};
use crate::error::{Error, Result};
use crate::input::InputDistribution;
use crate::network::{AlphaSequence, NetworkConfig};
use crate::rng::{stream_rng, tag, StreamRng};
use crate::stats::{ks_two_sample, KsResult, Moments, Z95};

pub const DEFAULT_OUTER: usize = 100_000;
pub const DEFAULT_MIXTURE: usize = 10_000;
pub const DEFAULT_MAX_DOUBLINGS: usize = 3;
/// Widest acceptable 95% CI, in nats.
pub const DEFAULT_CI_CAP: f64 = 0.05;
/// Smallest admissible `N` and `M`.
pub const MIN_SAMPLES: usize = 1000;
/// Significance floor for the `Y-bar` identity check.
pub const IDENTITY_P_FLOOR: f64 = 1e-3;
/// Outer samples per RNG stream. Fixed so results do not depend on the
/// number of worker threads.
const CHUNK: usize = 2048;

/// `s_k = sum_l alpha_l |x_{l,k}|^2 + sigma2` for each time index.
///
/// `interferers[l - 1]` is node `l`'s block. Panics if block lengths differ.
pub fn conditional_variance_vector(
    direct: &[Complex64],
    interferers: &[Vec<Complex64>],
    alphas: &AlphaSequence,
    sigma2: f64,
) -> Vec<f64> {
    let n = direct.len();
    assert!(
        interferers.iter().all(|b| b.len() == n),
        "all input blocks must have length {n}"
    );
    (0..n)
        .map(|k| {
            let i: f64 = interferers
                .iter()
                .enumerate()
                .map(|(l, b)| alphas.value(l + 1) * b[k].norm_sqr())
                .sum();
            alphas.alpha0() * direct[k].norm_sqr() + i + sigma2
        })
        .collect()
}

/// Source of output-variance vectors for a mixture entropy.
pub trait VarianceSampler: Sync {
    fn blocklength(&self) -> usize;
    /// Fills `out` (length `blocklength()`) with one draw.
    fn sample(&self, rng: &mut StreamRng, out: &mut [f64]);
}

/// Finite list of variance vectors with probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteVariances {
    n: usize,
    rows: Vec<Vec<f64>>,
    cdf: Vec<f64>,
}

impl DiscreteVariances {
    pub fn new(rows: Vec<Vec<f64>>, probs: Vec<f64>) -> Result<Self> {
        let n = rows.first().map_or(0, Vec::len);
        if n == 0 || rows.len() != probs.len() || rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput(
                "variance rows must be non-empty, equally long, and match the probabilities".into(),
            ));
        }
        if rows.iter().flatten().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(Error::InvalidInput("variances must be finite and positive".into()));
        }
        let total: f64 = probs.iter().sum();
        if probs.iter().any(|p| !(*p >= 0.0)) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput("probabilities must be nonnegative and sum to 1".into()));
        }
        let mut acc = 0.0;
        let cdf = probs
            .iter()
            .map(|p| {
                acc += p / total;
                acc
            })
            .collect();
        Ok(Self { n, rows, cdf })
    }

    /// A single variance vector with probability one.
    pub fn constant(row: Vec<f64>) -> Result<Self> {
        Self::new(vec![row], vec![1.0])
    }
}

impl VarianceSampler for DiscreteVariances {
    fn blocklength(&self) -> usize {
        self.n
    }

    fn sample(&self, rng: &mut StreamRng, out: &mut [f64]) {
        let u: f64 = rng.gen();
        let i = self.cdf.partition_point(|&c| c <= u).min(self.rows.len() - 1);
        out.copy_from_slice(&self.rows[i]);
    }
}

/// Variance vectors of the truncated network when every node draws its
/// block i.i.d. from one input law.
#[derive(Debug, Clone)]
pub struct NetworkSampler {
    n: usize,
    /// `alpha_0, ..., alpha_L`.
    alphas: Vec<f64>,
    sigma2: f64,
    dist: InputDistribution,
}

impl NetworkSampler {
    pub fn new(config: &NetworkConfig, dist: &InputDistribution, n: usize) -> Result<Self> {
        check_blocklength(n, config.max_blocklength)?;
        let l = config.interferers()?;
        Ok(Self {
            n,
            alphas: config.alphas.variances(l),
            sigma2: config.sigma2,
            dist: dist.clone(),
        })
    }

    /// Direct-link part `alpha_0 |x_{0,k}|^2` and the rest (interference plus noise).
    fn draw_split(&self, rng: &mut StreamRng, direct: &mut [f64], rest: &mut [f64], block: &mut [f64]) {
        self.dist.sample_power_block(rng, block);
        for (d, p) in direct.iter_mut().zip(block.iter()) {
            *d = self.alphas[0] * p;
        }
        rest.fill(self.sigma2);
        for &a in &self.alphas[1..] {
            self.dist.sample_power_block(rng, block);
            for (r, p) in rest.iter_mut().zip(block.iter()) {
                *r += a * p;
            }
        }
    }
}

impl VarianceSampler for NetworkSampler {
    fn blocklength(&self) -> usize {
        self.n
    }

    fn sample(&self, rng: &mut StreamRng, out: &mut [f64]) {
        let mut direct = vec![0.0; self.n];
        let mut block = vec![0.0; self.n];
        self.draw_split(rng, &mut direct, out, &mut block);
        for (o, d) in out.iter_mut().zip(direct) {
            *o += d;
        }
    }
}

fn check_blocklength(n: usize, max: usize) -> Result<()> {
    if n == 0 || n > max {
        Err(Error::Blocklength { n, max })
    } else {
        Ok(())
    }
}

fn check_samples(outer: usize, mixture: usize) -> Result<()> {
    if outer < MIN_SAMPLES || mixture < MIN_SAMPLES {
        Err(Error::Precondition(format!(
            "N = {outer} and M = {mixture} must both be at least {MIN_SAMPLES}"
        )))
    } else {
        Ok(())
    }
}

/// Draws split into a clamped part and a mixed part.
trait SplitSampler: Sync {
    fn n(&self) -> usize;
    fn draw(&self, rng: &mut StreamRng, direct: &mut [f64], rest: &mut [f64], scratch: &mut [f64]);
}

struct Whole<'a, S: ?Sized>(&'a S);

impl<S: VarianceSampler + ?Sized> SplitSampler for Whole<'_, S> {
    fn n(&self) -> usize {
        self.0.blocklength()
    }

    fn draw(&self, rng: &mut StreamRng, direct: &mut [f64], rest: &mut [f64], _: &mut [f64]) {
        direct.fill(0.0);
        self.0.sample(rng, rest);
    }
}

impl SplitSampler for NetworkSampler {
    fn n(&self) -> usize {
        self.n
    }

    fn draw(&self, rng: &mut StreamRng, direct: &mut [f64], rest: &mut [f64], scratch: &mut [f64]) {
        self.draw_split(rng, direct, rest, scratch);
    }
}

/// Deduplicated mixture components with multiplicities.
struct Components {
    n: usize,
    count: Vec<f64>,
    /// Row-major variances.
    s: Vec<f64>,
    /// Row-major reciprocals.
    inv: Vec<f64>,
    /// `count_j * prod_k 1/s_jk`.
    weight: Vec<f64>,
    /// `ln count_j - sum_k ln s_jk`.
    log_weight: Vec<f64>,
    draws: usize,
}

impl Components {
    fn new(rows: &[f64], n: usize) -> Self {
        let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut count: Vec<f64> = Vec::new();
        let mut s: Vec<f64> = Vec::new();
        for row in rows.chunks_exact(n) {
            let key: Vec<u64> = row.iter().map(|x| x.to_bits()).collect();
            match index.get(&key) {
                Some(&j) => count[j] += 1.0,
                None => {
                    index.insert(key, count.len());
                    count.push(1.0);
                    s.extend_from_slice(row);
                }
            }
        }
        let inv: Vec<f64> = s.iter().map(|x| 1.0 / x).collect();
        let weight = count
            .iter()
            .zip(inv.chunks_exact(n))
            .map(|(c, iv)| c * iv.iter().product::<f64>())
            .collect();
        let log_weight = count
            .iter()
            .zip(s.chunks_exact(n))
            .map(|(c, sv)| c.ln() - sv.iter().map(|x| x.ln()).sum::<f64>())
            .collect();
        Self {
            n,
            count,
            s,
            inv,
            weight,
            log_weight,
            draws: rows.len() / n,
        }
    }

    fn single(&self) -> Option<&[f64]> {
        (self.count.len() == 1).then_some(&self.s[..])
    }

    /// `sum_j count_j prod_k s_jk^{-1} exp(c - sum_k u_k / s_jk)`.
    fn marginal_sum(&self, u: &[f64], c: f64) -> f64 {
        if self.n == 1 {
            let u = u[0];
            return self
                .weight
                .iter()
                .zip(&self.inv)
                .map(|(w, iv)| w * (c - u * iv).exp())
                .sum();
        }
        self.weight
            .iter()
            .zip(self.inv.chunks_exact(self.n))
            .map(|(w, iv)| w * (c - u.iter().zip(iv).map(|(a, b)| a * b).sum::<f64>()).exp())
            .sum()
    }

    /// As [`Self::marginal_sum`] with each component shifted by `direct`.
    fn conditional_sum(&self, direct: &[f64], u: &[f64], c: f64) -> f64 {
        if self.n == 1 {
            let (d, u) = (direct[0], u[0]);
            return self
                .count
                .iter()
                .zip(&self.s)
                .map(|(w, s)| {
                    let iv = 1.0 / (d + s);
                    w * iv * (c - u * iv).exp()
                })
                .sum();
        }
        self.count
            .iter()
            .zip(self.s.chunks_exact(self.n))
            .map(|(w, sv)| {
                let mut e = c;
                let mut w = *w;
                for k in 0..self.n {
                    let iv = 1.0 / (direct[k] + sv[k]);
                    e -= u[k] * iv;
                    w *= iv;
                }
                w * e.exp()
            })
            .sum()
    }

    /// Log-domain fallback: `ln sum_j count_j prod_k s_jk^{-1} exp(-u_k / s_jk)`.
    fn log_sum(&self, direct: &[f64], u: &[f64]) -> f64 {
        let terms: Vec<f64> = (0..self.count.len())
            .map(|j| {
                let sv = &self.s[j * self.n..(j + 1) * self.n];
                if direct.iter().all(|d| *d == 0.0) {
                    self.log_weight[j] - u.iter().zip(&self.inv[j * self.n..]).map(|(a, b)| a * b).sum::<f64>()
                } else {
                    let mut t = self.count[j].ln();
                    for k in 0..self.n {
                        let s = direct[k] + sv[k];
                        t -= s.ln() + u[k] / s;
                    }
                    t
                }
            })
            .collect();
        log_sum_exp(&terms)
    }
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        hi
    } else {
        hi + (lo - hi).exp().ln_1p()
    }
}

/// The two halves of one frozen mixture set.
struct Halves {
    a: Components,
    b: Components,
}

impl Halves {
    fn new(rows: &[f64], n: usize) -> Self {
        let split = rows.len() / n / 2 * n;
        Self {
            a: Components::new(&rows[..split], n),
            b: Components::new(&rows[split..], n),
        }
    }

    fn single(&self) -> Option<&[f64]> {
        match (self.a.single(), self.b.single()) {
            (Some(x), Some(y)) if x == y => Some(x),
            _ => None,
        }
    }
}

/// Per-sample `-ln g` over all `M` components and over the first half.
#[derive(Debug, Clone, Copy, Default)]
struct Accum {
    full: Moments,
    half: Moments,
    /// Analytic values, used when the mixture is degenerate.
    exact: Moments,
    mismatches: u64,
}

impl Accum {
    fn merge(&mut self, o: &Accum) {
        self.full.merge(&o.full);
        self.half.merge(&o.half);
        self.exact.merge(&o.exact);
        self.mismatches += o.mismatches;
    }

    /// Analytic values win when every outer draw matched the single component.
    fn resolve(&self, degenerate: bool) -> (Moments, Moments, bool) {
        if degenerate && self.mismatches == 0 {
            (self.exact, self.exact, true)
        } else {
            (self.full, self.half, false)
        }
    }
}

struct PassResult {
    marginal: (Moments, Moments, bool),
    conditional: Option<(Moments, Moments, bool)>,
}

#[derive(Clone, Copy)]
struct PassSpec {
    outer: usize,
    mixture: usize,
    seed: u64,
    /// Include each outer draw's own variance vector as an extra component.
    own: bool,
    conditional: bool,
}

/// `-ln g(y)` from the scaled sum `total`, with log-domain fallback.
#[allow(clippy::too_many_arguments)]
fn neg_log_density(
    count: f64,
    n: usize,
    c: f64,
    total: f64,
    own_log: Option<f64>,
    comps: &[&Components],
    direct: &[f64],
    u: &[f64],
) -> f64 {
    let base = count.ln() + n as f64 * PI.ln();
    if total.is_normal() {
        return base + c - total.ln();
    }
    let mut l = own_log.unwrap_or(f64::NEG_INFINITY);
    for comp in comps {
        l = log_add_exp(l, comp.log_sum(direct, u));
    }
    base - l
}

fn run_pass<S: SplitSampler + ?Sized>(sampler: &S, spec: PassSpec) -> PassResult {
    let n = sampler.n();
    let m = spec.mixture;
    let mut direct = vec![0.0; m * n];
    let mut rest = vec![0.0; m * n];
    let mut scratch = vec![0.0; n];
    let mut rng = stream_rng(spec.seed, tag::MIXTURE_SET);
    for j in 0..m {
        let r = j * n..(j + 1) * n;
        sampler.draw(&mut rng, &mut direct[r.clone()], &mut rest[r], &mut scratch);
    }
    let total: Vec<f64> = direct.iter().zip(&rest).map(|(d, r)| d + r).collect();
    let marg = Halves::new(&total, n);
    let cond = spec.conditional.then(|| Halves::new(&rest, n));
    let marg_single = marg.single().map(<[f64]>::to_vec);
    let cond_single = cond.as_ref().and_then(|c| c.single().map(<[f64]>::to_vec));
    let own_extra = if spec.own { 1.0 } else { 0.0 };
    let count_full = m as f64 + own_extra;
    let count_half = marg.a.draws as f64 + own_extra;

    let chunks = spec.outer.div_ceil(CHUNK);
    let parts: Vec<(Accum, Accum)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(spec.seed, tag::OUTER + c as u64);
            let len = CHUNK.min(spec.outer - c * CHUNK);
            let mut d = vec![0.0; n];
            let mut r = vec![0.0; n];
            let mut s = vec![0.0; n];
            let mut u = vec![0.0; n];
            let mut scratch = vec![0.0; n];
            let zero = vec![0.0; n];
            let (mut am, mut ac) = (Accum::default(), Accum::default());
            for _ in 0..len {
                sampler.draw(&mut rng, &mut d, &mut r, &mut scratch);
                let mut cc = 0.0;
                let mut own = 1.0;
                let mut own_log = 0.0;
                let mut exact = 0.0;
                for k in 0..n {
                    s[k] = d[k] + r[k];
                    let e: f64 = Exp1.sample(&mut rng);
                    u[k] = s[k] * e;
                    cc += e;
                    own /= s[k];
                    own_log -= s[k].ln();
                    exact += (PI * E * s[k]).ln();
                }
                let own_term = if spec.own { own } else { 0.0 };
                let own_log = spec.own.then_some(own_log - cc);

                if let Some(single) = &marg_single {
                    am.exact.push(exact);
                    if single[..] != s[..] {
                        am.mismatches += 1;
                    }
                }
                let sa = marg.a.marginal_sum(&u, cc);
                let sb = marg.b.marginal_sum(&u, cc);
                am.full.push(neg_log_density(
                    count_full,
                    n,
                    cc,
                    sa + sb + own_term,
                    own_log,
                    &[&marg.a, &marg.b],
                    &zero,
                    &u,
                ));
                am.half.push(neg_log_density(
                    count_half,
                    n,
                    cc,
                    sa + own_term,
                    own_log,
                    &[&marg.a],
                    &zero,
                    &u,
                ));

                if let Some(cond) = &cond {
                    if let Some(single) = &cond_single {
                        ac.exact.push(exact);
                        if single[..] != r[..] {
                            ac.mismatches += 1;
                        }
                    }
                    let sa = cond.a.conditional_sum(&d, &u, cc);
                    let sb = cond.b.conditional_sum(&d, &u, cc);
                    ac.full.push(neg_log_density(
                        count_full,
                        n,
                        cc,
                        sa + sb + own_term,
                        own_log,
                        &[&cond.a, &cond.b],
                        &d,
                        &u,
                    ));
                    ac.half.push(neg_log_density(
                        count_half,
                        n,
                        cc,
                        sa + own_term,
                        own_log,
                        &[&cond.a],
                        &d,
                        &u,
                    ));
                }
            }
            (am, ac)
        })
        .collect();

    let (mut am, mut ac) = (Accum::default(), Accum::default());
    for (pm, pc) in &parts {
        am.merge(pm);
        ac.merge(pc);
    }
    PassResult {
        marginal: am.resolve(marg_single.is_some()),
        conditional: spec.conditional.then(|| ac.resolve(cond_single.is_some())),
    }
}

/// Differential entropy estimate in nats with a 95% normal CI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyEstimate {
    pub entropy: f64,
    pub half_width: f64,
    /// `M` actually used after doubling.
    pub mixture: usize,
    pub outer: usize,
    /// Moving from `M/2` to `M` components shifted the estimate by less than the half-width.
    pub converged: bool,
    /// Degenerate mixture; the value is analytic.
    pub exact: bool,
}

impl EntropyEstimate {
    pub fn ci(&self) -> (f64, f64) {
        (self.entropy - self.half_width, self.entropy + self.half_width)
    }
}

/// `h(Y^n)` for `Y_k ~ CN(0, s_k)` with `s` drawn from `sampler`.
///
/// Draws `N` outer samples, each from a fresh variance vector, and averages
/// `-ln g(Y)` with `g(y) = (1/M) sum_j prod_k CN(y_k; 0, s_k^{(j)})`. The
/// estimate is biased upward by `O(1/M)` where the mixture is sparse; `M`
/// is doubled (up to `max_doublings` times) until the estimate from the
/// first `M/2` components is within the CI half-width of the full one.
/// If every draw is the same vector the exact `sum_k ln(pi e s_k)` is returned.
pub fn estimate_entropy_mixture<S: VarianceSampler + ?Sized>(
    sampler: &S,
    outer: usize,
    mixture: usize,
    max_doublings: usize,
    seed: u64,
) -> Result<EntropyEstimate> {
    check_samples(outer, mixture)?;
    if sampler.blocklength() == 0 {
        return Err(Error::Blocklength { n: 0, max: 0 });
    }
    let whole = Whole(sampler);
    let mut m = mixture;
    for step in 0..=max_doublings {
        let pass = run_pass(
            &whole,
            PassSpec {
                outer,
                mixture: m,
                seed,
                own: false,
                conditional: false,
            },
        );
        let (full, half, exact) = pass.marginal;
        let hw = Z95 * full.std_error();
        let converged = (full.mean() - half.mean()).abs() <= hw;
        if converged || step == max_doublings {
            return Ok(EntropyEstimate {
                entropy: full.mean(),
                half_width: hw,
                mixture: m,
                outer,
                converged,
                exact,
            });
        }
        m *= 2;
    }
    unreachable!("loop returns on the last step")
}

/// Tuning for [`estimate_mi`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorSettings {
    /// Blocklength `n`.
    pub n: usize,
    /// Outer sample count `N`.
    pub outer: usize,
    /// Initial mixture size `M`.
    pub mixture: usize,
    pub max_doublings: usize,
    /// CI width above which an estimate is flagged.
    pub ci_cap: f64,
}

impl Default for EstimatorSettings {
    fn default() -> Self {
        Self {
            n: 1,
            outer: DEFAULT_OUTER,
            mixture: DEFAULT_MIXTURE,
            max_doublings: DEFAULT_MAX_DOUBLINGS,
            ci_cap: DEFAULT_CI_CAP,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EstimateFlags {
    pub low_confidence: bool,
    pub negative: bool,
    pub m_unconverged: bool,
}

impl EstimateFlags {
    pub fn any(&self) -> bool {
        self.low_confidence || self.negative || self.m_unconverged
    }

    /// `;`-separated names, empty if none are set.
    pub fn label(&self) -> String {
        let mut v = Vec::new();
        if self.low_confidence {
            v.push("low_confidence");
        }
        if self.negative {
            v.push("negative");
        }
        if self.m_unconverged {
            v.push("m_unconverged");
        }
        v.join(";")
    }
}

/// `(1/n) I(X^n; Y^n)` with its 95% CI.
#[derive(Debug, Clone, PartialEq)]
pub struct MIEstimate {
    pub mi_nats: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n: usize,
    pub samples_outer: usize,
    pub samples_mixture: usize,
    pub snr_db: f64,
    pub bound_refs: Vec<CapacityBound>,
    pub flags: EstimateFlags,
    /// `(1/n) h(Y^n)`.
    pub h_y: f64,
    /// `(1/n) h(Y^n | X^n)`.
    pub h_y_given_x: f64,
}

impl MIEstimate {
    pub fn half_width(&self) -> f64 {
        0.5 * (self.ci_high - self.ci_low)
    }

    /// Standard error implied by the CI.
    pub fn sigma(&self) -> f64 {
        self.half_width() / Z95
    }

    /// `mi - 3 sigma <= bound`.
    pub fn dominated_by(&self, bound: f64) -> bool {
        self.mi_nats - 3.0 * self.sigma() <= bound
    }
}

pub fn snr_from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn snr_to_db(snr: f64) -> f64 {
    10.0 * snr.log10()
}

/// Estimates `(1/n)[h(Y^n) - h(Y^n | X^n)]` where `X` is the direct node.
///
/// Every node draws its block from `dist`. `h(Y|X)` reuses the outer draws
/// and the frozen mixture set: the direct contribution is clamped to the
/// outer draw's value and only interference is mixed. Each outer draw's own
/// variance vector enters both mixtures as an extra component, which keeps
/// `-ln g` bounded when a rare input pattern is missing from the frozen set.
/// The two entropy CIs are combined in quadrature. Seeds come from `config.seed`.
pub fn estimate_mi(
    config: &NetworkConfig,
    dist: &InputDistribution,
    settings: &EstimatorSettings,
) -> Result<MIEstimate> {
    check_samples(settings.outer, settings.mixture)?;
    let sampler = NetworkSampler::new(config, dist, settings.n)?;
    let n = settings.n as f64;
    let mut m = settings.mixture;
    for step in 0..=settings.max_doublings {
        let pass = run_pass(
            &sampler,
            PassSpec {
                outer: settings.outer,
                mixture: m,
                seed: config.seed,
                own: true,
                conditional: true,
            },
        );
        let (mf, mh, _) = pass.marginal;
        let (cf, ch, _) = pass.conditional.expect("conditional stage requested");
        let mi = (mf.mean() - cf.mean()) / n;
        let mi_half = (mh.mean() - ch.mean()) / n;
        let hw = Z95 * mf.std_error().hypot(cf.std_error()) / n;
        let converged = (mi - mi_half).abs() <= hw;
        if converged || step == settings.max_doublings {
            return Ok(MIEstimate {
                mi_nats: mi,
                ci_low: mi - hw,
                ci_high: mi + hw,
                n: settings.n,
                samples_outer: settings.outer,
                samples_mixture: m,
                snr_db: snr_to_db(dist.mean_power() / config.sigma2),
                bound_refs: applicable_bounds(&config.alphas),
                flags: EstimateFlags {
                    low_confidence: 2.0 * hw > settings.ci_cap,
                    negative: mi < 0.0,
                    m_unconverged: !converged,
                },
                h_y: mf.mean() / n,
                h_y_given_x: cf.mean() / n,
            });
        }
        m *= 2;
    }
    unreachable!("loop returns on the last step")
}

/// MI at each SNR in `snr_db` (ascending), with the input law's SNR rule
/// applied per point and every applicable bound attached.
pub fn saturation_profile(
    config: &NetworkConfig,
    dist: &InputDistribution,
    snr_db: &[f64],
    settings: &EstimatorSettings,
) -> Result<Vec<MIEstimate>> {
    if snr_db.is_empty() {
        return Err(Error::Precondition("SNR list is empty".into()));
    }
    if snr_db.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::Precondition("SNR list must be ascending".into()));
    }
    snr_db
        .iter()
        .map(|&db| {
            let snr = snr_from_db(db);
            let cfg = config.at_power(snr * config.sigma2)?;
            let d = dist.at_snr(snr, config.sigma2)?;
            let mut est = estimate_mi(&cfg, &d, settings)?;
            est.snr_db = db;
            Ok(est)
        })
        .collect()
}

/// Two-sample KS comparison of `Y-bar` against `sqrt(rho) Y + sqrt(1 - rho) Z2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityReport {
    pub samples: usize,
    pub rho: f64,
    pub modulus: KsResult,
    pub real: KsResult,
    pub imag: KsResult,
}

impl IdentityReport {
    pub fn min_p(&self) -> f64 {
        self.modulus.p_value.min(self.real.p_value).min(self.imag.p_value)
    }

    pub fn passed(&self) -> bool {
        self.min_p() >= IDENTITY_P_FLOOR
    }
}

/// Checks the law identity `Y-bar = sqrt(rho) Y + sqrt(1 - rho) Z2` for
/// `alpha_l = rho^l`. The two sides use independent input and channel draws.
pub fn check_bar_identity(
    config: &NetworkConfig,
    dist: &InputDistribution,
    samples: usize,
) -> Result<IdentityReport> {
    if !config.alphas.is_pure_exponential() {
        return Err(Error::Precondition(
            "the Y-bar identity needs alpha_l = rho^l with alpha_0 = 1".into(),
        ));
    }
    if samples == 0 {
        return Err(Error::Precondition("sample count must be positive".into()));
    }
    let rho = config.alphas.rho();
    let channel = config.channel()?;
    let l = channel.interferers();
    let draw = |stream: u64, left: bool| -> Result<Vec<Complex64>> {
        let mut rng = stream_rng(config.seed, stream);
        let mut inputs = vec![Complex64::new(0.0, 0.0); l + 1];
        let z2_sd = ((1.0 - rho) * config.sigma2 / 2.0).sqrt();
        (0..samples)
            .map(|_| {
                inputs.iter_mut().for_each(|x| *x = dist.sample(&mut rng));
                let s = channel.sample(&inputs, &mut rng)?;
                Ok(if left {
                    s.y_bar
                } else {
                    let re: f64 = rng.sample(rand_distr::StandardNormal);
                    let im: f64 = rng.sample(rand_distr::StandardNormal);
                    rho.sqrt() * s.y + Complex64::new(z2_sd * re, z2_sd * im)
                })
            })
            .collect()
    };
    let a = draw(tag::IDENTITY_LEFT, true)?;
    let b = draw(tag::IDENTITY_RIGHT, false)?;
    let stat = |f: fn(&Complex64) -> f64| ks_two_sample(a.iter().map(f).collect(), b.iter().map(f).collect());
    Ok(IdentityReport {
        samples,
        rho,
        modulus: stat(|z| z.norm()),
        real: stat(|z| z.re),
        imag: stat(|z| z.im),
    })
}
