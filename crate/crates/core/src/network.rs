//! Channel model: direct link plus an ordered, infinite set of interferers
//! whose fading variances `alpha_l` decay at most geometrically.
//!
//! Besides the true output `Y_k = sum_{l>=0} H_{l,k} X_{l,k} + Z_k` (with
//! `H_{0,k}` the direct link), two index-shifted auxiliary outputs are
//! sampled: `Y~_k`, driven by independent fading `H~_{l+1,k}`, and
//! `Y-bar_k`, which reuses the true channel's `H_{l+1,k}` and `Z_k`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::input::InputDistribution;

/// Hard cap on interferer count when solving for a tail tolerance.
pub const DEFAULT_TRUNCATION_CAP: usize = 1_000_000;
/// Blocklength cap for multi-letter sampling and estimation.
pub const DEFAULT_MAX_BLOCKLENGTH: usize = 4;
pub const DEFAULT_TAIL_EPS: f64 = 1e-6;

/// Descriptor for an interferer variance profile.
#[derive(Debug, Clone, PartialEq)]
pub enum AlphaModel {
    /// `alpha_l = rho^l`.
    Exponential { rho: f64 },
    /// `alpha_l = l^(-beta)`.
    Polynomial { beta: f64 },
    /// `alpha_1..alpha_m` given; continues geometrically at ratio `rho` past `m`.
    Explicit { values: Vec<f64> },
}

/// The sequence `{alpha_l}` with its decay floor `rho` and direct-link variance `alpha_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaSequence {
    model: AlphaModel,
    rho: f64,
    alpha0: f64,
}

impl AlphaSequence {
    /// Validates `model` and derives `rho`. `rho_floor` is used for explicit
    /// lists whose successive ratios never drop below one.
    pub fn build(model: AlphaModel, alpha0: f64, rho_floor: f64) -> Result<Self> {
        if !(alpha0 > 0.0 && alpha0.is_finite()) {
            return Err(Error::OutOfRange {
                key: "network.alpha0",
                value: alpha0,
                expected: "finite and > 0",
            });
        }
        let rho = match &model {
            AlphaModel::Exponential { rho } => {
                if !(*rho > 0.0 && *rho < 1.0) {
                    return Err(Error::OutOfRange {
                        key: "network.rho",
                        value: *rho,
                        expected: "(0, 1)",
                    });
                }
                *rho
            }
            AlphaModel::Polynomial { beta } => {
                if !(*beta > 0.0 && beta.is_finite()) {
                    return Err(Error::OutOfRange {
                        key: "network.beta",
                        value: *beta,
                        expected: "finite and > 0",
                    });
                }
                0.5f64.powf(*beta)
            }
            AlphaModel::Explicit { values } => explicit_rho(values, rho_floor)?,
        };
        Ok(Self { model, rho, alpha0 })
    }

    pub fn exponential(rho: f64) -> Result<Self> {
        Self::build(AlphaModel::Exponential { rho }, 1.0, 0.5)
    }

    pub fn polynomial(beta: f64) -> Result<Self> {
        Self::build(AlphaModel::Polynomial { beta }, 1.0, 0.5)
    }

    pub fn explicit(values: Vec<f64>, rho_floor: f64) -> Result<Self> {
        Self::build(AlphaModel::Explicit { values }, 1.0, rho_floor)
    }

    pub fn with_alpha0(self, alpha0: f64) -> Result<Self> {
        if !(alpha0 > 0.0 && alpha0.is_finite()) {
            return Err(Error::OutOfRange {
                key: "network.alpha0",
                value: alpha0,
                expected: "finite and > 0",
            });
        }
        Ok(Self { alpha0, ..self })
    }

    pub fn model(&self) -> &AlphaModel {
        &self.model
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn alpha0(&self) -> f64 {
        self.alpha0
    }

    /// `alpha_l`; `l = 0` is the direct link.
    pub fn value(&self, l: usize) -> f64 {
        if l == 0 {
            return self.alpha0;
        }
        match &self.model {
            AlphaModel::Exponential { rho } => rho.powi(l as i32),
            AlphaModel::Polynomial { beta } => (l as f64).powf(-beta),
            AlphaModel::Explicit { values } => {
                let m = values.len();
                if l <= m {
                    values[l - 1]
                } else {
                    values[m - 1] * self.rho.powi((l - m) as i32)
                }
            }
        }
    }

    /// `alpha_0, ..., alpha_len`.
    pub fn variances(&self, len: usize) -> Vec<f64> {
        (0..=len).map(|l| self.value(l)).collect()
    }

    /// True for `alpha_l = rho^l` with `alpha_0 = 1`, the setting of the
    /// exponential-path-loss identity.
    pub fn is_pure_exponential(&self) -> bool {
        matches!(self.model, AlphaModel::Exponential { .. }) && self.alpha0 == 1.0
    }

    /// `sum_{l > len} alpha_l` (infinite for non-summable polynomial tails).
    pub fn tail_sum(&self, len: usize) -> f64 {
        match &self.model {
            AlphaModel::Exponential { rho } => rho.powi(len as i32 + 1) / (1.0 - rho),
            AlphaModel::Polynomial { beta } => polynomial_tail(*beta, len),
            AlphaModel::Explicit { values } => {
                let m = values.len();
                if len >= m {
                    self.value(len) * self.rho / (1.0 - self.rho)
                } else {
                    values[len..].iter().sum::<f64>() + values[m - 1] * self.rho / (1.0 - self.rho)
                }
            }
        }
    }
}

fn explicit_rho(values: &[f64], rho_floor: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidAlpha("explicit list is empty".into()));
    }
    if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::InvalidAlpha(format!("alpha_{} = {v} is not a positive finite value", i + 1)));
    }
    if let Some(i) = (0..values.len() - 1).find(|&i| values[i + 1] > values[i]) {
        return Err(Error::InvalidAlpha(format!(
            "alpha_{} = {} exceeds alpha_{} = {} (list must be nonincreasing)",
            i + 2,
            values[i + 1],
            i + 1,
            values[i]
        )));
    }
    let inf = values.windows(2).map(|w| w[1] / w[0]).fold(f64::INFINITY, f64::min);
    if inf <= 0.0 {
        return Err(Error::InvalidAlpha("successive ratios reach 0; no rho > 0 bounds them".into()));
    }
    if inf < 1.0 {
        Ok(inf)
    } else {
        if !(rho_floor > 0.0 && rho_floor < 1.0) {
            return Err(Error::OutOfRange {
                key: "network.rho_floor",
                value: rho_floor,
                expected: "(0, 1)",
            });
        }
        Ok(rho_floor)
    }
}

/// `sum_{l > len} l^(-beta)`: ten explicit terms, then an Euler-Maclaurin remainder.
fn polynomial_tail(beta: f64, len: usize) -> f64 {
    if beta <= 1.0 {
        return f64::INFINITY;
    }
    const EXPLICIT: usize = 10;
    let head: f64 = (len + 1..=len + EXPLICIT).map(|l| (l as f64).powf(-beta)).sum();
    let n = (len + EXPLICIT + 1) as f64;
    let f = n.powf(-beta);
    let integral = n.powf(1.0 - beta) / (beta - 1.0);
    let d1 = -beta * n.powf(-beta - 1.0);
    let d3 = -beta * (beta + 1.0) * (beta + 2.0) * n.powf(-beta - 3.0);
    let d5 = d3 * (beta + 3.0) * (beta + 4.0) / (n * n);
    head + integral + f / 2.0 - d1 / 12.0 + d3 / 720.0 - d5 / 30240.0
}

/// How the infinite interferer sum is cut off.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Truncation {
    Fixed(usize),
    /// Relative tail tolerance: `power * sum_{l>L} alpha_l <= eps * sigma2`.
    Tolerance(f64),
}

/// Smallest `L` with `power * sum_{l>L} alpha_l <= eps * sigma2`; explicit
/// lists always give their own length.
pub fn truncation_length(alphas: &AlphaSequence, power: f64, sigma2: f64, eps: f64) -> Result<usize> {
    truncation_length_capped(alphas, power, sigma2, eps, DEFAULT_TRUNCATION_CAP)
}

pub fn truncation_length_capped(
    alphas: &AlphaSequence,
    power: f64,
    sigma2: f64,
    eps: f64,
    cap: usize,
) -> Result<usize> {
    if !(eps > 0.0) {
        return Err(Error::OutOfRange {
            key: "network.eps",
            value: eps,
            expected: "> 0",
        });
    }
    if let AlphaModel::Explicit { values } = alphas.model() {
        return Ok(values.len());
    }
    if power == 0.0 {
        return Ok(0);
    }
    let target = eps * sigma2;
    let meets = |l: usize| power * alphas.tail_sum(l) <= target;
    match alphas.model() {
        AlphaModel::Exponential { rho } => {
            // power rho^{L+1} / (1 - rho) <= target  <=>  L + 1 >= log(target (1-rho) / power) / log(rho)
            let x = (target * (1.0 - rho) / power).ln() / rho.ln() - 1.0;
            let mut l = x.ceil().max(0.0) as usize;
            while l > 0 && meets(l - 1) {
                l -= 1;
            }
            while !meets(l) {
                l += 1;
            }
            if l > cap {
                return Err(Error::TruncationCap {
                    terms: cap,
                    tail_mass: power * alphas.tail_sum(cap),
                    target,
                });
            }
            Ok(l)
        }
        AlphaModel::Polynomial { .. } => {
            if !meets(cap) {
                return Err(Error::TruncationCap {
                    terms: cap,
                    tail_mass: power * alphas.tail_sum(cap),
                    target,
                });
            }
            let (mut lo, mut hi) = (0usize, cap);
            if meets(0) {
                return Ok(0);
            }
            // invariant: !meets(lo), meets(hi)
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if meets(mid) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            Ok(hi)
        }
        AlphaModel::Explicit { .. } => unreachable!(),
    }
}

/// Full channel description.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    pub alphas: AlphaSequence,
    pub sigma2: f64,
    pub power: f64,
    pub truncation: Truncation,
    pub seed: u64,
    pub max_blocklength: usize,
}

impl NetworkConfig {
    pub fn new(alphas: AlphaSequence, sigma2: f64, power: f64) -> Result<Self> {
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::OutOfRange {
                key: "network.sigma2",
                value: sigma2,
                expected: "finite and > 0",
            });
        }
        if !(power >= 0.0 && power.is_finite()) {
            return Err(Error::OutOfRange {
                key: "network.power",
                value: power,
                expected: "finite and >= 0",
            });
        }
        Ok(Self {
            alphas,
            sigma2,
            power,
            truncation: Truncation::Tolerance(DEFAULT_TAIL_EPS),
            seed: 0,
            max_blocklength: DEFAULT_MAX_BLOCKLENGTH,
        })
    }

    pub fn with_truncation(mut self, truncation: Truncation) -> Self {
        self.truncation = truncation;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn snr(&self) -> f64 {
        self.power / self.sigma2
    }

    /// Same network at another power level.
    pub fn at_power(&self, power: f64) -> Result<Self> {
        let mut c = Self::new(self.alphas.clone(), self.sigma2, power)?;
        c.truncation = self.truncation;
        c.seed = self.seed;
        c.max_blocklength = self.max_blocklength;
        Ok(c)
    }

    /// Number of interferers `L` kept after truncation.
    pub fn interferers(&self) -> Result<usize> {
        match self.truncation {
            Truncation::Fixed(l) => Ok(l),
            Truncation::Tolerance(eps) => truncation_length(&self.alphas, self.power, self.sigma2, eps),
        }
    }

    pub fn channel(&self) -> Result<Channel> {
        Ok(Channel::new(&self.alphas, self.sigma2, self.interferers()?))
    }
}

/// Truncated channel with cached fading standard deviations.
#[derive(Debug, Clone)]
pub struct Channel {
    sigma2: f64,
    /// `alpha_0, ..., alpha_{L+1}`.
    variances: Vec<f64>,
    /// Per-component standard deviations `sqrt(alpha_l / 2)`.
    component_sd: Vec<f64>,
    noise_sd: f64,
}

impl Channel {
    pub fn new(alphas: &AlphaSequence, sigma2: f64, interferers: usize) -> Self {
        let variances = alphas.variances(interferers + 1);
        let component_sd = variances.iter().map(|a| (a / 2.0).sqrt()).collect();
        Self {
            sigma2,
            variances,
            component_sd,
            noise_sd: (sigma2 / 2.0).sqrt(),
        }
    }

    pub fn interferers(&self) -> usize {
        self.variances.len() - 2
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// `alpha_0, ..., alpha_{L+1}`.
    pub fn variances(&self) -> &[f64] {
        &self.variances
    }

    /// `sum_{l=0}^{L} alpha_l |x_l|^2 + sigma2`.
    pub fn conditional_variance(&self, powers: impl IntoIterator<Item = f64>) -> f64 {
        powers
            .into_iter()
            .zip(&self.variances)
            .map(|(p, a)| a * p)
            .sum::<f64>()
            + self.sigma2
    }

    /// One channel use for node inputs `x_0 (direct), x_1, ..., x_L`.
    pub fn sample<R: Rng + ?Sized>(&self, inputs: &[Complex64], rng: &mut R) -> Result<ChannelSample> {
        let l = self.interferers();
        if inputs.len() != l + 1 {
            return Err(Error::Precondition(format!(
                "expected {} node inputs (direct + {l} interferers), got {}",
                l + 1,
                inputs.len()
            )));
        }
        let mut y = Complex64::new(0.0, 0.0);
        let mut y_bar = Complex64::new(0.0, 0.0);
        let mut y_tilde = Complex64::new(0.0, 0.0);
        // H_0 .. H_L for Y; H_1 .. H_{L+1} drive Y-bar with a one-index shift.
        let mut prev_h = cn(rng, self.component_sd[0]);
        for (idx, x) in inputs.iter().enumerate() {
            y += prev_h * x;
            let next_h = cn(rng, self.component_sd[idx + 1]);
            y_bar += next_h * x;
            y_tilde += cn(rng, self.component_sd[idx + 1]) * x;
            prev_h = next_h;
        }
        let z = cn(rng, self.noise_sd);
        y += z;
        y_bar += z;
        y_tilde += cn(rng, self.noise_sd);
        Ok(ChannelSample {
            y,
            y_tilde,
            y_bar,
            conditional_variance: self.conditional_variance(inputs.iter().map(|x| x.norm_sqr())),
            inputs: inputs.to_vec(),
        })
    }
}

/// `CN(0, 2 sd^2)` draw from two real normals of standard deviation `sd`.
#[inline]
pub(crate) fn cn<R: Rng + ?Sized>(rng: &mut R, sd: f64) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(sd * re, sd * im)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSample {
    pub y: Complex64,
    pub y_tilde: Complex64,
    pub y_bar: Complex64,
    /// `Var(Y | all inputs)`.
    pub conditional_variance: f64,
    /// `x_0` (direct) followed by the interferer symbols.
    pub inputs: Vec<Complex64>,
}

/// Direct input followed by `interferers` independent draws from the same law.
pub fn sample_inputs<R: Rng + ?Sized>(dist: &InputDistribution, interferers: usize, rng: &mut R) -> Vec<Complex64> {
    (0..=interferers).map(|_| dist.sample(rng)).collect()
}

pub fn sample_channel<R: Rng + ?Sized>(
    config: &NetworkConfig,
    inputs: &[Complex64],
    rng: &mut R,
) -> Result<ChannelSample> {
    config.channel()?.sample(inputs, rng)
}

/// `n` consecutive channel uses. Each node draws one `n`-vector from `Q^n`;
/// fading and noise are fresh at every time index.
pub fn multivariate_sample<R: Rng + ?Sized>(
    config: &NetworkConfig,
    dist: &InputDistribution,
    n: usize,
    rng: &mut R,
) -> Result<Vec<ChannelSample>> {
    if n == 0 || n > config.max_blocklength {
        return Err(Error::Blocklength {
            n,
            max: config.max_blocklength,
        });
    }
    let channel = config.channel()?;
    let nodes = channel.interferers() + 1;
    let mut blocks = vec![Complex64::new(0.0, 0.0); nodes * n];
    for node in blocks.chunks_mut(n) {
        dist.sample_block(rng, node);
    }
    let mut inputs = vec![Complex64::new(0.0, 0.0); nodes];
    (0..n)
        .map(|k| {
            for (node, x) in inputs.iter_mut().enumerate() {
                *x = blocks[node * n + k];
            }
            channel.sample(&inputs, rng)
        })
        .collect()
}
