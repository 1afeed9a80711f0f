//! Law of `R = |Y / Y~|`, the modulus ratio of two conditionally independent
//! circularly-symmetric Gaussians, and the integral identities used to bound
//! its differential entropy.
//!
//! Conditioned on the inputs, `R` has density `2 eta^2 r / (r^2 + eta^2)^2`.
//! Unconditionally it is the mixture of these over the law of `eta^2`.
//! Sampled laws freeze a finite set of `eta^2` draws, giving
//! a genuine finite mixture.

use rand::Rng;
use std::f64::consts::{FRAC_PI_2, LN_2};

use crate::error::{Error, Result};
use crate::eta::{EtaBounds, EtaSampler};
use crate::quadrature::{integrate, integrate_half_line, QuadSpec};

/// `2 eta^2 r / (r^2 + eta^2)^2`.
#[inline]
pub fn ratio_pdf_conditional(r: f64, eta2: f64) -> f64 {
    let d = r * r + eta2;
    2.0 * eta2 * r / (d * d)
}

/// Mixture density at `r` over `m` fresh draws of `eta^2`.
pub fn ratio_pdf_marginal<R: Rng + ?Sized>(r: f64, sampler: &EtaSampler, m: usize, rng: &mut R) -> f64 {
    let draws: Vec<f64> = (0..m.max(1)).map(|_| sampler.sample(rng)).collect();
    RatioLaw::from_samples(draws).pdf(r)
}

/// The law of `R`: a point mass or a frozen finite mixture over `eta^2`.
#[derive(Debug, Clone, PartialEq)]
pub enum RatioLaw {
    Constant(f64),
    Mixture(Vec<f64>),
}

impl RatioLaw {
    pub fn constant(eta2: f64) -> Self {
        RatioLaw::Constant(eta2)
    }

    /// Mixture over the given `eta^2` values; a single value collapses to a constant law.
    pub fn from_samples(eta2: Vec<f64>) -> Self {
        if eta2.len() == 1 {
            RatioLaw::Constant(eta2[0])
        } else {
            RatioLaw::Mixture(eta2)
        }
    }

    pub fn eta2_values(&self) -> &[f64] {
        match self {
            RatioLaw::Constant(e) => std::slice::from_ref(e),
            RatioLaw::Mixture(v) => v,
        }
    }

    /// `f_R(r) = 2r E[eta^2 / (r^2 + eta^2)^2]`.
    pub fn pdf(&self, r: f64) -> f64 {
        match self {
            RatioLaw::Constant(e) => ratio_pdf_conditional(r, *e),
            RatioLaw::Mixture(v) => {
                let r2 = r * r;
                let s: f64 = v
                    .iter()
                    .map(|e| {
                        let d = r2 + e;
                        e / (d * d)
                    })
                    .sum();
                2.0 * r * s / v.len() as f64
            }
        }
    }

    /// `E[log eta^2]`.
    pub fn mean_log_eta2(&self) -> f64 {
        let v = self.eta2_values();
        v.iter().map(|e| e.ln()).sum::<f64>() / v.len() as f64
    }

    /// `E[R] = (pi/2) E[eta]`.
    pub fn mean(&self) -> f64 {
        let v = self.eta2_values();
        FRAC_PI_2 * v.iter().map(|e| e.sqrt()).sum::<f64>() / v.len() as f64
    }

    /// Geometric-mean scale, used to centre the compactifying substitution.
    fn scale(&self) -> f64 {
        (0.5 * self.mean_log_eta2()).exp()
    }

    /// `int_0^inf g(r) f_R(r) dr` with `r = c sqrt(u / (1 - u))`, `c` the law's scale.
    fn expect<G: Fn(f64) -> f64>(&self, g: G, spec: QuadSpec) -> Result<f64> {
        let c = self.scale();
        let res = integrate(
            |u: f64| {
                let w = 1.0 - u;
                let r = c * (u / w).sqrt();
                // dr/du = c / (2 sqrt(u) w^{3/2})
                let jac = c / (2.0 * u.sqrt() * w * w.sqrt());
                let f = self.pdf(r);
                if f == 0.0 || !jac.is_finite() {
                    0.0
                } else {
                    g(r) * f * jac
                }
            },
            0.0,
            1.0,
            spec,
        )?;
        Ok(res.value)
    }

    /// `int f_R` (should be 1).
    pub fn total_mass(&self, spec: QuadSpec) -> Result<f64> {
        self.expect(|_| 1.0, spec)
    }

    /// `E[log R]` by quadrature.
    pub fn mean_log(&self, spec: QuadSpec) -> Result<f64> {
        self.expect(|r| r.ln(), spec)
    }

    /// `-int f_R(r) log(2r) dr` by quadrature.
    pub fn first_integral(&self, spec: QuadSpec) -> Result<f64> {
        self.expect(|r| -(2.0 * r).ln(), spec)
    }

    /// Closed form of [`Self::first_integral`]: `-log 2 - E[log eta^2] / 2`.
    pub fn first_integral_closed(&self) -> f64 {
        -LN_2 - 0.5 * self.mean_log_eta2()
    }
}

/// `h(R) = -int f_R log f_R dr`, in nats.
pub fn ratio_entropy(law: &RatioLaw, spec: QuadSpec) -> Result<f64> {
    if spec.abs_tol > 1e-6 {
        return Err(Error::Precondition(format!(
            "ratio entropy needs absolute tolerance <= 1e-6, got {}",
            spec.abs_tol
        )));
    }
    let c = law.scale();
    let res = integrate(
        |u: f64| {
            let w = 1.0 - u;
            let r = c * (u / w).sqrt();
            let jac = c / (2.0 * u.sqrt() * w * w.sqrt());
            let f = law.pdf(r);
            if f <= 0.0 || !jac.is_finite() {
                0.0
            } else {
                -f * f.ln() * jac
            }
        },
        0.0,
        1.0,
        spec,
    )?;
    Ok(res.value)
}

/// `(pi/2) mean(eta)` over `m` fresh draws.
pub fn ratio_mean<R: Rng + ?Sized>(sampler: &EtaSampler, m: usize, rng: &mut R) -> f64 {
    let m = m.max(1);
    FRAC_PI_2 * (0..m).map(|_| sampler.sample(rng).sqrt()).sum::<f64>() / m as f64
}

/// Upper bound on `h(R)` at a given `eta*^2`:
/// `-log 2 - log(eta_min^2)/2 + log(eta*^2) + 2 eta_max^2 / eta*^2`.
pub fn ratio_entropy_upper_bound_at(bounds: &EtaBounds, eta_star2: f64) -> f64 {
    -LN_2 - 0.5 * bounds.eta_min2.ln() + eta_star2.ln() + 2.0 * bounds.eta_max2 / eta_star2
}

/// The bound at `eta*^2 = eta_min^2`, its largest value over the admissible interval.
pub fn ratio_entropy_upper_bound(bounds: &EtaBounds) -> f64 {
    ratio_entropy_upper_bound_at(bounds, bounds.eta_min2)
}

/// Which side of `eta^2` the constant `eta*^2` lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseTag {
    /// `eta*^2 >= eta^2`
    StarAtLeastEta,
    /// `eta*^2 < eta^2`
    StarBelowEta,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AppendixCase {
    pub eta2: f64,
    pub eta_star2: f64,
}

impl AppendixCase {
    pub fn new(eta2: f64, eta_star2: f64) -> Result<Self> {
        if !(eta2 > 0.0 && eta_star2 > 0.0 && eta2.is_finite() && eta_star2.is_finite()) {
            return Err(Error::Precondition(format!(
                "eta^2 = {eta2} and eta*^2 = {eta_star2} must be positive and finite"
            )));
        }
        Ok(Self { eta2, eta_star2 })
    }

    /// `|eta*^2 - eta^2|`.
    pub fn gamma(&self) -> f64 {
        (self.eta_star2 - self.eta2).abs()
    }

    pub fn tag(&self) -> CaseTag {
        if self.eta_star2 >= self.eta2 {
            CaseTag::StarAtLeastEta
        } else {
            CaseTag::StarBelowEta
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogIntegral {
    pub numeric: f64,
    pub closed_form: f64,
    pub bound: f64,
}

/// `(1/gamma) log(1 + gamma/c)`, with the `gamma -> 0` limit `1/c`.
fn log_ratio_term(gamma: f64, c: f64) -> f64 {
    if gamma == 0.0 {
        1.0 / c
    } else {
        (gamma / c).ln_1p() / gamma
    }
}

/// `int_0^inf log(t + eta*^2) / (t + eta^2)^2 dt` three ways: quadrature,
/// the exact integrated-by-parts expression, and the relaxed bound that
/// uses `log(1 + b) <= b`.
pub fn appendix_a_integral(case: &AppendixCase, spec: QuadSpec) -> Result<LogIntegral> {
    let AppendixCase { eta2, eta_star2 } = *case;
    let gamma = case.gamma();
    let numeric = integrate_half_line(
        |t: f64| {
            let d = t + eta2;
            (t + eta_star2).ln() / (d * d)
        },
        eta2.max(eta_star2),
        spec,
    )?
    .value;
    let (closed_form, bound) = match case.tag() {
        CaseTag::StarAtLeastEta => (
            (eta2 + gamma).ln() / eta2 + log_ratio_term(gamma, eta2),
            (eta_star2.ln() + 1.0) / eta2,
        ),
        CaseTag::StarBelowEta => (
            eta_star2.ln() / (eta_star2 + gamma) + log_ratio_term(gamma, eta_star2),
            (eta_star2.ln() + eta2 / eta_star2) / eta2,
        ),
    };
    Ok(LogIntegral {
        numeric,
        closed_form,
        bound,
    })
}
