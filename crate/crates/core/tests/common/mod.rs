//! Independent numerical oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_2, PI};

/// `int_0^inf f(x) dx` by the trapezoid rule in `t = ln x` over `[lo, hi]`.
///
/// Spectrally accurate for integrands that are analytic in `t` and decay
/// at least exponentially at both ends of the window.
pub fn log_trapezoid<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, step: f64) -> f64 {
    let n = ((hi - lo) / step).ceil() as usize;
    let h = (hi - lo) / n as f64;
    (0..=n)
        .map(|i| {
            let t = lo + i as f64 * h;
            let x = t.exp();
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            w * x * f(x)
        })
        .sum::<f64>()
        * h
}

/// Nodes and weights for `int_0^inf f(x) dx` on a log-spaced trapezoid grid.
pub fn log_grid(lo: f64, hi: f64, step: f64) -> Vec<(f64, f64)> {
    let n = ((hi - lo) / step).ceil() as usize;
    let h = (hi - lo) / n as f64;
    (0..=n)
        .map(|i| {
            let x = (lo + i as f64 * h).exp();
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            (x, w * x * h)
        })
        .collect()
}

/// Density of `sum_i E_i / lambda_i` for independent unit exponentials and
/// distinct rates, by partial fractions.
pub struct Hypoexponential {
    rates: Vec<f64>,
    coeffs: Vec<f64>,
}

impl Hypoexponential {
    pub fn new(rates: Vec<f64>) -> Self {
        let coeffs = (0..rates.len())
            .map(|i| {
                rates
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, &lj)| lj / (lj - rates[i]))
                    .product::<f64>()
                    * rates[i]
            })
            .collect();
        Self { rates, coeffs }
    }

    pub fn pdf(&self, v: f64) -> f64 {
        self.rates
            .iter()
            .zip(&self.coeffs)
            .map(|(l, c)| c * (-l * v).exp())
            .sum()
    }
}

/// Entropies of `Y ~ CN(0, S + c)` with `S` hypoexponential, as a radial
/// double integral over `u = |y|^2` and `v = S`.
pub struct RadialOracle {
    v_grid: Vec<(f64, f64)>,
    u_grid: Vec<(f64, f64)>,
}

impl RadialOracle {
    pub fn new(step: f64) -> Self {
        Self {
            v_grid: log_grid(-45.0, 8.0, step),
            u_grid: log_grid(-35.0, 13.0, step),
        }
    }

    /// `(density weights, v) with sum of weights ~ 1` for the law of `S`.
    fn mixing(&self, law: &Hypoexponential) -> Vec<(f64, f64)> {
        self.v_grid
            .iter()
            .map(|&(v, w)| (v, w * law.pdf(v)))
            .filter(|&(_, w)| w != 0.0)
            .collect()
    }

    /// Radial density `g(u)` of `CN(0, c + S)` per unit area of the plane.
    fn density(mix: &[(f64, f64)], c: f64, u: f64) -> f64 {
        mix.iter()
            .map(|&(v, w)| {
                let s = c + v;
                w * (-u / s).exp() / (PI * s)
            })
            .sum()
    }

    /// `(h, total mass)` of `CN(0, c + S)`.
    pub fn entropy_with_mass(&self, law: &Hypoexponential, c: f64) -> (f64, f64) {
        let mix = self.mixing(law);
        self.entropy_of_mix(&mix, c)
    }

    fn entropy_of_mix(&self, mix: &[(f64, f64)], c: f64) -> (f64, f64) {
        let mut h = 0.0;
        let mut mass = 0.0;
        for &(u, w) in &self.u_grid {
            let g = Self::density(mix, c, u);
            if g > 0.0 {
                h -= w * PI * g * g.ln();
                mass += w * PI * g;
            }
        }
        (h, mass)
    }

    /// `h(Y)`, `h(Y | X_0)` and their difference for circularly-symmetric
    /// Gaussian inputs of power `power` at every node, with fading variances
    /// `alphas = [alpha_0, ..., alpha_L]` (all distinct) and noise `sigma2`.
    pub fn gaussian_input_mi(&self, alphas: &[f64], power: f64, sigma2: f64) -> (f64, f64, f64) {
        let all = Hypoexponential::new(alphas.iter().map(|a| 1.0 / (a * power)).collect());
        let (h_y, _) = self.entropy_with_mass(&all, sigma2);
        let interference = Hypoexponential::new(alphas[1..].iter().map(|a| 1.0 / (a * power)).collect());
        let mix = self.mixing(&interference);
        // direct power a = alpha_0 * P * tau, tau ~ Exp(1)
        let h_cond: f64 = log_grid(-40.0, 4.5, 2.0 * self.step_hint())
            .iter()
            .map(|&(tau, w)| w * (-tau).exp() * self.entropy_of_mix(&mix, sigma2 + alphas[0] * power * tau).0)
            .sum();
        (h_y, h_cond, h_y - h_cond)
    }

    fn step_hint(&self) -> f64 {
        (self.u_grid[1].0 / self.u_grid[0].0).ln()
    }
}

/// Differential entropy of a two-component scale mixture of `CN(0, s)`.
pub fn two_point_mixture_entropy(s: [f64; 2], p: [f64; 2], points: usize) -> f64 {
    let g = |u: f64| p[0] * (-u / s[0]).exp() / (PI * s[0]) + p[1] * (-u / s[1]).exp() / (PI * s[1]);
    let (lo, hi) = (-40.0, (60.0 * s[0].max(s[1])).ln());
    let step = (hi - lo) / points as f64;
    log_trapezoid(|u| { let v = g(u); if v > 0.0 { -PI * v * v.ln() } else { 0.0 } }, lo, hi, step)
}

/// `h(R)` for constant `eta^2` by tanh-sinh quadrature under `r = eta tan(theta)`.
pub fn tanh_sinh_entropy(eta2: f64) -> f64 {
    let eta = eta2.sqrt();
    quadrature::double_exponential::integrate(
        |t: f64| {
            let (s, c) = t.sin_cos();
            // f_R(r) dr/dtheta with f_R = 2 eta^2 r / (r^2 + eta^2)^2
            let f = 2.0 * s * c * c * c / eta;
            let jac = eta / (c * c);
            if f <= 0.0 {
                0.0
            } else {
                -f * f.ln() * jac
            }
        },
        0.0,
        FRAC_PI_2,
        1e-12,
    )
    .integral
}
