//! Kolmogorov-Smirnov tests and small summary-statistic helpers.

use std::f64::consts::PI;

/// Kolmogorov survival function `Q(lambda) = P(K > lambda)`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // Jacobi-transformed series converges fast for small lambda.
        let y = (-PI * PI / (8.0 * lambda * lambda)).exp();
        let p = (2.0 * PI).sqrt() / lambda * (y + y.powi(9) + y.powi(25) + y.powi(49));
        (1.0 - p).clamp(0.0, 1.0)
    } else {
        let x = (-2.0 * lambda * lambda).exp();
        (2.0 * (x - x.powi(4) + x.powi(9) - x.powi(16))).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

fn p_value(d: f64, effective_n: f64) -> f64 {
    let s = effective_n.sqrt();
    kolmogorov_q((s + 0.12 + 0.11 / s) * d)
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_unstable_by(f64::total_cmp);
    v
}

/// Two-sample test of equal distributions.
pub fn ks_two_sample(a: Vec<f64>, b: Vec<f64>) -> KsResult {
    assert!(!a.is_empty() && !b.is_empty(), "KS test needs non-empty samples");
    let a = sorted(a);
    let b = sorted(b);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    KsResult {
        statistic: d,
        p_value: p_value(d, na * nb / (na + nb)),
    }
}

/// One-sample test against a continuous CDF.
pub fn ks_one_sample<F: Fn(f64) -> f64>(sample: Vec<f64>, cdf: F) -> KsResult {
    assert!(!sample.is_empty(), "KS test needs a non-empty sample");
    let s = sorted(sample);
    let n = s.len() as f64;
    let d = s.iter().enumerate().fold(0.0f64, |acc, (i, &x)| {
        let f = cdf(x);
        acc.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n)
    });
    KsResult {
        statistic: d,
        p_value: p_value(d, n),
    }
}

/// Running mean and variance (Welford).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    /// Chan et al. pairwise combination.
    pub fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        self.mean += d * other.n as f64 / n as f64;
        self.m2 += other.m2 + d * d * (self.n as f64 * other.n as f64) / n as f64;
        self.n = n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        (self.variance() / self.n.max(1) as f64).sqrt()
    }
}

impl FromIterator<f64> for Moments {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut m = Moments::default();
        iter.into_iter().for_each(|x| m.push(x));
        m
    }
}

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn kolmogorov_reference_values() {
        // Q(1.36) ~ 0.049, Q(1.63) ~ 0.010, Q(0.5) ~ 0.964
        assert!((kolmogorov_q(1.358) - 0.05).abs() < 1e-3);
        assert!((kolmogorov_q(1.628) - 0.01).abs() < 5e-4);
        assert!((kolmogorov_q(0.5) - 0.9639).abs() < 1e-3);
        // branches agree at the switch point
        assert!((kolmogorov_q(1.18 - 1e-12) - kolmogorov_q(1.18)).abs() < 1e-9);
    }

    #[test]
    fn two_sample_same_law_passes() {
        let mut r = stream_rng(1, 0);
        let a: Vec<f64> = (0..20_000).map(|_| r.sample(StandardNormal)).collect();
        let b: Vec<f64> = (0..20_000).map(|_| r.sample(StandardNormal)).collect();
        assert!(ks_two_sample(a, b).p_value > 0.01);
    }

    #[test]
    fn two_sample_detects_shift() {
        let mut r = stream_rng(2, 0);
        let a: Vec<f64> = (0..20_000).map(|_| r.sample(StandardNormal)).collect();
        let b: Vec<f64> = (0..20_000).map(|_| r.sample::<f64, _>(StandardNormal) * 1.15).collect();
        assert!(ks_two_sample(a, b).p_value < 1e-3);
    }

    #[test]
    fn two_sample_ties() {
        let r = ks_two_sample(vec![1.0, 1.0, 2.0], vec![1.0, 1.0, 2.0]);
        assert_eq!(r.statistic, 0.0);
        let r = ks_two_sample(vec![0.0; 5], vec![1.0; 5]);
        assert_eq!(r.statistic, 1.0);
    }

    #[test]
    fn one_sample_uniform() {
        let mut r = stream_rng(3, 0);
        let u: Vec<f64> = (0..50_000).map(|_| r.gen::<f64>()).collect();
        assert!(ks_one_sample(u.clone(), |x| x.clamp(0.0, 1.0)).p_value > 0.01);
        assert!(ks_one_sample(u, |x| (x * x).clamp(0.0, 1.0)).p_value < 1e-6);
    }

    #[test]
    fn moments_merge_matches_sequential() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.1).collect();
        let all: Moments = xs.iter().copied().collect();
        let mut a: Moments = xs[..300].iter().copied().collect();
        let b: Moments = xs[300..].iter().copied().collect();
        a.merge(&b);
        assert!((a.mean() - all.mean()).abs() < 1e-12);
        assert!((a.variance() - all.variance()).abs() < 1e-10);
    }
}
