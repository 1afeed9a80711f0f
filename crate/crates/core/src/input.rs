//! Per-node input laws `Q^n`.
//!
//! Every node (the transmitter and all interferers) draws its `n`-vector of
//! symbols from the same law. All families satisfy `E|X|^2 = P`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum InputFamily {
    /// `X ~ CN(0, P)`.
    CircularGaussian,
    /// `X = sqrt(P) e^{j theta}` with uniform phase.
    ConstantModulus,
    /// Finite constellation. `points` hold the shape; they are rescaled to
    /// average power `P` when sampled.
    Constellation { points: Vec<Complex64>, probs: Vec<f64> },
    /// Zero with probability `1 - delta`, otherwise amplitude `sqrt(P / delta)`
    /// with uniform phase.
    OnOff { delta: f64 },
}

/// How a family's parameters follow the SNR in a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SnrRule {
    #[default]
    Fixed,
    /// On-off duty cycle `delta(SNR) = 1 / (1 + SNR)`.
    InverseSnrDuty,
}

/// Temporal structure of one node's `n`-vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Temporal {
    #[default]
    Iid,
    /// One symbol drawn and repeated over the block.
    Repeat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InputDistribution {
    family: InputFamily,
    power: f64,
    temporal: Temporal,
    snr_rule: SnrRule,
    /// Constellation points scaled to power `power`, with cumulative probabilities.
    scaled: Option<(Vec<Complex64>, Vec<f64>)>,
}

impl InputDistribution {
    pub fn new(family: InputFamily, power: f64) -> Result<Self> {
        if !(power.is_finite() && power >= 0.0) {
            return Err(Error::OutOfRange {
                key: "input.power",
                value: power,
                expected: "finite and >= 0",
            });
        }
        let scaled = match &family {
            InputFamily::OnOff { delta } => {
                if !(*delta > 0.0 && *delta <= 1.0) {
                    return Err(Error::OutOfRange {
                        key: "input.delta",
                        value: *delta,
                        expected: "(0, 1]",
                    });
                }
                None
            }
            InputFamily::Constellation { points, probs } => Some(scale_constellation(points, probs, power)?),
            _ => None,
        };
        Ok(Self {
            family,
            power,
            temporal: Temporal::Iid,
            snr_rule: SnrRule::Fixed,
            scaled,
        })
    }

    pub fn circular_gaussian(power: f64) -> Result<Self> {
        Self::new(InputFamily::CircularGaussian, power)
    }

    pub fn constant_modulus(power: f64) -> Result<Self> {
        Self::new(InputFamily::ConstantModulus, power)
    }

    pub fn on_off(delta: f64, power: f64) -> Result<Self> {
        Self::new(InputFamily::OnOff { delta }, power)
    }

    /// Square QAM with `order` points (4, 16, 64, ...), equiprobable.
    pub fn qam(order: usize, power: f64) -> Result<Self> {
        let side = (order as f64).sqrt().round() as usize;
        if side < 2 || side * side != order {
            return Err(Error::InvalidInput(format!("QAM order {order} is not a square >= 4")));
        }
        let mut points = Vec::with_capacity(order);
        for i in 0..side {
            for q in 0..side {
                let re = 2.0 * i as f64 + 1.0 - side as f64;
                let im = 2.0 * q as f64 + 1.0 - side as f64;
                points.push(Complex64::new(re, im));
            }
        }
        let probs = vec![1.0 / order as f64; order];
        Self::new(InputFamily::Constellation { points, probs }, power)
    }

    pub fn with_temporal(mut self, temporal: Temporal) -> Self {
        self.temporal = temporal;
        self
    }

    pub fn with_snr_rule(mut self, rule: SnrRule) -> Result<Self> {
        if rule == SnrRule::InverseSnrDuty && !matches!(self.family, InputFamily::OnOff { .. }) {
            return Err(Error::InvalidInput("the inverse-SNR duty rule applies to on-off inputs only".into()));
        }
        self.snr_rule = rule;
        Ok(self)
    }

    pub fn family(&self) -> &InputFamily {
        &self.family
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn temporal(&self) -> Temporal {
        self.temporal
    }

    pub fn snr_rule(&self) -> SnrRule {
        self.snr_rule
    }

    /// The law used at a given operating point: power `snr * sigma2`, with
    /// the SNR rule applied to the family parameters.
    pub fn at_snr(&self, snr: f64, sigma2: f64) -> Result<Self> {
        let family = match (&self.family, self.snr_rule) {
            (InputFamily::OnOff { .. }, SnrRule::InverseSnrDuty) => InputFamily::OnOff {
                delta: 1.0 / (1.0 + snr),
            },
            (f, _) => f.clone(),
        };
        let mut out = Self::new(family, snr * sigma2)?;
        out.temporal = self.temporal;
        out.snr_rule = self.snr_rule;
        Ok(out)
    }

    /// Exact `E|X|^2`.
    pub fn mean_power(&self) -> f64 {
        match (&self.family, &self.scaled) {
            (InputFamily::Constellation { probs, .. }, Some((pts, _))) => {
                pts.iter().zip(probs).map(|(p, w)| w * p.norm_sqr()).sum()
            }
            _ => self.power,
        }
    }

    /// One symbol.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        match &self.family {
            InputFamily::CircularGaussian => {
                let s = (self.power).sqrt() * FRAC_1_SQRT_2;
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(s * re, s * im)
            }
            InputFamily::ConstantModulus => Complex64::from_polar(self.power.sqrt(), TAU * rng.gen::<f64>()),
            InputFamily::Constellation { .. } => {
                let (pts, cdf) = self.scaled.as_ref().expect("scaled at construction");
                pts[pick(cdf, rng.gen::<f64>())]
            }
            InputFamily::OnOff { delta } => {
                if rng.gen::<f64>() < *delta {
                    Complex64::from_polar((self.power / delta).sqrt(), TAU * rng.gen::<f64>())
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
        }
    }

    /// One `|X|^2` draw, with the same law as `sample(..).norm_sqr()`.
    pub fn sample_power<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.family {
            InputFamily::CircularGaussian => {
                let e: f64 = Exp1.sample(rng);
                self.power * e
            }
            InputFamily::ConstantModulus => self.power,
            InputFamily::Constellation { .. } => {
                let (pts, cdf) = self.scaled.as_ref().expect("scaled at construction");
                pts[pick(cdf, rng.gen::<f64>())].norm_sqr()
            }
            InputFamily::OnOff { delta } => {
                if rng.gen::<f64>() < *delta {
                    self.power / delta
                } else {
                    0.0
                }
            }
        }
    }

    /// One node's block of `out.len()` symbols from `Q^n`.
    pub fn sample_block<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [Complex64]) {
        match self.temporal {
            Temporal::Iid => out.iter_mut().for_each(|x| *x = self.sample(rng)),
            Temporal::Repeat => {
                let x = self.sample(rng);
                out.iter_mut().for_each(|o| *o = x);
            }
        }
    }

    /// `|x_k|^2` for one node's block.
    pub fn sample_power_block<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        match self.temporal {
            Temporal::Iid => out.iter_mut().for_each(|x| *x = self.sample_power(rng)),
            Temporal::Repeat => {
                let x = self.sample_power(rng);
                out.iter_mut().for_each(|o| *o = x);
            }
        }
    }

    /// True when `|X|^2` is almost surely constant, so every output
    /// variance is deterministic.
    pub fn is_constant_power(&self) -> bool {
        match &self.family {
            InputFamily::ConstantModulus => true,
            InputFamily::OnOff { delta } => *delta == 1.0 || self.power == 0.0,
            InputFamily::CircularGaussian => self.power == 0.0,
            InputFamily::Constellation { .. } => {
                let (pts, _) = self.scaled.as_ref().expect("scaled at construction");
                let p0 = pts[0].norm_sqr();
                pts.iter().all(|p| (p.norm_sqr() - p0).abs() <= 1e-15 * p0.max(1.0))
            }
        }
    }
}

fn pick(cdf: &[f64], u: f64) -> usize {
    cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
}

fn scale_constellation(points: &[Complex64], probs: &[f64], power: f64) -> Result<(Vec<Complex64>, Vec<f64>)> {
    if points.is_empty() || points.len() != probs.len() {
        return Err(Error::InvalidInput(format!(
            "constellation needs matching non-empty points/probs, got {} and {}",
            points.len(),
            probs.len()
        )));
    }
    if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(Error::InvalidInput("constellation probabilities must be >= 0".into()));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!("constellation probabilities sum to {total}, not 1")));
    }
    let shape_power: f64 = points.iter().zip(probs).map(|(p, w)| w * p.norm_sqr()).sum();
    if !(shape_power > 0.0 && shape_power.is_finite()) {
        return Err(Error::InvalidInput("constellation has zero average power".into()));
    }
    let g = (power / shape_power).sqrt();
    let scaled = points.iter().map(|p| p * g).collect();
    let mut acc = 0.0;
    let cdf = probs
        .iter()
        .map(|p| {
            acc += p / total;
            acc
        })
        .collect();
    Ok((scaled, cdf))
}
