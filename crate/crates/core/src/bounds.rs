//! SNR-independent upper bounds on `(1/n) I(X^n; Y^n)`, in nats per channel use.

use std::f64::consts::{LN_2, PI};

use crate::error::{Error, Result};
use crate::eta::{eta_bounds, EtaBounds};
use crate::network::AlphaSequence;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundKind {
    KRaw,
    Proposition,
    Geometric,
    ExponentialProof,
    ExponentialStated,
}

impl BoundKind {
    pub fn name(self) -> &'static str {
        match self {
            BoundKind::KRaw => "K_raw",
            BoundKind::Proposition => "proposition",
            BoundKind::Geometric => "geometric",
            BoundKind::ExponentialProof => "exponential_proof",
            BoundKind::ExponentialStated => "exponential_stated",
        }
    }
}

/// What a bound was computed from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundInputs {
    Eta { bounds: EtaBounds, eta_star2: Option<f64> },
    Rho(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityBound {
    /// nats per channel use
    pub value: f64,
    pub kind: BoundKind,
    pub inputs: BoundInputs,
}

impl CapacityBound {
    pub fn bits(&self) -> f64 {
        self.value / LN_2
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho < 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            key: "rho",
            value: rho,
            expected: "(0, 1)",
        })
    }
}

/// `K = log pi - 1 - log 2 + log eta*^2 + (1/2) log(eta_max^2/eta_min^2) + 2 eta_max^2/eta*^2`.
pub fn bound_k(bounds: &EtaBounds, eta_star2: f64) -> Result<CapacityBound> {
    let slack = 1e-12 * bounds.eta_max2;
    if !(eta_star2 >= bounds.eta_min2 - slack && eta_star2 <= bounds.eta_max2 + slack) {
        return Err(Error::EtaStarOutside {
            eta_star2,
            eta_min2: bounds.eta_min2,
            eta_max2: bounds.eta_max2,
        });
    }
    let value = PI.ln() - 1.0 - LN_2
        + eta_star2.ln()
        + 0.5 * (bounds.eta_max2 / bounds.eta_min2).ln()
        + 2.0 * bounds.eta_max2 / eta_star2;
    Ok(CapacityBound {
        value,
        kind: BoundKind::KRaw,
        inputs: BoundInputs::Eta {
            bounds: *bounds,
            eta_star2: Some(eta_star2),
        },
    })
}

/// `K` at `eta*^2 = eta_min^2`, where it is largest over the admissible interval:
/// `log x + 2 eta_max^2 / x` decreases for `x < 2 eta_max^2`.
pub fn bound_k_conservative(bounds: &EtaBounds) -> CapacityBound {
    bound_k(bounds, bounds.eta_min2).expect("eta_min^2 is admissible")
}

/// `log(pi/2) + 2(eta_max^2/eta_min^2 - 1/2) + log eta_max^2 + (1/2) log(eta_max^2/eta_min^2)`.
pub fn proposition_bound(bounds: &EtaBounds) -> CapacityBound {
    let q = bounds.eta_max2 / bounds.eta_min2;
    let value = (PI / 2.0).ln() + 2.0 * (q - 0.5) + bounds.eta_max2.ln() + 0.5 * q.ln();
    CapacityBound {
        value,
        kind: BoundKind::Proposition,
        inputs: BoundInputs::Eta {
            bounds: *bounds,
            eta_star2: None,
        },
    }
}

/// `log(pi/2) + 2(1/rho - 1/2) + (3/2) log(1/rho)`.
pub fn geometric_bound(rho: f64) -> Result<CapacityBound> {
    check_rho(rho)?;
    let inv = 1.0 / rho;
    Ok(CapacityBound {
        value: (PI / 2.0).ln() + 2.0 * (inv - 0.5) + 1.5 * inv.ln(),
        kind: BoundKind::Geometric,
        inputs: BoundInputs::Rho(rho),
    })
}

/// Bounds for `alpha_l = rho^l`: `(log(1/rho), 1/rho)`.
///
/// The first is what the entropy-scaling derivation yields; the second is
/// the value displayed alongside it. Reports compare against the first.
pub fn exponential_bound(rho: f64) -> Result<(CapacityBound, CapacityBound)> {
    check_rho(rho)?;
    let proof = CapacityBound {
        value: -rho.ln(),
        kind: BoundKind::ExponentialProof,
        inputs: BoundInputs::Rho(rho),
    };
    let stated = CapacityBound {
        value: 1.0 / rho,
        kind: BoundKind::ExponentialStated,
        inputs: BoundInputs::Rho(rho),
    };
    Ok((proof, stated))
}

/// Every bound that applies to `alphas`: `K` at `eta_min^2` and the
/// proposition always; geometric and exponential for `alpha_l = rho^l`, `alpha_0 = 1`.
pub fn applicable_bounds(alphas: &AlphaSequence) -> Vec<CapacityBound> {
    let b = eta_bounds(alphas);
    let mut out = vec![bound_k_conservative(&b), proposition_bound(&b)];
    if alphas.is_pure_exponential() {
        let rho = alphas.rho();
        out.push(geometric_bound(rho).expect("rho validated"));
        let (proof, stated) = exponential_bound(rho).expect("rho validated");
        out.push(proof);
        out.push(stated);
    }
    out
}
