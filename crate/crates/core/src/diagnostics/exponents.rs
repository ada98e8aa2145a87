use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Decay exponents of the perturbation in dimension `d` for adiabatic exponent `gamma`.
///
/// `c_dg = min(1, d (gamma-1)/2) - d/2`, `c_dgs = c_dg + sigma` and the bootstrap weight
/// `a = 1 + d/2 + c_dg`, so that `|(rho, w)|_{\dot H^sigma} <~ (1+t)^{-c_dgs}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayExponents {
    pub d: usize,
    pub gamma: f64,
    pub sigma: f64,
    pub c_dg: f64,
    pub c_dgs: f64,
    pub a: f64,
}

impl DecayExponents {
    pub fn new(d: usize, gamma: f64, sigma: f64) -> Result<Self> {
        if !(1..=3).contains(&d) {
            return Err(Error::InvalidParams(format!("dimension {d} not in 1..=3")));
        }
        if !(gamma > 1.0) || !gamma.is_finite() {
            return Err(Error::InvalidParams(format!("γ={gamma} must exceed 1")));
        }
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidParams(format!("σ={sigma} must be nonnegative")));
        }
        let half_d = d as f64 / 2.0;
        let c_dg = (half_d * (gamma - 1.0)).min(1.0) - half_d;
        Ok(Self {
            d,
            gamma,
            sigma,
            c_dg,
            c_dgs: c_dg + sigma,
            a: 1.0 + half_d + c_dg,
        })
    }

    /// Predicted log-log slope `-c_dgs` of `X_sigma` against `1 + t`.
    pub fn predicted_slope(&self) -> f64 {
        -self.c_dgs
    }
}

pub fn decay_exponents(d: usize, gamma: f64, sigma: f64) -> Result<DecayExponents> {
    DecayExponents::new(d, gamma, sigma)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documented_values() {
        assert!((decay_exponents(3, 5.0 / 3.0, 0.0).unwrap().c_dg + 0.5).abs() < 1e-15);
        assert_eq!(decay_exponents(1, 2.0, 0.0).unwrap().c_dg, 0.0);
        assert!((decay_exponents(3, 1.4, 2.0).unwrap().c_dgs - 1.1).abs() < 1e-14);
    }

    #[test]
    fn weight_exceeds_one_iff_gamma_above_one() {
        for d in 1..=3 {
            for g in [1.0001, 1.2, 1.4, 5.0 / 3.0, 2.0, 3.0] {
                assert!(decay_exponents(d, g, 0.0).unwrap().a > 1.0);
            }
        }
        assert!(decay_exponents(2, 1.0, 0.0).is_err());
        assert!(decay_exponents(2, 1.5, -0.1).is_err());
    }
}
