use serde::Serialize;

use crate::coupling::CouplingCase;
use crate::error::{Error, Result};

/// How close `2/(gamma-1)` must be to an integer for the regularity waiver.
const INTEGER_TOL: f64 = 1e-12;

/// Outcome of [`admissibility_check`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Admissibility {
    pub case: CouplingCase,
    pub admissible: bool,
    /// Human-readable statements of every violated constraint (empty when admissible).
    pub violations: Vec<String>,
    /// Whether the upper bound on `s` was waived because `2/(gamma-1)` is an integer.
    pub s_bound_waived: bool,
}

fn integer_exponent(gamma: f64) -> bool {
    let k = 2.0 / (gamma - 1.0);
    (k - k.round()).abs() <= INTEGER_TOL * k.max(1.0)
}

fn poisson_violations(d: usize, gamma: f64, s: f64, waived: bool) -> Vec<String> {
    let mut v = Vec::new();
    if d < 3 {
        v.push("Poisson requires d≥3".to_string());
    }
    if !(gamma < 5.0 / 3.0) {
        v.push(format!("Poisson requires γ<5/3 (γ={gamma})"));
    }
    if d >= 2 {
        let cap = 1.0 + 4.0 / (d as f64 - 1.0);
        if !(gamma < cap) {
            v.push(format!("Poisson requires γ<1+4/(d−1)={cap} (γ={gamma})"));
        }
    }
    let cap = 1.5 + 2.0 / (gamma - 1.0);
    if !waived && !(s < cap) {
        v.push(format!("Poisson requires s<3/2+2/(γ−1)={cap} (s={s})"));
    }
    v
}

fn helmholtz_violations(d: usize, gamma: f64, s: f64, waived: bool) -> Vec<String> {
    let mut v = Vec::new();
    if d < 2 {
        v.push("Helmholtz requires d≥2".to_string());
    }
    let cap = 1.0 + 4.0 / (d as f64 + 1.0);
    if !(gamma < cap) {
        v.push(format!("Helmholtz requires γ<1+4/(d+1)={cap} (γ={gamma})"));
    }
    let cap = 0.5 + 2.0 / (gamma - 1.0);
    if !waived && !(s < cap) {
        v.push(format!("Helmholtz requires s<1/2+2/(γ−1)={cap} (s={s})"));
    }
    v
}

/// Decides whether `(d, gamma, s)` is covered by the global existence result for the
/// coupling selected by `(kappa, mu)`.
///
/// Pure Euler is always admissible. Poisson needs `d >= 3`, `gamma < min(5/3, 1+4/(d-1))`
/// and `s < 3/2 + 2/(gamma-1)`. Helmholtz accepts either the Poisson conditions or
/// `d >= 2`, `gamma < 1+4/(d+1)` and `s < 1/2 + 2/(gamma-1)`. The bounds on `s` are
/// dropped when `2/(gamma-1)` is an integer.
pub fn admissibility_check(d: usize, gamma: f64, s: f64, kappa: f64, mu: f64) -> Result<Admissibility> {
    if !(1..=3).contains(&d) {
        return Err(Error::InvalidParams(format!("dimension {d} not in 1..=3")));
    }
    if !(gamma > 1.0) || !gamma.is_finite() {
        return Err(Error::InvalidParams(format!("γ={gamma} must exceed 1")));
    }
    if !(s > 1.0 + d as f64 / 2.0) || !s.is_finite() {
        return Err(Error::InvalidParams(format!("s={s} must exceed 1+d/2")));
    }
    if !kappa.is_finite() || !(mu >= 0.0) || !mu.is_finite() {
        return Err(Error::InvalidParams("κ must be finite and μ nonnegative".into()));
    }
    let waived = integer_exponent(gamma);
    let (case, violations) = if kappa == 0.0 {
        (CouplingCase::Euler, Vec::new())
    } else if mu == 0.0 {
        (CouplingCase::Poisson, poisson_violations(d, gamma, s, waived))
    } else {
        let p = poisson_violations(d, gamma, s, waived);
        let h = helmholtz_violations(d, gamma, s, waived);
        if p.is_empty() || h.is_empty() {
            (CouplingCase::Helmholtz, Vec::new())
        } else {
            (CouplingCase::Helmholtz, h)
        }
    };
    Ok(Admissibility {
        case,
        admissible: violations.is_empty(),
        violations,
        s_bound_waived: waived && case != CouplingCase::Euler,
    })
}
