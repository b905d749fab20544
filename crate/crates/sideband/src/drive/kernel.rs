//! Photon-mediated exchange strength versus separation.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum CouplingKernel {
    Constant { jt: f64 },
    /// `J̃ exp(−|r|/ξ)`.
    Exp1d { jt: f64, xi: f64 },
    /// `J̃ K0(|r|/ξ) / K0(1/ξ)`, equal to `J̃` at nearest neighbours.
    Bessel2d { jt: f64, xi: f64 },
}

impl CouplingKernel {
    pub fn jt(&self) -> f64 {
        match *self {
            CouplingKernel::Constant { jt }
            | CouplingKernel::Exp1d { jt, .. }
            | CouplingKernel::Bessel2d { jt, .. } => jt,
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            CouplingKernel::Constant { jt } => jt,
            CouplingKernel::Exp1d { jt, xi } => jt * (-r.abs() / xi).exp(),
            CouplingKernel::Bessel2d { jt, xi } => jt * bessel_k0(r.abs() / xi) / bessel_k0(1.0 / xi),
        }
    }
}

/// Modified Bessel function `K0(x)` for `x > 0`.
///
/// Trapezoidal rule on `∫_0^∞ exp(−x cosh t) dt`; the integrand is
/// analytic and decays double-exponentially, so the rule converges
/// geometrically in the step.
pub fn bessel_k0(x: f64) -> f64 {
    assert!(x > 0.0, "K0 needs a positive argument");
    let t_max = (700.0 / x + 1.0).acosh();
    let h = 0.02;
    let steps = (t_max / h).ceil() as usize;
    let mut sum = 0.5 * (-x).exp();
    for k in 1..=steps {
        sum += (-x * (k as f64 * h).cosh()).exp();
    }
    sum * h
}
