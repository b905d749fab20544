//! Stroboscopic comparison of the exact propagator with the Floquet
//! effective Hamiltonian.
//!
//! Over `n` periods `U = e^{−iK} e^{−iH_F nT} e^{iK}` with `K = K₁ + K₂ + …`
//! and `H_F = H_eff,1 + R₂/δ² + O(δ⁻³)`. Dropping `R₂` shifts `U` by at
//! most `nT‖R₂‖/δ²`; the neglected `K₃` is estimated by `‖K₁‖‖K₂‖`.

use serde::Serialize;

use crate::error::Result;
use crate::floquet::{heff1, heff2, kick_operator2_at, kick_operator_at, second_order_remainder, TwoStepSeries};
use crate::hamiltonian::FourierSeries;
use crate::linalg::{expm_herm, Mat};

use super::{op_norm, propagate, propagate_twostep, PropagateOptions};

#[derive(Clone, Debug, Serialize)]
pub struct BandCheck {
    pub n_periods: usize,
    pub delta: f64,
    /// `‖U(nT) − e^{−iH_eff nT}‖`.
    pub measured: f64,
    /// `‖e^{−iK} e^{−iH_eff nT} e^{iK} − e^{−iH_eff nT}‖`.
    pub predicted: f64,
    /// `‖U(nT) − e^{−iK} e^{−iH_eff nT} e^{iK}‖`.
    pub deviation: f64,
    pub band: f64,
    pub remainder_norm: f64,
    pub kick_norms: [f64; 2],
    pub richardson: f64,
    pub within: bool,
}

fn conjugate(k: &Mat, e: &Mat) -> Mat {
    let w = expm_herm(k, 1.0);
    &w * e * w.adjoint()
}

/// One-step drive over `n_periods` periods against `H_eff,1`.
pub fn floquet_band_check(series: &FourierSeries, n_periods: usize, opts: PropagateOptions) -> Result<BandCheck> {
    let t = series.period() * n_periods as f64;
    let u = propagate(series, t, opts)?;
    let heff = heff1(series, None).heff();
    let e = expm_herm(&heff, t);
    let k1 = kick_operator_at(series, 0.0);
    let k2 = kick_operator2_at(series, 0.0)?;
    let k = (&k1 + &k2 + (&k1 + &k2).adjoint()) * crate::linalg::C64::new(0.5, 0.0);
    let predicted_u = conjugate(&k, &e);
    let r2 = op_norm(&second_order_remainder(series)?);
    let kn = [op_norm(&k1), op_norm(&k2)];
    let band = t * r2 / series.delta.powi(2) + 2.0 * kn[0] * kn[1] + u.richardson;
    let measured = op_norm(&(&u.unitary - &e));
    let predicted = op_norm(&(&predicted_u - &e));
    let deviation = op_norm(&(&u.unitary - &predicted_u));
    Ok(BandCheck {
        n_periods,
        delta: series.delta,
        measured,
        predicted,
        deviation,
        band,
        remainder_norm: r2,
        kick_norms: kn,
        richardson: u.richardson,
        within: (measured - predicted).abs() <= band && deviation <= band,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct TwoStepCheck {
    pub n_periods: usize,
    pub delta: f64,
    /// `‖U(2nT) − e^{−iH_eff,2 2nT}‖`.
    pub measured: f64,
    /// `‖U(2nT) − e^{−iK} e^{−iH_eff,2 2nT} e^{iK}‖` with the first-order
    /// kick of the two-step series.
    pub deviation: f64,
    pub richardson: f64,
}

/// Two-step drive over `n_periods` double periods `2T` against `H_eff,2`.
pub fn twostep_stroboscopic(twostep: &TwoStepSeries, n_periods: usize, opts: PropagateOptions) -> Result<TwoStepCheck> {
    let t = 2.0 * twostep.base.period() * n_periods as f64;
    let u = propagate_twostep(twostep, t, opts)?;
    let heff = heff2(twostep)?.heff();
    let e = expm_herm(&heff, t);
    let k = kick_operator_at(&twostep.materialize()?, 0.0);
    let k = (&k + k.adjoint()) * crate::linalg::C64::new(0.5, 0.0);
    let pred = conjugate(&k, &e);
    Ok(TwoStepCheck {
        n_periods,
        delta: twostep.delta(),
        measured: op_norm(&(&u.unitary - &e)),
        deviation: op_norm(&(&u.unitary - &pred)),
        richardson: u.richardson,
    })
}
