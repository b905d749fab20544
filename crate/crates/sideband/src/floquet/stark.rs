//! Stark-shift contributions to the two-step effective Hamiltonian.
//!
//! The oscillating Stark shift `H_ac(t) = Σ_p Σ_n A_p^n σ_ss^n e^{ipδt}`
//! adds to the drive harmonics. In the two-step error
//! `(4/δ²) Σ_p (−1)^p [[H̃_p + H̃_ac,p, H_0], H̃_p + H̃_ac,p] / p²`
//! the Stark-involving pieces are
//! `[[Ã,H_0],Ã] + [[Ã,H_0],H̃] + [[H̃,H_0],Ã]`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::drive::CouplingMatrix;
use crate::error::Result;
use crate::hamiltonian::{pauli_coupling, sigma_x, sigma_y, BasisSector, SectorOperator};
use crate::linalg::{C64, ZERO};

use super::twostep::{twostep_coefficients, CoefficientTable, TwoStepSeries};

/// Per-site Stark amplitudes keyed by harmonic.
pub type StarkHarmonics = BTreeMap<i64, Vec<C64>>;

/// Two-step amplitudes `Ã_p^n` from one-step `A_q^n`.
pub fn stark_twostep(table: &CoefficientTable, harmonics: &StarkHarmonics, n_sites: usize) -> StarkHarmonics {
    let mut out = StarkHarmonics::new();
    for (&p, row) in table {
        let mut a = vec![ZERO; n_sites];
        let mut any = false;
        for &(q, c) in row {
            if let Some(aq) = harmonics.get(&q) {
                for (x, y) in a.iter_mut().zip(aq) {
                    *x += c * y;
                }
                any = true;
            }
        }
        if any && a.iter().any(|z| *z != ZERO) {
            out.insert(p, a);
        }
    }
    out
}

/// Coefficient table sized for a Stark series.
pub fn stark_table(harmonics: &StarkHarmonics, m_max: usize) -> Result<CoefficientTable> {
    let q_max = harmonics.keys().map(|p| p.unsigned_abs() as usize).max().unwrap_or(0);
    twostep_coefficients(q_max, m_max)
}

/// `Σ_n a_n σ_ss^n` on the sector.
pub fn stark_diagonal(amplitudes: &[C64], sector: &BasisSector) -> SectorOperator {
    let d: Vec<C64> = sector
        .states()
        .iter()
        .map(|&p| {
            let mut z = ZERO;
            for (n, a) in amplitudes.iter().enumerate() {
                if p >> n & 1 == 1 {
                    z += a;
                }
            }
            z
        })
        .collect();
    SectorOperator::from_complex_diagonal(&d)
}

/// Butterfly level scheme: `Σ_n a_n (r_g σ_gg^n + r_s σ_ss^n)` with
/// `r = Δ_level / Δ`.
pub fn butterfly_stark_diagonal(amplitudes: &[C64], r_g: f64, r_s: f64, sector: &BasisSector) -> SectorOperator {
    let d: Vec<C64> = sector
        .states()
        .iter()
        .map(|&p| {
            let mut z = ZERO;
            for (n, a) in amplitudes.iter().enumerate() {
                z += a * if p >> n & 1 == 1 { r_s } else { r_g };
            }
            z
        })
        .collect();
    SectorOperator::from_complex_diagonal(&d)
}

fn nested(a: &SectorOperator, h0: &SectorOperator, b: &SectorOperator) -> SectorOperator {
    a.commutator(h0).commutator(b)
}

#[derive(Clone, Debug)]
pub struct StarkErrorReport {
    /// Stark-involving part of the second-order error (already divided by `δ²`).
    pub stark: SectorOperator,
    /// Dominant `[[Ã,H_0],Ã]` part alone.
    pub stark_stark: SectorOperator,
    /// Two-step amplitudes used.
    pub amplitudes: StarkHarmonics,
}

/// Stark error operator of the two-step drive.
pub fn stark_error2(twostep: &TwoStepSeries, stark: &StarkHarmonics, sector: &BasisSector) -> Result<StarkErrorReport> {
    let table = stark_table(stark, twostep.m_max)?;
    let amps = stark_twostep(&table, stark, sector.sites());
    let h0 = twostep.base.h0();
    let dim = sector.dim();
    let delta = twostep.delta();
    let mut total = SectorOperator::zeros(dim);
    let mut ss = SectorOperator::zeros(dim);
    for (&p, a) in amps.range(1..) {
        let w = 4.0 * if p % 2 == 0 { 1.0 } else { -1.0 } / ((p * p) as f64 * delta * delta);
        let d = stark_diagonal(a, sector);
        let ht = twostep.component(p);
        let aa = nested(&d, h0, &d);
        let cross = nested(&d, h0, &ht).add(&nested(&ht, h0, &d));
        ss = ss.add(&aa.scale_re(w));
        total = total.add(&aa.add(&cross).scale_re(w));
    }
    Ok(StarkErrorReport { stark: total, stark_stark: ss, amplitudes: amps })
}

#[derive(Clone, Debug, Serialize)]
pub struct CouplingCorrection {
    /// `Ã_{m,n} = Σ_{p≥1} 4(−1)^{p+1} (Ã_p^m − Ã_p^n)² / (δ² p²)`.
    pub a_tilde: CouplingMatrix,
    /// `J′_{m,n} = (1 + Ã_{m,n}) J_{m,n}`.
    pub j_prime: CouplingMatrix,
}

/// Rescaled couplings from the dominant Stark term.
pub fn stark_coupling_correction(amplitudes: &StarkHarmonics, delta: f64, j: &CouplingMatrix) -> CouplingCorrection {
    let n = j.dim();
    let a_tilde = CouplingMatrix::from_fn(n, |m, k| {
        let mut z = ZERO;
        for (&p, a) in amplitudes.range(1..) {
            let w = 4.0 * if p % 2 == 0 { -1.0 } else { 1.0 } / ((p * p) as f64 * delta * delta);
            let d = a[m] - a[k];
            z += d * d * w;
        }
        z
    });
    let j_prime = j.map(|m, k, v| (C64::new(1.0, 0.0) + a_tilde.get(m, k)) * v);
    CouplingCorrection { a_tilde, j_prime }
}

/// Closed form of `[[H̃_ac,p, H_0], H̃_ac,p]` for the butterfly XX model
/// `H_0 = Σ_{m<n} J_{m,n} σ_x^m σ_x^n`:
/// `−(r_g − r_s)² Σ_{m<n} J_{m,n} [(a_m² + a_n²) σ_xσ_x − 2 a_m a_n σ_yσ_y]`.
pub fn butterfly_xx_stark_commutator(
    j: &CouplingMatrix,
    amplitudes: &[C64],
    r_g: f64,
    r_s: f64,
    sector: &BasisSector,
) -> SectorOperator {
    let f = -(r_g - r_s).powi(2);
    let xx = j.map(|m, k, v| v * f * (amplitudes[m] * amplitudes[m] + amplitudes[k] * amplitudes[k]));
    let yy = j.map(|m, k, v| v * f * -2.0 * amplitudes[m] * amplitudes[k]);
    pauli_coupling(&xx, sigma_x(), sigma_x(), sector).add(&pauli_coupling(&yy, sigma_y(), sigma_y(), sector))
}
