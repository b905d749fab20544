//! High-frequency effective Hamiltonians of the driven chain.
//!
//! For `H(t) = Σ_p H_p e^{ipδt}` the stroboscopic generator is expanded in
//! `1/δ`:
//!
//! ```text
//! H_eff,1 = H_0 + (1/δ) Σ_{p≥1} [H_p, H_{−p}]/p
//!               + (1/2δ²) Σ_{p≥1} ([[H_p,H_0],H_{−p}] + [[H_{−p},H_0],H_p])/p²
//! ```
//!
//! The two-step drive (forward period followed by its time reverse) removes
//! the first-order term; see [`twostep`].

pub mod stark;
pub mod twostep;

pub use stark::*;
pub use twostep::*;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamiltonian::{FourierSeries, SectorOperator};
use crate::linalg::{hermiticity_error, Mat, C64, ZERO};

/// Dense operators above this dimension are too costly for the triple sum.
pub const REMAINDER_MAX_DIM: usize = 512;

/// `[A, B]` with sparse `A` and dense `B`.
pub(crate) fn comm_sd(a: &SectorOperator, b: &Mat) -> Mat {
    a.mul_dense(b) - a.dense_mul(b)
}

/// `[B, A]` with dense `B` and sparse `A`.
pub(crate) fn comm_ds(b: &Mat, a: &SectorOperator) -> Mat {
    a.dense_mul(b) - a.mul_dense(b)
}

pub(crate) fn hermitian_part(m: &Mat) -> Mat {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Effective Hamiltonian split by order.
///
/// `H_eff(δ) = H_0 + first/δ + second/δ²`, so one report serves a whole
/// scan over `δ` at fixed drive shape.
#[derive(Clone, Debug)]
pub struct EffectiveHamiltonianReport {
    pub delta: f64,
    pub h0: Mat,
    pub first: Mat,
    pub second: Mat,
    pub p_max: usize,
    /// Odd-harmonic truncation of a two-step series.
    pub m_max: Option<usize>,
    /// Bound on the operator norm of the neglected harmonics' contribution
    /// to `second/δ²`.
    pub tail_estimate: f64,
    pub warnings: Vec<String>,
}

impl EffectiveHamiltonianReport {
    pub fn heff(&self) -> Mat {
        self.heff_at(self.delta)
    }

    /// Same drive shape, different base frequency.
    pub fn heff_at(&self, delta: f64) -> Mat {
        let m = &self.h0 + &self.first * C64::new(1.0 / delta, 0.0) + &self.second * C64::new(1.0 / (delta * delta), 0.0);
        hermitian_part(&m)
    }

    pub fn hermiticity_error(&self) -> f64 {
        let raw = &self.h0
            + &self.first * C64::new(1.0 / self.delta, 0.0)
            + &self.second * C64::new(1.0 / (self.delta * self.delta), 0.0);
        hermiticity_error(&raw)
    }

    pub fn summary(&self) -> ReportSummary {
        ReportSummary {
            delta: self.delta,
            dim: self.h0.nrows(),
            p_max: self.p_max,
            m_max: self.m_max,
            first_order_norm: crate::linalg::spectral_norm(&self.first),
            second_order_norm: crate::linalg::spectral_norm(&self.second),
            tail_estimate: self.tail_estimate,
            hermiticity_error: self.hermiticity_error(),
            warnings: self.warnings.clone(),
        }
    }
}

/// JSON-friendly digest of a report.
#[derive(Clone, Debug, Serialize)]
pub struct ReportSummary {
    pub delta: f64,
    pub dim: usize,
    pub p_max: usize,
    pub m_max: Option<usize>,
    pub first_order_norm: f64,
    pub second_order_norm: f64,
    pub tail_estimate: f64,
    pub hermiticity_error: f64,
    pub warnings: Vec<String>,
}

fn clamp_p_max(series: &FourierSeries, p_max: Option<usize>, warnings: &mut Vec<String>) -> usize {
    let natural = series.p_max();
    match p_max {
        None => natural,
        Some(p) if p > natural => {
            warnings.push(format!("p_max {p} exceeds the largest harmonic {natural}; clamped"));
            natural
        }
        Some(p) => p,
    }
}

/// First-order commutator sum `Σ_{p≥1} [H_p, H_{−p}]/p`.
pub fn first_order_sum(series: &FourierSeries, p_max: usize) -> Mat {
    let dim = series.dim();
    let zero = SectorOperator::zeros(dim);
    let mut f = Mat::zeros(dim, dim);
    for p in 1..=p_max as i64 {
        let hp = series.get(p).unwrap_or(&zero);
        let hm = series.get(-p).unwrap_or(&zero);
        if hp.is_zero() && hm.is_zero() {
            continue;
        }
        f += comm_sd(hp, &hm.to_dense()) * C64::new(1.0 / p as f64, 0.0);
    }
    f
}

/// Effective Hamiltonian of a one-step drive.
pub fn heff1(series: &FourierSeries, p_max: Option<usize>) -> EffectiveHamiltonianReport {
    let mut warnings = Vec::new();
    let p_max = clamp_p_max(series, p_max, &mut warnings);
    let dim = series.dim();
    let zero = SectorOperator::zeros(dim);
    let h0 = series.h0().to_dense();
    let first = first_order_sum(series, p_max);
    let mut second = Mat::zeros(dim, dim);
    for p in 1..=p_max as i64 {
        let hp = series.get(p).unwrap_or(&zero);
        let hm = series.get(-p).unwrap_or(&zero);
        if hp.is_zero() && hm.is_zero() {
            continue;
        }
        // X = [[H_p, H_0], H_{−p}], and [[H_{−p}, H_0], H_p] = X†
        let c = comm_sd(hp, &h0);
        let x = comm_ds(&c, hm);
        second += (&x + x.adjoint()) * C64::new(0.5 / (p * p) as f64, 0.0);
    }
    EffectiveHamiltonianReport {
        delta: series.delta,
        h0,
        first,
        second,
        p_max,
        m_max: None,
        tail_estimate: 0.0,
        warnings,
    }
}

/// Second-order van Vleck term left out of `H_eff,1`:
/// `(1/3) Σ_{m≠0} Σ_{m'≠0,m} [H_{−m'}, [H_{m'−m}, H_m]] / (m m')`.
///
/// The full generator is `H_eff,1 + R₂/δ² + O(δ⁻³)`.
pub fn second_order_remainder(series: &FourierSeries) -> Result<Mat> {
    let dim = series.dim();
    if dim > REMAINDER_MAX_DIM {
        return Err(Error::Invalid(format!("remainder needs dim <= {REMAINDER_MAX_DIM}, got {dim}")));
    }
    let dense: std::collections::BTreeMap<i64, Mat> =
        series.components.iter().map(|(&p, h)| (p, h.to_dense())).collect();
    let zero = Mat::zeros(dim, dim);
    let get = |p: i64| dense.get(&p).unwrap_or(&zero);
    let ps: Vec<i64> = dense.keys().copied().filter(|&p| p != 0).collect();
    let mut out = Mat::zeros(dim, dim);
    for &m in &ps {
        for &mp in &ps {
            if mp == m {
                continue;
            }
            let mid = get(mp - m);
            if mid.iter().all(|z| *z == ZERO) {
                continue;
            }
            let hm = get(m);
            let inner = mid * hm - hm * mid;
            let outer = get(-mp);
            let term = outer * &inner - &inner * outer;
            out += term * C64::new(1.0 / (3.0 * (m * mp) as f64), 0.0);
        }
    }
    Ok(hermitian_part(&out))
}

/// First-order kick `K = Σ_{p≠0} H_p / (i p δ)`; stroboscopic evolution
/// from `t = 0` is `e^{−iK} e^{−iH_eff t} e^{iK}` up to `O(δ⁻²)`.
pub fn kick_operator(series: &FourierSeries) -> Mat {
    kick_operator_at(series, 0.0)
}

/// Kick for stroboscopic evolution starting at `t0`:
/// `K(t0) = Σ_{p≠0} H_p e^{ipδt0} / (i p δ)`.
pub fn kick_operator_at(series: &FourierSeries, t0: f64) -> Mat {
    let dim = series.dim();
    let mut k = Mat::zeros(dim, dim);
    for (&p, h) in &series.components {
        if p == 0 {
            continue;
        }
        let c = C64::from_polar(1.0, p as f64 * series.delta * t0) * C64::new(0.0, -1.0 / (p as f64 * series.delta));
        for (i, j, v) in h.triplets() {
            k[(i, j)] += c * v;
        }
    }
    k
}

/// Second-order kick at `t0`:
/// `K₂ = (1/iδ²) Σ_{n≠0} e^{inδt0}/n ([H_n, H_0]/n + ½ Σ_{m≠0,n} [H_m, H_{n−m}]/m)`.
pub fn kick_operator2_at(series: &FourierSeries, t0: f64) -> Result<Mat> {
    let dim = series.dim();
    if dim > REMAINDER_MAX_DIM {
        return Err(Error::Invalid(format!("second-order kick needs dim <= {REMAINDER_MAX_DIM}, got {dim}")));
    }
    let dense: std::collections::BTreeMap<i64, Mat> =
        series.components.iter().map(|(&p, h)| (p, h.to_dense())).collect();
    let h0 = &dense[&0];
    let delta = series.delta;
    let ps: Vec<i64> = dense.keys().copied().filter(|&p| p != 0).collect();
    let mut k = Mat::zeros(dim, dim);
    for &n in &ps {
        let hn = &dense[&n];
        let mut inner = (hn * h0 - h0 * hn) / C64::new(n as f64, 0.0);
        for &m in &ps {
            if m == n {
                continue;
            }
            if let Some(hr) = dense.get(&(n - m)) {
                let hm = &dense[&m];
                inner += (hm * hr - hr * hm) * C64::new(0.5 / m as f64, 0.0);
            }
        }
        let c = C64::from_polar(1.0, n as f64 * delta * t0) * C64::new(0.0, -1.0 / (n as f64 * delta * delta));
        k += inner * c;
    }
    Ok(k)
}

/// Ground energy and state of a dense Hermitian matrix.
pub fn ground_state(m: &Mat) -> Result<(f64, Vec<C64>)> {
    let dim = m.nrows();
    crate::linalg::lanczos_ground(
        dim,
        |x, y| {
            let v = nalgebra::DVector::from_column_slice(x);
            y.copy_from_slice((m * v).as_slice());
        },
        Default::default(),
    )
}

/// Energies and overlaps of `H_0` against an effective Hamiltonian.
#[derive(Clone, Debug, Serialize)]
pub struct GroundComparison {
    pub delta: f64,
    pub e0: f64,
    pub e_eff: f64,
    pub energy_error: f64,
    pub overlap: f64,
}

pub fn compare_ground(h0: &Mat, heff: &Mat, delta: f64) -> Result<GroundComparison> {
    let (e0, v0) = ground_state(h0)?;
    let (e1, v1) = ground_state(heff)?;
    Ok(GroundComparison {
        delta,
        e0,
        e_eff: e1,
        energy_error: ((e0 - e1) / e0).abs(),
        overlap: crate::linalg::vdot(&v0, &v1).norm(),
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::hamiltonian::{build_sector, fourier_from_drive};
    use crate::lattice::build_chain;
    use crate::linalg::max_abs;
    use std::collections::BTreeMap;

    pub(crate) fn random_series(dim: usize, p: i64, seed: u64, delta: f64) -> FourierSeries {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut comps = BTreeMap::new();
        let h = Mat::from_fn(dim, dim, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        comps.insert(0, SectorOperator::from_dense(&hermitian_part(&h), 0.0));
        for k in 1..=p {
            let a = Mat::from_fn(dim, dim, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
            comps.insert(k, SectorOperator::from_dense(&a, 0.0));
            comps.insert(-k, SectorOperator::from_dense(&a.adjoint(), 0.0));
        }
        FourierSeries::new(delta, comps).unwrap()
    }

    #[test]
    fn static_series_is_its_own_effective_hamiltonian() {
        let h = SectorOperator::from_diagonal(&[1.0, -2.0, 0.5]);
        let r = heff1(&FourierSeries::constant(3.0, h.clone()), None);
        assert!(max_abs(&(r.heff() - h.to_dense())) == 0.0);
    }

    #[test]
    fn symmetric_harmonics_have_no_first_order_term() {
        let mut s = random_series(4, 2, 1, 5.0);
        for p in 1..=2 {
            let herm = hermitian_part(&s.components[&p].to_dense());
            let op = SectorOperator::from_dense(&herm, 0.0);
            s.components.insert(p, op.clone());
            s.components.insert(-p, op);
        }
        let r = heff1(&s, None);
        assert!(max_abs(&r.first) < 1e-14);
        assert!(r.hermiticity_error() < 1e-12);
    }

    #[test]
    fn p_max_is_clamped_with_warning() {
        let s = random_series(3, 2, 2, 5.0);
        let r = heff1(&s, Some(7));
        assert_eq!(r.p_max, 2);
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn second_order_matches_explicit_formula() {
        // dense oracle written directly from the expansion
        let s = random_series(3, 2, 3, 5.0);
        let d = |p: i64| s.components[&p].to_dense();
        let h0 = d(0);
        let mut want = Mat::zeros(3, 3);
        for p in 1..=2i64 {
            let a = crate::linalg::commutator(&crate::linalg::commutator(&d(p), &h0), &d(-p));
            let b = crate::linalg::commutator(&crate::linalg::commutator(&d(-p), &h0), &d(p));
            want += (a + b) * C64::new(0.5 / (p * p) as f64, 0.0);
        }
        let r = heff1(&s, None);
        assert!(max_abs(&(r.second - want)) < 1e-12);
    }

    #[test]
    fn chain_drive_report_is_hermitian() {
        use crate::drive::{CouplingKernel, ModulationMode, RamanDrive, Sideband};
        let lat = build_chain(5, 1.0).unwrap();
        let d = RamanDrive::new(
            vec![Sideband::plain(0.0, C64::new(1.0, 0.0)), Sideband::plain(1.0, C64::new(0.3, 0.2))],
            ModulationMode::FrequencyShift,
        )
        .unwrap();
        let s = fourier_from_drive(&lat, &d, &CouplingKernel::Constant { jt: 1.0 }, &build_sector(5, 2).unwrap()).unwrap();
        let r = heff1(&s, None);
        assert!(r.hermiticity_error() < 1e-12);
        assert!(hermiticity_error(&second_order_remainder(&s).unwrap()) < 1e-12);
        assert!(hermiticity_error(&kick_operator(&s)) < 1e-15);
    }
}
