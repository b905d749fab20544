//! Stroboscopic XXZ: alternate `H_XY` and `H_ZZ` segments, the ZZ part
//! either given as a diagonal operator or generated from an XX-type
//! operator by a collective rotation.

use serde::Serialize;

use crate::drive::CouplingMatrix;
use crate::error::{Error, Result};
use crate::hamiltonian::SectorOperator;
use crate::linalg::{commutator, expm_herm, Mat};

use super::{matrix_power, op_norm, Generator, PropagateOptions, Rotation, Schedule, Segment};

#[derive(Clone, Debug)]
pub enum ZzGenerator {
    Diagonal(SectorOperator),
    /// Realized as `R G R†`.
    Rotated { generator: SectorOperator, rotation: Rotation },
}

impl ZzGenerator {
    /// Dense ZZ operator the segments implement.
    pub fn effective(&self, n_sites: usize) -> Mat {
        match self {
            ZzGenerator::Diagonal(h) => h.to_dense(),
            ZzGenerator::Rotated { generator, rotation } => match rotation.matrix(n_sites) {
                None => generator.to_dense(),
                Some(r) => &r * generator.to_dense() * r.adjoint(),
            },
        }
    }

    fn segment(&self, tau: f64) -> Segment {
        match self {
            ZzGenerator::Diagonal(h) => Segment::new(Generator::Static(h.clone()), tau),
            ZzGenerator::Rotated { generator, rotation } => {
                Segment::conjugated(Generator::Static(generator.clone()), tau, rotation.clone())
            }
        }
    }
}

/// One Trotter step `{H_XY, H_ZZ}` of duration `t / n_t` each.
pub fn trotter_step(hxy: &SectorOperator, zz: &ZzGenerator, t: f64, n_t: usize, n_sites: usize) -> Result<Schedule> {
    if n_t < 1 {
        return Err(Error::Invalid("need at least one Trotter step".into()));
    }
    let tau = t / n_t as f64;
    Schedule::new(n_sites, vec![Segment::new(Generator::Static(hxy.clone()), tau), zz.segment(tau)])
}

/// `(U_ZZ(τ) U_XY(τ))^{N_t}` with `τ = t / N_t`.
pub fn trotter_xxz(hxy: &SectorOperator, zz: &ZzGenerator, t: f64, n_t: usize, n_sites: usize) -> Result<Mat> {
    if t == 0.0 {
        let d = hxy.dim();
        return Ok(Mat::identity(d, d));
    }
    let step = trotter_step(hxy, zz, t, n_t, n_sites)?.unitary(PropagateOptions::default())?;
    Ok(matrix_power(&step, n_t))
}

#[derive(Clone, Debug, Serialize)]
pub struct TrotterBound {
    /// `‖[H_XY, H_ZZ]‖ t² / (2 N_t)`.
    pub exact: f64,
    /// `N (R J t)² / N_t`.
    pub scaling: f64,
    pub range_factor: f64,
    /// Largest coupling magnitude, the `J` of the scaling estimate.
    pub j: f64,
}

/// `(R, J)` with `J = max|J_{m,n}|` and `R = max_m Σ_{n>m} |J_{m,n}| / J`,
/// the number of partners a site effectively couples to. A loose measure:
/// it is 1 for nearest-neighbour chains and `Σ_n n^{−η}` for power laws.
pub fn range_factor(j: &CouplingMatrix) -> (f64, f64) {
    let n = j.dim();
    let jmax = (0..n).flat_map(|m| (0..n).map(move |k| (m, k))).map(|(m, k)| j.get(m, k).norm()).fold(0.0, f64::max);
    if jmax == 0.0 {
        return (0.0, 0.0);
    }
    let r = (0..n).map(|m| (m + 1..n).map(|k| j.get(m, k).norm()).sum::<f64>()).fold(0.0, f64::max) / jmax;
    (r, jmax)
}

pub fn trotter_bound(hxy: &Mat, hzz: &Mat, couplings: &CouplingMatrix, t: f64, n_t: usize) -> Result<TrotterBound> {
    if n_t < 1 {
        return Err(Error::Invalid("need at least one Trotter step".into()));
    }
    if hxy.shape() != hzz.shape() {
        return Err(Error::Invalid("XY and ZZ operators act on different spaces".into()));
    }
    let c = op_norm(&commutator(hxy, hzz));
    let (r, j) = range_factor(couplings);
    let n = couplings.dim() as f64;
    Ok(TrotterBound {
        exact: c * t * t / (2.0 * n_t as f64),
        scaling: n * (r * j * t).powi(2) / n_t as f64,
        range_factor: r,
        j,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct TrotterComparison {
    pub t: f64,
    pub n_t: usize,
    /// `‖U_Trotter − exp(−i(H_XY + H_ZZ)t)‖`.
    pub error: f64,
    pub bound: TrotterBound,
}

/// Trotter product against the exact XXZ propagator for each `N_t`.
pub fn trotter_compare(
    hxy: &SectorOperator,
    zz: &ZzGenerator,
    couplings: &CouplingMatrix,
    t: f64,
    steps: &[usize],
    n_sites: usize,
) -> Result<Vec<TrotterComparison>> {
    let a = hxy.to_dense();
    let b = zz.effective(n_sites);
    if a.shape() != b.shape() {
        return Err(Error::Invalid("XY and ZZ operators act on different spaces".into()));
    }
    let exact = expm_herm(&(&a + &b), t);
    steps
        .iter()
        .map(|&n_t| {
            let u = trotter_xxz(hxy, zz, t, n_t, n_sites)?;
            Ok(TrotterComparison { t, n_t, error: op_norm(&(u - &exact)), bound: trotter_bound(&a, &b, couplings, t, n_t)? })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{build_full, build_sector, build_xy, build_zz, pauli_coupling, sigma_x, sigma_y};
    use crate::linalg::{max_abs, unitarity_error, C64};
    use std::f64::consts::FRAC_PI_2;

    fn chain(n: usize, f: impl Fn(usize) -> f64) -> CouplingMatrix {
        CouplingMatrix::from_fn(n, |m, k| if m == k { C64::new(0.0, 0.0) } else { C64::new(f(m.abs_diff(k)), 0.0) })
    }

    #[test]
    fn commuting_split_is_exact() {
        // two sites: σxσx + σyσy commutes with σzσz
        let sector = build_full(2).unwrap();
        let j = chain(2, |_| 0.9);
        let hxy = build_xy(&j, &sector).unwrap();
        let zz = build_zz(&j, &sector).unwrap();
        let u = trotter_xxz(&hxy, &ZzGenerator::Diagonal(zz.clone()), 1.3, 3, 2).unwrap();
        let want = expm_herm(&hxy.add(&zz).to_dense(), 1.3);
        assert!(max_abs(&(u - want)) < 1e-13);
        let b = trotter_bound(&hxy.to_dense(), &zz.to_dense(), &j, 1.3, 3).unwrap();
        assert!(b.exact < 1e-14);
    }

    #[test]
    fn bound_halves_with_doubled_steps() {
        let sector = build_sector(5, 2).unwrap();
        let j = chain(5, |d| 1.0 / d as f64);
        let a = build_xy(&j, &sector).unwrap().to_dense();
        let b = build_zz(&j, &sector).unwrap().to_dense();
        let b8 = trotter_bound(&a, &b, &j, 1.0, 8).unwrap();
        let b16 = trotter_bound(&a, &b, &j, 1.0, 16).unwrap();
        assert_eq!(b8.exact, 2.0 * b16.exact);
        assert_eq!(b8.scaling, 2.0 * b16.scaling);
    }

    #[test]
    fn nearest_neighbour_range_is_one() {
        let j = chain(7, |d| if d == 1 { 0.6 } else { 0.0 });
        assert_eq!(range_factor(&j), (1.0, 0.6));
        let p = chain(40, |d| 1.0 / (d as f64).powi(2));
        let want: f64 = (1..40).map(|d| 1.0 / (d as f64).powi(2)).sum();
        assert!((range_factor(&p).0 - want).abs() < 1e-12);
    }

    #[test]
    fn error_below_bound_and_halves() {
        let n = 5;
        let sector = build_sector(n, 2).unwrap();
        let j = chain(n, |d| 1.0 / d as f64);
        let hxy = build_xy(&j, &sector).unwrap();
        let zz = ZzGenerator::Diagonal(build_zz(&j, &sector).unwrap());
        let rows = trotter_compare(&hxy, &zz, &j, 1.0, &[8, 16, 32], n).unwrap();
        for r in &rows {
            assert!(r.error <= r.bound.exact, "{} > {}", r.error, r.bound.exact);
        }
        for w in rows.windows(2) {
            let ratio = w[0].error / w[1].error;
            assert!((1.6..=2.4).contains(&ratio), "{ratio}");
        }
    }

    #[test]
    fn rotated_xx_generates_zz() {
        let n = 4;
        let sector = build_full(n).unwrap();
        let j = chain(n, |d| 1.0 / (d * d) as f64);
        let hxy = pauli_coupling(&j, sigma_x(), sigma_x(), &sector).add(&pauli_coupling(&j, sigma_y(), sigma_y(), &sector));
        let zz = ZzGenerator::Rotated {
            generator: pauli_coupling(&j, sigma_x(), sigma_x(), &sector),
            rotation: Rotation::y(FRAC_PI_2),
        };
        let direct = ZzGenerator::Diagonal(build_zz(&j, &sector).unwrap());
        assert!(max_abs(&(zz.effective(n) - direct.effective(n))) < 1e-13);
        let a = trotter_xxz(&hxy, &zz, 0.7, 4, n).unwrap();
        let b = trotter_xxz(&hxy, &direct, 0.7, 4, n).unwrap();
        assert!(max_abs(&(&a - b)) < 1e-12);
        assert!(unitarity_error(&a) < 1e-12);
    }
}
