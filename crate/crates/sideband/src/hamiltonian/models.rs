//! Spin Hamiltonians on a sector: XY exchange, ZZ, field, XXZ, butterfly.
//!
//! `σ_gs^m σ_sg^n` moves an excitation from site `m` to site `n`, so the
//! exchange term `J_{m,n} σ_gs^m σ_sg^n` contributes `⟨n|H|m⟩ = J_{m,n}` in
//! the single-excitation sector.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::drive::CouplingMatrix;
use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::linalg::{Mat, C64, ONE, ZERO};

use super::{BasisSector, SectorOperator};

/// Tolerance for accepting an input coupling matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// `Σ_{m≠n} C_{m,n} σ_gs^m σ_sg^n` without any symmetry requirement.
pub fn hopping_operator(c: &CouplingMatrix, sector: &BasisSector) -> SectorOperator {
    let n = sector.sites();
    assert_eq!(c.dim(), n, "coupling matrix and sector disagree on the site count");
    let dim = sector.dim();
    let row = |i: usize| -> Vec<(usize, C64)> {
        // row i: ⟨p|H|p'⟩ with p' = p − bit k + bit m, from hop m → k
        let p = sector.state(i);
        let mut out = Vec::new();
        for k in 0..n {
            if p >> k & 1 == 0 {
                continue;
            }
            for m in 0..n {
                if p >> m & 1 == 1 {
                    continue;
                }
                let v = c.get(m, k);
                if v == ZERO {
                    continue;
                }
                let src = (p & !(1 << k)) | (1 << m);
                if let Some(j) = sector.index(src) {
                    out.push((j, v));
                }
            }
        }
        out
    };
    let rows: Vec<Vec<(usize, C64)>> =
        if dim >= 2048 { (0..dim).into_par_iter().map(row).collect() } else { (0..dim).map(row).collect() };
    SectorOperator::from_rows(dim, rows)
}

/// XY exchange Hamiltonian; rejects non-Hermitian couplings.
pub fn build_xy(j: &CouplingMatrix, sector: &BasisSector) -> Result<SectorOperator> {
    let e = j.hermiticity_error();
    if e > HERMITIAN_TOL {
        return Err(Error::NotHermitian(e));
    }
    Ok(hopping_operator(j, sector))
}

/// `Σ_{m<n} Jz_{m,n} σ_z^m σ_z^n`, diagonal.
pub fn build_zz(jz: &CouplingMatrix, sector: &BasisSector) -> Result<SectorOperator> {
    let e = jz.symmetry_error();
    if e > HERMITIAN_TOL * jz.max_abs().max(1.0) {
        return Err(Error::NotSymmetric(e));
    }
    let n = sector.sites();
    let diag: Vec<f64> = sector
        .states()
        .iter()
        .map(|&p| {
            let mut e = 0.0;
            for m in 0..n {
                let zm = if p >> m & 1 == 1 { 1.0 } else { -1.0 };
                for k in m + 1..n {
                    let zk = if p >> k & 1 == 1 { 1.0 } else { -1.0 };
                    e += jz.get(m, k).re * zm * zk;
                }
            }
            e
        })
        .collect();
    Ok(SectorOperator::from_diagonal(&diag))
}

/// `−B Σ_n σ_z^n`.
pub fn build_field(b: f64, sector: &BasisSector) -> SectorOperator {
    let n = sector.sites() as f64;
    let diag: Vec<f64> = sector.states().iter().map(|&p| -b * (2.0 * p.count_ones() as f64 - n)).collect();
    SectorOperator::from_diagonal(&diag)
}

/// `Σ_{m<n}[Jxy(σxσx + σyσy) + Jz σzσz] − B Σ σz`.
pub fn build_xxz(jxy: &CouplingMatrix, jz: &CouplingMatrix, b: f64, sector: &BasisSector) -> Result<SectorOperator> {
    if jxy.symmetry_error() > HERMITIAN_TOL * jxy.max_abs().max(1.0) {
        return Err(Error::NotSymmetric(jxy.symmetry_error()));
    }
    // σxσx + σyσy = 2(σ+σ− + σ−σ+)
    let hop = build_xy(&jxy.scaled(2.0), sector)?;
    let zz = build_zz(jz, sector)?;
    let field = build_field(b, sector);
    Ok(hop.add(&zz).add(&field))
}

/// Single-site operators in the `(|g⟩, |s⟩)` basis: `m[out][in]`.
pub type Local = [[C64; 2]; 2];

pub fn sigma_x() -> Local {
    [[ZERO, ONE], [ONE, ZERO]]
}

pub fn sigma_y() -> Local {
    // σ_y |s⟩ = i|g⟩ with |s⟩ the σ_z = +1 state
    let i = C64::new(0.0, 1.0);
    [[ZERO, i], [-i, ZERO]]
}

pub fn sigma_z() -> Local {
    [[C64::new(-1.0, 0.0), ZERO], [ZERO, ONE]]
}

/// `|g⟩⟨s|`, removes an excitation.
pub fn sigma_gs() -> Local {
    [[ZERO, ONE], [ZERO, ZERO]]
}

/// `|s⟩⟨g|`, adds an excitation.
pub fn sigma_sg() -> Local {
    [[ZERO, ZERO], [ONE, ZERO]]
}

fn local_add(a: Local, b: Local, cb: C64) -> Local {
    let mut out = a;
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] += cb * b[i][j];
        }
    }
    out
}

fn local_dagger(a: Local) -> Local {
    [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]]
}

/// Triplets of `c · A^m ⊗ B^n` restricted to the sector (terms leaving
/// the sector are dropped).
pub fn two_site_terms(sector: &BasisSector, m: usize, a: Local, n: usize, b: Local, c: C64) -> Vec<(usize, usize, C64)> {
    let mut out = Vec::new();
    for (col, &p) in sector.states().iter().enumerate() {
        let bm = (p >> m & 1) as usize;
        let bn = (p >> n & 1) as usize;
        for om in 0..2 {
            let am = a[om][bm];
            if am == ZERO {
                continue;
            }
            for on in 0..2 {
                let an = b[on][bn];
                if an == ZERO {
                    continue;
                }
                let q = (p & !(1 << m) & !(1 << n)) | ((om as u64) << m) | ((on as u64) << n);
                if let Some(row) = sector.index(q) {
                    out.push((row, col, c * am * an));
                }
            }
        }
    }
    out
}

/// `Σ_n c_n A^n` for a single-site operator.
pub fn one_site_sum(sector: &BasisSector, a: Local, coeffs: &[C64]) -> SectorOperator {
    let mut t = Vec::new();
    for (col, &p) in sector.states().iter().enumerate() {
        for (site, &c) in coeffs.iter().enumerate() {
            if c == ZERO {
                continue;
            }
            let b = (p >> site & 1) as usize;
            for o in 0..2 {
                if a[o][b] == ZERO {
                    continue;
                }
                let q = (p & !(1 << site)) | ((o as u64) << site);
                if let Some(row) = sector.index(q) {
                    t.push((row, col, c * a[o][b]));
                }
            }
        }
    }
    SectorOperator::from_triplets(sector.dim(), &t)
}

/// Butterfly scheme:
/// `Σ_{m<n}[J_{m,n}(σ_gs^m + e^{iφ}σ_sg^m)(σ_sg^n + e^{−iφ}σ_gs^n) + h.c.]`.
pub fn build_butterfly_xxyy(j: &CouplingMatrix, phi: f64, sector: &BasisSector) -> SectorOperator {
    let n = sector.sites();
    let left = local_add(sigma_gs(), sigma_sg(), C64::from_polar(1.0, phi));
    let right = local_add(sigma_sg(), sigma_gs(), C64::from_polar(1.0, -phi));
    let mut t = Vec::new();
    for m in 0..n {
        for k in m + 1..n {
            let c = j.get(m, k);
            if c == ZERO {
                continue;
            }
            t.extend(two_site_terms(sector, m, left, k, right, c));
            t.extend(two_site_terms(sector, m, local_dagger(left), k, local_dagger(right), c.conj()));
        }
    }
    SectorOperator::from_triplets(sector.dim(), &t)
}

/// `Σ_{m<n} c_{m,n} A^m B^n`, e.g. `σxσx` couplings.
pub fn pauli_coupling(j: &CouplingMatrix, a: Local, b: Local, sector: &BasisSector) -> SectorOperator {
    let n = sector.sites();
    let mut t = Vec::new();
    for m in 0..n {
        for k in m + 1..n {
            let c = j.get(m, k);
            if c != ZERO {
                t.extend(two_site_terms(sector, m, a, k, b, c));
            }
        }
    }
    SectorOperator::from_triplets(sector.dim(), &t)
}

/// Haldane-Shastry profile `J_k = J0 / sin²(kπ/N)`, `k = 1..N−1`.
pub fn hs_profile(n: usize, j0: f64) -> Vec<C64> {
    (1..n)
        .map(|k| C64::new(j0 / (k as f64 * std::f64::consts::PI / n as f64).sin().powi(2), 0.0))
        .collect()
}

/// Haldane-Shastry couplings on an `N`-site chain.
pub fn hs_target(n: usize, j0: f64) -> Result<CouplingMatrix> {
    if n < 2 {
        return Err(Error::Invalid("Haldane-Shastry chain needs N >= 2".into()));
    }
    let prof = hs_profile(n, j0);
    Ok(CouplingMatrix::from_fn(n, |m, k| prof[m.abs_diff(k) - 1]))
}

/// `J0 = J π² / N²`, which keeps `J_1 → J` as `N` grows.
pub fn hs_j0(n: usize, j: f64) -> f64 {
    j * (std::f64::consts::PI / n as f64).powi(2)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Range {
    /// `1/r^η`.
    Power(f64),
    /// Only `r = 1`.
    NearestNeighbour,
}

/// `Jxy = J sin θ / r^η`, `Jz = J cos θ / r^η`, open boundaries.
pub fn xxz_eta_target(lat: &Lattice, j: f64, range: Range, theta: f64) -> (CouplingMatrix, CouplingMatrix) {
    let n = lat.len();
    let w = |m: usize, k: usize| -> f64 {
        let r = lat.distance(m, k);
        match range {
            Range::Power(eta) => r.powf(-eta),
            Range::NearestNeighbour => {
                if (r - 1.0).abs() < 1e-12 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    };
    let jxy = CouplingMatrix::from_fn(n, |m, k| C64::new(j * theta.sin() * w(m, k), 0.0));
    let jz = CouplingMatrix::from_fn(n, |m, k| C64::new(j * theta.cos() * w(m, k), 0.0));
    (jxy, jz)
}

/// Dense `⊗_n u` on the full `2^N` space (basis index = bit pattern).
pub fn product_unitary(n: usize, u: Local) -> Mat {
    let dim = 1usize << n;
    Mat::from_fn(dim, dim, |a, b| {
        let mut z = ONE;
        for site in 0..n {
            z *= u[a >> site & 1][b >> site & 1];
            if z == ZERO {
                break;
            }
        }
        z
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Collective rotation `Π_n exp(i θ σ_axis^n / 2)` on `N` spins.
pub fn collective_rotation(n: usize, axis: Axis, theta: f64) -> Mat {
    let s = match axis {
        Axis::X => sigma_x(),
        Axis::Y => sigma_y(),
        Axis::Z => sigma_z(),
    };
    let (c, si) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let mut u = [[ZERO; 2]; 2];
    for i in 0..2 {
        for k in 0..2 {
            let id = if i == k { 1.0 } else { 0.0 };
            u[i][k] = C64::new(c * id, 0.0) + C64::new(0.0, si) * s[i][k];
        }
    }
    product_unitary(n, u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{build_full, build_sector, build_union};
    use crate::lattice::{build_chain, build_square, GOLDEN};
    use crate::linalg::{eigh, max_abs};
    use proptest::prelude::*;

    fn two_site(j: C64) -> CouplingMatrix {
        let mut c = CouplingMatrix::zeros(2);
        c.set(0, 1, j);
        c.set(1, 0, j.conj());
        c
    }

    #[test]
    fn xy_two_sites() {
        let h = build_xy(&two_site(ONE), &build_sector(2, 1).unwrap()).unwrap().to_dense();
        assert_eq!(h, Mat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]));
        let mut bad = two_site(ONE);
        bad.set(1, 0, C64::new(2.0, 0.0));
        assert!(build_xy(&bad, &build_sector(2, 1).unwrap()).is_err());
    }

    #[test]
    fn single_excitation_matrix_element() {
        // ⟨n|H|m⟩ = J_{m,n}
        let mut j = CouplingMatrix::zeros(3);
        j.set(0, 2, C64::new(0.3, 0.4));
        j.set(2, 0, C64::new(0.3, -0.4));
        let s = build_sector(3, 1).unwrap();
        let h = build_xy(&j, &s).unwrap();
        let (i0, i2) = (s.index(0b001).unwrap(), s.index(0b100).unwrap());
        assert_eq!(h.get(i2, i0), C64::new(0.3, 0.4));
    }

    #[test]
    fn zz_and_field() {
        let mut jz = CouplingMatrix::zeros(2);
        jz.set(0, 1, ONE);
        jz.set(1, 0, ONE);
        let h = build_zz(&jz, &build_sector(2, 1).unwrap()).unwrap();
        assert_eq!(h.diagonal(), vec![C64::new(-1.0, 0.0); 2]);
        let f = build_field(1.0, &build_sector(4, 4).unwrap());
        assert_eq!(f.diagonal(), vec![C64::new(-4.0, 0.0)]);
        let mut asym = jz.clone();
        asym.set(1, 0, C64::new(2.0, 0.0));
        assert!(build_zz(&asym, &build_sector(2, 1).unwrap()).is_err());
    }

    #[test]
    fn classical_xxz_is_diagonal() {
        let lat = build_square(2, 3, 1.0, GOLDEN).unwrap();
        let (jxy, jz) = xxz_eta_target(&lat, 1.0, Range::Power(3.0), 0.0);
        assert_eq!(jxy.max_abs(), 0.0);
        let h = build_xxz(&jxy, &jz, 0.3, &build_sector(6, 3).unwrap()).unwrap();
        for (i, j, _) in h.triplets() {
            assert_eq!(i, j);
        }
    }

    #[test]
    fn eta_target_values() {
        let lat = build_chain(4, 1.0).unwrap();
        let (_, jz) = xxz_eta_target(&lat, 1.0, Range::Power(2.0), 0.0);
        assert!((jz.get(0, 2).re - 0.25).abs() < 1e-15);
        let (jxy, _) = xxz_eta_target(&lat, 2.0, Range::NearestNeighbour, 0.5);
        assert_eq!(jxy.get(0, 2), ZERO);
        assert!((jxy.get(0, 1).re - 2.0 * 0.5f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn butterfly_limits() {
        let j = two_site(C64::new(0.7, 0.0));
        let s = build_full(2).unwrap();
        let xx = pauli_coupling(&two_site(C64::new(1.4, 0.0)), sigma_x(), sigma_x(), &s).to_dense();
        let yy = pauli_coupling(&two_site(C64::new(1.4, 0.0)), sigma_y(), sigma_y(), &s).to_dense();
        assert!(max_abs(&(build_butterfly_xxyy(&j, 0.0, &s).to_dense() - xx)) < 1e-15);
        assert!(max_abs(&(build_butterfly_xxyy(&j, std::f64::consts::PI, &s).to_dense() - yy)) < 1e-15);
    }

    #[test]
    fn butterfly_quarter_phase_oracle() {
        // independent Kronecker expansion of (σgs + iσsg) ⊗ (σsg − iσgs) + h.c.
        let s = build_full(2).unwrap();
        let h = build_butterfly_xxyy(&two_site(ONE), std::f64::consts::FRAC_PI_2, &s).to_dense();
        let i = C64::new(0.0, 1.0);
        let a_m: Local = [[ZERO, ONE], [i, ZERO]];
        let b_n: Local = [[ZERO, -i], [ONE, ZERO]];
        let kron = |a: Local, b: Local| Mat::from_fn(4, 4, |r, c| a[r & 1][c & 1] * b[r >> 1 & 1][c >> 1 & 1]);
        let k = kron(a_m, b_n);
        assert!(max_abs(&(&h - (&k + k.adjoint()))) < 1e-15);
        // Pauli decomposition: XX + YY − XY − YX, all with unit weight
        let proj = |p: Local, q: Local| ((kron(p, q).adjoint() * &h).trace() / C64::new(4.0, 0.0)).re;
        assert!((proj(sigma_x(), sigma_x()) - 1.0).abs() < 1e-15);
        assert!((proj(sigma_y(), sigma_y()) - 1.0).abs() < 1e-15);
        assert!((proj(sigma_x(), sigma_y()) + 1.0).abs() < 1e-15);
        assert!((proj(sigma_y(), sigma_x()) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn hs_profile_values() {
        let p = hs_profile(4, 1.0);
        assert!((p[0].re - 2.0).abs() < 1e-14 && (p[1].re - 1.0).abs() < 1e-14);
        let n = 9;
        let p = hs_profile(n, 0.3);
        for k in 1..n {
            assert!((p[k - 1] - p[n - k - 1]).norm() < 1e-14);
        }
    }

    #[test]
    fn hs_sector_matches_full_space() {
        let n = 6;
        let j = hs_target(n, 1.0).unwrap();
        let full = build_full(n).unwrap();
        let hf = build_xy(&j, &full).unwrap().to_dense();
        let hs = build_xy(&j, &build_sector(n, 3).unwrap()).unwrap().to_dense();
        let (ef, _) = eigh(&hf);
        let (es, _) = eigh(&hs);
        // restrict the full-space spectrum to states with three excitations
        let sector_states: Vec<usize> = (0..64usize).filter(|p| p.count_ones() == 3).collect();
        let sub = Mat::from_fn(20, 20, |a, b| hf[(sector_states[a], sector_states[b])]);
        let (esub, _) = eigh(&sub);
        assert!((es[0] - esub[0]).abs() < 1e-12);
        for e in es {
            assert!(ef.iter().any(|f| (f - e).abs() < 1e-10));
        }
    }

    #[test]
    fn rotation_is_unitary() {
        let r = collective_rotation(3, Axis::Y, 0.37);
        assert!(crate::linalg::unitarity_error(&r) < 1e-14);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn xy_conserves_excitations(entries in prop::collection::vec((0usize..6, 0usize..6, -1.0f64..1.0, -1.0f64..1.0), 1..20)) {
            let mut j = CouplingMatrix::zeros(6);
            for (m, k, a, b) in entries {
                if m != k {
                    j.set(m, k, C64::new(a, b));
                    j.set(k, m, C64::new(a, -b));
                }
            }
            let s = build_union(6, &[0, 1, 2, 3, 4, 5, 6]).unwrap();
            let h = build_xy(&j, &s).unwrap();
            let counts: Vec<f64> = s.states().iter().map(|p| 2.0 * p.count_ones() as f64 - 6.0).collect();
            let sz = SectorOperator::from_diagonal(&counts);
            prop_assert!(h.commutator(&sz).is_zero());
            prop_assert!(h.hermiticity_error() < 1e-15);
            // sector eigenvalues are a subset of the full spectrum
            let (ef, _) = eigh(&h.to_dense());
            let (es, _) = eigh(&build_xy(&j, &build_sector(6, 2).unwrap()).unwrap().to_dense());
            for e in es {
                prop_assert!(ef.iter().any(|f| (f - e).abs() < 1e-10));
            }
        }
    }
}
