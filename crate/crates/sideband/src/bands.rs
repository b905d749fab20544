//! Single-excitation Bloch bands of the two-sublattice square-lattice
//! models, flatness and Chern numbers.
//!
//! The unit cell holds `A = (0,0)` and `B = (1,0)` with lattice vectors
//! `a1 = (1,1)`, `a2 = (1,−1)`. Momenta are the reduced coordinates
//! `k1 = k·a1`, `k2 = k·a2`, and the periodic gauge
//! `H_{αβ}(k) = Σ_R e^{i(n1 k1 + n2 k2)} ⟨0,α|H|R,β⟩` makes `H(k)` periodic
//! in both with period `2π`.

use std::f64::consts::PI;
use std::path::Path;

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::drive::{brickwall_classes, chiral_flux_classes, ClassTarget, CouplingMatrix};
use crate::error::{Error, Result};
use crate::io::{write_table, Cell};
use crate::lattice::Lattice;
use crate::linalg::{C64, ZERO};

pub type Bloch = Matrix2<C64>;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelParams {
    ChiralFlux { t1: f64, t2: f64, t3: f64, phi: f64 },
    Brickwall { t1: f64, t2: f64, phi: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlochModel {
    pub params: Option<ModelParams>,
    pub classes: Vec<ClassTarget>,
    /// Staggered on-site energy, `+mass` on `A` and `−mass` on `B`.
    pub mass: f64,
}

/// Sublattice index and reduced cell coordinates of a site.
fn split(r: [i64; 2]) -> (usize, [i64; 2]) {
    let beta = (r[0] + r[1]).rem_euclid(2) as usize;
    let (rx, ry) = (r[0] - beta as i64, r[1]);
    ((beta), [(rx + ry) / 2, (rx - ry) / 2])
}

const ORIGIN: [[i64; 2]; 2] = [[0, 0], [1, 0]];

impl BlochModel {
    pub fn chiral_flux(t1: f64, t2: f64, t3: f64, phi: f64) -> BlochModel {
        BlochModel {
            params: Some(ModelParams::ChiralFlux { t1, t2, t3, phi }),
            classes: chiral_flux_classes(t1, t2, t3, phi.tan()),
            mass: 0.0,
        }
    }

    pub fn brickwall(t1: f64, t2: f64, phi: f64) -> BlochModel {
        BlochModel { params: Some(ModelParams::Brickwall { t1, t2, phi }), classes: brickwall_classes(t1, t2, phi), mass: 0.0 }
    }

    pub fn from_params(p: ModelParams) -> BlochModel {
        match p {
            ModelParams::ChiralFlux { t1, t2, t3, phi } => BlochModel::chiral_flux(t1, t2, t3, phi),
            ModelParams::Brickwall { t1, t2, phi } => BlochModel::brickwall(t1, t2, phi),
        }
    }

    /// Any set of coupling classes with the sublattice-staggered form.
    pub fn from_classes(classes: Vec<ClassTarget>) -> BlochModel {
        BlochModel { params: None, classes, mass: 0.0 }
    }

    pub fn with_mass(mut self, mass: f64) -> BlochModel {
        self.mass = mass;
        self
    }

    /// `H(k)` at reduced momentum `k = (k1, k2)`.
    pub fn bloch(&self, k: [f64; 2]) -> Bloch {
        let mut h = Bloch::zeros();
        h[(0, 0)] = C64::new(self.mass, 0.0);
        h[(1, 1)] = C64::new(-self.mass, 0.0);
        let mut add = |alpha: usize, m: [i64; 2], v: C64| {
            let (beta, n) = split(m);
            h[(alpha, beta)] += v * C64::from_polar(1.0, n[0] as f64 * k[0] + n[1] as f64 * k[1]);
        };
        for c in &self.classes {
            for (alpha, p) in ORIGIN.iter().enumerate() {
                // hopping into p from p + Δ is J_{p+Δ,p}; from p − Δ it is the conjugate of J_{p,p−Δ}
                let fwd = [p[0] + c.delta[0], p[1] + c.delta[1]];
                add(alpha, fwd, c.value_at(*p));
                let back = [p[0] - c.delta[0], p[1] - c.delta[1]];
                add(alpha, back, c.value_at(back).conj());
            }
        }
        h
    }

    /// Both band energies, ascending.
    pub fn energies(&self, k: [f64; 2]) -> [f64; 2] {
        eig2(&self.bloch(k)).0
    }
}

/// Reduced coordinates of a physical wavevector.
pub fn reduced_from_physical(kx: f64, ky: f64) -> [f64; 2] {
    [kx + ky, kx - ky]
}

/// Closed-form chiral-flux dispersion `√2 t1 √(3 + cos(k1+k2) cos(k1−k2))`
/// (upper band; the lower band is its negative).
pub fn chiral_flux_closed_form(t1: f64, k: [f64; 2]) -> f64 {
    2f64.sqrt() * t1 * (3.0 + (k[0] + k[1]).cos() * (k[0] - k[1]).cos()).sqrt()
}

/// Eigenvalues (ascending) and the normalized eigenvectors of a 2×2
/// Hermitian matrix.
pub fn eig2(h: &Bloch) -> ([f64; 2], [[C64; 2]; 2]) {
    let a = h[(0, 0)].re;
    let d = h[(1, 1)].re;
    let b = (h[(0, 1)] + h[(1, 0)].conj()) * 0.5;
    let mean = 0.5 * (a + d);
    let half = 0.5 * (a - d);
    let r = (half * half + b.norm_sqr()).sqrt();
    let vals = [mean - r, mean + r];
    let vec_for = |e: f64| -> [C64; 2] {
        // (a − e) x + b y = 0; pick the better-conditioned row
        let v = if (a - e).abs() + b.norm() >= (d - e).abs() + b.norm() && b.norm() + (a - e).abs() > 0.0 {
            [b, C64::new(e - a, 0.0)]
        } else {
            [C64::new(e - d, 0.0), b.conj()]
        };
        let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
        if n == 0.0 {
            return if e == vals[0] { [C64::new(1.0, 0.0), ZERO] } else { [ZERO, C64::new(1.0, 0.0)] };
        }
        [v[0] / n, v[1] / n]
    };
    (vals, [vec_for(vals[0]), vec_for(vals[1])])
}

fn grid_k(n: usize, i: usize, j: usize) -> [f64; 2] {
    [2.0 * PI * i as f64 / n as f64, 2.0 * PI * j as f64 / n as f64]
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct BandPoint {
    pub k1: f64,
    pub k2: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Band energies on an `n × n` grid over `[0, 2π)²`.
pub fn band_grid(model: &BlochModel, n: usize) -> Vec<BandPoint> {
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let k = grid_k(n, i, j);
            let [lo, hi] = model.energies(k);
            out.push(BandPoint { k1: k[0], k2: k[1], lower: lo, upper: hi });
        }
    }
    out
}

pub fn write_bands_csv(path: &Path, points: &[BandPoint]) -> Result<()> {
    let rows: Vec<Vec<Cell>> =
        points.iter().map(|p| vec![p.k1.into(), p.k2.into(), p.lower.into(), p.upper.into()]).collect();
    write_table(path, &["k_x", "k_y", "E_lower", "E_upper"], &rows)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Flatness {
    pub grid: usize,
    /// Width of the lower band.
    pub bandwidth: f64,
    /// `min E_upper − max E_lower`; not positive when the gap closes.
    pub gap: f64,
    /// `bandwidth / gap`, absent without a gap.
    pub ratio: Option<f64>,
}

pub fn flatness(model: &BlochModel, grid: usize) -> Result<Flatness> {
    if grid < 64 {
        return Err(Error::Invalid(format!("flatness needs a grid of at least 64, got {grid}")));
    }
    let pts = band_grid(model, grid);
    let lo_min = pts.iter().map(|p| p.lower).fold(f64::INFINITY, f64::min);
    let lo_max = pts.iter().map(|p| p.lower).fold(f64::NEG_INFINITY, f64::max);
    let hi_min = pts.iter().map(|p| p.upper).fold(f64::INFINITY, f64::min);
    let bandwidth = lo_max - lo_min;
    let gap = hi_min - lo_max;
    Ok(Flatness { grid, bandwidth, gap, ratio: (gap > 0.0).then(|| bandwidth / gap) })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ChernReport {
    pub grid: usize,
    /// Lower, upper.
    pub chern: [i64; 2],
    /// Plaquette sums before rounding.
    pub raw: [f64; 2],
}

/// Minimum direct gap tolerated on the Chern grid.
pub const GAP_TOL: f64 = 1e-10;

/// Lattice field-strength Chern numbers on an `n × n` grid.
pub fn chern(model: &BlochModel, grid: usize) -> Result<ChernReport> {
    if grid < 2 {
        return Err(Error::Invalid("Chern grid needs at least 2 points per axis".into()));
    }
    let n = grid;
    let mut states: Vec<[[C64; 2]; 2]> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let k = grid_k(n, i, j);
            let (e, v) = eig2(&model.bloch(k));
            if e[1] - e[0] <= GAP_TOL {
                return Err(Error::GapClosure(k[0], k[1]));
            }
            states.push(v);
        }
    }
    let at = |i: usize, j: usize| &states[(i % n) * n + (j % n)];
    let link = |a: &[C64; 2], b: &[C64; 2]| -> C64 {
        let z = a[0].conj() * b[0] + a[1].conj() * b[1];
        z / z.norm()
    };
    let mut raw = [0.0; 2];
    for band in 0..2 {
        let mut total = 0.0;
        for i in 0..n {
            for j in 0..n {
                let u1 = link(&at(i, j)[band], &at(i + 1, j)[band]);
                let u2 = link(&at(i + 1, j)[band], &at(i + 1, j + 1)[band]);
                let u3 = link(&at(i + 1, j + 1)[band], &at(i, j + 1)[band]);
                let u4 = link(&at(i, j + 1)[band], &at(i, j)[band]);
                total += (u1 * u2 * u3 * u4).arg();
            }
        }
        raw[band] = total / (2.0 * PI);
    }
    Ok(ChernReport { grid, chern: [raw[0].round() as i64, raw[1].round() as i64], raw })
}

/// Bloch matrix assembled from real-space couplings around the bulk cell
/// whose `A` site is `origin`; equal to `bloch(k)` when every coupling of
/// the two reference sites lies inside the lattice.
pub fn bloch_from_couplings(lat: &Lattice, j: &CouplingMatrix, origin: [i64; 2], k: [f64; 2]) -> Result<Bloch> {
    if (origin[0] + origin[1]).rem_euclid(2) != 0 {
        return Err(Error::Invalid("origin must be an A site (even x + y)".into()));
    }
    let mut h = Bloch::zeros();
    for (alpha, p) in ORIGIN.iter().enumerate() {
        let cell = [origin[0] + p[0], origin[1] + p[1]];
        let n = lat.site_at(cell).ok_or_else(|| Error::Invalid(format!("site {cell:?} outside the lattice")))?;
        for m in 0..lat.len() {
            let v = j.get(m, n);
            if m == n || v == ZERO {
                continue;
            }
            let c = lat.cell(m);
            let (beta, r) = split([c[0] - origin[0], c[1] - origin[1]]);
            h[(alpha, beta)] += v * C64::from_polar(1.0, r[0] as f64 * k[0] + r[1] as f64 * k[1]);
        }
    }
    Ok(h)
}

#[derive(Clone, Debug, Serialize)]
pub struct BandReport {
    pub params: Option<ModelParams>,
    pub flatness: Flatness,
    pub chern: Option<ChernReport>,
    pub chern_error: Option<String>,
}

pub fn band_report(model: &BlochModel, grid: usize) -> Result<BandReport> {
    let flatness = flatness(model, grid)?;
    let (chern, chern_error) = match chern(model, grid) {
        Ok(c) => (Some(c), None),
        Err(e @ Error::GapClosure(..)) => (None, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    Ok(BandReport { params: model.params, flatness, chern, chern_error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drive::{brickwall_defaults, chiral_flux_drive, coupling_matrix, CouplingKernel, ModulationMode};
    use crate::lattice::{build_square, GOLDEN};
    use std::f64::consts::FRAC_PI_4;

    fn flat_params() -> BlochModel {
        BlochModel::chiral_flux(1.0, 1.0 / 2f64.sqrt(), 0.0, FRAC_PI_4)
    }

    #[test]
    fn nearest_neighbour_chiral_bands() {
        let m = BlochModel::chiral_flux(0.7, 0.0, 0.0, 0.0);
        for &k in &[[0.3, -1.1], [2.0, 0.5], [PI, 0.1]] {
            let h = m.bloch(k);
            assert_eq!(h[(0, 0)], ZERO);
            // f(k) = t1 (1 + e^{−ik1})(1 + e^{−ik2})
            let f = 0.7 * (C64::new(1.0, 0.0) + C64::from_polar(1.0, -k[0])) * (C64::new(1.0, 0.0) + C64::from_polar(1.0, -k[1]));
            let [lo, hi] = m.energies(k);
            assert!((hi - f.norm()).abs() < 1e-14 && (lo + f.norm()).abs() < 1e-14);
        }
    }

    #[test]
    fn hermitian_periodic_traceless() {
        let m = BlochModel::chiral_flux(1.0, 0.4, 0.2, 0.9);
        for &k in &[[0.1, 0.2], [1.7, -2.9]] {
            let h = m.bloch(k);
            assert!((h - h.adjoint()).norm() < 1e-14);
            // only the 2x̂, 2ŷ hoppings stay on a sublattice and shift both bands
            assert!((h.trace() - C64::new(8.0 * 0.2 * k[0].cos() * k[1].cos(), 0.0)).norm() < 1e-14);
            let no_t3 = BlochModel::chiral_flux(1.0, 0.4, 0.0, 0.9).with_mass(0.3);
            assert!(no_t3.bloch(k).trace().norm() < 1e-14);
            let shifted = m.bloch([k[0] + 2.0 * PI, k[1] - 2.0 * PI]);
            assert!((h - shifted).norm() < 1e-13);
        }
    }

    #[test]
    fn closed_form_at_quarter_flux() {
        let m = flat_params();
        for p in band_grid(&m, 64) {
            let e = chiral_flux_closed_form(1.0, [p.k1, p.k2]);
            assert!((p.upper - e).abs() <= 1e-10 && (p.lower + e).abs() <= 1e-10);
        }
    }

    #[test]
    fn flatness_without_t3() {
        let f = flatness(&flat_params(), 64).unwrap();
        let want = (2.0 * 2f64.sqrt() - 2.0) / 4.0;
        assert!((f.ratio.unwrap() - want).abs() < 1e-12);
        assert!(flatness(&flat_params(), 32).is_err());
    }

    #[test]
    fn decoupled_sublattices_touch() {
        // t1 = 0: H = diag(d, −d) with d = 2 t2 (cos k2 − cos k1)
        let m = BlochModel::chiral_flux(0.0, 0.5, 0.0, 0.3);
        for &k in &[[0.4, 1.3], [2.2, 0.1]] {
            let h = m.bloch(k);
            assert_eq!(h[(0, 1)], ZERO);
            let d = 2.0 * 0.5 * (k[1].cos() - k[0].cos());
            assert!((h[(0, 0)].re - d).abs() < 1e-14);
        }
        let f = flatness(&m, 64).unwrap();
        assert!(f.gap <= 0.0 && f.ratio.is_none());
        assert!(matches!(chern(&m, 16), Err(Error::GapClosure(..))));
    }

    #[test]
    fn chern_numbers() {
        let trivial = chern(&BlochModel::chiral_flux(1.0, 0.5, 0.0, 0.0), 32);
        // φ = 0 closes the gap at the NN Dirac points
        assert!(trivial.is_err());
        let triv = chern(&BlochModel::chiral_flux(1.0, 0.5, 0.0, 0.0).with_mass(0.8), 32).unwrap();
        assert_eq!(triv.chern, [0, 0]);
        for g in [32, 64, 128] {
            let c = chern(&flat_params(), g).unwrap();
            assert_eq!(c.chern[0].abs(), 1);
            assert_eq!(c.chern[0] + c.chern[1], 0);
        }
        let (t2, phi) = brickwall_defaults(1.0);
        let c = chern(&BlochModel::brickwall(1.0, t2, phi), 64).unwrap();
        assert_eq!(c.chern[0].abs(), 1);
    }

    #[test]
    fn drive_couplings_reproduce_bloch_matrix() {
        let lat = build_square(8, 8, 1.0, GOLDEN).unwrap();
        let (t1, t2, t3, zeta) = (1.0, 0.6, 0.25, 0.8);
        let d = chiral_flux_drive(t1, t2, t3, zeta, ModulationMode::FrequencyShift).unwrap();
        let j = coupling_matrix(&lat, &d, &CouplingKernel::Constant { jt: 1.0 }, None).matrix;
        let m = BlochModel::chiral_flux(t1, t2, t3, zeta.atan());
        for i in 0..8 {
            for l in 0..8 {
                let k = grid_k(8, i, l);
                let h = bloch_from_couplings(&lat, &j, [4, 4], k).unwrap();
                assert!((h - m.bloch(k)).norm() < 1e-9);
            }
        }
    }
}
