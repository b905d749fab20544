//! Magnetization of the long-range XXZ model over the `(θ, B)` plane and
//! the classical staircase at `θ = 0`.
//!
//! Each excitation-number sector is diagonalized once per `θ` without the
//! field; the field only shifts sector `n` by `B (2n − N)`, so the whole
//! `B` axis follows from the sector ground energies.

use std::f64::consts::FRAC_PI_2;
use std::path::Path;

use serde::Serialize;

use crate::drive::CouplingMatrix;
use crate::error::{Error, Result};
use crate::hamiltonian::{build_sector, build_xxz, xxz_eta_target, Range, SectorOperator};
use crate::io::{write_table, Cell};
use crate::lattice::Lattice;
use crate::linalg::{lanczos_ground, LanczosOptions, ZERO};

/// Relative tolerance for calling two sector minima degenerate.
pub const TIE_TOL: f64 = 1e-9;

/// `n` points evenly spaced over `[a, b]`.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// `n` angles over `[−a, a]`, mirrored so that `θ_{n−1−i} = −θ_i` exactly.
pub fn symmetric_angles(a: f64, n: usize) -> Vec<f64> {
    let mut thetas = linspace(-a, a, n);
    for i in 0..n / 2 {
        thetas[n - 1 - i] = -thetas[i];
    }
    if n % 2 == 1 {
        thetas[n / 2] = 0.0;
    }
    thetas
}

/// Default grids: 41 angles over `[−π/2, π/2]`, 61 fields over `[0, 3]`.
pub fn default_grids() -> (Vec<f64>, Vec<f64>) {
    (symmetric_angles(FRAC_PI_2, 41), linspace(0.0, 3.0, 61))
}

/// Distance profile `w_{m,n}` with `Jxy = J sin θ w`, `Jz = J cos θ w`.
pub fn range_profile(lat: &Lattice, j: f64, range: Range) -> CouplingMatrix {
    xxz_eta_target(lat, j, range, 0.0).1
}

/// Field-free sector Hamiltonian split as `sin θ H_xy + cos θ H_zz`.
pub struct SectorXxz {
    pub n_exc: usize,
    pub xy: SectorOperator,
    pub zz: SectorOperator,
}

impl SectorXxz {
    pub fn new(w: &CouplingMatrix, n_sites: usize, n_exc: usize) -> Result<SectorXxz> {
        let sector = build_sector(n_sites, n_exc)?;
        let zero = CouplingMatrix::zeros(n_sites);
        Ok(SectorXxz { n_exc, xy: build_xxz(w, &zero, 0.0, &sector)?, zz: build_xxz(&zero, w, 0.0, &sector)? })
    }

    pub fn dim(&self) -> usize {
        self.xy.dim()
    }

    pub fn ground_energy(&self, theta: f64) -> Result<f64> {
        let (s, c) = theta.sin_cos();
        let dim = self.dim();
        let (e, _) = lanczos_ground(
            dim,
            |x, y| {
                let mut t = vec![ZERO; dim];
                self.xy.apply(x, y);
                self.zz.apply(x, &mut t);
                for (a, b) in y.iter_mut().zip(&t) {
                    *a = *a * s + b * c;
                }
            },
            LanczosOptions::default(),
        )?;
        Ok(e)
    }
}

/// Field-free ground energy of every sector `0..=n_max`, one row per `θ`.
pub fn sector_energies(lat: &Lattice, j: f64, range: Range, thetas: &[f64], n_max: usize) -> Result<Vec<Vec<f64>>> {
    let n = lat.len();
    if n_max > n {
        return Err(Error::Invalid(format!("n_exc_max = {n_max} exceeds the {n} sites")));
    }
    let w = range_profile(lat, j, range);
    let mut out = vec![vec![0.0; n_max + 1]; thetas.len()];
    for k in 0..=n_max {
        let h = SectorXxz::new(&w, n, k)?;
        for (row, &theta) in out.iter_mut().zip(thetas) {
            row[k] = h.ground_energy(theta)?;
        }
    }
    Ok(out)
}

/// Winning sector for field `b`: lowest `E_n + b (2n − N)`, ties to the
/// lower `n`. Returns the winner and every sector within the tie tolerance.
pub fn winner(energies: &[f64], b: f64, n_sites: usize) -> (usize, Vec<usize>) {
    let total: Vec<f64> = energies.iter().enumerate().map(|(k, e)| e + b * (2.0 * k as f64 - n_sites as f64)).collect();
    let best = total.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = TIE_TOL * best.abs().max(1.0);
    let ties: Vec<usize> = (0..total.len()).filter(|&k| total[k] - best <= tol).collect();
    (ties[0], ties)
}

pub fn m_over_n(n_exc: usize, n_sites: usize) -> f64 {
    (2.0 * n_exc as f64 - n_sites as f64) / (2.0 * n_sites as f64)
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanPoint {
    pub theta: f64,
    pub b: f64,
    pub m_over_n: f64,
    pub n_exc: usize,
    /// Sectors degenerate with the winner (including it).
    pub ties: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PhaseScan {
    pub n_sites: usize,
    pub range: Range,
    pub j: f64,
    pub n_exc_max: usize,
    pub thetas: Vec<f64>,
    pub fields: Vec<f64>,
    /// Field-free sector energies per `θ`.
    pub energies: Vec<Vec<f64>>,
    /// `θ`-major.
    pub points: Vec<ScanPoint>,
}

impl PhaseScan {
    pub fn at(&self, i_theta: usize, i_b: usize) -> &ScanPoint {
        &self.points[i_theta * self.fields.len() + i_b]
    }

    /// Pairs `(i, j)` with `θ_j = −θ_i`.
    fn mirror_pairs(&self) -> Result<Vec<(usize, usize)>> {
        let n = self.thetas.len();
        (0..n)
            .map(|i| {
                let j = n - 1 - i;
                if (self.thetas[i] + self.thetas[j]).abs() > 1e-12 {
                    Err(Error::Invalid("θ grid is not symmetric about 0".into()))
                } else {
                    Ok((i, j))
                }
            })
            .collect()
    }

    /// `max |M/N(θ,B) − M/N(−θ,B)|`.
    pub fn symmetry_error(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (i, j) in self.mirror_pairs()? {
            for b in 0..self.fields.len() {
                worst = worst.max((self.at(i, b).m_over_n - self.at(j, b).m_over_n).abs());
            }
        }
        Ok(worst)
    }

    /// `Σ_{θ>0,B} |M/N(θ,B) − M/N(−θ,B)|`.
    pub fn asymmetry(&self) -> Result<f64> {
        let mut total = 0.0;
        for (i, j) in self.mirror_pairs()? {
            if i >= j {
                continue;
            }
            for b in 0..self.fields.len() {
                total += (self.at(i, b).m_over_n - self.at(j, b).m_over_n).abs();
            }
        }
        Ok(total)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let rows: Vec<Vec<Cell>> = self
            .points
            .iter()
            .map(|p| vec![p.theta.into(), p.b.into(), p.m_over_n.into(), p.n_exc.into()])
            .collect();
        write_table(path, &["theta", "B", "M_over_N", "winning_sector"], &rows)
    }
}

pub fn magnetization_scan(
    lat: &Lattice,
    j: f64,
    range: Range,
    thetas: &[f64],
    fields: &[f64],
    n_exc_max: usize,
) -> Result<PhaseScan> {
    if fields.iter().any(|b| !(*b >= 0.0)) || thetas.iter().any(|t| !t.is_finite()) {
        return Err(Error::Invalid("fields must be finite and non-negative, angles finite".into()));
    }
    let n = lat.len();
    let energies = sector_energies(lat, j, range, thetas, n_exc_max)?;
    let mut points = Vec::with_capacity(thetas.len() * fields.len());
    for (row, &theta) in energies.iter().zip(thetas) {
        for &b in fields {
            let (k, ties) = winner(row, b, n);
            points.push(ScanPoint { theta, b, m_over_n: m_over_n(k, n), n_exc: k, ties });
        }
    }
    Ok(PhaseScan {
        n_sites: n,
        range,
        j,
        n_exc_max,
        thetas: thetas.to_vec(),
        fields: fields.to_vec(),
        energies,
        points,
    })
}

/// Lowest classical `Σ_{m<n} w_{m,n} z_m z_n` for each excitation number,
/// by enumerating all occupation patterns.
pub fn classical_sector_minima(w: &CouplingMatrix, n_max: usize) -> Result<Vec<f64>> {
    let n = w.dim();
    if n > 24 {
        return Err(Error::Invalid(format!("enumeration limited to 24 sites, got {n}")));
    }
    let mut best = vec![f64::INFINITY; n_max.min(n) + 1];
    let pairs: Vec<(usize, usize, f64)> =
        (0..n).flat_map(|m| (m + 1..n).map(move |k| (m, k))).map(|(m, k)| (m, k, w.get(m, k).re)).filter(|t| t.2 != 0.0).collect();
    for p in 0u64..(1 << n) {
        let c = p.count_ones() as usize;
        if c > n_max {
            continue;
        }
        let mut e = 0.0;
        for &(m, k, v) in &pairs {
            let same = (p >> m & 1) == (p >> k & 1);
            e += if same { v } else { -v };
        }
        if e < best[c] {
            best[c] = e;
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, Serialize)]
pub struct Plateau {
    pub b_start: f64,
    pub b_end: f64,
    pub n_exc: usize,
    pub m_over_n: f64,
    /// Reduced filling fraction `n_exc / N`.
    pub filling: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Staircase {
    pub sector_minima: Vec<f64>,
    pub plateaus: Vec<Plateau>,
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Exact plateaus of `M/N` over `[b_min, b_max]` from the sector minima.
pub fn plateaus(energies: &[f64], n_sites: usize, b_min: f64, b_max: f64) -> Vec<Plateau> {
    // every crossing of two sector lines is a candidate boundary
    let mut cuts = vec![b_min, b_max];
    for a in 0..energies.len() {
        for c in a + 1..energies.len() {
            let b = (energies[a] - energies[c]) / (2.0 * (c - a) as f64);
            if b > b_min && b < b_max {
                cuts.push(b);
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * x.abs().max(1.0));
    let mut out: Vec<Plateau> = Vec::new();
    for w in cuts.windows(2) {
        let (k, _) = winner(energies, 0.5 * (w[0] + w[1]), n_sites);
        match out.last_mut() {
            Some(p) if p.n_exc == k => p.b_end = w[1],
            _ => {
                let g = gcd(k, n_sites).max(1);
                out.push(Plateau {
                    b_start: w[0],
                    b_end: w[1],
                    n_exc: k,
                    m_over_n: m_over_n(k, n_sites),
                    filling: format!("{}/{}", k / g, n_sites / g),
                });
            }
        }
    }
    out
}

/// Classical (`θ = 0`) staircase by enumeration.
pub fn staircase_cut(lat: &Lattice, j: f64, range: Range, b_min: f64, b_max: f64, n_exc_max: usize) -> Result<Staircase> {
    let w = range_profile(lat, j, range);
    let minima = classical_sector_minima(&w, n_exc_max)?;
    let plateaus = plateaus(&minima, lat.len(), b_min, b_max);
    Ok(Staircase { sector_minima: minima, plateaus })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{build_field, build_full};
    use crate::lattice::{build_square, GOLDEN};
    use crate::linalg::eigh;

    fn square(n: usize) -> Lattice {
        build_square(n, n, 1.0, GOLDEN).unwrap()
    }

    #[test]
    fn split_operator_matches_direct_build() {
        let lat = square(3);
        let w = range_profile(&lat, 1.0, Range::Power(1.0));
        let h = SectorXxz::new(&w, 9, 4).unwrap();
        let theta = 0.7;
        let (jxy, jz) = xxz_eta_target(&lat, 1.0, Range::Power(1.0), theta);
        let direct = build_xxz(&jxy, &jz, 0.0, &build_sector(9, 4).unwrap()).unwrap();
        let split = h.xy.scale_re(theta.sin()).add(&h.zz.scale_re(theta.cos()));
        assert!(split.max_diff(&direct) < 1e-14);
    }

    #[test]
    fn sectors_reproduce_full_space_ground_state() {
        let lat = square(3);
        let thetas = [-1.0, 0.0, 0.4, 1.2];
        let all = sector_energies(&lat, 1.0, Range::Power(2.0), &thetas, 9).unwrap();
        for (row, &theta) in all.iter().zip(&thetas) {
            let (jxy, jz) = xxz_eta_target(&lat, 1.0, Range::Power(2.0), theta);
            for b in [0.0, 0.8, 2.5] {
                let full = build_full(9).unwrap();
                // the scan's field convention: +B(2n − N) = −(−B) Σσz
                let h = build_xxz(&jxy, &jz, 0.0, &full).unwrap().add(&build_field(-b, &full));
                let e_full = eigh(&h.to_dense()).0[0];
                let (k, _) = winner(row, b, 9);
                let e_sec = row[k] + b * (2.0 * k as f64 - 9.0);
                assert!((e_full - e_sec).abs() < 1e-10, "θ={theta} B={b}: {e_full} vs {e_sec}");
                // restricting to n ≤ 4 loses nothing when the winner is there
                let (k4, _) = winner(&row[..5], b, 9);
                if k <= 4 {
                    assert_eq!(k4, k);
                }
            }
        }
    }

    #[test]
    fn large_field_saturates() {
        let lat = square(3);
        let s = magnetization_scan(&lat, 1.0, Range::Power(1.0), &[-0.5, 0.5], &[0.0, 100.0], 4).unwrap();
        assert_eq!(s.at(0, 1).n_exc, 0);
        assert_eq!(s.at(0, 1).m_over_n, -0.5);
    }

    #[test]
    fn winner_non_increasing_in_field() {
        let lat = square(3);
        let thetas = [0.3];
        let fields = linspace(0.0, 6.0, 121);
        let s = magnetization_scan(&lat, 1.0, Range::Power(1.0), &thetas, &fields, 4).unwrap();
        for b in 1..fields.len() {
            assert!(s.at(0, b).n_exc <= s.at(0, b - 1).n_exc);
        }
    }

    #[test]
    fn ties_choose_lower_sector() {
        let (k, ties) = winner(&[0.0, -2.0, -4.0], 1.0, 4);
        assert_eq!(ties, vec![0, 1, 2]);
        assert_eq!(k, 0);
    }

    #[test]
    fn enumeration_matches_lanczos_at_zero_angle() {
        let lat = square(3);
        let w = range_profile(&lat, 1.0, Range::Power(1.0));
        let classical = classical_sector_minima(&w, 4).unwrap();
        let lanczos = sector_energies(&lat, 1.0, Range::Power(1.0), &[0.0], 4).unwrap();
        for (a, b) in classical.iter().zip(&lanczos[0]) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn antiferromagnet_half_filling_at_zero_field() {
        // 2x2 NN ring: the Néel patterns give −4, everything else is higher
        let lat = square(2);
        let st = staircase_cut(&lat, 1.0, Range::NearestNeighbour, 0.0, 10.0, 2).unwrap();
        assert_eq!(st.sector_minima, vec![4.0, 0.0, -4.0]);
        assert_eq!(st.plateaus[0].n_exc, 2);
        assert_eq!(st.plateaus[0].m_over_n, 0.0);
        assert_eq!(st.plateaus[0].filling, "1/2");
        // −4, −2B and 4 − 4B all meet at B = 2, so the 1/4 plateau has zero width
        assert!((st.plateaus[0].b_end - 2.0).abs() < 1e-14);
        assert_eq!(st.plateaus.last().unwrap().n_exc, 0);
    }
}
