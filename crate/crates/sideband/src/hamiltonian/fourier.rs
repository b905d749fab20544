//! Harmonic decomposition `H(t) = Σ_p H_p e^{ipδt}` of a driven chain.
//!
//! On a linear chain every sideband detuning is `a_α δ` with integer `a_α`.
//! The exchange term for the ordered pair `(m, n)` and sideband pair
//! `(α, β)` then oscillates at `p δ` with `p = (m − n) + (a_α − a_β)`; the
//! resonant `p = 0` part is the target XY Hamiltonian.

use std::collections::BTreeMap;

use crate::drive::{CouplingKernel, CouplingMatrix, RamanDrive};
use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::linalg::{Mat, C64, ZERO};

use super::{hopping_operator, BasisSector, SectorOperator};

#[derive(Clone, Debug, PartialEq)]
pub struct FourierSeries {
    /// Base angular frequency.
    pub delta: f64,
    pub components: BTreeMap<i64, SectorOperator>,
}

impl FourierSeries {
    /// Validating constructor: `H_0` present, `H_{−p} = H_p†`.
    pub fn new(delta: f64, components: BTreeMap<i64, SectorOperator>) -> Result<FourierSeries> {
        if !(delta > 0.0) {
            return Err(Error::Invalid(format!("base frequency must be positive, got {delta}")));
        }
        if !components.contains_key(&0) {
            return Err(Error::Invalid("series lacks the p = 0 component".into()));
        }
        let s = FourierSeries { delta, components };
        let e = s.hermiticity_error();
        if e > 1e-12 {
            return Err(Error::NotHermitian(e));
        }
        Ok(s)
    }

    /// Static series with only `H_0`.
    pub fn constant(delta: f64, h0: SectorOperator) -> FourierSeries {
        FourierSeries { delta, components: BTreeMap::from([(0, h0)]) }
    }

    pub fn dim(&self) -> usize {
        self.h0().dim()
    }

    pub fn h0(&self) -> &SectorOperator {
        &self.components[&0]
    }

    pub fn get(&self, p: i64) -> Option<&SectorOperator> {
        self.components.get(&p)
    }

    /// Largest `|p|` with a nonzero component.
    pub fn p_max(&self) -> usize {
        self.components
            .iter()
            .filter(|(_, h)| !h.is_zero())
            .map(|(p, _)| p.unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }

    /// Relative `max_p |H_{−p} − H_p†|`.
    pub fn hermiticity_error(&self) -> f64 {
        let scale = self.components.values().map(|h| h.max_abs()).fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        let zero = SectorOperator::zeros(self.dim());
        let mut worst: f64 = 0.0;
        for (&p, h) in &self.components {
            let partner = self.components.get(&-p).unwrap_or(&zero);
            worst = worst.max(partner.max_diff(&h.adjoint()));
        }
        worst / scale
    }

    /// `H(t)` as a sparse operator.
    pub fn at(&self, t: f64) -> SectorOperator {
        let terms: Vec<(C64, &SectorOperator)> = self
            .components
            .iter()
            .map(|(&p, h)| (C64::from_polar(1.0, p as f64 * self.delta * t), h))
            .collect();
        SectorOperator::linear_combination(self.dim(), &terms)
    }

    /// `H(t)` as a dense Hermitian matrix.
    pub fn dense_at(&self, t: f64) -> Mat {
        let mut m = Mat::zeros(self.dim(), self.dim());
        for (&p, h) in &self.components {
            let ph = C64::from_polar(1.0, p as f64 * self.delta * t);
            for (i, j, v) in h.triplets() {
                m[(i, j)] += ph * v;
            }
        }
        // enforce exact hermiticity against rounding in the phases
        (&m + m.adjoint()) * C64::new(0.5, 0.0)
    }

    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.delta
    }
}

/// Integer detunings `a_α` in units of the chain step.
fn integer_detunings(drive: &RamanDrive, delta: f64) -> Result<Vec<i64>> {
    drive
        .sidebands
        .iter()
        .map(|s| {
            let a = s.detuning / delta;
            let r = a.round();
            if (a - r).abs() > 1e-9 {
                Err(Error::NonIntegerFrequency(a))
            } else {
                Ok(r as i64)
            }
        })
        .collect()
}

/// Coefficient matrices `C^p_{m,n}` of every harmonic.
pub fn harmonic_couplings(
    lat: &Lattice,
    drive: &RamanDrive,
    kernel: &CouplingKernel,
) -> Result<BTreeMap<i64, CouplingMatrix>> {
    let delta = lat
        .delta()
        .ok_or_else(|| Error::Invalid("harmonic decomposition needs a linear chain gradient".into()))?;
    let a = integer_detunings(drive, delta)?;
    let n = lat.len();
    let fields: Vec<Vec<C64>> =
        drive.sidebands.iter().map(|s| lat.sites.iter().map(|site| s.at(site.position)).collect()).collect();
    let mut out: BTreeMap<i64, CouplingMatrix> = BTreeMap::new();
    out.insert(0, CouplingMatrix::zeros(n));
    for m in 0..n {
        for k in 0..n {
            if m == k {
                continue;
            }
            let kr = kernel.eval(lat.distance(m, k));
            for (al, fa) in fields.iter().enumerate() {
                for (be, fb) in fields.iter().enumerate() {
                    let v = fa[k] * fb[m].conj() * kr;
                    if v == ZERO {
                        continue;
                    }
                    let p = (m as i64 - k as i64) + (a[al] - a[be]);
                    let c = out.entry(p).or_insert_with(|| CouplingMatrix::zeros(n));
                    let old = c.get(m, k);
                    c.set(m, k, old + v);
                }
            }
        }
    }
    Ok(out)
}

/// Fourier components of the driven chain Hamiltonian on a sector.
pub fn fourier_from_drive(
    lat: &Lattice,
    drive: &RamanDrive,
    kernel: &CouplingKernel,
    sector: &BasisSector,
) -> Result<FourierSeries> {
    let delta = lat.delta().ok_or_else(|| Error::Invalid("harmonic decomposition needs a linear chain gradient".into()))?;
    let comps = harmonic_couplings(lat, drive, kernel)?;
    let components = comps.iter().map(|(&p, c)| (p, hopping_operator(c, sector))).collect();
    FourierSeries::new(delta, components)
}

/// Instantaneous Hamiltonian at time `t` assembled directly from the
/// time-dependent fields, without the harmonic split.
pub fn instantaneous_hamiltonian(
    lat: &Lattice,
    drive: &RamanDrive,
    kernel: &CouplingKernel,
    sector: &BasisSector,
    t: f64,
) -> Result<SectorOperator> {
    let n = lat.len();
    let omega: Vec<f64> = lat.shifts();
    let field = |site: usize| -> C64 {
        drive
            .sidebands
            .iter()
            .map(|s| s.at(lat.sites[site].position) * C64::from_polar(1.0, s.detuning * t))
            .sum()
    };
    let f: Vec<C64> = (0..n).map(field).collect();
    let c = CouplingMatrix::from_fn(n, |m, k| {
        f[k] * f[m].conj() * kernel.eval(lat.distance(m, k)) * C64::from_polar(1.0, (omega[m] - omega[k]) * t)
    });
    Ok(hopping_operator(&c, sector))
}

/// Fourier series of a co-propagating chain drive with sideband `α` at
/// detuning `α δ`, constant kernel `jt`, on the given sector.
pub fn hs_fourier(drive: &RamanDrive, jt: f64, delta: f64, sector: &BasisSector) -> Result<FourierSeries> {
    let lat = crate::lattice::build_chain(sector.sites(), delta)?;
    fourier_from_drive(&lat, drive, &CouplingKernel::Constant { jt }, sector)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drive::{ModulationMode, Sideband};
    use crate::hamiltonian::{build_sector, build_xy};
    use crate::lattice::build_chain;
    use crate::linalg::max_abs;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn carrier_only_has_offset_harmonics() {
        let lat = build_chain(4, 1.0).unwrap();
        let d = RamanDrive::new(vec![Sideband::plain(0.0, c(1.0, 0.0))], ModulationMode::FrequencyShift).unwrap();
        let s = fourier_from_drive(&lat, &d, &CouplingKernel::Constant { jt: 1.0 }, &build_sector(4, 2).unwrap()).unwrap();
        assert!(s.h0().is_zero());
        assert_eq!(s.components.keys().copied().collect::<Vec<_>>(), vec![-3, -2, -1, 0, 1, 2, 3]);
        assert_eq!(s.p_max(), 3);
    }

    #[test]
    fn resonant_part_is_nearest_neighbour() {
        let lat = build_chain(5, 1.0).unwrap();
        let k = CouplingKernel::Constant { jt: 0.5 };
        let d = RamanDrive::new(
            vec![Sideband::plain(0.0, c(2.0, 0.0)), Sideband::plain(1.0, c(0.1, 0.3))],
            ModulationMode::FrequencyShift,
        )
        .unwrap();
        let sector = build_sector(5, 2).unwrap();
        let s = fourier_from_drive(&lat, &d, &k, &sector).unwrap();
        let j = crate::drive::coupling_matrix(&lat, &d, &k, None).matrix;
        assert!(s.h0().max_diff(&build_xy(&j, &sector).unwrap()) < 1e-15);
        assert!(s.hermiticity_error() < 1e-15);
    }

    #[test]
    fn series_sums_to_instantaneous_hamiltonian() {
        let lat = build_chain(5, 1.0).unwrap();
        let k = CouplingKernel::Exp1d { jt: 1.0, xi: 3.0 };
        let d = RamanDrive::new(
            vec![
                Sideband::plain(0.0, c(1.5, 0.0)),
                Sideband::plain(1.0, c(0.2, -0.1)),
                Sideband::plain(3.0, c(0.05, 0.3)),
            ],
            ModulationMode::FrequencyShift,
        )
        .unwrap();
        let sector = build_sector(5, 2).unwrap();
        let s = fourier_from_drive(&lat, &d, &k, &sector).unwrap();
        for t in [0.0, 0.37, 2.1] {
            let direct = instantaneous_hamiltonian(&lat, &d, &k, &sector, t).unwrap().to_dense();
            assert!(max_abs(&(s.at(t).to_dense() - direct)) < 1e-13, "t = {t}");
        }
    }

    #[test]
    fn hs_resonant_part_matches_target() {
        use crate::drive::{solve_sidebands_1d, SolveMode};
        use crate::hamiltonian::{hs_j0, hs_profile, hs_target};
        let n = 8;
        let j0 = hs_j0(n, 1.0);
        let sol = solve_sidebands_1d(&hs_profile(n, j0), 1.0, SolveMode::Optimized).unwrap();
        let sector = build_sector(n, n / 2).unwrap();
        let s = hs_fourier(&sol.to_drive(3.0), 1.0, 3.0, &sector).unwrap();
        let want = build_xy(&hs_target(n, j0).unwrap(), &sector).unwrap();
        assert!(s.h0().max_diff(&want) <= 1e-6 * want.max_abs());
        assert!(s.p_max() <= 2 * (n - 1));
    }

    #[test]
    fn incommensurate_detuning_rejected() {
        let lat = build_chain(3, 1.0).unwrap();
        let d = RamanDrive::new(
            vec![Sideband::plain(0.0, c(1.0, 0.0)), Sideband::plain(0.5, c(0.1, 0.0))],
            ModulationMode::FrequencyShift,
        )
        .unwrap();
        let r = fourier_from_drive(&lat, &d, &CouplingKernel::Constant { jt: 1.0 }, &build_sector(3, 1).unwrap());
        assert!(matches!(r, Err(Error::NonIntegerFrequency(_))));
    }
}
