//! Multi-frequency Raman drives and the couplings they induce.
//!
//! A sideband `α` oscillates at detuning `ω̃_α` and carries the spatial
//! field `X_α(r) = Σ_beams c·exp(iπ k·r)`. Two sites `m, n` exchange an
//! excitation when `ω_m − ω_n = ω̃_β − ω̃_α` for some sideband pair, which
//! adds `X_α(r_n) X*_β(r_m) J̃(|r_m − r_n|)` to `J_{m,n}`.

mod kernel;
pub mod recipes;
pub mod solver;
mod stark;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{GradientSpec, Lattice};
use crate::linalg::{C64, ZERO};

pub use kernel::{bessel_k0, CouplingKernel};
pub use recipes::{
    brickwall_classes, brickwall_defaults, brickwall_drive, chiral_flux_classes, chiral_flux_drive, two_beam_drive,
    ClassTarget, RecipeOptions,
};
pub use solver::{solve_sidebands_1d, SidebandSolution, SolveMode, SolverOptions, TraceRow};
pub use stark::{stark_series, StarkComponent, StarkSeries};

/// Default resonance tolerance in units of the gradient step.
pub const RESONANCE_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Beam {
    pub amplitude: C64,
    /// Propagation vector in units of π/d.
    pub wavevector: [f64; 2],
}

impl Beam {
    pub fn at(&self, r: [f64; 2]) -> C64 {
        let phase = std::f64::consts::PI * (self.wavevector[0] * r[0] + self.wavevector[1] * r[1]);
        self.amplitude * C64::from_polar(1.0, phase)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sideband {
    pub detuning: f64,
    pub amplitude: C64,
    pub wavevector: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub second: Option<Beam>,
}

impl Sideband {
    /// Co-propagating single-beam sideband (`k = 0`).
    pub fn plain(detuning: f64, amplitude: C64) -> Sideband {
        Sideband { detuning, amplitude, wavevector: [0.0, 0.0], second: None }
    }

    /// Field `X_α(r)` including propagation phases.
    pub fn at(&self, r: [f64; 2]) -> C64 {
        let main = Beam { amplitude: self.amplitude, wavevector: self.wavevector }.at(r);
        match &self.second {
            Some(b) => main + b.at(r),
            None => main,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ModulationMode {
    #[default]
    FrequencyShift,
    AmplitudeModulation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
pub struct RamanDrive {
    pub sidebands: Vec<Sideband>,
    #[serde(default)]
    pub mode: ModulationMode,
}

impl RamanDrive {
    pub fn new(sidebands: Vec<Sideband>, mode: ModulationMode) -> Result<RamanDrive> {
        let d = RamanDrive { sidebands, mode };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(first) = self.sidebands.first() {
            if first.detuning != 0.0 {
                return Err(Error::Invalid(format!(
                    "main sideband must sit at zero detuning, found {}",
                    first.detuning
                )));
            }
        }
        for (i, s) in self.sidebands.iter().enumerate() {
            if !s.detuning.is_finite() || !s.amplitude.re.is_finite() || !s.amplitude.im.is_finite() {
                return Err(Error::Invalid(format!("sideband {i} has non-finite data")));
            }
        }
        if self.mode == ModulationMode::AmplitudeModulation {
            for (i, s) in self.sidebands.iter().enumerate() {
                if s.detuning == 0.0 {
                    continue;
                }
                let partner = self.sidebands.iter().any(|o| {
                    (o.detuning + s.detuning).abs() <= 1e-12 * s.detuning.abs()
                        && (o.amplitude - s.amplitude).norm() <= 1e-12 * s.amplitude.norm().max(1e-300)
                        && o.wavevector == s.wavevector
                        && o.second == s.second
                });
                if !partner {
                    return Err(Error::Invalid(format!(
                        "amplitude-modulated sideband {i} at {} has no mirrored partner",
                        s.detuning
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn total_intensity(&self) -> f64 {
        self.sidebands
            .iter()
            .map(|s| s.amplitude.norm_sqr() + s.second.map_or(0.0, |b| b.amplitude.norm_sqr()))
            .sum()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<RamanDrive> {
        let d: RamanDrive = serde_json::from_str(s)?;
        d.validate()?;
        Ok(d)
    }
}

/// Dense `N×N` complex coupling matrix with zero diagonal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingMatrix {
    n: usize,
    data: Vec<C64>,
}

impl CouplingMatrix {
    pub fn zeros(n: usize) -> CouplingMatrix {
        CouplingMatrix { n, data: vec![ZERO; n * n] }
    }

    pub fn from_fn<F: FnMut(usize, usize) -> C64>(n: usize, mut f: F) -> CouplingMatrix {
        let mut c = CouplingMatrix::zeros(n);
        for m in 0..n {
            for k in 0..n {
                if m != k {
                    c.data[m * n + k] = f(m, k);
                }
            }
        }
        c
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, m: usize, n: usize) -> C64 {
        self.data[m * self.n + n]
    }

    pub fn set(&mut self, m: usize, n: usize, v: C64) {
        assert!(m != n, "diagonal couplings are not allowed");
        self.data[m * self.n + n] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |a, z| a.max(z.norm()))
    }

    /// Relative deviation from `J_{n,m} = J*_{m,n}`.
    pub fn hermiticity_error(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for m in 0..self.n {
            for k in m + 1..self.n {
                worst = worst.max((self.get(k, m) - self.get(m, k).conj()).norm());
            }
        }
        worst / scale
    }

    /// Deviation from a real symmetric matrix.
    pub fn symmetry_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for m in 0..self.n {
            for k in 0..self.n {
                worst = worst.max(self.get(m, k).im.abs());
                worst = worst.max((self.get(m, k) - self.get(k, m)).norm());
            }
        }
        worst
    }

    pub fn max_diff(&self, other: &CouplingMatrix) -> f64 {
        self.data.iter().zip(&other.data).fold(0.0, |a, (x, y)| a.max((x - y).norm()))
    }

    pub fn scaled(&self, s: f64) -> CouplingMatrix {
        CouplingMatrix { n: self.n, data: self.data.iter().map(|z| z * s).collect() }
    }

    /// Entrywise product `J'_{m,n} = f(m,n)·J_{m,n}`.
    pub fn map<F: FnMut(usize, usize, C64) -> C64>(&self, mut f: F) -> CouplingMatrix {
        let mut out = self.clone();
        for m in 0..self.n {
            for k in 0..self.n {
                if m != k {
                    out.data[m * self.n + k] = f(m, k, self.get(m, k));
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResonanceWarning {
    /// Sideband pair `(α, β)`.
    pub sidebands: (usize, usize),
    /// Separation classes matched by this one pair.
    pub classes: Vec<[i64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CouplingReport {
    pub matrix: CouplingMatrix,
    pub warnings: Vec<ResonanceWarning>,
}

/// Sideband pairs sorted by frequency difference `ω̃_β − ω̃_α`.
fn sorted_pairs(drive: &RamanDrive) -> Vec<(f64, usize, usize)> {
    let s = &drive.sidebands;
    let mut pairs = Vec::with_capacity(s.len() * s.len());
    for a in 0..s.len() {
        for b in 0..s.len() {
            pairs.push((s[b].detuning - s[a].detuning, a, b));
        }
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then((x.1, x.2).cmp(&(y.1, y.2))));
    pairs
}

fn matching<'a>(pairs: &'a [(f64, usize, usize)], target: f64, tol: f64) -> impl Iterator<Item = &'a (f64, usize, usize)> {
    let start = pairs.partition_point(|p| p.0 < target - tol);
    pairs[start..].iter().take_while(move |p| p.0 <= target + tol)
}

/// Shift difference `ω_m − ω_n`, exact integer multiples on a linear chain.
fn shift_difference(lat: &Lattice, m: usize, n: usize) -> f64 {
    match lat.gradient {
        GradientSpec::Linear { delta } => (m as f64 - n as f64) * delta,
        GradientSpec::Planar { .. } => lat.sites[m].shift - lat.sites[n].shift,
    }
}

/// Forward map from drive to couplings.
///
/// `tol` is an absolute frequency tolerance; `None` uses
/// `RESONANCE_TOL` times the gradient step.
pub fn coupling_matrix(
    lat: &Lattice,
    drive: &RamanDrive,
    kernel: &CouplingKernel,
    tol: Option<f64>,
) -> CouplingReport {
    let tol = tol.unwrap_or_else(|| RESONANCE_TOL * gradient_scale(lat));
    let n = lat.len();
    let pairs = sorted_pairs(drive);
    let fields: Vec<Vec<C64>> = drive
        .sidebands
        .iter()
        .map(|s| lat.sites.iter().map(|site| s.at(site.position)).collect())
        .collect();

    let mut j = CouplingMatrix::zeros(n);
    for m in 0..n {
        for k in 0..n {
            if m == k {
                continue;
            }
            let dw = shift_difference(lat, m, k);
            let mut hits: Vec<(usize, usize)> = matching(&pairs, dw, tol).map(|p| (p.1, p.2)).collect();
            if hits.is_empty() {
                continue;
            }
            hits.sort();
            let kr = kernel.eval(lat.distance(m, k));
            let mut acc = ZERO;
            for (a, b) in hits {
                acc += fields[a][k] * fields[b][m].conj();
            }
            j.data[m * n + k] = acc * kr;
        }
    }

    // a single sideband pair that lands on two different separation classes
    let classes = crate::lattice::separation_classes(lat);
    let mut warnings = Vec::new();
    for &(f, a, b) in &pairs {
        if a == b {
            continue;
        }
        let hit: Vec<[i64; 2]> = classes
            .iter()
            .filter(|(_, v)| {
                let (m, k) = v[0];
                (shift_difference(lat, m, k) - f).abs() <= tol
            })
            .map(|(key, _)| *key)
            .collect();
        if hit.len() > 1 {
            warnings.push(ResonanceWarning { sidebands: (a, b), classes: hit });
        }
    }
    CouplingReport { matrix: j, warnings }
}

fn gradient_scale(lat: &Lattice) -> f64 {
    match lat.gradient {
        GradientSpec::Linear { delta } => delta,
        GradientSpec::Planar { b2, .. } => b2.abs(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_chain, build_square, GOLDEN};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn nearest_neighbour_only() {
        let lat = build_chain(5, 1.0).unwrap();
        let drive = RamanDrive::new(
            vec![Sideband::plain(0.0, c(3.0, 0.0)), Sideband::plain(1.0, c(0.2, 0.1))],
            ModulationMode::FrequencyShift,
        )
        .unwrap();
        let j = coupling_matrix(&lat, &drive, &CouplingKernel::Constant { jt: 2.0 }, None).matrix;
        let expect = c(3.0, 0.0) * c(0.2, 0.1).conj() * 2.0;
        for m in 0..5 {
            for k in 0..5 {
                let v = j.get(m, k);
                if m == k + 1 {
                    assert!((v - expect).norm() < 1e-15);
                } else if k == m + 1 {
                    assert!((v - expect.conj()).norm() < 1e-15);
                } else {
                    assert_eq!(v, ZERO);
                }
            }
        }
    }

    #[test]
    fn empty_drive_gives_zero() {
        let lat = build_chain(4, 1.0).unwrap();
        let j = coupling_matrix(&lat, &RamanDrive::default(), &CouplingKernel::Constant { jt: 1.0 }, None);
        assert_eq!(j.matrix.max_abs(), 0.0);
    }

    #[test]
    fn amplitude_modulation_doubles_real_coupling() {
        let lat = build_chain(4, 1.0).unwrap();
        let k = CouplingKernel::Constant { jt: 1.0 };
        let fm = RamanDrive::new(
            vec![Sideband::plain(0.0, c(5.0, 0.0)), Sideband::plain(1.0, c(0.1, 0.0))],
            ModulationMode::FrequencyShift,
        )
        .unwrap();
        let am = RamanDrive::new(
            vec![
                Sideband::plain(0.0, c(5.0, 0.0)),
                Sideband::plain(1.0, c(0.1, 0.0)),
                Sideband::plain(-1.0, c(0.1, 0.0)),
            ],
            ModulationMode::AmplitudeModulation,
        )
        .unwrap();
        let jf = coupling_matrix(&lat, &fm, &k, None).matrix;
        let ja = coupling_matrix(&lat, &am, &k, None).matrix;
        for m in 0..4usize {
            for n in 0..4 {
                if m == n {
                    continue;
                }
                // the ± pair also beats against itself two steps apart
                let want = match m.abs_diff(n) {
                    1 => jf.get(m, n) * 2.0,
                    2 => c(0.01, 0.0),
                    _ => c(0.0, 0.0),
                };
                assert!((ja.get(m, n) - want).norm() < 1e-15, "({m}, {n})");
            }
        }
    }

    #[test]
    fn unpaired_amplitude_modulation_rejected() {
        let r = RamanDrive::new(
            vec![Sideband::plain(0.0, c(1.0, 0.0)), Sideband::plain(1.0, c(0.1, 0.0))],
            ModulationMode::AmplitudeModulation,
        );
        assert!(r.is_err());
    }

    #[test]
    fn drive_json_round_trip() {
        let d = RamanDrive::new(
            vec![
                Sideband::plain(0.0, c(1.0, 0.5)),
                Sideband {
                    detuning: GOLDEN,
                    amplitude: c(0.0, 0.25),
                    wavevector: [1.0, 0.0],
                    second: Some(Beam { amplitude: c(0.5, -0.5), wavevector: [0.0, 1.0] }),
                },
            ],
            ModulationMode::FrequencyShift,
        )
        .unwrap();
        let text = d.to_json().unwrap();
        assert!(text.contains("[\n        0.0,\n        0.25\n      ]") || text.contains("0.25"));
        assert_eq!(RamanDrive::from_json(&text).unwrap(), d);
    }

    #[test]
    fn wide_tolerance_flags_ambiguity() {
        let lat = build_chain(4, 1.0).unwrap();
        let d = RamanDrive::new(
            vec![Sideband::plain(0.0, c(1.0, 0.0)), Sideband::plain(1.5, c(0.1, 0.0))],
            ModulationMode::FrequencyShift,
        )
        .unwrap();
        let k = CouplingKernel::Constant { jt: 1.0 };
        assert!(coupling_matrix(&lat, &d, &k, None).warnings.is_empty());
        let wide = coupling_matrix(&lat, &d, &k, Some(0.6));
        assert!(wide.warnings.iter().any(|w| w.classes.contains(&[1, 0]) && w.classes.contains(&[2, 0])));
    }

    fn random_drive(amps: &[(f64, f64)], ks: &[(u8, u8)], b2: f64) -> RamanDrive {
        let mut s = vec![Sideband::plain(0.0, c(2.0, 0.0))];
        for (i, (&(re, im), &(kx, ky))) in amps.iter().zip(ks).enumerate() {
            let det = ((i % 3) as f64 * GOLDEN + (i / 3) as f64 + 1.0) * b2;
            s.push(Sideband {
                detuning: det,
                amplitude: c(re, im),
                wavevector: [kx as f64, ky as f64],
                second: None,
            });
        }
        RamanDrive::new(s, ModulationMode::FrequencyShift).unwrap()
    }

    proptest! {
        #[test]
        fn forward_map_is_hermitian(
            amps in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..6),
            ks in prop::collection::vec((0u8..2, 0u8..2), 6),
        ) {
            let lat = build_square(3, 3, 1.0, GOLDEN).unwrap();
            let d = random_drive(&amps, &ks, 1.0);
            let j = coupling_matrix(&lat, &d, &CouplingKernel::Bessel2d { jt: 1.0, xi: 2.0 }, None).matrix;
            prop_assert!(j.hermiticity_error() < 1e-14);
        }

        #[test]
        fn constant_shift_offset_changes_nothing(
            amps in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..6),
            ks in prop::collection::vec((0u8..2, 0u8..2), 6),
            offset in -50.0f64..50.0,
        ) {
            let lat = build_square(3, 3, 1.0, GOLDEN).unwrap();
            let mut moved = lat.clone();
            moved.sites.iter_mut().for_each(|s| s.shift += offset);
            let d = random_drive(&amps, &ks, 1.0);
            let k = CouplingKernel::Constant { jt: 1.0 };
            let a = coupling_matrix(&lat, &d, &k, Some(1e-9)).matrix;
            let b = coupling_matrix(&moved, &d, &k, Some(1e-9)).matrix;
            prop_assert!(a.max_diff(&b) < 1e-12);
        }
    }
}
