//! Piecewise schedules: each segment evolves under a static or driven
//! generator, optionally sandwiched between collective rotations.

use crate::error::{Error, Result};
use crate::hamiltonian::{collective_rotation, Axis, FourierSeries, SectorOperator};
use crate::linalg::{expm_herm, unitarity_error, Mat};

use super::{propagate, PropagateOptions};

#[derive(Clone, Debug)]
pub enum Generator {
    Static(SectorOperator),
    Driven(FourierSeries),
}

impl Generator {
    pub fn dim(&self) -> usize {
        match self {
            Generator::Static(h) => h.dim(),
            Generator::Driven(s) => s.dim(),
        }
    }
}

/// Basis change applied around a segment. Collective rotations act on the
/// full `2^N` space.
#[derive(Clone, Debug, PartialEq)]
pub enum Rotation {
    Identity,
    /// `Π_n exp(i θ σ_axis^n / 2)`.
    Collective { axis: Axis, angle: f64 },
    Custom(Mat),
}

impl Rotation {
    pub fn x(angle: f64) -> Rotation {
        Rotation::Collective { axis: Axis::X, angle }
    }

    pub fn y(angle: f64) -> Rotation {
        Rotation::Collective { axis: Axis::Y, angle }
    }

    pub fn inverse(&self) -> Rotation {
        match self {
            Rotation::Identity => Rotation::Identity,
            Rotation::Collective { axis, angle } => Rotation::Collective { axis: *axis, angle: -angle },
            Rotation::Custom(u) => Rotation::Custom(u.adjoint()),
        }
    }

    /// Matrix on `N` sites, `None` for the identity.
    pub fn matrix(&self, n_sites: usize) -> Option<Mat> {
        match self {
            Rotation::Identity => None,
            Rotation::Collective { axis, angle } => Some(collective_rotation(n_sites, *axis, *angle)),
            Rotation::Custom(u) => Some(u.clone()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Segment {
    pub generator: Generator,
    pub duration: f64,
    pub before: Rotation,
    pub after: Rotation,
}

impl Segment {
    pub fn new(generator: Generator, duration: f64) -> Segment {
        Segment { generator, duration, before: Rotation::Identity, after: Rotation::Identity }
    }

    /// Evolution under `R H R†`: rotate by `R†`, evolve, rotate back.
    pub fn conjugated(generator: Generator, duration: f64, rotation: Rotation) -> Segment {
        Segment { generator, duration, before: rotation.inverse(), after: rotation }
    }
}

#[derive(Clone, Debug)]
pub struct Schedule {
    pub n_sites: usize,
    pub segments: Vec<Segment>,
}

impl Schedule {
    /// Validates durations, dimensions and rotation unitarity.
    pub fn new(n_sites: usize, segments: Vec<Segment>) -> Result<Schedule> {
        let dim = segments.first().map(|s| s.generator.dim()).unwrap_or(0);
        for (i, s) in segments.iter().enumerate() {
            if !(s.duration > 0.0) {
                return Err(Error::Invalid(format!("segment {i}: duration must be positive, got {}", s.duration)));
            }
            if s.generator.dim() != dim {
                return Err(Error::Invalid(format!("segment {i}: dimension {} differs from {dim}", s.generator.dim())));
            }
            for r in [&s.before, &s.after] {
                if let Some(u) = r.matrix(n_sites) {
                    if u.nrows() != dim {
                        return Err(Error::Invalid(format!(
                            "segment {i}: rotation acts on dimension {}, generator on {dim} (rotations need the full space)",
                            u.nrows()
                        )));
                    }
                    let e = unitarity_error(&u);
                    if e > 1e-10 {
                        return Err(Error::Invalid(format!("segment {i}: rotation not unitary ({e:.3e})")));
                    }
                }
            }
        }
        Ok(Schedule { n_sites, segments })
    }

    pub fn dim(&self) -> usize {
        self.segments.first().map(|s| s.generator.dim()).unwrap_or(0)
    }

    pub fn duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    /// Ordered product over all segments (first segment acts first).
    pub fn unitary(&self, opts: PropagateOptions) -> Result<Mat> {
        let dim = self.dim();
        let mut u = Mat::identity(dim, dim);
        for s in &self.segments {
            if let Some(r) = s.before.matrix(self.n_sites) {
                u = r * u;
            }
            let step = match &s.generator {
                Generator::Static(h) => expm_herm(&h.to_dense(), s.duration),
                Generator::Driven(series) => propagate(series, s.duration, opts)?.unitary,
            };
            u = step * u;
            if let Some(r) = s.after.matrix(self.n_sites) {
                u = r * u;
            }
        }
        Ok(u)
    }
}

/// `u^k` by repeated squaring.
pub fn matrix_power(u: &Mat, mut k: usize) -> Mat {
    let n = u.nrows();
    let mut out = Mat::identity(n, n);
    let mut base = u.clone();
    while k > 0 {
        if k & 1 == 1 {
            out = &out * &base;
        }
        k >>= 1;
        if k > 0 {
            base = &base * &base;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{build_full, pauli_coupling, sigma_x, sigma_z};
    use crate::drive::CouplingMatrix;
    use crate::linalg::{max_abs, C64};

    #[test]
    fn conjugated_segment_equals_rotated_generator() {
        // R_y(π/2) σ_x R_y(π/2)† = σ_z on every site
        let n = 3;
        let sector = build_full(n).unwrap();
        let j = CouplingMatrix::from_fn(n, |m, k| C64::new(0.4 + 0.1 * (m + k) as f64, 0.0));
        let xx = pauli_coupling(&j, sigma_x(), sigma_x(), &sector);
        let zz = pauli_coupling(&j, sigma_z(), sigma_z(), &sector);
        let s = Schedule::new(n, vec![Segment::conjugated(Generator::Static(xx), 0.8, Rotation::y(std::f64::consts::FRAC_PI_2))])
            .unwrap();
        let u = s.unitary(PropagateOptions::default()).unwrap();
        assert!(max_abs(&(u - expm_herm(&zz.to_dense(), 0.8))) < 1e-12);
    }

    #[test]
    fn rejects_bad_segments() {
        let h = SectorOperator::identity(4);
        assert!(Schedule::new(2, vec![Segment::new(Generator::Static(h.clone()), 0.0)]).is_err());
        let sub = SectorOperator::identity(2);
        assert!(Schedule::new(2, vec![Segment::conjugated(Generator::Static(sub), 1.0, Rotation::x(1.0))]).is_err());
        let bad = Rotation::Custom(Mat::identity(4, 4) * C64::new(2.0, 0.0));
        assert!(Schedule::new(2, vec![Segment { before: bad, ..Segment::new(Generator::Static(h), 1.0) }]).is_err());
    }

    #[test]
    fn power_by_squaring() {
        let u = expm_herm(&Mat::from_fn(3, 3, |i, j| C64::new((i + j) as f64, 0.0)), 0.3);
        let mut slow = Mat::identity(3, 3);
        for _ in 0..13 {
            slow = &slow * &u;
        }
        assert!(max_abs(&(matrix_power(&u, 13) - slow)) < 1e-13);
    }
}
