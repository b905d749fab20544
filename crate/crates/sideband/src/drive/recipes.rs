//! Two-beam drive recipes for the square-lattice models.
//!
//! Every coupling class `Δ` is written as `J_{n+Δ,n} = u + v·s(n)` with the
//! sublattice sign `s(n) = (−1)^{n_x+n_y}`. A strong carrier
//! `X_0(r) = |X_0|(−1)^{r_y}` (ŷ-propagating) sits at zero detuning; class
//! `Δ` gets its own sideband at `(q Δ_x + Δ_y) B2` built from a ŷ beam
//! (uniform part) and an x̂ beam (staggered part):
//!
//! `X_Δ(r) = [u*(−1)^{Δ_y}(−1)^{r_y} + v*(−1)^{Δ_x}(−1)^{r_x}] / (K(|Δ|) |X_0|)`.
//!
//! Sideband-sideband beats are suppressed by `1/|X_0|²`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::GOLDEN;
use crate::linalg::{C64, ZERO};

use super::{Beam, CouplingKernel, ModulationMode, RamanDrive, Sideband};

/// Coupling class `J_{n+Δ,n} = uniform + staggered·s(n)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassTarget {
    pub delta: [i64; 2],
    pub uniform: C64,
    pub staggered: C64,
}

impl ClassTarget {
    /// Coupling from the site at `cell` to `cell + Δ`.
    pub fn value_at(&self, cell: [i64; 2]) -> C64 {
        let s = if (cell[0] + cell[1]).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        self.uniform + self.staggered * s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecipeOptions {
    pub carrier: f64,
    pub b2: f64,
    pub q: f64,
    pub kernel: CouplingKernel,
}

impl Default for RecipeOptions {
    fn default() -> Self {
        RecipeOptions { carrier: 1e6, b2: 1.0, q: GOLDEN, kernel: CouplingKernel::Constant { jt: 1.0 } }
    }
}

fn sign(k: i64) -> f64 {
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Drive realizing the listed classes on a square lattice.
pub fn two_beam_drive(classes: &[ClassTarget], mode: ModulationMode, opts: &RecipeOptions) -> Result<RamanDrive> {
    if !(opts.carrier > 0.0) {
        return Err(Error::Invalid("carrier amplitude must be positive".into()));
    }
    let mut sidebands = vec![Sideband {
        detuning: 0.0,
        amplitude: C64::new(opts.carrier, 0.0),
        wavevector: [0.0, 1.0],
        second: None,
    }];
    for c in classes {
        let [dx, dy] = c.delta;
        if dx < 0 || (dx == 0 && dy <= 0) {
            return Err(Error::Invalid(format!(
                "class {:?} must point into the upper half plane; its partner follows by hermiticity",
                c.delta
            )));
        }
        let dist = ((dx * dx + dy * dy) as f64).sqrt();
        let norm = opts.kernel.eval(dist) * opts.carrier;
        let a_u = c.uniform.conj() * sign(dy) / norm;
        let a_s = c.staggered.conj() * sign(dx) / norm;
        let uy = Beam { amplitude: a_u, wavevector: [0.0, 1.0] };
        let sx = Beam { amplitude: a_s, wavevector: [1.0, 0.0] };
        let (main, second) = match (a_u == ZERO, a_s == ZERO) {
            (true, true) => continue,
            (false, true) => (uy, None),
            (true, false) => (sx, None),
            (false, false) => (uy, Some(sx)),
        };
        let detuning = (opts.q * dx as f64 + dy as f64) * opts.b2;
        match mode {
            ModulationMode::FrequencyShift => sidebands.push(Sideband {
                detuning,
                amplitude: main.amplitude,
                wavevector: main.wavevector,
                second,
            }),
            ModulationMode::AmplitudeModulation => {
                // identical red and blue beams reproduce u + v s only if
                // u is real and v (−1)^{Δx+Δy} = v*
                let scale = c.uniform.norm().max(c.staggered.norm());
                let u_ok = c.uniform.im.abs() <= 1e-12 * scale;
                let v_ok = (c.staggered.conj() * sign(dx + dy) - c.staggered).norm() <= 1e-12 * scale;
                if !(u_ok && v_ok) {
                    return Err(Error::Invalid(format!(
                        "class {:?} cannot be realized with amplitude modulation",
                        c.delta
                    )));
                }
                let half = |b: Beam| Beam { amplitude: b.amplitude * 0.5, wavevector: b.wavevector };
                for det in [detuning, -detuning] {
                    sidebands.push(Sideband {
                        detuning: det,
                        amplitude: main.amplitude * 0.5,
                        wavevector: main.wavevector,
                        second: second.map(half),
                    });
                }
            }
        }
    }
    RamanDrive::new(sidebands, mode)
}

/// Chiral-flux model: NN `t1 e^{∓iφ s}`, NNN `∓t2 s`, NNNN `t3`, `φ = atan ζ`.
pub fn chiral_flux_classes(t1: f64, t2: f64, t3: f64, zeta: f64) -> Vec<ClassTarget> {
    let phi = zeta.atan();
    let (c, s) = (phi.cos(), phi.sin());
    let cls = |delta, u: C64, v: C64| ClassTarget { delta, uniform: u, staggered: v };
    vec![
        // e^{-iφs} = cos φ − i s sin φ
        cls([1, 0], C64::new(t1 * c, 0.0), C64::new(0.0, -t1 * s)),
        cls([0, 1], C64::new(t1 * c, 0.0), C64::new(0.0, t1 * s)),
        cls([1, 1], ZERO, C64::new(-t2, 0.0)),
        cls([1, -1], ZERO, C64::new(t2, 0.0)),
        cls([2, 0], C64::new(t3, 0.0), ZERO),
        cls([0, 2], C64::new(t3, 0.0), ZERO),
    ]
}

pub fn chiral_flux_drive(t1: f64, t2: f64, t3: f64, zeta: f64, mode: ModulationMode) -> Result<RamanDrive> {
    check_nonneg(&[t1, t2, t3, zeta])?;
    two_beam_drive(&chiral_flux_classes(t1, t2, t3, zeta), mode, &RecipeOptions::default())
}

/// Brick-wall model: NN-y `t1`, checkerboard NN-x `(t1/2)(1 − s)`,
/// NNN and `2ŷ` hoppings `t2 e^{±iφ s}`.
pub fn brickwall_classes(t1: f64, t2: f64, phi: f64) -> Vec<ClassTarget> {
    let (c, s) = (phi.cos(), phi.sin());
    let cls = |delta, u: C64, v: C64| ClassTarget { delta, uniform: u, staggered: v };
    vec![
        cls([0, 1], C64::new(t1, 0.0), ZERO),
        cls([1, 0], C64::new(0.5 * t1, 0.0), C64::new(-0.5 * t1, 0.0)),
        cls([0, 2], C64::new(t2 * c, 0.0), C64::new(0.0, -t2 * s)),
        cls([1, 1], C64::new(t2 * c, 0.0), C64::new(0.0, t2 * s)),
        cls([1, -1], C64::new(t2 * c, 0.0), C64::new(0.0, -t2 * s)),
    ]
}

/// Frequency-shift drive for the brick-wall model.
pub fn brickwall_drive(t1: f64, t2: f64, phi: f64) -> Result<RamanDrive> {
    check_nonneg(&[t1, t2])?;
    two_beam_drive(&brickwall_classes(t1, t2, phi), ModulationMode::FrequencyShift, &RecipeOptions::default())
}

/// Default brick-wall parameters: `cos φ = 3√(3/43)`, `t2 = √129/36 · t1`.
pub fn brickwall_defaults(t1: f64) -> (f64, f64) {
    let phi = (3.0 * (3.0_f64 / 43.0).sqrt()).acos();
    (129f64.sqrt() / 36.0 * t1, phi)
}

fn check_nonneg(v: &[f64]) -> Result<()> {
    if v.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
        return Err(Error::Invalid(format!("parameters must be finite and non-negative: {v:?}")));
    }
    Ok(())
}
