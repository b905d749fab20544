//! Time evolution: midpoint propagation of driven Hamiltonians, segment
//! schedules with collective rotations, Trotterized XXZ and the
//! stroboscopic check against the Floquet effective Hamiltonian.

mod band;
mod schedule;
mod trotter;

pub use band::*;
pub use schedule::*;
pub use trotter::*;

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::floquet::TwoStepSeries;
use crate::hamiltonian::FourierSeries;
use crate::io::{write_table, Cell};
use crate::linalg::{expm_herm, expm_krylov, norm, spectral_norm, unitarity_error, Mat, C64};

/// Largest dimension handled with dense exponentials.
pub const DENSE_MAX_DIM: usize = 4096;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct PropagateOptions {
    /// Midpoint steps per drive period, at least 16.
    pub substeps_per_period: usize,
    /// Largest accepted change between the coarse and the halved step.
    pub tol: f64,
}

impl Default for PropagateOptions {
    fn default() -> Self {
        PropagateOptions { substeps_per_period: 64, tol: 1e-6 }
    }
}

impl PropagateOptions {
    fn check(&self) -> Result<()> {
        if self.substeps_per_period < 16 {
            return Err(Error::Invalid(format!("need at least 16 substeps per period, got {}", self.substeps_per_period)));
        }
        if self.substeps_per_period % 2 == 1 {
            return Err(Error::Invalid("substeps per period must be even".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Propagation {
    /// Result at the fine step.
    pub unitary: Mat,
    /// Number of fine steps.
    pub steps: usize,
    /// `‖U_h − U_{h/2}‖ / 3`, the error estimate of the fine result.
    pub richardson: f64,
    pub unitarity_error: f64,
}

/// Operator norm, exact below 512 and Frobenius (an upper bound) above.
pub fn op_norm(m: &Mat) -> f64 {
    if m.nrows() <= 512 {
        spectral_norm(m)
    } else {
        m.norm()
    }
}

fn midpoint_product<F: Fn(f64) -> Mat>(dim: usize, h_at: &F, t0: f64, duration: f64, steps: usize) -> Mat {
    let dt = duration / steps as f64;
    let mut u = Mat::identity(dim, dim);
    for k in 0..steps {
        let h = h_at(t0 + (k as f64 + 0.5) * dt);
        u = expm_herm(&h, dt) * u;
    }
    u
}

/// Time-ordered propagator of `h_at` over `[t0, t0 + duration]` with
/// `steps` midpoint steps, checked against `steps / 2`.
pub fn propagate_fn<F: Fn(f64) -> Mat>(dim: usize, h_at: F, t0: f64, duration: f64, steps: usize, tol: f64) -> Result<Propagation> {
    if dim > DENSE_MAX_DIM {
        return Err(Error::Invalid(format!("dense propagation limited to dim <= {DENSE_MAX_DIM}; use propagate_state")));
    }
    if duration == 0.0 || steps == 0 {
        let u = Mat::identity(dim, dim);
        return Ok(Propagation { unitary: u, steps: 0, richardson: 0.0, unitarity_error: 0.0 });
    }
    let coarse_steps = (steps / 2).max(1);
    let fine_steps = 2 * coarse_steps;
    let coarse = midpoint_product(dim, &h_at, t0, duration, coarse_steps);
    let fine = midpoint_product(dim, &h_at, t0, duration, fine_steps);
    let diff = op_norm(&(&coarse - &fine));
    if diff > tol {
        return Err(Error::Refinement { diff, tol });
    }
    let ue = unitarity_error(&fine);
    Ok(Propagation { unitary: fine, steps: fine_steps, richardson: diff / 3.0, unitarity_error: ue })
}

fn step_count(period: f64, t_final: f64, substeps: usize) -> usize {
    let per = t_final.abs() / period * substeps as f64;
    // round to the nearest even count, at least 2
    let n = (per / 2.0).ceil().max(1.0) as usize;
    2 * n
}

/// Propagator of a driven series from `t = 0` to `t_final`.
pub fn propagate(series: &FourierSeries, t_final: f64, opts: PropagateOptions) -> Result<Propagation> {
    opts.check()?;
    let steps = step_count(series.period(), t_final, opts.substeps_per_period);
    propagate_fn(series.dim(), |t| series.dense_at(t), 0.0, t_final, steps, opts.tol)
}

/// Propagator of the two-step signal from `t = 0` (midpoint of the
/// forward step) to `t_final`; step edges fall on the switch times.
pub fn propagate_twostep(twostep: &TwoStepSeries, t_final: f64, opts: PropagateOptions) -> Result<Propagation> {
    opts.check()?;
    let steps = step_count(twostep.base.period(), t_final, opts.substeps_per_period);
    propagate_fn(twostep.base.dim(), |t| twostep.signal_at(t), 0.0, t_final, steps, opts.tol)
}

#[derive(Clone, Debug)]
pub struct StatePropagation {
    pub state: Vec<C64>,
    pub steps: usize,
    pub richardson: f64,
}

fn midpoint_state(series: &FourierSeries, psi: &[C64], duration: f64, steps: usize) -> Vec<C64> {
    let dt = duration / steps as f64;
    let dim = series.dim();
    let mut x = psi.to_vec();
    for k in 0..steps {
        let h = series.at((k as f64 + 0.5) * dt);
        x = expm_krylov(dim, |a, b| h.apply(a, b), &x, dt, 1e-12);
    }
    x
}

/// State propagation with Krylov exponentials, for sectors too large for
/// dense matrices.
pub fn propagate_state(series: &FourierSeries, psi: &[C64], t_final: f64, opts: PropagateOptions) -> Result<StatePropagation> {
    opts.check()?;
    if psi.len() != series.dim() {
        return Err(Error::Invalid(format!("state length {} does not match dimension {}", psi.len(), series.dim())));
    }
    if t_final == 0.0 {
        return Ok(StatePropagation { state: psi.to_vec(), steps: 0, richardson: 0.0 });
    }
    let fine_steps = step_count(series.period(), t_final, opts.substeps_per_period);
    let coarse = midpoint_state(series, psi, t_final, fine_steps / 2);
    let fine = midpoint_state(series, psi, t_final, fine_steps);
    let d: Vec<C64> = coarse.iter().zip(&fine).map(|(a, b)| a - b).collect();
    let diff = norm(&d);
    if diff > opts.tol {
        return Err(Error::Refinement { diff, tol: opts.tol });
    }
    Ok(StatePropagation { state: fine, steps: fine_steps, richardson: diff / 3.0 })
}

/// `|⟨a|b⟩|²`.
pub fn fidelity(a: &[C64], b: &[C64]) -> f64 {
    crate::linalg::vdot(a, b).norm_sqr()
}

/// One row of an error trace.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TraceRow {
    pub t: f64,
    pub error: f64,
    pub bound: f64,
}

/// Write `(t, error, bound)` rows as CSV.
pub fn write_trace(path: &Path, rows: &[TraceRow]) -> Result<()> {
    let rows: Vec<Vec<Cell>> = rows.iter().map(|r| vec![r.t.into(), r.error.into(), r.bound.into()]).collect();
    write_table(path, &["t", "error", "bound"], &rows)
}
