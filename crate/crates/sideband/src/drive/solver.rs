//! Inverse problem for a 1D chain: sideband amplitudes from a coupling profile.
//!
//! With co-propagating sidebands at detunings `α δ` the chain couplings are
//! the autocorrelation `J_k = J̃ Σ_α X_α X*_{α+k}`. Finding `X` is a
//! phase-retrieval problem. The minimum total intensity is fixed by the
//! Fejér–Riesz theorem: `Σ|X_α|²` must make the trigonometric polynomial
//! `r_0 + 2 Re Σ_k r_k e^{−ikω}` non-negative, so the smallest admissible
//! `r_0` is a certificate, and the spectral factor at that `r_0` is a seed.

use nalgebra::{DMatrix, DVector, Schur};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{C64, ONE, ZERO};

use super::{ModulationMode, RamanDrive, Sideband};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SolveMode {
    /// Large carrier `X_0`, first-order sidebands `X_k = J*_k / (X_0 J̃)`.
    Perturbative { carrier: f64 },
    /// Nonlinear least squares with intensity penalty.
    Optimized,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    /// Restrict to real amplitudes (real targets only).
    pub real: bool,
    pub lambda_max: f64,
    pub lambda_min: f64,
    pub lambda_steps: usize,
    pub max_iter: usize,
    /// Acceptance threshold on the max relative residual.
    pub tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            real: false,
            lambda_max: 1e-2,
            lambda_min: 1e-12,
            lambda_steps: 11,
            max_iter: 200,
            tol: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub seed: String,
    pub lambda: f64,
    pub residual: f64,
    pub total_intensity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SidebandSolution {
    /// `X_α` for detunings `α δ`, `α = 0..N−1`.
    pub amplitudes: Vec<C64>,
    pub jt: f64,
    /// Max relative deviation of the forward map from the target.
    pub residual: f64,
    pub total_intensity: f64,
    /// Lower bound on the total intensity of any exact solution.
    pub intensity_bound: f64,
    pub seed: String,
    pub trace: Vec<TraceRow>,
}

impl SidebandSolution {
    /// `J_k` realized by the amplitudes, `k = 1..N−1`.
    pub fn forward(&self) -> Vec<C64> {
        autocorr(&self.amplitudes).into_iter().map(|z| z * self.jt).collect()
    }

    /// Co-propagating drive with sideband `α` at detuning `α·delta`.
    pub fn to_drive(&self, delta: f64) -> RamanDrive {
        let sidebands = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(a, &x)| Sideband::plain(a as f64 * delta, x))
            .collect();
        RamanDrive { sidebands, mode: ModulationMode::FrequencyShift }
    }

    /// max |X| / min |X| over nonzero amplitudes.
    pub fn amplitude_ratio(&self) -> f64 {
        let mags: Vec<f64> = self.amplitudes.iter().map(|z| z.norm()).filter(|&m| m > 0.0).collect();
        let hi = mags.iter().cloned().fold(0.0, f64::max);
        let lo = mags.iter().cloned().fold(f64::INFINITY, f64::min);
        hi / lo
    }
}

/// `f_k = Σ_α x_α x*_{α+k}` for `k = 1..N−1`.
pub fn autocorr(x: &[C64]) -> Vec<C64> {
    let n = x.len();
    (1..n).map(|k| (0..n - k).map(|a| x[a] * x[a + k].conj()).sum()).collect()
}

/// Fejér–Riesz minimum of `Σ|X|²` for normalized targets `r_k`.
pub fn intensity_lower_bound(r: &[C64]) -> f64 {
    if r.is_empty() {
        return 0.0;
    }
    let f = |w: f64| -> f64 {
        let mut s = 0.0;
        for (i, z) in r.iter().enumerate() {
            let k = (i + 1) as f64;
            s -= 2.0 * (z * C64::from_polar(1.0, -k * w)).re;
        }
        s
    };
    let m = (64 * (r.len() + 1)).max(4096);
    let h = 2.0 * std::f64::consts::PI / m as f64;
    let (mut best_w, mut best) = (0.0, f64::NEG_INFINITY);
    for i in 0..m {
        let w = i as f64 * h;
        let v = f(w);
        if v > best {
            best = v;
            best_w = w;
        }
    }
    // golden-section refinement around the grid maximum
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (best_w - h, best_w + h);
    for _ in 0..80 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    best.max(f(0.5 * (a + b)))
}

/// Minimum-phase spectral factor with `Σ|X|² = r0`.
fn spectral_seed(r: &[C64], r0: f64) -> Option<Vec<C64>> {
    let n = r.len() + 1;
    let deg = 2 * (n - 1);
    let lead = r[n - 2].conj();
    if lead.norm() < 1e-12 {
        return None;
    }
    // q_j multiplies z^j in z^{N-1} P(z)
    let mut q = vec![ZERO; deg + 1];
    q[n - 1] = C64::new(r0, 0.0);
    for k in 1..n {
        q[n - 1 + k] = r[k - 1].conj();
        q[n - 1 - k] = r[k - 1];
    }
    let mut comp = DMatrix::<C64>::zeros(deg, deg);
    for j in 0..deg {
        comp[(0, j)] = -q[deg - 1 - j] / lead;
    }
    for i in 1..deg {
        comp[(i, i - 1)] = ONE;
    }
    let roots = Schur::new(comp).eigenvalues()?;
    let mut roots: Vec<C64> = roots.iter().copied().collect();
    roots.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    let mut poly = vec![ONE];
    for z in &roots[..n - 1] {
        let mut next = vec![ZERO; poly.len() + 1];
        for (i, c) in poly.iter().enumerate() {
            next[i + 1] += c;
            next[i] -= c * z;
        }
        poly = next;
    }
    let norm2: f64 = poly.iter().map(|z| z.norm_sqr()).sum();
    let c = (r0 / norm2).sqrt();
    Some(poly.into_iter().map(|z| z * c).collect())
}

struct Problem<'a> {
    r: &'a [C64],
    real: bool,
    n: usize,
}

impl Problem<'_> {
    fn unpack(&self, p: &DVector<f64>) -> Vec<C64> {
        (0..self.n)
            .map(|a| if self.real { C64::new(p[a], 0.0) } else { C64::new(p[a], p[self.n + a]) })
            .collect()
    }

    fn pack(&self, x: &[C64]) -> DVector<f64> {
        if self.real {
            DVector::from_iterator(self.n, x.iter().map(|z| z.re))
        } else {
            DVector::from_iterator(2 * self.n, x.iter().map(|z| z.re).chain(x.iter().map(|z| z.im)))
        }
    }

    fn residual(&self, x: &[C64]) -> DVector<f64> {
        let f = autocorr(x);
        let rows = if self.real { self.n - 1 } else { 2 * (self.n - 1) };
        let mut out = DVector::zeros(rows);
        for k in 0..self.n - 1 {
            let d = f[k] - self.r[k];
            out[k] = d.re;
            if !self.real {
                out[self.n - 1 + k] = d.im;
            }
        }
        out
    }

    fn jacobian(&self, x: &[C64]) -> DMatrix<f64> {
        let n = self.n;
        let rows = if self.real { n - 1 } else { 2 * (n - 1) };
        let cols = if self.real { n } else { 2 * n };
        let mut jac = DMatrix::zeros(rows, cols);
        for k in 1..n {
            for j in 0..n {
                let up = if j + k < n { x[j + k].conj() } else { ZERO };
                let down = if j >= k { x[j - k] } else { ZERO };
                let da = up + down;
                let db = C64::new(0.0, 1.0) * (up - down);
                jac[(k - 1, j)] = da.re;
                if !self.real {
                    jac[(n - 1 + k - 1, j)] = da.im;
                    jac[(k - 1, n + j)] = db.re;
                    jac[(n - 1 + k - 1, n + j)] = db.im;
                }
            }
        }
        jac
    }

    fn max_rel(&self, x: &[C64]) -> f64 {
        let f = autocorr(x);
        let scale = self.r.iter().fold(0.0_f64, |a, z| a.max(z.norm()));
        f.iter()
            .zip(self.r)
            .map(|(a, b)| (a - b).norm() / b.norm().max(1e-12 * scale))
            .fold(0.0, f64::max)
    }
}

fn solve_spd(a: DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    a.cholesky().map(|c| c.solve(b))
}

/// Levenberg-Marquardt on `‖R‖² + λ‖p‖²` for a fixed `λ`.
fn damped_descent(
    pb: &Problem,
    p: &mut DVector<f64>,
    lambda: f64,
    max_iter: usize,
    mut log: impl FnMut(&DVector<f64>),
) {
    let cost = |p: &DVector<f64>| pb.residual(&pb.unpack(p)).norm_squared() + lambda * p.norm_squared();
    let mut c = cost(p);
    let mut mu = 1e-3;
    for _ in 0..max_iter {
        let x = pb.unpack(p);
        let r = pb.residual(&x);
        let jac = pb.jacobian(&x);
        let g = jac.transpose() * &r + &*p * lambda;
        let h = jac.transpose() * &jac;
        let diag_max = h.diagonal().max().max(1e-12);
        let mut improved = false;
        for _ in 0..30 {
            let mut a = h.clone();
            for i in 0..a.nrows() {
                a[(i, i)] += lambda + mu * diag_max;
            }
            let Some(step) = solve_spd(a, &(-&g)) else {
                mu *= 10.0;
                continue;
            };
            let trial = &*p + &step;
            let ct = cost(&trial);
            if ct < c {
                let rel = (c - ct) / c.max(1e-300);
                *p = trial;
                c = ct;
                mu = (mu / 3.0).max(1e-15);
                improved = true;
                log(p);
                if rel < 1e-15 || step.norm() < 1e-15 * p.norm() {
                    return;
                }
                break;
            }
            mu *= 4.0;
        }
        if !improved {
            return;
        }
    }
}

/// Gauss-Newton with minimum-norm steps, driving the residual to zero.
fn polish(pb: &Problem, p: &mut DVector<f64>, mut log: impl FnMut(&DVector<f64>)) {
    let mut best = pb.residual(&pb.unpack(p)).amax();
    let mut stalls = 0;
    for _ in 0..80 {
        if best < 1e-15 {
            return;
        }
        let x = pb.unpack(p);
        let r = pb.residual(&x);
        let jac = pb.jacobian(&x);
        let mut jjt = &jac * jac.transpose();
        let eps = 1e-14 * jjt.trace().max(1e-300) / jjt.nrows() as f64;
        for i in 0..jjt.nrows() {
            jjt[(i, i)] += eps;
        }
        let Some(y) = solve_spd(jjt, &r) else { return };
        let step = -(jac.transpose() * y);
        let mut t = 1.0;
        let mut accepted = false;
        while t > 1e-4 {
            let trial = &*p + &step * t;
            let rt = pb.residual(&pb.unpack(&trial)).amax();
            if rt < best {
                stalls = if rt > 0.5 * best { stalls + 1 } else { 0 };
                best = rt;
                *p = trial;
                accepted = true;
                log(p);
                break;
            }
            t *= 0.5;
        }
        if !accepted || stalls > 4 {
            return;
        }
    }
}

pub fn solve_sidebands_1d(target: &[C64], jt: f64, mode: SolveMode) -> Result<SidebandSolution> {
    solve_sidebands_1d_with(target, jt, mode, &SolverOptions::default())
}

/// Sideband amplitudes whose autocorrelation reproduces `target = [J_1..J_{N−1}]`.
pub fn solve_sidebands_1d_with(
    target: &[C64],
    jt: f64,
    mode: SolveMode,
    opts: &SolverOptions,
) -> Result<SidebandSolution> {
    if target.is_empty() {
        return Err(Error::Invalid("need at least two sites (N >= 2)".into()));
    }
    if !(jt > 0.0) {
        return Err(Error::Invalid(format!("J̃ must be positive, got {jt}")));
    }
    if target.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Invalid("target contains non-finite values".into()));
    }
    let n = target.len() + 1;
    let jmax = target.iter().fold(0.0_f64, |a, z| a.max(z.norm()));
    if jmax == 0.0 {
        let mut amps = vec![ZERO; n];
        amps[0] = ONE;
        return Ok(SidebandSolution {
            amplitudes: amps,
            jt,
            residual: 0.0,
            total_intensity: 1.0,
            intensity_bound: 0.0,
            seed: "trivial".into(),
            trace: Vec::new(),
        });
    }
    let s = jmax / jt;
    let r: Vec<C64> = target.iter().map(|z| z / (jt * s)).collect();
    let bound = intensity_lower_bound(&r) * s;

    if let SolveMode::Perturbative { carrier } = mode {
        if !(carrier > 0.0) {
            return Err(Error::Invalid("carrier amplitude must be positive".into()));
        }
        let mut amps = vec![C64::new(carrier, 0.0)];
        amps.extend(target.iter().map(|z| z.conj() / (carrier * jt)));
        let pb = Problem { r: &r, real: false, n };
        let scaled: Vec<C64> = amps.iter().map(|z| z / s.sqrt()).collect();
        let residual = pb.max_rel(&scaled);
        let total = amps.iter().map(|z| z.norm_sqr()).sum();
        return Ok(SidebandSolution {
            amplitudes: amps,
            jt,
            residual,
            total_intensity: total,
            intensity_bound: bound,
            seed: "perturbative".into(),
            trace: vec![TraceRow {
                iteration: 0,
                seed: "perturbative".into(),
                lambda: 0.0,
                residual,
                total_intensity: total,
            }],
        });
    }

    let real = opts.real;
    if real && r.iter().any(|z| z.im.abs() > 1e-14) {
        return Err(Error::Invalid("real ansatz requested for a complex target".into()));
    }
    let pb = Problem { r: &r, real, n };
    let mut trace = Vec::new();
    let mut counter = 0usize;
    let mut candidates: Vec<(String, Vec<C64>, f64)> = Vec::new();

    let record = |label: &str, lambda: f64, p: &DVector<f64>, trace: &mut Vec<TraceRow>, counter: &mut usize| {
        let x = pb.unpack(p);
        *counter += 1;
        trace.push(TraceRow {
            iteration: *counter,
            seed: label.to_string(),
            lambda,
            residual: pb.max_rel(&x),
            total_intensity: x.iter().map(|z| z.norm_sqr()).sum::<f64>() * s,
        });
    };

    // perturbative seed, then the λ sweep, then an unpenalized polish
    {
        let rsum: f64 = r.iter().map(|z| z.norm()).sum();
        let x0 = rsum.max(1.0).sqrt();
        let mut seed = vec![C64::new(x0, 0.0)];
        seed.extend(r.iter().map(|z| z.conj() / x0));
        let mut p = pb.pack(&seed);
        record("perturbative", f64::NAN, &p, &mut trace, &mut counter);
        let steps = opts.lambda_steps.max(1);
        for i in 0..steps {
            let frac = if steps == 1 { 0.0 } else { i as f64 / (steps - 1) as f64 };
            let lambda = opts.lambda_max * (opts.lambda_min / opts.lambda_max).powf(frac);
            damped_descent(&pb, &mut p, lambda, opts.max_iter, |q| {
                record("perturbative", lambda, q, &mut trace, &mut counter)
            });
        }
        polish(&pb, &mut p, |q| record("perturbative", 0.0, q, &mut trace, &mut counter));
        let x = pb.unpack(&p);
        let res = pb.max_rel(&x);
        candidates.push(("perturbative".into(), x, res));
    }

    // spectral-factor seed at the intensity bound
    let r0 = bound / s * (1.0 + 1e-9) + 1e-14;
    if let Some(seed) = spectral_seed(&r, r0) {
        let seed = if real {
            // a real target has a real spectral factor up to a global phase
            let ph = seed.iter().max_by(|a, b| a.norm().total_cmp(&b.norm())).map(|z| z.conj() / z.norm()).unwrap_or(ONE);
            seed.into_iter().map(|z| z * ph).collect()
        } else {
            seed
        };
        let mut p = pb.pack(&seed);
        record("spectral", f64::NAN, &p, &mut trace, &mut counter);
        polish(&pb, &mut p, |q| record("spectral", 0.0, q, &mut trace, &mut counter));
        let x = pb.unpack(&p);
        let res = pb.max_rel(&x);
        candidates.push(("spectral".into(), x, res));
    }

    let intensity = |x: &[C64]| x.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let best_res = candidates.iter().map(|c| c.2).fold(f64::INFINITY, f64::min);
    let chosen = candidates
        .iter()
        .filter(|c| c.2 <= opts.tol)
        .min_by(|a, b| intensity(&a.1).total_cmp(&intensity(&b.1)));
    let Some((label, x, res)) = chosen else {
        return Err(Error::NoConvergence { residual: best_res });
    };
    let amps: Vec<C64> = x.iter().map(|z| z * s.sqrt()).collect();
    let total = amps.iter().map(|z| z.norm_sqr()).sum();
    Ok(SidebandSolution {
        amplitudes: amps,
        jt,
        residual: *res,
        total_intensity: total,
        intensity_bound: bound,
        seed: label.clone(),
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn hs(n: usize) -> Vec<C64> {
        let j0 = (std::f64::consts::PI / n as f64).powi(2);
        (1..n)
            .map(|k| C64::new(j0 / (k as f64 * std::f64::consts::PI / n as f64).sin().powi(2), 0.0))
            .collect()
    }

    #[test]
    fn perturbative_two_sites() {
        let sol = solve_sidebands_1d(&[C64::new(0.5, 0.0)], 1.0, SolveMode::Perturbative { carrier: 10.0 }).unwrap();
        assert!((sol.amplitudes[1] - C64::new(0.05, 0.0)).norm() < 1e-15);
        assert!(sol.residual < 1e-14);
    }

    #[test]
    fn perturbative_error_is_second_order() {
        // 3 sites: J_1 picks up X_1 X_2* beyond first order
        let t = [C64::new(0.3, 0.0), C64::new(0.1, 0.0)];
        let a = solve_sidebands_1d(&t, 1.0, SolveMode::Perturbative { carrier: 10.0 }).unwrap();
        let b = solve_sidebands_1d(&t, 1.0, SolveMode::Perturbative { carrier: 20.0 }).unwrap();
        assert!((a.residual / b.residual - 4.0).abs() < 0.1);
    }

    #[test]
    fn rejects_single_site() {
        assert!(solve_sidebands_1d(&[], 1.0, SolveMode::Optimized).is_err());
    }

    #[test]
    fn bound_for_two_sites() {
        // |X0|^2 + |X1|^2 >= 2|X0 X1|
        let b = intensity_lower_bound(&[C64::new(0.3, 0.4)]);
        assert!((b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hs_profiles_solve_to_bound() {
        for n in [4usize, 8, 12] {
            let t = hs(n);
            let sol = solve_sidebands_1d(&t, 1.0, SolveMode::Optimized).unwrap();
            let f = sol.forward();
            for (a, b) in f.iter().zip(&t) {
                assert!((a - b).norm() / b.norm() < 1e-9, "n = {n}");
            }
            assert!(sol.total_intensity >= sol.intensity_bound * (1.0 - 1e-9));
            assert!(sol.total_intensity <= sol.intensity_bound * (1.0 + 1e-6), "n = {n}");
        }
    }

    #[test]
    fn real_ansatz_matches_complex() {
        let t = hs(8);
        let opts = SolverOptions { real: true, ..Default::default() };
        let sol = solve_sidebands_1d_with(&t, 1.0, SolveMode::Optimized, &opts).unwrap();
        assert!(sol.amplitudes.iter().all(|z| z.im == 0.0));
        assert!(sol.residual < 1e-9);
        let c = solve_sidebands_1d(&t, 1.0, SolveMode::Optimized).unwrap();
        assert!((sol.total_intensity - c.total_intensity).abs() < 1e-6 * c.total_intensity);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn round_trip_decaying_profiles(
            n in 3usize..10,
            decay in 0.2f64..1.5,
            amp in 0.1f64..3.0,
            phase in -1.0f64..1.0,
        ) {
            let t: Vec<C64> = (1..n)
                .map(|k| C64::from_polar(amp * (-(k as f64) * decay).exp(), phase * k as f64))
                .collect();
            let sol = solve_sidebands_1d(&t, 0.7, SolveMode::Optimized).unwrap();
            let f = sol.forward();
            for (a, b) in f.iter().zip(&t) {
                prop_assert!((a - b).norm() <= 1e-8 * b.norm().max(1e-12));
            }
            prop_assert!(sol.residual <= 1e-9);
            prop_assert!(sol.total_intensity >= sol.intensity_bound * (1.0 - 1e-8));
        }
    }
}
