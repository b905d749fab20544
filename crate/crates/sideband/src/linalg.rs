//! Dense helpers, Lanczos ground states and Krylov exponentials.
//!
//! Everything here works on `Complex64`. Dense matrices are nalgebra
//! `DMatrix`; iterative routines take the operator as a closure `y = A x`
//! so sparse and dense callers share the same code.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Mat = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eigh(m: &Mat) -> (Vec<f64>, Mat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), Mat::zeros(0, 0));
    }
    // symmetrize so tiny rounding asymmetries do not leak into the solver
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = Mat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &eig.eigenvectors.column(src));
    }
    (vals, vecs)
}

/// `exp(-i H t)` for Hermitian `H`.
pub fn expm_herm(h: &Mat, t: f64) -> Mat {
    let (vals, vecs) = eigh(h);
    let mut scaled = vecs.clone();
    for (j, &e) in vals.iter().enumerate() {
        let ph = C64::from_polar(1.0, -e * t);
        scaled.column_mut(j).iter_mut().for_each(|z| *z *= ph);
    }
    &scaled * vecs.adjoint()
}

/// Largest singular value.
pub fn spectral_norm(m: &Mat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

/// Largest absolute eigenvalue of a Hermitian matrix.
pub fn herm_norm(m: &Mat) -> f64 {
    let (vals, _) = eigh(m);
    vals.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

pub fn commutator(a: &Mat, b: &Mat) -> Mat {
    a * b - b * a
}

pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// `‖U†U − 1‖` measured as the largest entry.
pub fn unitarity_error(u: &Mat) -> f64 {
    let n = u.nrows();
    max_abs(&(u.adjoint() * u - Mat::identity(n, n)))
}

/// Relative anti-Hermitian part, `max|A − A†| / max|A|`.
pub fn hermiticity_error(m: &Mat) -> f64 {
    let scale = max_abs(m);
    if scale == 0.0 {
        return 0.0;
    }
    max_abs(&(m - m.adjoint())) / scale
}

pub fn vdot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn random_unit_vector(dim: usize, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<C64> = (0..dim)
        .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    let nv = norm(&v);
    v.iter_mut().for_each(|z| *z /= nv);
    v
}

/// Dense matrix of a linear map given as a closure.
pub fn dense_from_map<F: Fn(&[C64], &mut [C64])>(dim: usize, apply: F) -> Mat {
    let mut m = Mat::zeros(dim, dim);
    let mut e = vec![ZERO; dim];
    let mut col = vec![ZERO; dim];
    for j in 0..dim {
        e[j] = ONE;
        apply(&e, &mut col);
        for i in 0..dim {
            m[(i, j)] = col[i];
        }
        e[j] = ZERO;
    }
    m
}

#[derive(Clone, Copy, Debug)]
pub struct LanczosOptions {
    /// Residual tolerance relative to `max(1, |E|)`.
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions { tol: 1e-12, max_iter: 600, seed: 0x5eed }
    }
}

/// Lowest eigenpair of a Hermitian map.
///
/// Full reorthogonalization; small problems go straight to dense
/// diagonalization.
pub fn lanczos_ground<F>(dim: usize, apply: F, opts: LanczosOptions) -> Result<(f64, Vec<C64>)>
where
    F: Fn(&[C64], &mut [C64]),
{
    if dim == 0 {
        return Err(Error::Invalid("empty operator".into()));
    }
    if dim <= 200 {
        let m = dense_from_map(dim, &apply);
        let (vals, vecs) = eigh(&m);
        return Ok((vals[0], vecs.column(0).iter().copied().collect()));
    }

    let mut basis: Vec<Vec<C64>> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut v = random_unit_vector(dim, opts.seed);
    let mut w = vec![ZERO; dim];
    let max_iter = opts.max_iter.min(dim);
    let mut best = (f64::INFINITY, f64::INFINITY);

    for j in 0..max_iter {
        apply(&v, &mut w);
        let a = vdot(&v, &w).re;
        basis.push(v.clone());
        alpha.push(a);
        // two passes of classical Gram-Schmidt against the whole basis
        for _ in 0..2 {
            for q in &basis {
                let c = vdot(q, &w);
                w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
            }
        }
        let b = norm(&w);
        let done_space = b < 1e-13 * (1.0 + a.abs());
        if j % 5 == 4 || done_space || j + 1 == max_iter {
            let (theta, y) = tridiag_ground(&alpha, &beta);
            let resid = b * y[y.len() - 1].abs();
            best = (theta, resid);
            if done_space || resid < opts.tol * theta.abs().max(1.0) || j + 1 == max_iter {
                if !done_space && resid >= opts.tol * theta.abs().max(1.0) && resid > 1e-8 {
                    return Err(Error::NoConvergence { residual: resid });
                }
                let mut x = vec![ZERO; dim];
                for (q, &c) in basis.iter().zip(&y) {
                    x.iter_mut().zip(q).for_each(|(s, e)| *s += e * c);
                }
                let nx = norm(&x);
                x.iter_mut().for_each(|z| *z /= nx);
                return Ok((theta, x));
            }
        }
        beta.push(b);
        v = w.iter().map(|z| z / b).collect();
    }
    Err(Error::NoConvergence { residual: best.1 })
}

/// Ground pair of the real symmetric tridiagonal matrix (alpha, beta).
fn tridiag_ground(alpha: &[f64], beta: &[f64]) -> (f64, Vec<f64>) {
    let (vals, vecs) = tridiag_eigh(alpha, beta);
    (vals[0], vecs.column(0).iter().copied().collect())
}

fn tridiag_eigh(alpha: &[f64], beta: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
    let k = alpha.len();
    let mut t = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = DMatrix::<f64>::zeros(k, k);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &eig.eigenvectors.column(src));
    }
    (vals, vecs)
}

/// `exp(-i H t) v` by restarted Lanczos with adaptive substeps.
pub fn expm_krylov<F>(dim: usize, apply: F, v: &[C64], t: f64, tol: f64) -> Vec<C64>
where
    F: Fn(&[C64], &mut [C64]),
{
    let m_max = dim.min(30);
    let mut x = v.to_vec();
    let mut remaining = t;
    let mut tau = t;
    let scale = norm(v);
    if scale == 0.0 || t == 0.0 {
        return x;
    }
    while remaining.abs() > 0.0 {
        // Krylov basis of the current state
        let nx = norm(&x);
        let mut basis: Vec<Vec<C64>> = vec![x.iter().map(|z| z / nx).collect()];
        let mut alpha = Vec::new();
        let mut beta = Vec::new();
        let mut w = vec![ZERO; dim];
        let mut tail = 0.0;
        for j in 0..m_max {
            apply(&basis[j], &mut w);
            let a = vdot(&basis[j], &w).re;
            alpha.push(a);
            for _ in 0..2 {
                for q in &basis {
                    let c = vdot(q, &w);
                    w.iter_mut().zip(q).for_each(|(s, e)| *s -= c * e);
                }
            }
            let b = norm(&w);
            tail = b;
            if b < 1e-14 || j + 1 == m_max {
                break;
            }
            beta.push(b);
            basis.push(w.iter().map(|z| z / b).collect());
        }
        let (vals, vecs) = tridiag_eigh(&alpha, &beta);
        let k = alpha.len();
        let step = |tau: f64| -> DVector<C64> {
            // exp(-i T tau) e1
            let mut out = DVector::<C64>::zeros(k);
            for (j, &e) in vals.iter().enumerate() {
                let c = C64::from_polar(vecs[(0, j)], -e * tau);
                for i in 0..k {
                    out[i] += c * vecs[(i, j)];
                }
            }
            out
        };
        tau = tau.abs().min(remaining.abs()) * remaining.signum();
        let mut y = step(tau);
        while tail > 1e-14 && tail * y[k - 1].norm() * nx > tol * scale && tau.abs() > 1e-12 {
            tau *= 0.5;
            y = step(tau);
        }
        let mut next = vec![ZERO; dim];
        for (q, c) in basis.iter().zip(y.iter()) {
            next.iter_mut().zip(q).for_each(|(s, e)| *s += e * c * nx);
        }
        x = next;
        remaining -= tau;
        if remaining.abs() < 1e-15 * t.abs() {
            break;
        }
        tau *= 2.0;
    }
    x
}
