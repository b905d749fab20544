//! Compressed sparse row operators on a sector.
//!
//! Assembled from coordinate triples (duplicates summed, exact zeros
//! dropped, columns sorted within a row), so two operators built from the
//! same terms in the same order are bit-identical.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::error::Result;
use crate::linalg::{Mat, C64, ZERO};

#[derive(Clone, Debug, PartialEq)]
pub struct SectorOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

/// Rows above this size are processed in parallel.
const PAR_ROWS: usize = 2048;

impl SectorOperator {
    pub fn zeros(dim: usize) -> SectorOperator {
        SectorOperator { dim, row_ptr: vec![0; dim + 1], cols: Vec::new(), vals: Vec::new() }
    }

    pub fn identity(dim: usize) -> SectorOperator {
        SectorOperator::from_diagonal(&vec![1.0; dim])
    }

    pub fn from_diagonal(d: &[f64]) -> SectorOperator {
        SectorOperator::from_complex_diagonal(&d.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>())
    }

    pub fn from_complex_diagonal(d: &[C64]) -> SectorOperator {
        let mut rows = Vec::with_capacity(d.len());
        for (i, &x) in d.iter().enumerate() {
            rows.push(if x == ZERO { Vec::new() } else { vec![(i, x)] });
        }
        SectorOperator::from_rows(d.len(), rows)
    }

    /// Build from `(row, col, value)`; duplicates are summed.
    pub fn from_triplets(dim: usize, triplets: &[(usize, usize, C64)]) -> SectorOperator {
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); dim];
        for &(r, c, v) in triplets {
            assert!(r < dim && c < dim, "triplet ({r}, {c}) outside dimension {dim}");
            rows[r].push((c, v));
        }
        SectorOperator::from_rows(dim, rows)
    }

    /// Rows given as unsorted `(col, value)` lists.
    pub fn from_rows(dim: usize, rows: Vec<Vec<(usize, C64)>>) -> SectorOperator {
        let rows: Vec<Vec<(usize, C64)>> = rows.into_iter().map(compress_row).collect();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        row_ptr.push(0);
        let nnz: usize = rows.iter().map(|r| r.len()).sum();
        let mut cols = Vec::with_capacity(nnz);
        let mut vals = Vec::with_capacity(nnz);
        for r in rows {
            for (c, v) in r {
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        SectorOperator { dim, row_ptr, cols, vals }
    }

    /// Entries with `|z| > drop_tol`.
    pub fn from_dense(m: &Mat, drop_tol: f64) -> SectorOperator {
        let dim = m.nrows();
        let rows = (0..dim)
            .map(|i| (0..dim).filter(|&j| m[(i, j)].norm() > drop_tol).map(|j| (j, m[(i, j)])).collect())
            .collect();
        SectorOperator::from_rows(dim, rows)
    }

    pub fn to_dense(&self) -> Mat {
        let mut m = Mat::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                m[(i, self.cols[k])] += self.vals[k];
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (self.cols[k], self.vals[k]))
    }

    pub fn triplets(&self) -> Vec<(usize, usize, C64)> {
        (0..self.dim).flat_map(|i| self.row(i).map(move |(j, v)| (i, j, v))).collect()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[range.clone()].binary_search(&j) {
            Ok(k) => self.vals[range.start + k],
            Err(_) => ZERO,
        }
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.vals.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().fold(0.0, |a, z| a.max(z.norm()))
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[C64], y: &mut [C64]) {
        let row = |i: usize| -> C64 {
            let mut acc = ZERO;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            acc
        };
        if self.dim >= PAR_ROWS {
            y.par_iter_mut().enumerate().for_each(|(i, out)| *out = row(i));
        } else {
            y.iter_mut().enumerate().for_each(|(i, out)| *out = row(i));
        }
    }

    pub fn apply_vec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![ZERO; self.dim];
        self.apply(x, &mut y);
        y
    }

    /// `⟨x|A|x⟩`.
    pub fn expectation(&self, x: &[C64]) -> C64 {
        crate::linalg::vdot(x, &self.apply_vec(x))
    }

    pub fn adjoint(&self) -> SectorOperator {
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); self.dim];
        for i in 0..self.dim {
            for (j, v) in self.row(i) {
                rows[j].push((i, v.conj()));
            }
        }
        SectorOperator::from_rows(self.dim, rows)
    }

    pub fn scale(&self, c: C64) -> SectorOperator {
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v *= c);
        out.drop_zeros()
    }

    pub fn scale_re(&self, c: f64) -> SectorOperator {
        self.scale(C64::new(c, 0.0))
    }

    /// `Σ c_k A_k` with terms merged row by row in the given order.
    pub fn linear_combination(dim: usize, terms: &[(C64, &SectorOperator)]) -> SectorOperator {
        let build = |i: usize| -> Vec<(usize, C64)> {
            let mut row = Vec::new();
            for (c, a) in terms {
                assert_eq!(a.dim, dim, "dimension mismatch");
                row.extend(a.row(i).map(|(j, v)| (j, c * v)));
            }
            row
        };
        let rows: Vec<Vec<(usize, C64)>> = if dim >= PAR_ROWS {
            (0..dim).into_par_iter().map(build).collect()
        } else {
            (0..dim).map(build).collect()
        };
        SectorOperator::from_rows(dim, rows)
    }

    pub fn add(&self, other: &SectorOperator) -> SectorOperator {
        SectorOperator::linear_combination(self.dim, &[(C64::new(1.0, 0.0), self), (C64::new(1.0, 0.0), other)])
    }

    pub fn sub(&self, other: &SectorOperator) -> SectorOperator {
        SectorOperator::linear_combination(self.dim, &[(C64::new(1.0, 0.0), self), (C64::new(-1.0, 0.0), other)])
    }

    /// Sparse product `A B` (row-wise Gustavson).
    pub fn matmul(&self, other: &SectorOperator) -> SectorOperator {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let dim = self.dim;
        let build = |i: usize| -> Vec<(usize, C64)> {
            let mut row = Vec::new();
            for (k, a) in self.row(i) {
                row.extend(other.row(k).map(|(j, b)| (j, a * b)));
            }
            row
        };
        let rows: Vec<Vec<(usize, C64)>> = if dim >= PAR_ROWS / 4 {
            (0..dim).into_par_iter().map(build).collect()
        } else {
            (0..dim).map(build).collect()
        };
        SectorOperator::from_rows(dim, rows)
    }

    pub fn commutator(&self, other: &SectorOperator) -> SectorOperator {
        self.matmul(other).sub(&other.matmul(self))
    }

    /// `A · D` with dense `D`.
    pub fn mul_dense(&self, d: &Mat) -> Mat {
        let n = d.ncols();
        let mut out = Mat::zeros(self.dim, n);
        // nalgebra is column-major: fill column by column
        let cols: Vec<Vec<C64>> = (0..n)
            .into_par_iter()
            .map(|c| {
                let col = d.column(c);
                (0..self.dim)
                    .map(|i| self.row(i).map(|(k, v)| v * col[k]).sum())
                    .collect()
            })
            .collect();
        for (c, v) in cols.into_iter().enumerate() {
            out.column_mut(c).copy_from_slice(&v);
        }
        out
    }

    /// `D · A` with dense `D`.
    pub fn dense_mul(&self, d: &Mat) -> Mat {
        // (D A)^† = A^† D^†
        self.adjoint().mul_dense(&d.adjoint()).adjoint()
    }

    /// Relative anti-Hermitian part `max|A − A†| / max|A|`.
    pub fn hermiticity_error(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i).conj()).norm());
            }
        }
        worst / scale
    }

    /// Largest entry of `A − B`.
    pub fn max_diff(&self, other: &SectorOperator) -> f64 {
        self.sub(other).max_abs()
    }

    /// `max_i Σ_j |A_ij|`, an upper bound on the spectral norm of Hermitian `A`.
    pub fn row_sum_norm(&self) -> f64 {
        (0..self.dim).map(|i| self.row(i).map(|(_, v)| v.norm()).sum::<f64>()).fold(0.0, f64::max)
    }

    /// `√(‖A‖_1 ‖A‖_∞)`, an upper bound on the spectral norm.
    pub fn norm_bound(&self) -> f64 {
        let mut col = vec![0.0; self.dim];
        for i in 0..self.dim {
            for (j, v) in self.row(i) {
                col[j] += v.norm();
            }
        }
        let one = col.into_iter().fold(0.0, f64::max);
        (one * self.row_sum_norm()).sqrt()
    }

    fn drop_zeros(self) -> SectorOperator {
        let rows = (0..self.dim).map(|i| self.row(i).collect()).collect();
        SectorOperator::from_rows(self.dim, rows)
    }

    /// Coordinate triples as CSV: `row,col,re,im`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(f, "row,col,re,im")?;
        for (i, j, v) in self.triplets() {
            writeln!(f, "{i},{j},{},{}", crate::io::fmt_e(v.re), crate::io::fmt_e(v.im))?;
        }
        Ok(())
    }
}

fn compress_row(mut row: Vec<(usize, C64)>) -> Vec<(usize, C64)> {
    // stable sort keeps the summation order of duplicates fixed
    row.sort_by_key(|e| e.0);
    let mut out: Vec<(usize, C64)> = Vec::with_capacity(row.len());
    for (c, v) in row {
        match out.last_mut() {
            Some(last) if last.0 == c => last.1 += v,
            _ => out.push((c, v)),
        }
    }
    out.retain(|e| e.1 != ZERO);
    out
}
