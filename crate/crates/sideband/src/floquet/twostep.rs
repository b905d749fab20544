//! Two-step drive: one period of `H(t)` followed by one period of `H(−t)`.
//!
//! The time origin sits at the midpoint of the forward step. In that frame
//! the harmonics `H̃_p` of the `2T`-periodic signal (base frequency `δ/2`)
//! are real combinations of the one-step `H_q`:
//!
//! ```text
//! H̃_{2k}  = (−1)^k (H_k + H_{−k}) / 2
//! H̃_p     = ((−1)^{(p−1)/2} / π) Σ_{m odd} (D_{(p−m)/2} − D_{(p+m)/2}) / m,   p odd
//! D_q     = H_q − H_{−q}
//! ```
//!
//! so `H̃_{−p} = (−1)^p H̃_p`, the first-order Floquet term cancels and
//!
//! ```text
//! H_eff,2 = H_0 + (4/δ²) Σ_{p≥1} (−1)^p [[H̃_p, H_0], H̃_p] / p²
//! ```

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::hamiltonian::{FourierSeries, SectorOperator};
use crate::linalg::{Mat, C64};

use super::{comm_ds, comm_sd, hermitian_part, EffectiveHamiltonianReport};

pub const DEFAULT_M_MAX: usize = 199;

/// `H̃_p = Σ_q c_{p,q} H_q`, keyed by `p`.
pub type CoefficientTable = BTreeMap<i64, Vec<(i64, f64)>>;

/// Two-step coefficients for one-step harmonics `|q| ≤ q_max`, odd sum
/// truncated at `m ≤ m_max`.
pub fn twostep_coefficients(q_max: usize, m_max: usize) -> Result<CoefficientTable> {
    if m_max < 9 || m_max % 2 == 0 {
        return Err(Error::Invalid(format!("odd-sum truncation must be odd and >= 9, got {m_max}")));
    }
    let q_max = q_max as i64;
    let mut table = CoefficientTable::new();
    for k in -q_max..=q_max {
        let s = if k.rem_euclid(2) == 0 { 0.5 } else { -0.5 };
        let mut row = BTreeMap::new();
        *row.entry(k).or_insert(0.0) += s;
        *row.entry(-k).or_insert(0.0) += s;
        table.insert(2 * k, row.into_iter().collect());
    }
    let p_lim = m_max as i64 + 2 * q_max;
    for p in (-p_lim..=p_lim).filter(|p| p.rem_euclid(2) == 1) {
        let sign = if ((p - 1) / 2).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let c = sign / std::f64::consts::PI;
        let mut row: BTreeMap<i64, f64> = BTreeMap::new();
        for m in (1..=m_max as i64).step_by(2) {
            debug_assert!(m % 2 == 1);
            let w = c / m as f64;
            let (a, b) = ((p - m) / 2, (p + m) / 2);
            if a.abs() <= q_max {
                *row.entry(a).or_insert(0.0) += w;
                *row.entry(-a).or_insert(0.0) -= w;
            }
            if b.abs() <= q_max {
                *row.entry(b).or_insert(0.0) -= w;
                *row.entry(-b).or_insert(0.0) += w;
            }
        }
        let row: Vec<(i64, f64)> = row.into_iter().filter(|&(_, v)| v != 0.0).collect();
        if !row.is_empty() {
            table.insert(p, row);
        }
    }
    Ok(table)
}

/// Two-step version of a one-step series, built lazily from the table.
#[derive(Clone, Debug)]
pub struct TwoStepSeries {
    pub base: FourierSeries,
    pub m_max: usize,
    pub table: CoefficientTable,
}

impl TwoStepSeries {
    /// One-step base frequency `δ`.
    pub fn delta(&self) -> f64 {
        self.base.delta
    }

    /// Base frequency of the two-step signal, `δ/2`.
    pub fn omega(&self) -> f64 {
        self.base.delta / 2.0
    }

    pub fn harmonics(&self) -> impl Iterator<Item = i64> + '_ {
        self.table.keys().copied()
    }

    pub fn p_max(&self) -> usize {
        self.table.keys().map(|p| p.unsigned_abs() as usize).max().unwrap_or(0)
    }

    /// `H̃_p` as a sparse operator (zero when `p` is out of range).
    pub fn component(&self, p: i64) -> SectorOperator {
        let dim = self.base.dim();
        let zero = SectorOperator::zeros(dim);
        match self.table.get(&p) {
            None => zero,
            Some(row) => {
                let terms: Vec<(C64, &SectorOperator)> = row
                    .iter()
                    .filter_map(|&(q, c)| self.base.get(q).map(|h| (C64::new(c, 0.0), h)))
                    .collect();
                SectorOperator::linear_combination(dim, &terms)
            }
        }
    }

    /// All harmonics as an explicit series with base frequency `δ/2`.
    pub fn materialize(&self) -> Result<FourierSeries> {
        let comps = self.table.keys().map(|&p| (p, self.component(p))).collect();
        FourierSeries::new(self.omega(), comps)
    }

    /// `max_p max|H̃_p − (−1)^p H̃_{−p}|`.
    pub fn parity_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for p in self.table.keys().copied().filter(|&p| p > 0) {
            let s = if p % 2 == 0 { 1.0 } else { -1.0 };
            let a = self.component(p);
            let b = self.component(-p).scale_re(s);
            worst = worst.max(a.max_diff(&b));
        }
        worst
    }

    /// The explicit two-step signal at time `t` (origin at the midpoint of
    /// the forward step), dense.
    pub fn signal_at(&self, t: f64) -> Mat {
        let period = self.base.period();
        let s = (t + period / 2.0).rem_euclid(2.0 * period);
        if s < period {
            self.base.dense_at(s)
        } else {
            self.base.dense_at(-s)
        }
    }
}

/// Build the two-step series; `p_max` limits the one-step harmonics used.
pub fn twostep_series(series: &FourierSeries, p_max: Option<usize>, m_max: usize) -> Result<TwoStepSeries> {
    let natural = series.p_max();
    let q_max = p_max.unwrap_or(natural).min(natural);
    let mut base = series.clone();
    base.components.retain(|p, _| p.unsigned_abs() as usize <= q_max);
    let table = twostep_coefficients(q_max, m_max)?;
    Ok(TwoStepSeries { base, m_max, table })
}

/// Quadratic form `M_{q,q'} = Σ_{p≥1} 4 (−1)^p c_{p,q} c_{p,q'} / p²`.
fn quadratic_form(table: &CoefficientTable) -> BTreeMap<(i64, i64), f64> {
    let mut m: BTreeMap<(i64, i64), f64> = BTreeMap::new();
    for (&p, row) in table.range(1..) {
        let w = 4.0 * if p % 2 == 0 { 1.0 } else { -1.0 } / (p * p) as f64;
        for &(q, a) in row {
            for &(qq, b) in row {
                *m.entry((q, qq)).or_insert(0.0) += w * a * b;
            }
        }
    }
    m
}

/// `Σ_{q,q'} M_{q,q'} [[H_q, H_0], H_{q'}]`, grouped by `q`.
fn reduced_second_order(base: &FourierSeries, form: &BTreeMap<(i64, i64), f64>) -> Mat {
    let dim = base.dim();
    let h0 = base.h0().to_dense();
    let mut out = Mat::zeros(dim, dim);
    let qs: Vec<i64> = base.components.keys().copied().collect();
    for &q in &qs {
        let terms: Vec<(C64, &SectorOperator)> = qs
            .iter()
            .filter_map(|&qq| form.get(&(q, qq)).map(|&w| (C64::new(w, 0.0), &base.components[&qq])))
            .filter(|(w, _)| w.re != 0.0)
            .collect();
        if terms.is_empty() {
            continue;
        }
        let g = SectorOperator::linear_combination(dim, &terms);
        if g.is_zero() || base.components[&q].is_zero() {
            continue;
        }
        let c = comm_sd(&base.components[&q], &h0);
        out += comm_ds(&c, &g);
    }
    hermitian_part(&out)
}

/// Effective Hamiltonian of the two-step drive, `second` already carrying
/// the factor 4 so that `H_eff,2 = H_0 + second/δ²`.
pub fn heff2(twostep: &TwoStepSeries) -> Result<EffectiveHamiltonianReport> {
    let base = &twostep.base;
    let form = quadratic_form(&twostep.table);
    let second = reduced_second_order(base, &form);

    // harmonics beyond m_max: compare the form against a three times longer sum
    let q_max = base.p_max();
    let long = quadratic_form(&twostep_coefficients(q_max, 3 * twostep.m_max)?);
    let norms: BTreeMap<i64, f64> = base.components.iter().map(|(&q, h)| (q, h.norm_bound())).collect();
    let h0n = norms.get(&0).copied().unwrap_or(0.0);
    let mut tail = 0.0;
    for (&(q, qq), &w) in &long {
        let dw = w - form.get(&(q, qq)).copied().unwrap_or(0.0);
        tail += dw.abs() * 4.0 * norms.get(&q).copied().unwrap_or(0.0) * h0n * norms.get(&qq).copied().unwrap_or(0.0);
    }
    let delta = twostep.delta();
    let dim = base.dim();
    Ok(EffectiveHamiltonianReport {
        delta,
        h0: base.h0().to_dense(),
        first: Mat::zeros(dim, dim),
        second,
        p_max: twostep.p_max(),
        m_max: Some(twostep.m_max),
        tail_estimate: tail / (delta * delta),
        warnings: Vec::new(),
    })
}

/// Two-step effective Hamiltonian from explicit harmonics (base frequency
/// `δ/2`). Rejects series without the two-step parity.
pub fn heff2_from_series(series: &FourierSeries) -> Result<EffectiveHamiltonianReport> {
    let dim = series.dim();
    let zero = SectorOperator::zeros(dim);
    let scale = series.components.values().map(|h| h.max_abs()).fold(0.0, f64::max).max(1e-300);
    for (&p, h) in series.components.range(1..) {
        let s = if p % 2 == 0 { 1.0 } else { -1.0 };
        let partner = series.get(-p).unwrap_or(&zero);
        let e = h.max_diff(&partner.scale_re(s)) / scale;
        if e > 1e-10 {
            return Err(Error::Parity(e));
        }
    }
    let h0 = series.h0().to_dense();
    let mut second = Mat::zeros(dim, dim);
    for (&p, h) in series.components.range(1..) {
        if h.is_zero() {
            continue;
        }
        let w = 4.0 * if p % 2 == 0 { 1.0 } else { -1.0 } / (p * p) as f64;
        second += comm_ds(&comm_sd(h, &h0), h) * C64::new(w, 0.0);
    }
    Ok(EffectiveHamiltonianReport {
        delta: 2.0 * series.delta,
        h0,
        first: Mat::zeros(dim, dim),
        second: hermitian_part(&second),
        p_max: series.p_max(),
        m_max: None,
        tail_estimate: 0.0,
        warnings: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet::{first_order_sum, tests::random_series};
    use crate::linalg::{max_abs, spectral_norm};

    #[test]
    fn zeroth_component_is_h0() {
        let s = random_series(4, 3, 7, 2.0);
        let ts = twostep_series(&s, None, DEFAULT_M_MAX).unwrap();
        assert_eq!(ts.component(0), s.components[&0]);
    }

    #[test]
    fn parity_and_vanishing_first_order() {
        let s = random_series(4, 3, 8, 2.0);
        let ts = twostep_series(&s, None, 21).unwrap();
        assert!(ts.parity_error() <= 1e-12);
        let m = ts.materialize().unwrap();
        assert!(spectral_norm(&first_order_sum(&m, m.p_max())) <= 1e-10);
    }

    #[test]
    fn coefficients_match_quadrature_of_the_signal() {
        let delta = 1.3;
        let s = random_series(3, 2, 9, delta);
        let ts = twostep_series(&s, None, DEFAULT_M_MAX).unwrap();
        let period2 = 2.0 * s.period();
        let n = 20000;
        let h = period2 / n as f64;
        for p in [-5i64, -2, -1, 0, 1, 2, 3, 4, 7] {
            let mut acc = Mat::zeros(3, 3);
            for k in 0..n {
                let t = (k as f64 + 0.5) * h;
                acc += ts.signal_at(t) * C64::from_polar(h / period2, -(p as f64) * ts.omega() * t);
            }
            let got = ts.component(p).to_dense();
            assert!(max_abs(&(acc - got)) < 1e-6, "p = {p}");
        }
    }

    #[test]
    fn reduced_form_matches_direct_sum() {
        let s = random_series(3, 2, 10, 3.0);
        let ts = twostep_series(&s, None, 31).unwrap();
        let reduced = heff2(&ts).unwrap();
        let direct = heff2_from_series(&ts.materialize().unwrap()).unwrap();
        assert!((reduced.delta - direct.delta).abs() < 1e-15);
        assert!(max_abs(&(reduced.second - direct.second)) < 1e-10);
        assert!(reduced.tail_estimate > 0.0);
    }

    #[test]
    fn static_series_two_step_is_h0() {
        let h = SectorOperator::from_diagonal(&[0.3, -1.0]);
        let ts = twostep_series(&FourierSeries::constant(2.0, h.clone()), None, 9).unwrap();
        let r = heff2(&ts).unwrap();
        assert_eq!(r.heff(), h.to_dense());
    }

    #[test]
    fn one_step_series_fails_parity() {
        let s = random_series(3, 2, 11, 3.0);
        assert!(matches!(heff2_from_series(&s), Err(Error::Parity(_))));
    }

    #[test]
    fn even_truncation_rejected() {
        assert!(twostep_coefficients(3, 20).is_err());
        assert!(twostep_coefficients(3, 7).is_err());
    }
}
