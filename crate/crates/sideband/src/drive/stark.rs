//! Time-dependent Stark shifts of the `|s⟩` level.
//!
//! Cross terms `α ≠ β` of the drive beat at `ω̃_α − ω̃_β` and shift each
//! site by `A^n = −Δ Σ X_α(r_n) X*_β(r_n)`. Equal-frequency terms and the
//! `α = β` diagonal are static and reported as an offset.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::linalg::{C64, ZERO};

use super::RamanDrive;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StarkComponent {
    pub frequency: f64,
    /// `A^n` per site, energy units.
    pub amplitudes: Vec<C64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StarkSeries {
    /// Oscillating components sorted by frequency; `±ω` both present.
    pub components: Vec<StarkComponent>,
    /// Static shift per site, absorbable into `ω_s`.
    pub offset: Vec<f64>,
}

impl StarkSeries {
    /// Re-key the components by integer harmonic `p = ω / unit`.
    pub fn harmonics(&self, unit: f64) -> Result<BTreeMap<i64, Vec<C64>>> {
        let mut out = BTreeMap::new();
        for c in &self.components {
            let p = c.frequency / unit;
            let r = p.round();
            if (p - r).abs() > 1e-9 {
                return Err(Error::NonIntegerFrequency(p));
            }
            out.insert(r as i64, c.amplitudes.clone());
        }
        Ok(out)
    }

    /// True when every component is the same on all sites.
    pub fn is_uniform(&self, tol: f64) -> bool {
        self.components.iter().all(|c| {
            let a0 = c.amplitudes[0];
            c.amplitudes.iter().all(|a| (a - a0).norm() <= tol)
        })
    }
}

/// Stark amplitudes with `Δ = detuning_ratio · jt`.
pub fn stark_series(lat: &Lattice, drive: &RamanDrive, detuning_ratio: f64, jt: f64) -> StarkSeries {
    let delta = detuning_ratio * jt;
    let s = &drive.sidebands;
    let fields: Vec<Vec<C64>> =
        s.iter().map(|sb| lat.sites.iter().map(|site| sb.at(site.position)).collect()).collect();
    let n = lat.len();
    let tol = 1e-9 * s.iter().fold(1.0_f64, |a, b| a.max(b.detuning.abs()));

    let mut freqs: Vec<(f64, usize, usize)> = Vec::new();
    for a in 0..s.len() {
        for b in 0..s.len() {
            if a != b {
                freqs.push((s[a].detuning - s[b].detuning, a, b));
            }
        }
    }
    freqs.sort_by(|x, y| x.0.total_cmp(&y.0).then((x.1, x.2).cmp(&(y.1, y.2))));

    let mut offset = vec![0.0; n];
    for f in &fields {
        for (site, z) in f.iter().enumerate() {
            offset[site] -= delta * z.norm_sqr();
        }
    }

    let mut components: Vec<StarkComponent> = Vec::new();
    let mut i = 0;
    while i < freqs.len() {
        let f0 = freqs[i].0;
        let mut j = i;
        let mut amps = vec![ZERO; n];
        while j < freqs.len() && freqs[j].0 - f0 <= tol {
            let (_, a, b) = freqs[j];
            for site in 0..n {
                amps[site] -= delta * fields[a][site] * fields[b][site].conj();
            }
            j += 1;
        }
        if f0.abs() <= tol {
            for site in 0..n {
                offset[site] += amps[site].re;
            }
        } else if amps.iter().any(|z| z.norm() > 0.0) {
            components.push(StarkComponent { frequency: f0, amplitudes: amps });
        }
        i = j;
    }
    StarkSeries { components, offset }
}
