//! Excitation-number sectors of `N` spins as sorted bit patterns.
//!
//! Bit `m` set means site `m` is in `|s⟩` (`σ_z = +1`).

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BasisSector {
    n: usize,
    /// Allowed excitation numbers, ascending.
    counts: Vec<usize>,
    states: Vec<u64>,
}

impl BasisSector {
    pub fn sites(&self) -> usize {
        self.n
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[u64] {
        &self.states
    }

    pub fn state(&self, i: usize) -> u64 {
        self.states[i]
    }

    pub fn index(&self, pattern: u64) -> Option<usize> {
        self.states.binary_search(&pattern).ok()
    }

    pub fn contains_count(&self, k: usize) -> bool {
        self.counts.binary_search(&k).is_ok()
    }
}

fn check_sites(n: usize) -> Result<()> {
    if n == 0 || n > 40 {
        return Err(Error::Invalid(format!("spin count must be in 1..=40, got {n}")));
    }
    Ok(())
}

/// Fixed excitation number.
pub fn build_sector(n: usize, n_exc: usize) -> Result<BasisSector> {
    build_union(n, &[n_exc])
}

/// Union of several excitation numbers, basis sorted by pattern.
pub fn build_union(n: usize, counts: &[usize]) -> Result<BasisSector> {
    check_sites(n)?;
    let mut counts = counts.to_vec();
    counts.sort_unstable();
    counts.dedup();
    if let Some(&bad) = counts.iter().find(|&&k| k > n) {
        return Err(Error::Invalid(format!("excitation number {bad} exceeds {n} sites")));
    }
    if counts.is_empty() {
        return Err(Error::Invalid("no excitation numbers requested".into()));
    }
    let mut states = Vec::new();
    for &k in &counts {
        states.extend(patterns(n, k));
    }
    states.sort_unstable();
    Ok(BasisSector { n, counts, states })
}

/// All `2^N` states.
pub fn build_full(n: usize) -> Result<BasisSector> {
    if n > 20 {
        return Err(Error::Invalid(format!("full space of {n} spins is too large")));
    }
    build_union(n, &(0..=n).collect::<Vec<_>>())
}

/// Patterns with exactly `k` bits among the low `n`, ascending.
fn patterns(n: usize, k: usize) -> Vec<u64> {
    if k == 0 {
        return vec![0];
    }
    let mut out = Vec::new();
    let mut v: u64 = (1u64 << k) - 1;
    let limit = 1u64 << n;
    while v < limit {
        out.push(v);
        // next pattern with the same popcount
        let t = v | (v - 1);
        let next = (t + 1) | (((!t & (t + 1)) - 1) >> (v.trailing_zeros() + 1));
        if next <= v {
            break;
        }
        v = next;
    }
    out
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_sectors() {
        let s = build_sector(2, 1).unwrap();
        assert_eq!(s.states(), &[0b01, 0b10]);
        assert_eq!(build_sector(4, 0).unwrap().dim(), 1);
        assert_eq!(build_sector(16, 8).unwrap().dim(), 12870);
        assert!(build_sector(3, 4).is_err());
        assert_eq!(build_full(5).unwrap().dim(), 32);
    }

    proptest! {
        #[test]
        fn sector_sizes_and_lookup(n in 1usize..14, k in 0usize..14) {
            prop_assume!(k <= n);
            let s = build_sector(n, k).unwrap();
            prop_assert_eq!(s.dim(), binomial(n, k));
            prop_assert!(s.states().windows(2).all(|w| w[0] < w[1]));
            for (i, &p) in s.states().iter().enumerate() {
                prop_assert_eq!(p.count_ones() as usize, k);
                prop_assert_eq!(s.index(p), Some(i));
            }
        }
    }
}
