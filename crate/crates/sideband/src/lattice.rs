//! Site geometries and the ground-state energy-shift landscape.
//!
//! A chain gets a linear shift `ω_n = n δ`. A square lattice gets
//! `ω_(nx,ny) = (nx q + ny) B2` with `q` irrational, so every separation
//! vector maps to its own shift difference. Positions are in units of the
//! lattice constant and are always integer here.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Golden ratio, the default irrational gradient ratio.
pub const GOLDEN: f64 = 1.618_033_988_749_895;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Site {
    pub index: usize,
    pub position: [f64; 2],
    /// Ground-state energy shift of the site.
    pub shift: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GradientSpec {
    Linear { delta: f64 },
    Planar { b2: f64, q: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub dimension: usize,
    pub sites: Vec<Site>,
    pub bravais: Vec<[f64; 2]>,
    pub gradient: GradientSpec,
}

pub type SeparationClasses = BTreeMap<[i64; 2], Vec<(usize, usize)>>;

impl Lattice {
    /// Validating constructor: contiguous indices and distinct positions.
    pub fn new(
        dimension: usize,
        sites: Vec<Site>,
        bravais: Vec<[f64; 2]>,
        gradient: GradientSpec,
    ) -> Result<Lattice> {
        if dimension != 1 && dimension != 2 {
            return Err(Error::Invalid(format!("dimension must be 1 or 2, got {dimension}")));
        }
        if sites.is_empty() {
            return Err(Error::Invalid("lattice has no sites".into()));
        }
        for (i, s) in sites.iter().enumerate() {
            if s.index != i {
                return Err(Error::Invalid(format!("site {i} carries index {}", s.index)));
            }
            if !s.shift.is_finite() || s.position.iter().any(|x| !x.is_finite()) {
                return Err(Error::Invalid(format!("site {i} has non-finite data")));
            }
        }
        let mut seen = BTreeMap::new();
        for s in &sites {
            if let Some(prev) = seen.insert(cell_of(s.position), s.index) {
                return Err(Error::Invalid(format!(
                    "sites {prev} and {} share a position",
                    s.index
                )));
            }
        }
        Ok(Lattice { dimension, sites, bravais, gradient })
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn shifts(&self) -> Vec<f64> {
        self.sites.iter().map(|s| s.shift).collect()
    }

    /// Integer coordinates of site `i`.
    pub fn cell(&self, i: usize) -> [i64; 2] {
        cell_of(self.sites[i].position)
    }

    /// `r_m − r_n` as integers.
    pub fn separation(&self, m: usize, n: usize) -> [i64; 2] {
        let a = self.cell(m);
        let b = self.cell(n);
        [a[0] - b[0], a[1] - b[1]]
    }

    pub fn distance(&self, m: usize, n: usize) -> f64 {
        let d = self.separation(m, n);
        ((d[0] * d[0] + d[1] * d[1]) as f64).sqrt()
    }

    /// Index of the site at integer coordinates, if any.
    pub fn site_at(&self, c: [i64; 2]) -> Option<usize> {
        self.sites.iter().position(|s| cell_of(s.position) == c)
    }

    /// Gradient step of a linear chain.
    pub fn delta(&self) -> Option<f64> {
        match self.gradient {
            GradientSpec::Linear { delta } => Some(delta),
            GradientSpec::Planar { .. } => None,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Lattice> {
        let raw: Lattice = serde_json::from_str(s)?;
        Lattice::new(raw.dimension, raw.sites, raw.bravais, raw.gradient)
    }
}

fn cell_of(p: [f64; 2]) -> [i64; 2] {
    [p[0].round() as i64, p[1].round() as i64]
}

/// Chain of `n` sites with shifts `k·delta`.
pub fn build_chain(n: usize, delta: f64) -> Result<Lattice> {
    if n == 0 {
        return Err(Error::Invalid("chain needs at least one site".into()));
    }
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::Invalid(format!("gradient step must be positive, got {delta}")));
    }
    let sites = (0..n)
        .map(|k| Site { index: k, position: [k as f64, 0.0], shift: k as f64 * delta })
        .collect();
    Lattice::new(1, sites, vec![[1.0, 0.0]], GradientSpec::Linear { delta })
}

/// Square lattice without the shift-collision check. Row-major ordering:
/// index = ny·nx_total + nx.
pub fn build_square_unchecked(nx: usize, ny: usize, b2: f64, q: f64) -> Result<Lattice> {
    if nx == 0 || ny == 0 {
        return Err(Error::Invalid("square lattice needs nx, ny >= 1".into()));
    }
    let mut sites = Vec::with_capacity(nx * ny);
    for y in 0..ny {
        for x in 0..nx {
            sites.push(Site {
                index: y * nx + x,
                position: [x as f64, y as f64],
                shift: (x as f64 * q + y as f64) * b2,
            });
        }
    }
    Lattice::new(2, sites, vec![[1.0, 0.0], [0.0, 1.0]], GradientSpec::Planar { b2, q })
}

/// Square lattice with planar gradient; rejects coinciding site shifts.
pub fn build_square(nx: usize, ny: usize, b2: f64, q: f64) -> Result<Lattice> {
    let lat = build_square_unchecked(nx, ny, b2, q)?;
    let tol = 1e-9 * b2.abs().max(f64::MIN_POSITIVE);
    let mut order: Vec<usize> = (0..lat.len()).collect();
    order.sort_by(|&a, &b| lat.sites[a].shift.total_cmp(&lat.sites[b].shift));
    let mut clashes = Vec::new();
    for (i, &a) in order.iter().enumerate() {
        for &b in &order[i + 1..] {
            if lat.sites[b].shift - lat.sites[a].shift > tol {
                break;
            }
            clashes.push((a.min(b), a.max(b)));
        }
    }
    if clashes.is_empty() {
        Ok(lat)
    } else {
        clashes.sort();
        Err(Error::ShiftCollision(clashes))
    }
}

/// Ordered pairs grouped by separation vector `r_m − r_n`.
pub fn separation_classes(lat: &Lattice) -> SeparationClasses {
    let mut out: SeparationClasses = BTreeMap::new();
    for m in 0..lat.len() {
        for n in 0..lat.len() {
            if m != n {
                out.entry(lat.separation(m, n)).or_default().push((m, n));
            }
        }
    }
    out
}

/// Unordered pairs `m < n` grouped by distance, ascending.
pub fn distance_classes(lat: &Lattice) -> Vec<(f64, Vec<(usize, usize)>)> {
    let mut by_sq: BTreeMap<i64, Vec<(usize, usize)>> = BTreeMap::new();
    for m in 0..lat.len() {
        for n in m + 1..lat.len() {
            let d = lat.separation(m, n);
            by_sq.entry(d[0] * d[0] + d[1] * d[1]).or_default().push((m, n));
        }
    }
    by_sq.into_iter().map(|(sq, v)| ((sq as f64).sqrt(), v)).collect()
}

/// Unordered pairs `m < n` grouped by separation shape `[a, b]` with
/// `a = max(|Δx|, |Δy|)`, `b = min(|Δx|, |Δy|)`. Shapes related by a lattice
/// symmetry share one class even when two shapes happen to share a length
/// (`(5, 0)` and `(4, 3)`).
pub fn shape_classes(lat: &Lattice) -> BTreeMap<[i64; 2], Vec<(usize, usize)>> {
    let mut out: BTreeMap<[i64; 2], Vec<(usize, usize)>> = BTreeMap::new();
    for m in 0..lat.len() {
        for n in m + 1..lat.len() {
            let d = lat.separation(m, n);
            let (a, b) = (d[0].abs(), d[1].abs());
            out.entry([a.max(b), a.min(b)]).or_default().push((m, n));
        }
    }
    out
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ShiftReport {
    /// Pairs of separation classes whose shift differences agree within tol.
    pub collisions: Vec<([i64; 2], [i64; 2], f64)>,
    /// Classes whose pairs do not all share one shift difference.
    pub inhomogeneous: Vec<[i64; 2]>,
}

impl ShiftReport {
    pub fn is_resolvable(&self) -> bool {
        self.collisions.is_empty() && self.inhomogeneous.is_empty()
    }
}

/// Lists separation classes that the gradient cannot tell apart.
pub fn shift_uniqueness_check(lat: &Lattice, tol: f64) -> ShiftReport {
    let classes = separation_classes(lat);
    let mut report = ShiftReport::default();
    let mut class_shift: Vec<([i64; 2], f64)> = Vec::with_capacity(classes.len());
    for (key, pairs) in &classes {
        let (m0, n0) = pairs[0];
        let d0 = lat.sites[m0].shift - lat.sites[n0].shift;
        let uniform = pairs
            .iter()
            .all(|&(m, n)| ((lat.sites[m].shift - lat.sites[n].shift) - d0).abs() <= tol);
        if !uniform {
            report.inhomogeneous.push(*key);
        }
        class_shift.push((*key, d0));
    }
    class_shift.sort_by(|a, b| a.1.total_cmp(&b.1));
    for (i, a) in class_shift.iter().enumerate() {
        for b in &class_shift[i + 1..] {
            if b.1 - a.1 > tol {
                break;
            }
            report.collisions.push((a.0, b.0, (b.1 - a.1).abs()));
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn chain_shifts() {
        assert_eq!(build_chain(4, 1.0).unwrap().shifts(), vec![0.0, 1.0, 2.0, 3.0]);
        assert_eq!(build_chain(1, 5.0).unwrap().shifts(), vec![0.0]);
        assert_eq!(build_chain(3, 2.0).unwrap().shifts(), vec![0.0, 2.0, 4.0]);
        assert!(build_chain(0, 1.0).is_err());
        assert!(build_chain(3, 0.0).is_err());
    }

    #[test]
    fn square_shifts_and_ordering() {
        let lat = build_square(2, 2, 1.0, GOLDEN).unwrap();
        let s = lat.shifts();
        let expect = [0.0, GOLDEN, 1.0, 1.0 + GOLDEN];
        for (a, b) in s.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(lat.cell(1), [1, 0]);
        assert_eq!(lat.cell(2), [0, 1]);
        let col = build_square(1, 3, 2.0, 0.37).unwrap();
        assert_eq!(col.shifts(), vec![0.0, 2.0, 4.0]);
    }

    #[test]
    fn rational_ratio_is_rejected() {
        match build_square(2, 2, 1.0, 1.0) {
            Err(Error::ShiftCollision(p)) => assert_eq!(p, vec![(1, 2)]),
            other => panic!("expected collision, got {other:?}"),
        }
    }

    #[test]
    fn chain_classes() {
        let c = separation_classes(&build_chain(3, 1.0).unwrap());
        assert_eq!(c.len(), 4);
        assert_eq!(c[&[1, 0]], vec![(1, 0), (2, 1)]);
        assert_eq!(c[&[-1, 0]], vec![(0, 1), (1, 2)]);
        assert_eq!(c[&[2, 0]], vec![(2, 0)]);
        assert_eq!(c[&[-2, 0]], vec![(0, 2)]);
    }

    #[test]
    fn square_class_counts() {
        let c = separation_classes(&build_square(2, 2, 1.0, GOLDEN).unwrap());
        assert_eq!(c.len(), 8);
        for ns in 2..=8usize {
            let lat = build_square(ns, ns, 1.0, GOLDEN).unwrap();
            assert_eq!(shape_classes(&lat).len(), (ns * (ns + 1) - 2) / 2);
        }
        // 5² + 0² = 4² + 3² merges two shapes into one length
        let lat = build_square(6, 6, 1.0, GOLDEN).unwrap();
        assert_eq!(distance_classes(&lat).len(), 19);
        let lat = build_square(4, 4, 1.0, GOLDEN).unwrap();
        let total: usize = distance_classes(&lat).iter().map(|(_, v)| v.len()).sum();
        assert_eq!(total, 120);
    }

    #[test]
    fn uniqueness_reports() {
        assert!(shift_uniqueness_check(&build_chain(10, 1.0).unwrap(), 0.1).is_resolvable());
        let bad = build_square_unchecked(3, 3, 1.0, 1.0).unwrap();
        let r = shift_uniqueness_check(&bad, 1e-12);
        assert!(r.collisions.iter().any(|(a, b, _)| (*a == [0, 1] && *b == [1, 0]) || (*a == [1, 0] && *b == [0, 1])));
        for ns in 2..=8 {
            let lat = build_square(ns, ns, 1.0, GOLDEN).unwrap();
            assert!(shift_uniqueness_check(&lat, 1e-9).is_resolvable(), "ns = {ns}");
        }
    }

    #[test]
    fn json_round_trip() {
        let lat = build_square(3, 2, 0.5, GOLDEN).unwrap();
        let back = Lattice::from_json(&lat.to_json().unwrap()).unwrap();
        assert_eq!(lat, back);
        let mut broken = lat.clone();
        broken.sites[1].position = broken.sites[0].position;
        assert!(Lattice::from_json(&serde_json::to_string(&broken).unwrap()).is_err());
    }

    proptest! {
        #[test]
        fn classes_partition_ordered_pairs(nx in 1usize..5, ny in 1usize..5) {
            let lat = build_square(nx, ny, 1.0, GOLDEN).unwrap();
            let n = lat.len();
            let c = separation_classes(&lat);
            let total: usize = c.values().map(|v| v.len()).sum();
            prop_assert_eq!(total, n * (n - 1));
            // shift difference depends on the separation vector only
            for (key, pairs) in &c {
                let d0 = (key[0] as f64 * GOLDEN + key[1] as f64) * 1.0;
                for &(m, k) in pairs {
                    prop_assert!((lat.sites[m].shift - lat.sites[k].shift - d0).abs() < 1e-12);
                }
            }
        }

        #[test]
        fn chain_differences_exact(n in 1usize..30, delta in 0.1f64..10.0) {
            let lat = build_chain(n, delta).unwrap();
            for m in 0..n {
                prop_assert_eq!(lat.sites[m].shift, m as f64 * delta);
            }
        }
    }
}
