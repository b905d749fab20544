//! First-order Trotterization of a nearest-neighbour XXZ chain.
//!
//! ```bash
//! cargo run --release --example trotter
//! ```

use sideband::drive::CouplingMatrix;
use sideband::evolve::{trotter_compare, ZzGenerator};
use sideband::hamiltonian::{build_sector, build_xy, build_zz};
use sideband::linalg::C64;

fn main() -> sideband::Result<()> {
    let n = 6;
    let nn = |m: usize, k: usize, v: f64| C64::new(if m.abs_diff(k) == 1 { v } else { 0.0 }, 0.0);
    let jxy = CouplingMatrix::from_fn(n, |m, k| nn(m, k, 1.0));
    let jz = CouplingMatrix::from_fn(n, |m, k| nn(m, k, 0.5));
    let sector = build_sector(n, n / 2)?;
    let hxy = build_xy(&jxy.scaled(2.0), &sector)?;
    let zz = ZzGenerator::Diagonal(build_zz(&jz, &sector)?);
    let rows = trotter_compare(&hxy, &zz, &jxy, 1.0, &[4, 8, 16, 32, 64], n)?;
    for w in rows.windows(2) {
        println!("N_t {:>3}: error {:.3e}, ratio to next {:.3}", w[0].n_t, w[0].error, w[0].error / w[1].error);
    }
    for r in &rows {
        println!("N_t {:>3}: error {:.3e} <= commutator bound {:.3e}", r.n_t, r.error, r.bound.exact);
    }
    Ok(())
}
