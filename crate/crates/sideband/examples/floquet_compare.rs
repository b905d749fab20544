//! Ground state of the target Hamiltonian against the first- and
//! second-order effective Hamiltonians of the driven chain.
//!
//! ```bash
//! cargo run --release --example floquet_compare
//! ```

use sideband::drive::{solve_sidebands_1d, SolveMode};
use sideband::floquet::{compare_ground, heff1, heff2, twostep_series, DEFAULT_M_MAX};
use sideband::hamiltonian::{build_sector, hs_fourier, hs_j0, hs_profile};

fn main() -> sideband::Result<()> {
    let n = 8;
    let j0 = hs_j0(n, 1.0);
    let prof = hs_profile(n, j0);
    let sol = solve_sidebands_1d(&prof, 1.0, SolveMode::Optimized)?;
    let sector = build_sector(n, n / 2)?;
    // unit frequency; both reports rescale to any δ
    let series = hs_fourier(&sol.to_drive(1.0), 1.0, 1.0, &sector)?;
    let h0 = series.h0().to_dense();
    let one = heff1(&series, None);
    let two = heff2(&twostep_series(&series, None, DEFAULT_M_MAX)?)?;

    println!("{:>8} {:>12} {:>12} {:>12} {:>12}", "δ/J1", "ΔE one", "1-F one", "ΔE two", "1-F two");
    for ratio in [10.0, 20.0, 40.0, 80.0] {
        let delta = ratio * prof[0].re;
        let a = compare_ground(&h0, &one.heff_at(delta), delta)?;
        let b = compare_ground(&h0, &two.heff_at(delta), delta)?;
        println!(
            "{ratio:>8.0} {:>12.3e} {:>12.3e} {:>12.3e} {:>12.3e}",
            a.energy_error,
            1.0 - a.overlap,
            b.energy_error,
            1.0 - b.overlap
        );
    }
    Ok(())
}
