//! Stroboscopic evolution of the driven chain against the micromotion band.
//!
//! ```bash
//! cargo run --release --example propagate
//! ```

use sideband::drive::{solve_sidebands_1d, SolveMode};
use sideband::evolve::{floquet_band_check, PropagateOptions};
use sideband::hamiltonian::{build_sector, hs_fourier, hs_j0, hs_profile};

fn main() -> sideband::Result<()> {
    let n = 6;
    let prof = hs_profile(n, hs_j0(n, 1.0));
    let sol = solve_sidebands_1d(&prof, 1.0, SolveMode::Optimized)?;
    let sector = build_sector(n, n / 2)?;
    let opts = PropagateOptions { substeps_per_period: 1024, tol: 1e-3 };
    for ratio in [40.0, 80.0, 160.0] {
        let delta = ratio * prof[0].re;
        let series = hs_fourier(&sol.to_drive(delta), 1.0, delta, &sector)?;
        let c = floquet_band_check(&series, 3, opts)?;
        println!(
            "δ/J1 = {ratio:>5}: measured {:.3e}, kick prediction {:.3e}, deviation {:.3e} within band {:.3e}: {}",
            c.measured, c.predicted, c.deviation, c.band, c.within
        );
    }
    Ok(())
}
