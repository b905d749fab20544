//! Two-step (even-harmonic) drive: parity, vanishing first-order sum and
//! the Stark contribution of a co-propagating drive.
//!
//! ```bash
//! cargo run --release --example twostep
//! ```

use sideband::drive::{solve_sidebands_1d, stark_series, SolveMode};
use sideband::floquet::{first_order_sum, stark_error2, twostep_series, DEFAULT_M_MAX};
use sideband::hamiltonian::{build_sector, hs_fourier, hs_j0, hs_profile};
use sideband::lattice::build_chain;
use sideband::linalg::spectral_norm;

fn main() -> sideband::Result<()> {
    let n = 6;
    let sol = solve_sidebands_1d(&hs_profile(n, hs_j0(n, 1.0)), 1.0, SolveMode::Optimized)?;
    let sector = build_sector(n, n / 2)?;
    let drive = sol.to_drive(1.0);
    let series = hs_fourier(&drive, 1.0, 1.0, &sector)?;

    for m_max in [21, 61, DEFAULT_M_MAX] {
        let ts = twostep_series(&series, None, m_max)?;
        let mat = ts.materialize()?;
        println!(
            "M = {m_max:>3}: {} harmonics up to {}, parity {:.1e}, first-order sum {:.1e}",
            ts.harmonics().count(),
            ts.p_max(),
            ts.parity_error(),
            spectral_norm(&first_order_sum(&mat, mat.p_max()))
        );
    }

    let ts = twostep_series(&series, None, DEFAULT_M_MAX)?;
    let st = stark_series(&build_chain(n, 1.0)?, &drive, 5.0, 1.0);
    println!("Stark series uniform: {}", st.is_uniform(1e-12));
    let rep = stark_error2(&ts, &st.harmonics(1.0)?, &sector)?;
    println!("Stark part of the second-order error: {:.1e}", spectral_norm(&rep.stark.to_dense()));
    Ok(())
}
