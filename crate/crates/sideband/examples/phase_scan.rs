//! XXZ magnetization over (θ, B) on the 4×4 cluster for every coupling range,
//! with the θ-mirror asymmetry of each.
//!
//! ```bash
//! cargo run --release --example phase_scan
//! ```

use std::time::Instant;

use sideband::hamiltonian::Range;
use sideband::lattice::{build_square, GOLDEN};
use sideband::phases::{default_grids, magnetization_scan};

fn main() -> sideband::Result<()> {
    let lat = build_square(4, 4, 1.0, GOLDEN)?;
    let (thetas, fields) = default_grids();
    for range in [Range::NearestNeighbour, Range::Power(1.0), Range::Power(2.0), Range::Power(3.0)] {
        let t0 = Instant::now();
        let scan = magnetization_scan(&lat, 1.0, range, &thetas, &fields, 8)?;
        println!(
            "{range:?}: asymmetry {:.4}, mirror error {:.1e}, {:.1} s",
            scan.asymmetry()?,
            scan.symmetry_error()?,
            t0.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
