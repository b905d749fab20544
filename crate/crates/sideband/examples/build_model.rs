//! Chiral-flux drive on a 4×4 square lattice: couplings by separation and
//! the one-excitation Hamiltonian.
//!
//! ```bash
//! cargo run --release --example build_model
//! ```

use sideband::drive::{chiral_flux_drive, coupling_matrix, CouplingKernel, ModulationMode};
use sideband::hamiltonian::{build_sector, build_xy};
use sideband::lattice::{build_square, shape_classes, GOLDEN};

fn main() -> sideband::Result<()> {
    let lat = build_square(4, 4, 1.0, GOLDEN)?;
    let drive = chiral_flux_drive(1.0, 0.6, 0.0, 1.0, ModulationMode::FrequencyShift)?;
    // a strong carrier plus one weak sideband per separation class
    println!("{} sidebands, carrier {:.0e}", drive.sidebands.len(), drive.sidebands[0].amplitude.norm());
    let rep = coupling_matrix(&lat, &drive, &CouplingKernel::Constant { jt: 1.0 }, None);
    println!("hermiticity {:.1e}, {} resonance warnings", rep.matrix.hermiticity_error(), rep.warnings.len());

    for (shape, pairs) in shape_classes(&lat).iter().filter(|(s, _)| s[0].abs() + s[1].abs() <= 2) {
        let (m, n) = pairs[0];
        let j = rep.matrix.get(m, n);
        println!("  separation {shape:?}: |J| {:.4}, arg {:+.4}", j.norm(), j.arg());
    }

    let sector = build_sector(lat.len(), 1)?;
    let h = build_xy(&rep.matrix, &sector)?;
    println!("one-excitation sector: dim {}, nnz {}", h.dim(), h.nnz());
    Ok(())
}
