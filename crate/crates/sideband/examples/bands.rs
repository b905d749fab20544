//! Bloch bands of the chiral-flux and brickwall models: flatness and Chern
//! numbers.
//!
//! ```bash
//! cargo run --release --example bands
//! ```

use sideband::bands::{band_report, BlochModel};
use sideband::drive::brickwall_defaults;

fn main() -> sideband::Result<()> {
    let t1 = 1.0;
    let (t2, phi) = brickwall_defaults(t1);
    let models = [
        ("chiral flux", BlochModel::chiral_flux(t1, 1.0 / 2f64.sqrt(), 0.0, std::f64::consts::FRAC_PI_4)),
        ("chiral flux + t3", BlochModel::chiral_flux(t1, 0.6, 0.2, std::f64::consts::FRAC_PI_4)),
        ("brickwall", BlochModel::brickwall(t1, t2, phi)),
        ("trivial mass", BlochModel::chiral_flux(t1, 0.3, 0.0, std::f64::consts::FRAC_PI_4).with_mass(3.0)),
    ];
    for (name, model) in models {
        let r = band_report(&model, 64)?;
        let chern = match (&r.chern, &r.chern_error) {
            (Some(c), _) => format!("{:?}", c.chern),
            (None, Some(e)) => e.clone(),
            _ => "-".into(),
        };
        println!(
            "{name:<18} width {:.4}, gap {:.4}, ratio {}, Chern {chern}",
            r.flatness.bandwidth,
            r.flatness.gap,
            r.flatness.ratio.map_or("-".into(), |x| format!("{x:.4}"))
        );
    }
    Ok(())
}
