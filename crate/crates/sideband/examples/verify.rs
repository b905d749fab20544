//! Invariant suite: hermiticity, conservation, rotations, resonance
//! selectivity and round trips.
//!
//! ```bash
//! cargo run --release --example verify
//! ```

fn main() -> sideband::Result<()> {
    let report = sideband::verify::run_verify()?;
    for c in &report.checks {
        let tag = match (c.passed, c.informational) {
            (true, _) => "ok",
            (false, true) => "info",
            (false, false) => "FAIL",
        };
        println!("{tag:>4}  {:<22} {:<48} {:.1e} (tol {:.0e})", c.group, c.name, c.value, c.tol);
    }
    println!("{} checks in {:.2} s, all required passed: {}", report.checks.len(), report.seconds, report.all_passed());
    Ok(())
}
