//! Runs a TOML experiment through the command-line front end and prints the
//! manifest.
//!
//! ```bash
//! cargo run --release --example run_config
//! ```

use sideband::cli::main_with_args;

const CONFIG: &str = r#"
[trotter]
n = 5
eta = 1.0
steps = [8, 16, 32]
"#;

fn main() -> std::io::Result<()> {
    let dir = std::env::temp_dir().join("sideband-run-config");
    std::fs::create_dir_all(&dir)?;
    let cfg = dir.join("trotter.toml");
    std::fs::write(&cfg, CONFIG)?;
    let out = dir.join("out");
    let code = main_with_args(["sideband", "run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    println!("exit code {code}");
    print!("{}", std::fs::read_to_string(out.join("manifest.json"))?);
    Ok(())
}
