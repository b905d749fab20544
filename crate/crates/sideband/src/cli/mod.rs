//! Command-line and config-file front end.
//!
//! Every subcommand writes its data files, a `manifest.json` (inputs, their
//! SHA-256, units, output list) and a separate `timings.json` into one
//! artifact directory, so the manifest of two identical runs is
//! byte-identical. `run <config.toml>` takes the same arguments from a file
//! with exactly one subcommand section:
//!
//! ```toml
//! output = "out/hs16"
//!
//! [solve-sidebands]
//! model = "hs"
//! n = 16
//! ```

mod commands;

pub use commands::*;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const UNITS: &str = "energies in units of the coupling scale J (or J~ for drive amplitudes), \
frequencies in the same units with hbar = 1, times in 1/J, distances in lattice constants d = 1";

#[derive(Debug, Parser)]
#[command(name = "sideband", version, about = "Sideband-engineered spin Hamiltonians: synthesis, Floquet, Trotter, bands, phases")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Sideband amplitudes for a 1D coupling profile.
    SolveSidebands(SolveArgs),
    /// Drive, couplings and sector Hamiltonian of a model.
    BuildModel(BuildArgs),
    /// Ground state of H_0 against the one- and two-step effective Hamiltonians.
    FloquetCompare(FloquetArgs),
    /// Trotterized XXZ against exact evolution and the error bound.
    Trotter(TrotterArgs),
    /// Bloch bands, flatness and Chern numbers.
    Bands(BandsArgs),
    /// XXZ magnetization over (theta, B) and the classical staircase.
    PhaseScan(PhaseArgs),
    /// Invariant suite.
    Verify(VerifyArgs),
    /// Run one experiment from a TOML config.
    Run(RunArgs),
}

#[derive(Debug, Clone, clap::Args)]
pub struct RunArgs {
    pub config: PathBuf,
    /// Overrides the config's `output`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Experiment file: an output directory and exactly one section.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Config {
    pub output: Option<PathBuf>,
    pub solve_sidebands: Option<SolveArgs>,
    pub build_model: Option<BuildArgs>,
    pub floquet_compare: Option<FloquetArgs>,
    pub trotter: Option<TrotterArgs>,
    pub bands: Option<BandsArgs>,
    pub phase_scan: Option<PhaseArgs>,
    pub verify: Option<VerifyArgs>,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Config> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Config::from_toml(&text)
    }

    /// The single command the file describes, with `output` applied.
    pub fn into_command(self) -> Result<Command> {
        let out = self.output;
        let mut found: Vec<Command> = Vec::new();
        macro_rules! take {
            ($field:expr, $variant:ident) => {
                if let Some(mut a) = $field {
                    a.out = out.clone();
                    found.push(Command::$variant(a));
                }
            };
        }
        take!(self.solve_sidebands, SolveSidebands);
        take!(self.build_model, BuildModel);
        take!(self.floquet_compare, FloquetCompare);
        take!(self.trotter, Trotter);
        take!(self.bands, Bands);
        take!(self.phase_scan, PhaseScan);
        take!(self.verify, Verify);
        match found.len() {
            1 => Ok(found.pop().expect("one command")),
            0 => Err(Error::Config("no command section; expected one of [solve-sidebands], [build-model], \
                 [floquet-compare], [trotter], [bands], [phase-scan], [verify]"
                .into())),
            k => Err(Error::Config(format!("{k} command sections; a config describes exactly one experiment"))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    /// SHA-256 of the canonical JSON of `inputs`.
    pub input_hash: String,
    pub inputs: serde_json::Value,
    pub units: String,
    pub outputs: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Timings {
    pub command: String,
    pub stages: Vec<(String, f64)>,
    pub total_seconds: f64,
}

/// Output files of one run, recorded as they are written.
pub struct Artifacts {
    pub dir: PathBuf,
    pub files: Vec<String>,
    stages: Vec<(String, f64)>,
    start: Instant,
    last: Instant,
}

impl Artifacts {
    pub fn create(dir: &Path) -> Result<Artifacts> {
        std::fs::create_dir_all(dir)?;
        let now = Instant::now();
        Ok(Artifacts { dir: dir.to_path_buf(), files: Vec::new(), stages: Vec::new(), start: now, last: now })
    }

    /// Path for a new output file.
    pub fn file(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        self.dir.join(name)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let path = self.file(name);
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    /// Close the current timing stage.
    pub fn stage(&mut self, name: &str) {
        let now = Instant::now();
        self.stages.push((name.to_string(), (now - self.last).as_secs_f64()));
        self.last = now;
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Result of a finished command.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub command: String,
    pub dir: PathBuf,
    pub outputs: Vec<String>,
    /// False when a command that checks something found a violation.
    pub passed: bool,
    pub summary: String,
}

fn finish<T: Serialize>(command: &str, inputs: &T, mut art: Artifacts, passed: bool, summary: String) -> Result<Outcome> {
    let inputs = serde_json::to_value(inputs)?;
    let canonical = serde_json::to_string(&inputs)?;
    let mut outputs = art.files.clone();
    outputs.push("manifest.json".into());
    let manifest = Manifest {
        command: command.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        input_hash: sha256_hex(canonical.as_bytes()),
        inputs,
        units: UNITS.to_string(),
        outputs: outputs.clone(),
    };
    std::fs::write(art.dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
    let timings = Timings { command: command.to_string(), stages: std::mem::take(&mut art.stages), total_seconds: art.start.elapsed().as_secs_f64() };
    std::fs::write(art.dir.join("timings.json"), serde_json::to_string_pretty(&timings)? + "\n")?;
    outputs.push("timings.json".into());
    Ok(Outcome { command: command.to_string(), dir: art.dir, outputs, passed, summary })
}

fn out_dir(out: &Option<PathBuf>, command: &str) -> PathBuf {
    out.clone().unwrap_or_else(|| PathBuf::from("out").join(command))
}

macro_rules! dispatch {
    ($args:expr, $name:literal, $run:path) => {{
        let a = $args;
        let mut art = Artifacts::create(&out_dir(&a.out, $name))?;
        let (passed, summary) = $run(&a, &mut art)?;
        finish($name, &a, art, passed, summary)
    }};
}

/// Execute one command.
pub fn execute(cmd: Command) -> Result<Outcome> {
    match cmd {
        Command::SolveSidebands(a) => dispatch!(a, "solve-sidebands", commands::solve_sidebands),
        Command::BuildModel(a) => dispatch!(a, "build-model", commands::build_model),
        Command::FloquetCompare(a) => dispatch!(a, "floquet-compare", commands::floquet_compare),
        Command::Trotter(a) => dispatch!(a, "trotter", commands::trotter),
        Command::Bands(a) => dispatch!(a, "bands", commands::bands),
        Command::PhaseScan(a) => dispatch!(a, "phase-scan", commands::phase_scan),
        Command::Verify(a) => dispatch!(a, "verify", commands::verify),
        Command::Run(r) => {
            let mut cfg = Config::load(&r.config)?;
            if r.out.is_some() {
                cfg.output = r.out;
            }
            execute(cfg.into_command()?)
        }
    }
}

/// 0 ok, 1 configuration or input error, 2 numerical failure.
pub fn exit_code(r: &Result<Outcome>) -> i32 {
    match r {
        Ok(o) if o.passed => 0,
        Ok(_) => 2,
        Err(e) if e.is_input_error() => 1,
        Err(_) => 2,
    }
}

/// Parse `args`, run, report on stdout/stderr and return the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let r = execute(cli.command);
    match &r {
        Ok(o) => {
            println!("{}", o.summary);
            println!("wrote {} files to {}", o.outputs.len(), o.dir.display());
            if !o.passed {
                eprintln!("error: {} found violations, see {}", o.command, o.dir.display());
            }
        }
        Err(e) => eprintln!("error: {e}"),
    }
    exit_code(&r)
}
