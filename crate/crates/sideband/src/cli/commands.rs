//! Subcommand arguments and bodies.
//!
//! Each `*Args` struct is both the clap argument set and the config-file
//! section, so flags and TOML keys share names (kebab-case). The compute
//! half of each command is public and returns a serializable result.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::bands::{band_grid, band_report, chiral_flux_closed_form, chern, write_bands_csv, BandReport, BlochModel, ChernReport};
use crate::drive::{
    brickwall_defaults, brickwall_drive, chiral_flux_drive, coupling_matrix, solve_sidebands_1d, CouplingKernel,
    CouplingMatrix, ModulationMode, RamanDrive, SolveMode,
};
use crate::error::{Error, Result};
use crate::evolve::{trotter_compare, Rotation, ZzGenerator};
use crate::floquet::{compare_ground, heff1, heff2, twostep_series, ReportSummary};
use crate::hamiltonian::{
    build_full, build_sector, build_xxz, build_xy, build_zz, hs_fourier, hs_j0, hs_profile, pauli_coupling, sigma_x,
    xxz_eta_target, Range, SectorOperator,
};
use crate::io::{write_table, Cell};
use crate::lattice::{build_chain, build_square, Lattice, GOLDEN};
use crate::linalg::{C64, ZERO};
use crate::phases::{linspace, magnetization_scan, range_profile, sector_energies, staircase_cut, symmetric_angles, Staircase};
use crate::verify::{run_verify, VerifyReport};

use super::Artifacts;

macro_rules! defaults_from_clap {
    ($($t:ty),*) => {$(
        impl Default for $t {
            fn default() -> Self {
                <$t>::parse_from(["sideband"])
            }
        }
    )*};
}

defaults_from_clap!(SolveArgs, BuildArgs, FloquetArgs, TrotterArgs, BandsArgs, PhaseArgs, VerifyArgs);

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn need(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Invalid(msg()))
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x.iter().zip(y).filter(|(a, b)| **a > 0.0 && **b > 0.0).map(|(a, b)| (a.ln(), b.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// `n` log-spaced points over `[a, b]`.
pub fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    linspace(a.ln(), b.ln(), n).into_iter().map(f64::exp).collect()
}

// ---------------------------------------------------------------- solve-sidebands

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileModel {
    /// `J0 / sin²(kπ/N)` with `J0 = Jπ²/N²`.
    Hs,
    /// `J / k^η`.
    Power,
    /// `J e^{−(k−1)/ξ}`.
    Exp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    Optimized,
    Perturbative,
}

#[derive(Clone, Debug, Parser, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct SolveArgs {
    #[arg(long, value_enum, default_value_t = ProfileModel::Hs)]
    pub model: ProfileModel,
    #[arg(long, default_value_t = 16)]
    pub n: usize,
    /// Coupling scale `J`.
    #[arg(long, default_value_t = 1.0)]
    pub j: f64,
    #[arg(long, default_value_t = 2.0)]
    pub eta: f64,
    #[arg(long, default_value_t = 2.0)]
    pub xi: f64,
    #[arg(long, value_enum, default_value_t = SolverKind::Optimized)]
    pub mode: SolverKind,
    /// Carrier `|X_0|` of the perturbative solution.
    #[arg(long, default_value_t = 10.0)]
    pub carrier: f64,
    /// Photon-mediated coupling `J~`.
    #[arg(long, default_value_t = 1.0)]
    pub jt: f64,
    /// Gradient step; sideband `α` sits at `α δ`.
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
    /// Chain lengths for the intensity table (default: even N from 4 to n).
    #[arg(long, value_delimiter = ',')]
    pub scan: Vec<usize>,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

pub fn profile(model: ProfileModel, n: usize, j: f64, eta: f64, xi: f64) -> Result<Vec<C64>> {
    need(n >= 2, || format!("a chain needs n >= 2, got {n}"))?;
    Ok(match model {
        ProfileModel::Hs => hs_profile(n, hs_j0(n, j)),
        ProfileModel::Power => {
            need(eta > 0.0, || format!("eta must be positive, got {eta}"))?;
            (1..n).map(|k| c(j * (k as f64).powf(-eta))).collect()
        }
        ProfileModel::Exp => {
            need(xi > 0.0, || format!("xi must be positive, got {xi}"))?;
            (1..n).map(|k| c(j * (-((k - 1) as f64) / xi).exp())).collect()
        }
    })
}

fn solve_mode(a: &SolveArgs) -> SolveMode {
    match a.mode {
        SolverKind::Optimized => SolveMode::Optimized,
        SolverKind::Perturbative => SolveMode::Perturbative { carrier: a.carrier },
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IntensityRow {
    pub n: usize,
    pub total_intensity: f64,
    pub intensity_bound: f64,
    pub amplitude_ratio: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveResult {
    pub n: usize,
    pub target: Vec<f64>,
    pub residual: f64,
    /// Max relative error of the couplings the drive produces on a chain.
    pub forward_error: f64,
    pub total_intensity: f64,
    pub intensity_bound: f64,
    pub amplitude_ratio: f64,
    pub seed: String,
    pub intensity: Vec<IntensityRow>,
    #[serde(skip)]
    pub drive: RamanDrive,
    #[serde(skip)]
    pub trace: Vec<crate::drive::TraceRow>,
}

/// Couplings realized on a chain, against the target profile.
pub fn chain_forward_error(prof: &[C64], drive: &RamanDrive, jt: f64, delta: f64) -> Result<f64> {
    let n = prof.len() + 1;
    let lat = build_chain(n, delta)?;
    let j = coupling_matrix(&lat, drive, &CouplingKernel::Constant { jt }, None).matrix;
    let target = CouplingMatrix::from_fn(n, |m, k| if m == k { ZERO } else { prof[m.abs_diff(k) - 1] });
    Ok(j.max_diff(&target) / target.max_abs())
}

pub fn compute_solve(a: &SolveArgs) -> Result<SolveResult> {
    need(a.jt > 0.0 && a.delta > 0.0, || "jt and delta must be positive".into())?;
    let prof = profile(a.model, a.n, a.j, a.eta, a.xi)?;
    let sol = solve_sidebands_1d(&prof, a.jt, solve_mode(a))?;
    let drive = sol.to_drive(a.delta);
    let forward_error = chain_forward_error(&prof, &drive, a.jt, a.delta)?;
    let sizes: Vec<usize> = if a.scan.is_empty() { (4..=a.n).step_by(2).collect() } else { a.scan.clone() };
    let mut intensity = Vec::new();
    for &n in &sizes {
        let s = if n == a.n { sol.clone() } else { solve_sidebands_1d(&profile(a.model, n, a.j, a.eta, a.xi)?, a.jt, solve_mode(a))? };
        intensity.push(IntensityRow {
            n,
            total_intensity: s.total_intensity,
            intensity_bound: s.intensity_bound,
            amplitude_ratio: s.amplitude_ratio(),
            residual: s.residual,
        });
    }
    Ok(SolveResult {
        n: a.n,
        target: prof.iter().map(|z| z.re).collect(),
        residual: sol.residual,
        forward_error,
        total_intensity: sol.total_intensity,
        intensity_bound: sol.intensity_bound,
        amplitude_ratio: sol.amplitude_ratio(),
        seed: sol.seed.clone(),
        intensity,
        drive,
        trace: sol.trace,
    })
}

pub(super) fn solve_sidebands(a: &SolveArgs, art: &mut Artifacts) -> Result<(bool, String)> {
    let r = compute_solve(a)?;
    art.stage("solve");
    std::fs::write(art.file("drive.json"), r.drive.to_json()? + "\n")?;
    let rows: Vec<Vec<Cell>> = r
        .trace
        .iter()
        .map(|t| vec![t.iteration.into(), t.seed.as_str().into(), t.lambda.into(), t.residual.into(), t.total_intensity.into()])
        .collect();
    write_table(&art.file("trace.csv"), &["iteration", "seed", "lambda", "residual", "total_intensity"], &rows)?;
    let rows: Vec<Vec<Cell>> = r
        .intensity
        .iter()
        .map(|t| vec![t.n.into(), t.total_intensity.into(), t.intensity_bound.into(), t.amplitude_ratio.into(), t.residual.into()])
        .collect();
    write_table(&art.file("intensity.csv"), &["N", "total_intensity", "intensity_bound", "amplitude_ratio", "residual"], &rows)?;
    let rows: Vec<Vec<Cell>> = r
        .drive
        .sidebands
        .iter()
        .enumerate()
        .map(|(k, s)| vec![k.into(), s.detuning.into(), s.amplitude.re.into(), s.amplitude.im.into(), s.amplitude.norm().into()])
        .collect();
    write_table(&art.file("amplitudes.csv"), &["alpha", "detuning", "re", "im", "abs"], &rows)?;
    art.json("solution.json", &r)?;
    Ok((true, format!("N={} residual {:.3e}, forward error {:.3e}, total intensity {:.6}", r.n, r.residual, r.forward_error, r.total_intensity)))
}

// ---------------------------------------------------------------- build-model

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Hs,
    ChiralFlux,
    Brickwall,
    Xxz,
}

#[derive(Clone, Debug, Parser, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct BuildArgs {
    #[arg(long, value_enum, default_value_t = ModelKind::Hs)]
    pub model: ModelKind,
    /// Chain length (hs).
    #[arg(long, default_value_t = 8)]
    pub n: usize,
    /// Side of the square cluster (chiral-flux, brickwall, xxz).
    #[arg(long, default_value_t = 4)]
    pub side: usize,
    #[arg(long, default_value_t = 1.0)]
    pub t1: f64,
    #[arg(long)]
    pub t2: Option<f64>,
    #[arg(long)]
    pub t3: Option<f64>,
    #[arg(long)]
    pub phi: Option<f64>,
    /// Flat-band parameter set of the chiral-flux model.
    #[arg(long)]
    pub flat: bool,
    /// Power-law exponent (xxz); nearest neighbour when absent.
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long, default_value_t = FRAC_PI_4)]
    pub theta: f64,
    /// Field `B` (xxz).
    #[arg(long, default_value_t = 0.0)]
    pub b: f64,
    /// Excitation sector; defaults to 1 for band models, N/2 otherwise.
    #[arg(long)]
    pub n_exc: Option<usize>,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

/// Chiral-flux parameters `(t1, t2, t3, φ)` with defaults filled in.
pub fn chiral_params(t1: f64, t2: Option<f64>, t3: Option<f64>, phi: Option<f64>, flat: bool) -> (f64, f64, f64, f64) {
    let t2 = t2.unwrap_or(t1 / 2f64.sqrt());
    let t3 = t3.unwrap_or(if flat { t1 / (4.0 * 6f64.sqrt()) } else { 0.0 });
    (t1, t2, t3, phi.unwrap_or(FRAC_PI_4))
}

#[derive(Clone, Debug, Serialize)]
pub struct ModelSummary {
    pub model: ModelKind,
    pub n_sites: usize,
    pub n_exc: usize,
    pub dim: usize,
    pub nnz: usize,
    pub parameters: serde_json::Value,
    pub coupling_hermiticity_error: f64,
    pub hamiltonian_hermiticity_error: f64,
    /// Max relative deviation of the drive's couplings from the target.
    pub target_error: Option<f64>,
    pub resonance_warnings: usize,
}

pub struct BuiltModel {
    pub lattice: Lattice,
    pub drive: Option<RamanDrive>,
    pub couplings: CouplingMatrix,
    pub zz: Option<CouplingMatrix>,
    pub hamiltonian: SectorOperator,
    pub summary: ModelSummary,
}

pub fn compute_model(a: &BuildArgs) -> Result<BuiltModel> {
    let band_model = matches!(a.model, ModelKind::ChiralFlux | ModelKind::Brickwall);
    let square = || build_square(a.side, a.side, 1.0, GOLDEN);
    let kernel = CouplingKernel::Constant { jt: 1.0 };
    let (lattice, drive, couplings, zz, target_error, warnings, params) = match a.model {
        ModelKind::Hs => {
            let prof = hs_profile(a.n, hs_j0(a.n, 1.0));
            let sol = solve_sidebands_1d(&prof, 1.0, SolveMode::Optimized)?;
            let lat = build_chain(a.n, 1.0)?;
            let drive = sol.to_drive(1.0);
            let rep = coupling_matrix(&lat, &drive, &kernel, None);
            let err = chain_forward_error(&prof, &drive, 1.0, 1.0)?;
            let p = serde_json::json!({ "j0": hs_j0(a.n, 1.0), "jt": 1.0, "delta": 1.0 });
            (lat, Some(drive), rep.matrix, None, Some(err), rep.warnings.len(), p)
        }
        ModelKind::ChiralFlux => {
            let (t1, t2, t3, phi) = chiral_params(a.t1, a.t2, a.t3, a.phi, a.flat);
            let lat = square()?;
            let drive = chiral_flux_drive(t1, t2, t3, phi.tan(), ModulationMode::FrequencyShift)?;
            let rep = coupling_matrix(&lat, &drive, &kernel, None);
            let p = serde_json::json!({ "t1": t1, "t2": t2, "t3": t3, "phi": phi });
            (lat, Some(drive), rep.matrix, None, None, rep.warnings.len(), p)
        }
        ModelKind::Brickwall => {
            let (t2d, phid) = brickwall_defaults(a.t1);
            let (t2, phi) = (a.t2.unwrap_or(t2d), a.phi.unwrap_or(phid));
            let lat = square()?;
            let drive = brickwall_drive(a.t1, t2, phi)?;
            let rep = coupling_matrix(&lat, &drive, &kernel, None);
            let p = serde_json::json!({ "t1": a.t1, "t2": t2, "phi": phi });
            (lat, Some(drive), rep.matrix, None, None, rep.warnings.len(), p)
        }
        ModelKind::Xxz => {
            let lat = square()?;
            let range = a.eta.map(Range::Power).unwrap_or(Range::NearestNeighbour);
            let (jxy, jz) = xxz_eta_target(&lat, 1.0, range, a.theta);
            let p = serde_json::json!({ "range": range, "theta": a.theta, "b": a.b, "j": 1.0 });
            (lat, None, jxy, Some(jz), None, 0, p)
        }
    };
    let n_sites = lattice.len();
    let n_exc = a.n_exc.unwrap_or(if band_model { 1 } else { n_sites / 2 });
    let sector = build_sector(n_sites, n_exc)?;
    let hamiltonian = match &zz {
        Some(jz) => build_xxz(&couplings, jz, a.b, &sector)?,
        None => build_xy(&couplings, &sector)?,
    };
    let summary = ModelSummary {
        model: a.model,
        n_sites,
        n_exc,
        dim: sector.dim(),
        nnz: hamiltonian.nnz(),
        parameters: params,
        coupling_hermiticity_error: couplings.hermiticity_error(),
        hamiltonian_hermiticity_error: hamiltonian.hermiticity_error(),
        target_error,
        resonance_warnings: warnings,
    };
    Ok(BuiltModel { lattice, drive, couplings, zz, hamiltonian, summary })
}

fn coupling_rows(j: &CouplingMatrix) -> Vec<Vec<Cell>> {
    let n = j.dim();
    let mut rows = Vec::new();
    for m in 0..n {
        for k in 0..n {
            let v = j.get(m, k);
            if v != ZERO {
                rows.push(vec![m.into(), k.into(), v.re.into(), v.im.into()]);
            }
        }
    }
    rows
}

pub(super) fn build_model(a: &BuildArgs, art: &mut Artifacts) -> Result<(bool, String)> {
    let m = compute_model(a)?;
    art.stage("build");
    write_table(&art.file("couplings.csv"), &["m", "n", "re", "im"], &coupling_rows(&m.couplings))?;
    if let Some(jz) = &m.zz {
        write_table(&art.file("couplings_zz.csv"), &["m", "n", "re", "im"], &coupling_rows(jz))?;
    }
    m.hamiltonian.write_csv(&art.file("hamiltonian.csv"))?;
    if let Some(d) = &m.drive {
        std::fs::write(art.file("drive.json"), d.to_json()? + "\n")?;
    }
    std::fs::write(art.file("lattice.json"), m.lattice.to_json()? + "\n")?;
    art.json("model.json", &m.summary)?;
    let s = &m.summary;
    Ok((true, format!("{:?}: {} sites, sector n_exc={} (dim {}), {} nonzeros", s.model, s.n_sites, s.n_exc, s.dim, s.nnz)))
}

// ---------------------------------------------------------------- floquet-compare

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FloquetModel {
    Hs,
}

#[derive(Clone, Debug, Parser, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct FloquetArgs {
    #[arg(long, value_enum, default_value_t = FloquetModel::Hs)]
    pub model: FloquetModel,
    #[arg(long, default_value_t = 12)]
    pub n: usize,
    /// Coupling scale; `J0 = Jπ²/N²`.
    #[arg(long, default_value_t = 1.0)]
    pub j: f64,
    /// Gradient step in units of the nearest-neighbour coupling `J_1`.
    #[arg(long, default_value_t = 40.0)]
    pub delta_over_j: f64,
    /// Also evaluate the two-step drive.
    #[arg(long)]
    pub twostep: bool,
    /// Odd-harmonic truncation of the two-step series.
    #[arg(long, default_value_t = crate::floquet::DEFAULT_M_MAX)]
    pub m_max: usize,
    /// Additional `δ/J_1` values for scan.csv.
    #[arg(long, value_delimiter = ',')]
    pub scan: Vec<f64>,
    #[arg(long)]
    pub n_exc: Option<usize>,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GroundPoint {
    pub delta_over_j: f64,
    pub delta: f64,
    pub e0: f64,
    pub e_eff: f64,
    pub energy_error: f64,
    pub overlap: f64,
    /// `1 − |⟨Ψ0|Ψ⟩|`.
    pub overlap_error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FloquetResult {
    pub n: usize,
    pub n_exc: usize,
    pub dim: usize,
    pub j1: f64,
    pub total_intensity: f64,
    pub onestep: GroundPoint,
    pub twostep: Option<GroundPoint>,
    pub heff1: ReportSummary,
    pub heff2: Option<ReportSummary>,
    pub scan_onestep: Vec<GroundPoint>,
    pub scan_twostep: Vec<GroundPoint>,
    pub slope_onestep: Option<f64>,
    pub slope_twostep: Option<f64>,
}

pub fn compute_floquet(a: &FloquetArgs) -> Result<FloquetResult> {
    need(a.n >= 4 && a.n % 2 == 0, || format!("Haldane-Shastry comparison needs an even n >= 4, got {}", a.n))?;
    need(a.delta_over_j > 0.0 && a.scan.iter().all(|x| *x > 0.0), || "delta/J must be positive".into())?;
    let prof = hs_profile(a.n, hs_j0(a.n, a.j));
    let j1 = prof[0].re;
    let sol = solve_sidebands_1d(&prof, 1.0, SolveMode::Optimized)?;
    let n_exc = a.n_exc.unwrap_or(a.n / 2);
    let sector = build_sector(a.n, n_exc)?;
    let delta = a.delta_over_j * j1;
    let series = hs_fourier(&sol.to_drive(delta), 1.0, delta, &sector)?;
    let h0 = series.h0().to_dense();
    let r1 = heff1(&series, None);
    let r2 = if a.twostep { Some(heff2(&twostep_series(&series, None, a.m_max)?)?) } else { None };
    let point = |ratio: f64, heff: &crate::linalg::Mat| -> Result<GroundPoint> {
        let g = compare_ground(&h0, heff, ratio * j1)?;
        Ok(GroundPoint {
            delta_over_j: ratio,
            delta: g.delta,
            e0: g.e0,
            e_eff: g.e_eff,
            energy_error: g.energy_error,
            overlap: g.overlap,
            overlap_error: 1.0 - g.overlap,
        })
    };
    let onestep = point(a.delta_over_j, &r1.heff())?;
    let twostep = match &r2 {
        Some(r) => Some(point(a.delta_over_j, &r.heff())?),
        None => None,
    };
    let mut scan_onestep = Vec::new();
    let mut scan_twostep = Vec::new();
    for &ratio in &a.scan {
        scan_onestep.push(point(ratio, &r1.heff_at(ratio * j1))?);
        if let Some(r) = &r2 {
            scan_twostep.push(point(ratio, &r.heff_at(ratio * j1))?);
        }
    }
    let slope = |pts: &[GroundPoint]| {
        loglog_slope(&pts.iter().map(|p| p.delta_over_j).collect::<Vec<_>>(), &pts.iter().map(|p| p.energy_error).collect::<Vec<_>>())
    };
    Ok(FloquetResult {
        n: a.n,
        n_exc,
        dim: sector.dim(),
        j1,
        total_intensity: sol.total_intensity,
        slope_onestep: slope(&scan_onestep),
        slope_twostep: slope(&scan_twostep),
        onestep,
        twostep,
        heff1: r1.summary(),
        heff2: r2.map(|r| r.summary()),
        scan_onestep,
        scan_twostep,
    })
}

pub(super) fn floquet_compare(a: &FloquetArgs, art: &mut Artifacts) -> Result<(bool, String)> {
    let r = compute_floquet(a)?;
    art.stage("compare");
    art.json("comparison.json", &r)?;
    if !r.scan_onestep.is_empty() {
        let rows: Vec<Vec<Cell>> = r
            .scan_onestep
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let mut row: Vec<Cell> = vec![p.delta_over_j.into(), p.energy_error.into(), p.overlap_error.into()];
                if let Some(q) = r.scan_twostep.get(i) {
                    row.extend([q.energy_error.into(), q.overlap_error.into()]);
                }
                row
            })
            .collect();
        let header: &[&str] = if r.scan_twostep.is_empty() {
            &["delta_over_j", "energy_error_1", "overlap_error_1"]
        } else {
            &["delta_over_j", "energy_error_1", "overlap_error_1", "energy_error_2", "overlap_error_2"]
        };
        write_table(&art.file("scan.csv"), header, &rows)?;
    }
    let mut s = format!(
        "N={} delta/J1={}: one-step energy error {:.3e}, overlap error {:.3e}",
        r.n, r.onestep.delta_over_j, r.onestep.energy_error, r.onestep.overlap_error
    );
    if let Some(t) = &r.twostep {
        s += &format!("; two-step {:.3e}, {:.3e}", t.energy_error, t.overlap_error);
    }
    Ok((true, s))
}

// ---------------------------------------------------------------- trotter

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZzRoute {
    /// ZZ applied directly as a diagonal operator in the sector.
    Diagonal,
    /// ZZ generated from an XX segment conjugated by `R_y(π/2)`, full space.
    Rotated,
}

#[derive(Clone, Debug, Parser, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct TrotterArgs {
    #[arg(long, default_value_t = 6)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub j: f64,
    /// Power-law exponent; nearest neighbour when absent.
    #[arg(long)]
    pub eta: Option<f64>,
    /// `Jxy = J sin θ`, `Jz = J cos θ`.
    #[arg(long, default_value_t = FRAC_PI_4)]
    pub theta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, value_delimiter = ',', default_values_t = [8, 16, 32, 64])]
    pub steps: Vec<usize>,
    #[arg(long, value_enum, default_value_t = ZzRoute::Diagonal)]
    pub route: ZzRoute,
    #[arg(long)]
    pub n_exc: Option<usize>,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrotterRow {
    pub t: f64,
    pub n_t: usize,
    pub error: f64,
    pub bound: f64,
    pub scaling: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrotterResult {
    pub n: usize,
    pub dim: usize,
    pub route: ZzRoute,
    pub range_factor: f64,
    pub j_max: f64,
    pub rows: Vec<TrotterRow>,
    /// `error(N_t) / error(2 N_t)` for consecutive rows.
    pub ratios: Vec<f64>,
    pub within_bound: bool,
}

pub fn compute_trotter(a: &TrotterArgs) -> Result<TrotterResult> {
    need(a.n >= 2 && a.n <= 12, || format!("trotter supports 2 <= n <= 12, got {}", a.n))?;
    need(!a.steps.is_empty() && a.steps.iter().all(|&s| s >= 1), || "steps must be positive".into())?;
    let lat = build_chain(a.n, 1.0)?;
    let range = a.eta.map(Range::Power).unwrap_or(Range::NearestNeighbour);
    let (jxy, jz) = xxz_eta_target(&lat, a.j, range, a.theta);
    // Jxy (XX + YY) = 2 Jxy (σ+σ− + σ−σ+)
    let jxy2 = jxy.scaled(2.0);
    let (hxy, zz) = match a.route {
        ZzRoute::Diagonal => {
            let sector = build_sector(a.n, a.n_exc.unwrap_or(a.n / 2))?;
            (build_xy(&jxy2, &sector)?, ZzGenerator::Diagonal(build_zz(&jz, &sector)?))
        }
        ZzRoute::Rotated => {
            need(a.n <= 10, || "the rotated route works in the full space; n <= 10".into())?;
            let full = build_full(a.n)?;
            let gen = pauli_coupling(&jz, sigma_x(), sigma_x(), &full);
            (build_xy(&jxy2, &full)?, ZzGenerator::Rotated { generator: gen, rotation: Rotation::y(FRAC_PI_2) })
        }
    };
    let w = range_profile(&lat, a.j, range);
    let cmp = trotter_compare(&hxy, &zz, &w, a.t, &a.steps, a.n)?;
    let rows: Vec<TrotterRow> = cmp
        .iter()
        .map(|r| TrotterRow { t: r.t, n_t: r.n_t, error: r.error, bound: r.bound.exact, scaling: r.bound.scaling })
        .collect();
    let ratios = rows.windows(2).map(|w| w[0].error / w[1].error).collect();
    let within_bound = rows.iter().all(|r| r.error <= r.bound);
    let (range_factor, j_max) = cmp.first().map(|r| (r.bound.range_factor, r.bound.j)).unwrap_or((0.0, 0.0));
    Ok(TrotterResult { n: a.n, dim: hxy.dim(), route: a.route, range_factor, j_max, rows, ratios, within_bound })
}

pub(super) fn trotter(a: &TrotterArgs, art: &mut Artifacts) -> Result<(bool, String)> {
    let r = compute_trotter(a)?;
    art.stage("trotter");
    let rows: Vec<Vec<Cell>> =
        r.rows.iter().map(|x| vec![x.t.into(), x.n_t.into(), x.error.into(), x.bound.into(), x.scaling.into()]).collect();
    write_table(&art.file("trotter.csv"), &["t", "n_t", "error", "bound", "scaling"], &rows)?;
    art.json("trotter.json", &r)?;
    let s = format!("N={} dim {}: errors {:?}, within bound: {}", r.n, r.dim, r.rows.iter().map(|x| format!("{:.3e}", x.error)).collect::<Vec<_>>(), r.within_bound);
    Ok((r.within_bound, s))
}

// ---------------------------------------------------------------- bands

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BandModel {
    ChiralFlux,
    Brickwall,
}

#[derive(Clone, Debug, Parser, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct BandsArgs {
    #[arg(long, value_enum, default_value_t = BandModel::ChiralFlux)]
    pub model: BandModel,
    /// `t3 = t1/(4√6)` on top of the chiral-flux defaults.
    #[arg(long)]
    pub flat: bool,
    #[arg(long, default_value_t = 1.0)]
    pub t1: f64,
    #[arg(long)]
    pub t2: Option<f64>,
    #[arg(long)]
    pub t3: Option<f64>,
    #[arg(long)]
    pub phi: Option<f64>,
    /// Staggered on-site energy.
    #[arg(long, default_value_t = 0.0)]
    pub mass: f64,
    #[arg(long, default_value_t = 64)]
    pub grid: usize,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BandsResult {
    pub report: BandReport,
    /// Chern numbers on the doubled grid.
    pub chern_refined: Option<ChernReport>,
    /// Max deviation from the closed-form dispersion, when it applies.
    pub closed_form_error: Option<f64>,
}

pub fn band_model(a: &BandsArgs) -> BlochModel {
    let m = match a.model {
        BandModel::ChiralFlux => {
            let (t1, t2, t3, phi) = chiral_params(a.t1, a.t2, a.t3, a.phi, a.flat);
            BlochModel::chiral_flux(t1, t2, t3, phi)
        }
        BandModel::Brickwall => {
            let (t2d, phid) = brickwall_defaults(a.t1);
            BlochModel::brickwall(a.t1, a.t2.unwrap_or(t2d), a.phi.unwrap_or(phid))
        }
    };
    m.with_mass(a.mass)
}

pub fn compute_bands(a: &BandsArgs) -> Result<BandsResult> {
    let model = band_model(a);
    let report = band_report(&model, a.grid)?;
    let chern_refined = if report.chern.is_some() { Some(chern(&model, 2 * a.grid)?) } else { None };
    let closed_form_error = match model.params {
        Some(crate::bands::ModelParams::ChiralFlux { t1, t2, t3, phi })
            if t3 == 0.0 && (t2 - t1 / 2f64.sqrt()).abs() < 1e-14 && (phi - FRAC_PI_4).abs() < 1e-14 && a.mass == 0.0 =>
        {
            let worst = band_grid(&model, a.grid).iter().fold(0.0f64, |w, p| {
                let e = chiral_flux_closed_form(t1, [p.k1, p.k2]);
                w.max((p.upper - e).abs()).max((p.lower + e).abs())
            });
            Some(worst)
        }
        _ => None,
    };
    Ok(BandsResult { report, chern_refined, closed_form_error })
}

pub(super) fn bands(a: &BandsArgs, art: &mut Artifacts) -> Result<(bool, String)> {
    let model = band_model(a);
    let r = compute_bands(a)?;
    art.stage("bands");
    write_bands_csv(&art.file("bands.csv"), &band_grid(&model, a.grid))?;
    art.json("report.json", &r)?;
    let f = &r.report.flatness;
    let chern = r.report.chern.map(|c| format!("{:?}", c.chern)).unwrap_or_else(|| "n/a (gap closes)".into());
    Ok((true, format!("bandwidth {:.6}, gap {:.6}, ratio {:?}, Chern {chern}", f.bandwidth, f.gap, f.ratio)))
}

// ---------------------------------------------------------------- phase-scan

#[derive(Clone, Debug, Parser, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct PhaseArgs {
    /// Side of the square cluster.
    #[arg(long, default_value_t = 4)]
    pub side: usize,
    /// Power-law exponent; nearest neighbour when absent.
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub j: f64,
    /// Angles over `[−π/2, π/2]`.
    #[arg(long, default_value_t = 41)]
    pub theta_points: usize,
    #[arg(long, default_value_t = 61)]
    pub b_points: usize,
    #[arg(long, default_value_t = 3.0)]
    pub b_max: f64,
    #[arg(long, default_value_t = 8)]
    pub n_exc_max: usize,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PhaseSummary {
    pub n_sites: usize,
    pub range: Range,
    pub theta_range: [f64; 2],
    pub theta_points: usize,
    pub b_range: [f64; 2],
    pub b_points: usize,
    pub n_exc_max: usize,
    pub asymmetry: f64,
    pub symmetry_error: f64,
    /// Max gap between the classical enumeration and the Lanczos sector
    /// minima at `θ = 0`.
    pub classical_mismatch: f64,
}

pub(super) fn phase_scan(a: &PhaseArgs, art: &mut Artifacts) -> Result<(bool, String)> {
    let (scan, stair, summary) = compute_phase(a)?;
    art.stage("scan");
    scan.write_csv(&art.file("scan.csv"))?;
    art.json("staircase.json", &stair)?;
    art.json("summary.json", &summary)?;
    Ok((
        true,
        format!(
            "{} sites, {:?}: asymmetry {:.4}, mirror error {:.1e}, {} plateaus",
            summary.n_sites,
            summary.range,
            summary.asymmetry,
            summary.symmetry_error,
            stair.plateaus.len()
        ),
    ))
}

pub fn compute_phase(a: &PhaseArgs) -> Result<(crate::phases::PhaseScan, Staircase, PhaseSummary)> {
    need(a.side >= 2 && a.side * a.side <= 24, || format!("side must give 4..24 sites, got {}", a.side))?;
    need(a.theta_points >= 2 && a.b_points >= 1 && a.b_max >= 0.0, || "grids need >= 2 angles, >= 1 field, b-max >= 0".into())?;
    let lat = build_square(a.side, a.side, 1.0, GOLDEN)?;
    let range = a.eta.map(Range::Power).unwrap_or(Range::NearestNeighbour);
    let thetas = symmetric_angles(FRAC_PI_2, a.theta_points);
    let fields = linspace(0.0, a.b_max, a.b_points);
    let scan = magnetization_scan(&lat, a.j, range, &thetas, &fields, a.n_exc_max)?;
    let lanczos0 = match thetas.iter().position(|t| *t == 0.0) {
        Some(i) => scan.energies[i].clone(),
        None => sector_energies(&lat, a.j, range, &[0.0], a.n_exc_max)?.remove(0),
    };
    let stair = staircase_cut(&lat, a.j, range, 0.0, a.b_max, a.n_exc_max)?;
    // diagonal θ = 0 operator is J cos 0 Σ w σzσz; enumeration gives the same
    let mismatch = stair.sector_minima.iter().zip(&lanczos0).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let summary = PhaseSummary {
        n_sites: lat.len(),
        range,
        theta_range: [-FRAC_PI_2, FRAC_PI_2],
        theta_points: a.theta_points,
        b_range: [0.0, a.b_max],
        b_points: a.b_points,
        n_exc_max: a.n_exc_max,
        asymmetry: scan.asymmetry()?,
        symmetry_error: scan.symmetry_error()?,
        classical_mismatch: mismatch,
    };
    Ok((scan, stair, summary))
}

// ---------------------------------------------------------------- verify

#[derive(Clone, Debug, Parser, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct VerifyArgs {
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

pub(super) fn verify(_a: &VerifyArgs, art: &mut Artifacts) -> Result<(bool, String)> {
    let r: VerifyReport = run_verify()?;
    art.stage("verify");
    art.json("verify.json", &r)?;
    let failed: Vec<String> = r.failures().map(|c| format!("{}{}", c.name, if c.informational { " (informational)" } else { "" })).collect();
    let mut s = format!("{} checks, all required passed: {}", r.checks.len(), r.all_passed());
    for f in failed {
        s += &format!("\n  failed: {f}");
    }
    Ok((r.all_passed(), s))
}
