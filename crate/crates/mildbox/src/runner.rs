//! Orchestration: turn a manifest into a full artifact directory (solve,
//! diagnostics, norm reports, snapshots), plus the focused entry points
//! behind the CLI subcommands. All artifact files are deterministic given
//! the manifest and seed; wall-clock information goes to a separate log.

use crate::balls::BallFamily;
use crate::diagnostics::{
    self, check_l1_contraction, check_mass_conservation, check_nonnegativity,
    decay_weight_series, ConservationSeries,
};
use crate::field::{ScalarField, VectorField};
use crate::grid::Grid;
use crate::manifest::{FieldSource, RunManifest, SystemKind};
use crate::norms::{self, CaloricMesh};
use crate::report::NormReport;
use crate::snapshot;
use crate::solver::{
    self, smallness_report, solve_cns_picard, solve_dcns_picard, PicardGuess, PicardTrace,
    SolutionState, Trajectory,
};
use crate::{Error, Result};
use serde::Serialize;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

/// Seed offsets so each component draws an independent stream.
const SEED_C: u64 = 0x631;
const SEED_N: u64 = 0x632;
const SEED_U: u64 = 0x633;
const SEED_V: u64 = 0x634;
const SEED_F: u64 = 0x635;

pub fn scalar_from_source(src: &FieldSource, grid: &Grid, seed: u64) -> Result<ScalarField> {
    match src {
        FieldSource::Preset(p) => p.scalar_field(grid, seed),
        FieldSource::Snapshot { snapshot } => {
            let f = snapshot::read_scalar(snapshot)?;
            if f.grid() != grid {
                return Err(Error::Config(format!(
                    "snapshot {} grid does not match the manifest",
                    snapshot.display()
                )));
            }
            Ok(f)
        }
    }
}

pub fn vector_from_source(src: &FieldSource, grid: &Grid, seed: u64) -> Result<VectorField> {
    match src {
        FieldSource::Preset(p) => p.vector_field(grid, seed),
        FieldSource::Snapshot { snapshot } => {
            let v = snapshot::read_vector(snapshot)?;
            if v.grid() != grid {
                return Err(Error::Config(format!(
                    "snapshot {} grid does not match the manifest",
                    snapshot.display()
                )));
            }
            Ok(v)
        }
    }
}

/// Build the initial state and solver configuration from a manifest.
pub fn prepare(manifest: &RunManifest) -> Result<(Grid, SolutionState, crate::solver::SolverConfig)> {
    let grid = Grid::new(manifest.dim, manifest.box_length, manifest.grid)?;
    let c = scalar_from_source(&manifest.initial.c, &grid, manifest.seed ^ SEED_C)?;
    let n = scalar_from_source(&manifest.initial.n, &grid, manifest.seed ^ SEED_N)?;
    let u = vector_from_source(&manifest.initial.u, &grid, manifest.seed ^ SEED_U)?;
    let mut state = SolutionState::new(c, n, u);
    if let Some(vsrc) = &manifest.initial.v {
        state = state.with_attractant(scalar_from_source(vsrc, &grid, manifest.seed ^ SEED_V)?);
    }
    let mut cfg = manifest.solver_config();
    if let Some(fsrc) = &manifest.forcing {
        let forcing = vector_from_source(fsrc, &grid, manifest.seed ^ SEED_F)?;
        match manifest.system {
            SystemKind::Cns => cfg.grad_phi = Some(forcing),
            SystemKind::Dcns => cfg.psi = Some(forcing),
        }
    }
    Ok((grid, state, cfg))
}

#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub converged: bool,
    pub diverged: bool,
    pub iterations: usize,
    pub final_diff: Option<f64>,
    pub mass_pass: bool,
    pub nonnegativity_pass: Option<bool>,
    pub l1_pass: bool,
    pub decay_pass: bool,
    pub smallness_total: f64,
    pub smallness_within: bool,
    /// Conjunction of every applicable verdict.
    pub all_pass: bool,
}

fn write_trace_csv(path: &Path, trace: &PicardTrace) -> Result<()> {
    let mut out = String::from("iter,diff,ratio\n");
    for (i, d) in trace.diffs.iter().enumerate() {
        let ratio = if i == 0 {
            String::new()
        } else {
            format!("{}", trace.ratios[i - 1])
        };
        let _ = writeln!(out, "{},{},{}", i + 1, d, ratio);
    }
    fs::write(path, out)?;
    Ok(())
}

fn write_conservation_csv(path: &Path, series: &ConservationSeries) -> Result<()> {
    let mut out = String::from("time,mass,l1_n,min_n,max_n,min_c,max_c\n");
    for k in 0..series.times.len() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            series.times[k],
            series.mass[k],
            series.l1_n[k],
            series.min_n[k],
            series.max_n[k],
            series.min_c[k],
            series.max_c[k]
        );
    }
    fs::write(path, out)?;
    Ok(())
}

fn write_decay_csv(path: &Path, decay: &diagnostics::DecayReport) -> Result<()> {
    let mut out = String::from("time,n_weighted,u_weighted,grad_c_weighted\n");
    for k in 0..decay.times.len() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            decay.times[k], decay.n_weighted[k], decay.u_weighted[k], decay.grad_c_weighted[k]
        );
    }
    fs::write(path, out)?;
    Ok(())
}

fn json_to(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Config(format!("encode {}: {e}", path.display())))?;
    fs::write(path, text)?;
    Ok(())
}

/// Norm report of a solved trajectory plus the smallness report of its
/// data.
fn trajectory_norms(
    state: &SolutionState,
    traj: &Trajectory,
    cfg: &crate::solver::SolverConfig,
) -> Result<NormReport> {
    let grid = traj.grid().clone();
    let balls = BallFamily::dyadic(&grid, cfg.ball_stride)?;
    let mut report = NormReport::new();
    report.family_info(&balls);
    report.insert("path.x1_c", norms::path_norm_x1(&traj.c, cfg.horizon, &balls)?);
    report.insert("path.x2_n", norms::path_norm_x2(&traj.n, cfg.horizon, &balls)?);
    report.insert("path.x3_u", norms::path_norm_x3(&traj.u, cfg.horizon, &balls)?);
    if let Some(v) = &traj.v {
        report.insert("path.x1_v", norms::path_norm_x1(v, cfg.horizon, &balls)?);
    }
    let small = smallness_report(state, cfg, &balls)?;
    report.insert("data.c_sup", small.c_sup);
    report.insert("data.n_critical", small.n_critical);
    report.insert("data.u_critical", small.u_critical);
    report.insert("data.forcing_morrey", small.forcing_morrey);
    report.insert("data.total", small.total);
    Ok(report)
}

/// Execute a manifest end to end, writing every artifact into `out_dir`.
pub fn run(manifest: &RunManifest, out_dir: &Path) -> Result<RunSummary> {
    let (_, state, cfg) = prepare(manifest)?;
    fs::create_dir_all(out_dir)?;
    fs::write(out_dir.join("manifest.toml"), manifest.to_toml()?)?;

    let started = std::time::SystemTime::now();
    let (traj, trace) = match manifest.system {
        SystemKind::Cns => solve_cns_picard(&state, &cfg)?,
        SystemKind::Dcns => solve_dcns_picard(&state, &cfg)?,
    };

    write_trace_csv(&out_dir.join("picard_trace.csv"), &trace)?;
    let (series, mass) = check_mass_conservation(&traj)?;
    write_conservation_csv(&out_dir.join("conservation.csv"), &series)?;
    let nonneg = check_nonnegativity(&traj)?;
    let l1 = check_l1_contraction(&traj)?;
    let decay = decay_weight_series(&traj)?;
    write_decay_csv(&out_dir.join("decay_weights.csv"), &decay)?;

    let balls = BallFamily::dyadic(traj.grid(), cfg.ball_stride)?;
    let small = smallness_report(&state, &cfg, &balls)?;
    let norm_report = trajectory_norms(&state, &traj, &cfg)?;
    norm_report.write_text(&out_dir.join("norms.txt"))?;
    norm_report.write_json(&out_dir.join("norms.json"))?;

    snapshot::write_trajectory(&out_dir.join("trajectory"), &traj)?;

    let all_pass =
        mass.pass && nonneg.pass.unwrap_or(true) && l1.pass && decay.pass && !trace.diverged;
    let summary = RunSummary {
        converged: trace.converged,
        diverged: trace.diverged,
        iterations: trace.diffs.len(),
        final_diff: trace.diffs.last().copied(),
        mass_pass: mass.pass,
        nonnegativity_pass: nonneg.pass,
        l1_pass: l1.pass,
        decay_pass: decay.pass,
        smallness_total: small.total,
        smallness_within: small.within,
        all_pass,
    };
    json_to(&out_dir.join("verdicts.json"), &serde_json::json!({
        "summary": &summary,
        "mass": mass,
        "nonnegativity": nonneg,
        "l1": l1,
        "decay": decay,
        "smallness": {
            "c_sup": small.c_sup,
            "n_critical": small.n_critical,
            "u_critical": small.u_critical,
            "forcing_morrey": small.forcing_morrey,
            "total": small.total,
            "epsilon": small.epsilon,
            "within": small.within,
        },
    }))?;
    // Wall-clock info lives outside the deterministic artifact set.
    let elapsed = started.elapsed().unwrap_or_default();
    fs::write(
        out_dir.join("run.log"),
        format!("elapsed_seconds = {}\n", elapsed.as_secs_f64()),
    )?;
    Ok(summary)
}

/// Diagnostics over an existing trajectory directory (`verify` subcommand).
pub fn verify(traj_dir: &Path, out_dir: &Path) -> Result<RunSummary> {
    let traj = snapshot::read_trajectory(traj_dir)?;
    fs::create_dir_all(out_dir)?;
    let (series, mass) = check_mass_conservation(&traj)?;
    write_conservation_csv(&out_dir.join("conservation.csv"), &series)?;
    let nonneg = check_nonnegativity(&traj)?;
    let l1 = check_l1_contraction(&traj)?;
    let decay = decay_weight_series(&traj)?;
    write_decay_csv(&out_dir.join("decay_weights.csv"), &decay)?;
    let all_pass = mass.pass && nonneg.pass.unwrap_or(true) && l1.pass && decay.pass;
    let summary = RunSummary {
        converged: true,
        diverged: false,
        iterations: 0,
        final_diff: None,
        mass_pass: mass.pass,
        nonnegativity_pass: nonneg.pass,
        l1_pass: l1.pass,
        decay_pass: decay.pass,
        smallness_total: f64::NAN,
        smallness_within: false,
        all_pass,
    };
    json_to(&out_dir.join("verdicts.json"), &serde_json::json!({
        "summary": &summary,
        "mass": mass,
        "nonnegativity": nonneg,
        "l1": l1,
        "decay": decay,
    }))?;
    Ok(summary)
}

/// Standard norm battery over a scalar snapshot (`norms` subcommand).
/// `selection` filters by id prefix when nonempty.
pub fn norms_on_scalar(
    f: &ScalarField,
    stride: usize,
    selection: &[String],
) -> Result<NormReport> {
    let grid = f.grid().clone();
    let dim = grid.dim() as f64;
    let balls = BallFamily::dyadic(&grid, stride)?;
    let mesh = CaloricMesh::standard(&balls);
    let mut report = NormReport::new();
    report.family_info(&balls);
    let wanted = |id: &str| selection.is_empty() || selection.iter().any(|s| id.starts_with(s));
    if wanted("sup") {
        report.insert("sup", f.sup_norm());
    }
    if wanted("l2") {
        report.insert("l2", f.l2_norm());
    }
    if wanted("morrey") {
        report.insert_scan(
            "morrey_2_nm2",
            &norms::morrey_norm(f, 2.0, dim - 2.0, &balls)?,
        );
    }
    if wanted("campanato") {
        report.insert_scan(
            "campanato_2_nm2",
            &norms::campanato_seminorm(f, 2.0, dim - 2.0, &balls)?,
        );
    }
    if wanted("carleson") {
        report.insert_scan(
            "carleson_caloric_lambda2",
            &norms::carleson_caloric_norm(f, 2.0, &balls, &mesh)?,
        );
        report.insert_scan(
            "carleson_caloric_lambda0",
            &norms::carleson_caloric_norm(f, 0.0, &balls, &mesh)?,
        );
    }
    if wanted("bmo") {
        report.insert_scan("bmo_caloric", &norms::bmo_caloric_seminorm(f, &balls, &mesh)?);
    }
    if wanted("besov") {
        report.insert("besov_inf_inf_m2", norms::besov_inf_caloric(f, -2.0, &mesh)?);
        let bank = crate::lp::LpBank::new(&grid)?;
        report.insert(
            "besov_morrey_m05_2_0_inf",
            norms::besov_morrey_norm(f, -0.5, 2.0, 0.0, f64::INFINITY, &bank, &balls)?,
        );
    }
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingOutcome {
    pub report: diagnostics::ScalingReport,
    pub threshold: f64,
    pub pass: bool,
}

/// Scaling-covariance study from a manifest (`scaling-test` subcommand).
pub fn scaling_test(manifest: &RunManifest, out_dir: &Path, threshold: f64) -> Result<ScalingOutcome> {
    if manifest.system != SystemKind::Cns {
        return Err(Error::Config("scaling test runs the cns system".into()));
    }
    let (_, state, cfg) = prepare(manifest)?;
    let report = diagnostics::scaling_covariance_test(&state, &cfg)?;
    fs::create_dir_all(out_dir)?;
    let outcome = ScalingOutcome {
        pass: report.max_discrepancy <= threshold,
        report,
        threshold,
    };
    json_to(&out_dir.join("scaling.json"), &outcome)?;
    Ok(outcome)
}

#[derive(Clone, Debug, Serialize)]
pub struct UniquenessOutcome {
    pub limit_distance: Option<f64>,
    pub threshold: f64,
    /// None when either run did not converge (outside the contraction
    /// regime: flagged, not asserted).
    pub pass: Option<bool>,
    pub shrinking_norms: Vec<(f64, f64)>,
}

/// Two-guess uniqueness probe (`uniqueness-test` subcommand).
pub fn uniqueness_test(
    manifest: &RunManifest,
    out_dir: &Path,
    threshold: f64,
) -> Result<UniquenessOutcome> {
    let (_, state, cfg) = prepare(manifest)?;
    let report = solver::uniqueness_probe(&state, &cfg, PicardGuess::Caloric, PicardGuess::Zero)?;
    fs::create_dir_all(out_dir)?;
    let outcome = UniquenessOutcome {
        limit_distance: report.limit_distance,
        threshold,
        pass: report.limit_distance.map(|d| d <= threshold),
        shrinking_norms: report.shrinking_norms.clone(),
    };
    json_to(&out_dir.join("uniqueness.json"), &outcome)?;
    Ok(outcome)
}

/// Embedding-ratio suite (`embedding-suite` subcommand).
pub fn embedding_suite_cmd(
    dim: usize,
    grid_points: usize,
    samples: usize,
    seed: u64,
    stride: usize,
    out_dir: &Path,
) -> Result<diagnostics::EmbeddingReport> {
    let grid = Grid::new(dim, 2.0 * std::f64::consts::PI, grid_points)?;
    let report = diagnostics::embedding_suite(samples, seed, &grid, stride)?;
    fs::create_dir_all(out_dir)?;
    json_to(&out_dir.join("embeddings.json"), &report)?;
    Ok(report)
}

/// Amplitude sweep of the first contraction ratio (`sweep` subcommand).
pub fn amplitude_sweep(
    manifest: &RunManifest,
    out_dir: &Path,
    scales: &[f64],
) -> Result<PathBuf> {
    let (_, state, cfg) = prepare(manifest)?;
    fs::create_dir_all(out_dir)?;
    let mut csv = String::from("amplitude_scale,first_diff,first_ratio,converged\n");
    for &s in scales {
        let scaled = state.scale(s);
        let (_, trace) = match manifest.system {
            SystemKind::Cns => solve_cns_picard(&scaled, &cfg)?,
            SystemKind::Dcns => solve_dcns_picard(&scaled, &cfg)?,
        };
        let first_diff = trace.diffs.first().copied().unwrap_or(f64::NAN);
        let first_ratio = trace.ratios.first().copied().unwrap_or(f64::NAN);
        let _ = writeln!(csv, "{s},{first_diff},{first_ratio},{}", trace.converged);
    }
    let path = out_dir.join("sweep.csv");
    fs::write(&path, csv)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_manifest() -> RunManifest {
        RunManifest::from_toml(
            r#"
system = "cns"
dim = 2
grid = 16
horizon = 0.2
time_panels = 8
seed = 3
picard_tol = 1e-8

[initial.c]
kind = "gaussian_blob"
amplitude = 0.05
width = 1.0

[initial.n]
kind = "gaussian_blob"
amplitude = 0.01
width = 1.0

[initial.u]
kind = "taylor_green"
amplitude = 0.005
"#,
        )
        .unwrap()
    }

    #[test]
    fn run_writes_all_artifacts_and_passes() {
        let dir = std::env::temp_dir().join("mildbox_runner_test");
        let _ = fs::remove_dir_all(&dir);
        let m = small_manifest();
        let summary = run(&m, &dir).unwrap();
        assert!(summary.converged);
        assert!(summary.mass_pass, "mass verdict failed");
        assert_eq!(summary.nonnegativity_pass, Some(true));
        assert!(summary.all_pass);
        for file in [
            "manifest.toml",
            "picard_trace.csv",
            "conservation.csv",
            "decay_weights.csv",
            "norms.txt",
            "norms.json",
            "verdicts.json",
        ] {
            assert!(dir.join(file).exists(), "{file} missing");
        }
        assert!(dir.join("trajectory/trajectory.json").exists());

        // verify on the stored trajectory reproduces the verdicts.
        let vdir = dir.join("verify");
        let vs = verify(&dir.join("trajectory"), &vdir).unwrap();
        assert!(vs.mass_pass && vs.l1_pass);
    }

    #[test]
    fn reruns_are_byte_identical() {
        let dir_a = std::env::temp_dir().join("mildbox_repro_a");
        let dir_b = std::env::temp_dir().join("mildbox_repro_b");
        let _ = fs::remove_dir_all(&dir_a);
        let _ = fs::remove_dir_all(&dir_b);
        let m = small_manifest();
        run(&m, &dir_a).unwrap();
        run(&m, &dir_b).unwrap();
        for file in ["picard_trace.csv", "conservation.csv", "norms.json", "verdicts.json"] {
            let a = fs::read(dir_a.join(file)).unwrap();
            let b = fs::read(dir_b.join(file)).unwrap();
            assert_eq!(a, b, "{file} differs between reruns");
        }
    }

    #[test]
    fn zero_data_manifest_passes_trivially() {
        let dir = std::env::temp_dir().join("mildbox_runner_zero");
        let _ = fs::remove_dir_all(&dir);
        let mut m = small_manifest();
        m.initial.c = FieldSource::Preset(crate::presets::DataPreset::GaussianBlob { amplitude: 0.0, width: 1.0 });
        m.initial.n = FieldSource::Preset(crate::presets::DataPreset::GaussianBlob { amplitude: 0.0, width: 1.0 });
        m.initial.u = FieldSource::Preset(crate::presets::DataPreset::TaylorGreen { amplitude: 0.0 });
        let summary = run(&m, &dir).unwrap();
        assert!(summary.all_pass);
        assert!(summary.smallness_total == 0.0);
    }
}
