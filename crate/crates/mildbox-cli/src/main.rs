//! Command line front end: manifest-driven runs, norm evaluation, and the
//! diagnostic subcommands.
//!
//! Exit codes: 0 pass, 1 verdict failure, 2 config error, 3 numerical
//! failure.

use clap::{Args, Parser, Subcommand};
use mildbox::manifest::RunManifest;
use mildbox::{runner, snapshot, Error};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "mildbox", about = "Periodic-box spectral laboratory for chemotaxis-fluid mild solutions", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ManifestArgs {
    /// Run manifest (TOML).
    #[arg(long)]
    manifest: PathBuf,
    /// Output directory for artifacts.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the manifest seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the points per axis.
    #[arg(long)]
    grid: Option<usize>,
    /// Override the dimension (2 or 3).
    #[arg(long)]
    dim: Option<usize>,
}

impl ManifestArgs {
    fn load(&self) -> anyhow::Result<RunManifest> {
        let mut m = RunManifest::from_path(&self.manifest)?;
        if let Some(seed) = self.seed {
            m.seed = seed;
        }
        if let Some(grid) = self.grid {
            m.grid = grid;
        }
        if let Some(dim) = self.dim {
            m.dim = dim;
        }
        m.validate()?;
        Ok(m)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve the system described by a manifest and write all artifacts.
    Solve(ManifestArgs),
    /// Evaluate the norm battery on a scalar field snapshot.
    Norms {
        /// Path to an MFLD snapshot with one component.
        #[arg(long)]
        field: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Center stride of the ball family (controls scan density).
        #[arg(long, default_value_t = 4)]
        stride: usize,
        /// Norm id prefixes to evaluate (default: all).
        #[arg(long)]
        select: Vec<String>,
    },
    /// Diagnostics over a previously written trajectory directory.
    Verify {
        #[arg(long)]
        trajectory: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Parabolic rescaling covariance study.
    ScalingTest {
        #[command(flatten)]
        manifest: ManifestArgs,
        /// Acceptable relative discrepancy.
        #[arg(long, default_value_t = 0.01)]
        threshold: f64,
    },
    /// Two-guess uniqueness probe.
    UniquenessTest {
        #[command(flatten)]
        manifest: ManifestArgs,
        /// Acceptable sup distance of the two limits.
        #[arg(long, default_value_t = 1e-8)]
        threshold: f64,
    },
    /// Embedding-ratio suite over random fields.
    EmbeddingSuite {
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[arg(long, default_value_t = 32)]
        grid: usize,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        stride: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Amplitude sweep of the first contraction ratio.
    Sweep {
        #[command(flatten)]
        manifest: ManifestArgs,
        /// Amplitude scale factors, e.g. --scales 1.0,0.5,0.25
        #[arg(long, value_delimiter = ',', default_values_t = [1.0, 0.5, 0.25, 0.125])]
        scales: Vec<f64>,
    },
}

/// Exit code semantics shared by every subcommand.
enum Outcome {
    Pass,
    VerdictFailure,
}

fn run() -> anyhow::Result<Outcome> {
    let cli = Cli::parse();
    match cli.command {
        Command::Solve(args) => {
            let manifest = args.load()?;
            let summary = runner::run(&manifest, &args.out)?;
            println!(
                "solve: converged={} iterations={} mass={} nonneg={:?} l1={} decay={}",
                summary.converged,
                summary.iterations,
                summary.mass_pass,
                summary.nonnegativity_pass,
                summary.l1_pass,
                summary.decay_pass
            );
            Ok(if summary.all_pass {
                Outcome::Pass
            } else {
                Outcome::VerdictFailure
            })
        }
        Command::Norms {
            field,
            out,
            stride,
            select,
        } => {
            let f = snapshot::read_scalar(&field)?;
            let report = runner::norms_on_scalar(&f, stride, &select)?;
            std::fs::create_dir_all(&out)?;
            report.write_text(&out.join("norms.txt"))?;
            report.write_json(&out.join("norms.json"))?;
            print!("{}", report.to_text());
            Ok(Outcome::Pass)
        }
        Command::Verify { trajectory, out } => {
            let summary = runner::verify(&trajectory, &out)?;
            println!(
                "verify: mass={} nonneg={:?} l1={} decay={}",
                summary.mass_pass, summary.nonnegativity_pass, summary.l1_pass, summary.decay_pass
            );
            Ok(if summary.all_pass {
                Outcome::Pass
            } else {
                Outcome::VerdictFailure
            })
        }
        Command::ScalingTest { manifest, threshold } => {
            let m = manifest.load()?;
            let outcome = runner::scaling_test(&m, &manifest.out, threshold)?;
            println!(
                "scaling: max discrepancy {:.3e} (threshold {:.3e})",
                outcome.report.max_discrepancy, threshold
            );
            Ok(if outcome.pass {
                Outcome::Pass
            } else {
                Outcome::VerdictFailure
            })
        }
        Command::UniquenessTest { manifest, threshold } => {
            let m = manifest.load()?;
            let outcome = runner::uniqueness_test(&m, &manifest.out, threshold)?;
            match outcome.limit_distance {
                Some(d) => println!("uniqueness: limit distance {d:.3e}"),
                None => println!("uniqueness: a run did not converge (flagged, not asserted)"),
            }
            Ok(match outcome.pass {
                Some(false) => Outcome::VerdictFailure,
                _ => Outcome::Pass,
            })
        }
        Command::EmbeddingSuite {
            dim,
            grid,
            samples,
            seed,
            stride,
            out,
        } => {
            let report = runner::embedding_suite_cmd(dim, grid, samples, seed, stride, &out)?;
            println!(
                "embeddings: bm->critical {:.3}, critical->besov {:.3}, bm->bmo {:.3} ({} samples, {} excluded)",
                report.max_ratio_bm_to_critical,
                report.max_ratio_critical_to_besov,
                report.max_ratio_bm_to_bmo,
                report.samples,
                report.excluded
            );
            let finite = report.max_ratio_bm_to_critical.is_finite()
                && report.max_ratio_critical_to_besov.is_finite()
                && report.max_ratio_bm_to_bmo.is_finite();
            Ok(if finite { Outcome::Pass } else { Outcome::VerdictFailure })
        }
        Command::Sweep { manifest, scales } => {
            let m = manifest.load()?;
            let path = runner::amplitude_sweep(&m, &manifest.out, &scales)?;
            println!("sweep written to {}", path.display());
            Ok(Outcome::Pass)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(Outcome::Pass) => ExitCode::from(0),
        Ok(Outcome::VerdictFailure) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = match err.downcast_ref::<Error>() {
                Some(Error::NonFinite(_)) => 3,
                Some(_) => 2,
                None => 2,
            };
            ExitCode::from(code)
        }
    }
}
