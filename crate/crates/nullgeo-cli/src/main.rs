//! Command-line interface over the null-hypersurface geometry library.
//!
//! Three subcommands cover the library's workflows:
//!
//! * `report` — classify every point of a sampling grid and audit the
//!   midpoint leaf, emitting the full form tables per point;
//! * `verify` — run named verification suites and fail the process when
//!   any check exceeds its tolerance;
//! * `sweep` — repeat the leaf audit at chosen values of the ray
//!   coordinate, one row per leaf.
//!
//! Output is deterministic: grids and tolerances are echoed into the
//! document, randomized sampling is seeded, and JSON floats use a fixed
//! 17-significant-digit format, so identical configurations produce
//! byte-identical documents.  Exit codes are CI-friendly: 0 success,
//! 2 configuration error, 3 chart degeneracy, 4 suite failure.

mod document;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nullgeo::{CatalogError, FrameError, JetError, SuiteError};
use output::OutputFormat;

#[derive(Parser)]
#[command(
    name = "nullgeo",
    version,
    about = "Reports, verification suites, and parameter sweeps over null-hypersurface charts"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify every grid point and audit the midpoint leaf.
    Report(ReportArgs),
    /// Run verification suites against the chart.
    Verify(VerifyArgs),
    /// Audit one leaf per value of the ray coordinate.
    Sweep(SweepArgs),
}

/// Options shared by every subcommand.
#[derive(Args, Clone)]
struct CommonArgs {
    /// Catalog family (cone, hyperplane, graph, catenoid) or a path to a
    /// JSON chart config.
    #[arg(long, default_value = "cone")]
    surface: String,

    /// Screen dimension for the parametric families.
    #[arg(long, default_value_t = 2)]
    n: usize,

    /// Tolerance for the frame-axiom validity gate.
    #[arg(long = "tol-frame", default_value_t = 1e-9)]
    tol_frame: f64,

    /// Tolerance for classification verdicts and leaf audits.
    #[arg(long = "tol-verdict", default_value_t = 1e-8)]
    tol_verdict: f64,

    /// Output format.
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,

    /// Write the document to this path instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Worker threads for grid evaluation (0 = one per core).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

/// Grid selection for the report command.
#[derive(Args, Clone)]
struct GridArgs {
    /// Sample counts per coordinate, e.g. 4x4x4.
    #[arg(long)]
    grid: Option<String>,

    /// Restrict one coordinate's sampling range (repeatable), e.g.
    /// --range u=1:3.
    #[arg(long, value_name = "COORD=LO:HI")]
    range: Vec<String>,
}

#[derive(Args)]
struct ReportArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Suite to run, or `all` for every suite applicable to the surface.
    #[arg(long, default_value = "all")]
    suite: String,

    /// Seed for randomized sampling inside the suites.
    #[arg(long, default_value_t = nullgeo::DEFAULT_SEED)]
    seed: u64,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Ray-coordinate values to audit, comma-separated (default:
    /// quartiles of the chart domain).
    #[arg(long)]
    values: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Report(args) => document::cmd_report(args),
        Command::Verify(args) => document::cmd_verify(args),
        Command::Sweep(args) => document::cmd_sweep(args),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            exit_code_for(&err)
        }
    }
}

/// True when a frame error reports a geometric degeneracy rather than a
/// configuration mistake.
fn frame_degeneracy(err: &FrameError) -> bool {
    matches!(
        err,
        FrameError::ChartDegeneracy { .. }
            | FrameError::FrameDegeneracy
            | FrameError::ChartAdaptation { .. }
            | FrameError::OverrideNotTangent { .. }
            | FrameError::Jet(JetError::NonFinite(_))
    )
}

/// Map an error chain to the exit-code contract.
///
/// Degeneracies discovered while computing (metric kernel not
/// one-dimensional, singular frames, non-finite jets) exit 3; everything
/// else that reaches the top is a configuration problem and exits 2.
/// Transparent wrappers delegate their source, so each library error type
/// is inspected explicitly.
fn exit_code_for(err: &anyhow::Error) -> ExitCode {
    for cause in err.chain() {
        let degenerate = if let Some(e) = cause.downcast_ref::<FrameError>() {
            frame_degeneracy(e)
        } else if let Some(e) = cause.downcast_ref::<SuiteError>() {
            match e {
                SuiteError::Frame(f) => frame_degeneracy(f),
                SuiteError::Jet(JetError::NonFinite(_)) => true,
                _ => false,
            }
        } else if let Some(e) = cause.downcast_ref::<CatalogError>() {
            matches!(e, CatalogError::Frame(f) if frame_degeneracy(f))
        } else {
            matches!(
                cause.downcast_ref::<JetError>(),
                Some(JetError::NonFinite(_))
            )
        };
        if degenerate {
            return ExitCode::from(3);
        }
    }
    ExitCode::from(2)
}
