//! Document assembly and the three subcommand drivers.
//!
//! Every command produces the same versioned document shape — schema tag,
//! configuration echo, chart-validity report, per-point classification,
//! per-leaf audits, suite results — with the sections it does not populate
//! left empty.  Grid evaluation is dispatched to a worker pool keyed by
//! grid index, so the document is identical regardless of completion
//! order.

use std::collections::BTreeMap;
use std::fmt::Write as FmtWrite;
use std::fs;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{bail, Context};
use rayon::prelude::*;
use serde::Serialize;

use nullgeo::{
    canonical_pair_sections, classify_point, forms_at_point, load_custom, run_all, run_suite,
    shape_operator_of_constant_section, sphere_containment, theorem2_audit, validate_chart,
    ChartConfig, ContainmentRecord, DiffScalar, FormTables, FrameError, FrameTolerances, GridSpec,
    JetError, NullChart, PointRecord, SuiteResult, TheoremTwoAudit, ValidityReport,
    DEFAULT_RANK_TOL, SUITE_NAMES,
};

use crate::output::{self, OutputFormat};
use crate::{ReportArgs, SweepArgs, VerifyArgs};

/// Version tag carried by every emitted JSON document.
pub const SCHEMA: &str = "nullgeo/1";

/// Echo of one coordinate's sampling range.
#[derive(Serialize)]
struct RangeEcho {
    coord: String,
    lo: f64,
    hi: f64,
}

/// Resolved configuration echoed into the document.
#[derive(Serialize)]
struct ConfigEcho {
    command: &'static str,
    surface: String,
    n: usize,
    grid: Vec<usize>,
    ranges: Vec<RangeEcho>,
    tol_frame: f64,
    tol_verdict: f64,
    format: &'static str,
    jobs: usize,
    suite: Option<String>,
    seed: Option<u64>,
    values: Option<Vec<f64>>,
}

/// One classified grid point with its full form tables.
#[derive(Serialize)]
struct PerPoint {
    index: usize,
    verdict: String,
    tables: FormTables,
    classification: PointRecord,
}

/// One audited leaf of the screen foliation.
#[derive(Serialize)]
struct LeafRecord {
    u: f64,
    rho: f64,
    varrho: f64,
    psi: Option<f64>,
    lambda: Option<f64>,
    r2: Option<f64>,
    containment_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    containment: Option<ContainmentRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    theorem2: Option<TheoremTwoAudit>,
}

/// The versioned output document shared by all commands.
#[derive(Serialize)]
struct Document {
    schema: &'static str,
    config: ConfigEcho,
    validity: Option<ValidityReport>,
    per_point: Vec<PerPoint>,
    per_leaf: Vec<LeafRecord>,
    suites: Vec<SuiteResult>,
}

/// Resolve `--surface` to a chart: a catalog family name or a path to a
/// JSON chart config.
fn resolve_chart(surface: &str, n: usize) -> anyhow::Result<NullChart> {
    const FAMILIES: [&str; 4] = ["cone", "hyperplane", "graph", "catenoid"];
    if FAMILIES.contains(&surface) {
        let config = ChartConfig {
            family: surface.to_string(),
            n,
            direction: None,
        };
        return Ok(config.build()?);
    }
    let path = Path::new(surface);
    if path.exists() {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading chart config {}", path.display()))?;
        return load_custom(&text)
            .with_context(|| format!("loading chart config {}", path.display()));
    }
    bail!("unknown surface '{surface}': expected one of cone, hyperplane, graph, catenoid, or a path to a chart config")
}

/// Parse `--grid AxBxC` into per-coordinate counts.
fn parse_grid(spec: &str, dims: usize) -> anyhow::Result<Vec<usize>> {
    let counts: Vec<usize> = spec
        .split('x')
        .map(|part| {
            part.parse::<usize>()
                .with_context(|| format!("grid component '{part}' is not a count"))
        })
        .collect::<anyhow::Result<_>>()?;
    if counts.len() != dims {
        bail!(
            "grid '{spec}' has {} axes, the chart has {dims} coordinates",
            counts.len()
        );
    }
    if counts.contains(&0) {
        bail!("grid '{spec}' contains a zero count");
    }
    Ok(counts)
}

/// Parse repeated `--range coord=lo:hi` flags against the chart's
/// coordinate names, starting from the full domain.
fn parse_ranges(chart: &NullChart, flags: &[String]) -> anyhow::Result<Vec<(f64, f64)>> {
    let names = chart.coord_names();
    let mut ranges: Vec<(f64, f64)> = (0..chart.coord_dim())
        .map(|i| chart.domain().interval(i))
        .collect();
    for flag in flags {
        let (coord, span) = flag
            .split_once('=')
            .with_context(|| format!("range '{flag}' is not of the form coord=lo:hi"))?;
        let (lo, hi) = span
            .split_once(':')
            .with_context(|| format!("range '{flag}' is not of the form coord=lo:hi"))?;
        let axis = names
            .iter()
            .position(|name| name == coord)
            .with_context(|| format!("unknown coordinate '{coord}' (chart has {names:?})"))?;
        let lo: f64 = lo
            .parse()
            .with_context(|| format!("range bound '{lo}' is not a number"))?;
        let hi: f64 = hi
            .parse()
            .with_context(|| format!("range bound '{hi}' is not a number"))?;
        ranges[axis] = (lo, hi);
    }
    Ok(ranges)
}

/// Echo resolved ranges next to their coordinate names.
fn echo_ranges(chart: &NullChart, ranges: &[(f64, f64)]) -> Vec<RangeEcho> {
    chart
        .coord_names()
        .iter()
        .zip(ranges)
        .map(|(name, &(lo, hi))| RangeEcho {
            coord: name.clone(),
            lo,
            hi,
        })
        .collect()
}

/// Human-readable classification verdict for one point.
fn verdict_for(rec: &PointRecord, tol: f64) -> String {
    if rec.umbilic && rec.rho.abs() <= tol {
        "totally geodesic".into()
    } else if rec.umbilic && rec.screen_umbilic {
        "totally umbilic, screen totally umbilic".into()
    } else if rec.umbilic {
        "totally umbilic".into()
    } else if rec.screen_umbilic {
        "screen totally umbilic".into()
    } else {
        "generic".into()
    }
}

/// Lift a value point to constant jets.
fn jet_point(p: &[f64]) -> Result<Vec<DiffScalar>, JetError> {
    p.iter().map(|&x| DiffScalar::constant(x, 0)).collect()
}

/// Classify and audit the leaf through `t = u0`.
///
/// The scalar columns are the classification factors at the leaf's base
/// point together with the canonical section's umbilic factor and the
/// quadric containment radius/residual.  A totally geodesic chart (both
/// shape operators zero) has every factor identically zero; when no
/// canonical normal pair exists, or the containment audit does not apply,
/// the dependent columns are left empty.
fn leaf_record(
    chart: &NullChart,
    u0: f64,
    tols: &FrameTolerances,
    tol: f64,
    with_audits: bool,
) -> anyhow::Result<LeafRecord> {
    let m = chart.coord_dim();
    let n = chart.screen_dim();
    let mut p0 = vec![u0];
    for i in 1..m {
        let (lo, hi) = chart.domain().interval(i);
        p0.push(0.5 * (lo + hi));
    }
    let point = classify_point(chart, &p0, tols, tol)?;

    let mut psi = point.psi;
    let mut lambda = None;
    let mut r2 = None;
    let mut containment_residual = None;
    let mut containment = None;

    if point.kernel_dim == 2 {
        // Both shape operators vanish identically: every normal section is
        // umbilic with factor zero and the leaf is affine.
        psi = psi.or(Some(0.0));
        lambda = Some(0.0);
        r2 = Some(0.0);
        containment_residual = Some(0.0);
    } else if let Some((vsec, _)) = canonical_pair_sections(chart, &p0, tols, DEFAULT_RANK_TOL)? {
        let coords = jet_point(&p0).map_err(FrameError::from)?;
        let (a, b) = vsec(&coords)?;
        let form = forms_at_point(chart, &p0, tols)?;
        let (av, _) = shape_operator_of_constant_section(&form, a.value(), b.value())?;
        let lam = (0..n).map(|r| av.get(r, r).value()).sum::<f64>() / n as f64;
        lambda = Some(lam);
        let record = sphere_containment(chart, u0, vsec.as_ref(), lam, &vec![3; n], tols, tol)?;
        if record.applicable {
            r2 = Some(record.r2);
            containment_residual = Some(record.quadric_residual);
        }
        if with_audits {
            containment = Some(record);
        }
    }

    let theorem2 = if with_audits {
        Some(theorem2_audit(chart, u0, &vec![2; n], tols, tol)?)
    } else {
        None
    };

    Ok(LeafRecord {
        u: u0,
        rho: point.rho,
        varrho: point.varrho,
        psi,
        lambda,
        r2,
        containment_residual,
        containment,
        theorem2,
    })
}

/// Build the worker pool for grid dispatch.
fn worker_pool(jobs: usize) -> anyhow::Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .context("building the worker pool")
}

pub fn cmd_report(args: ReportArgs) -> anyhow::Result<ExitCode> {
    let common = &args.common;
    let chart = resolve_chart(&common.surface, common.n)?;
    let tols = FrameTolerances::default();
    require_positive_tols(common.tol_frame, common.tol_verdict)?;

    let m = chart.coord_dim();
    let counts = match &args.grid.grid {
        Some(spec) => parse_grid(spec, m)?,
        None => vec![3; m],
    };
    let ranges = parse_ranges(&chart, &args.grid.range)?;
    let grid = GridSpec::new(counts.clone()).with_ranges(ranges.clone());
    let points = grid.points(chart.domain())?;

    let validity = validate_chart(&chart, &grid, &tols, common.tol_frame)?;

    let pool = worker_pool(common.jobs)?;
    let tol = common.tol_verdict;
    let per_point: Vec<PerPoint> = pool.install(|| {
        points
            .par_iter()
            .enumerate()
            .map(|(index, p)| -> Result<PerPoint, FrameError> {
                let form = forms_at_point(&chart, p, &tols)?;
                let tables = form.snapshot(p);
                let classification = classify_point(&chart, p, &tols, tol)?;
                Ok(PerPoint {
                    index,
                    verdict: verdict_for(&classification, tol),
                    tables,
                    classification,
                })
            })
            .collect::<Result<_, _>>()
    })?;

    let (lo, hi) = chart.domain().interval(0);
    let per_leaf = vec![leaf_record(&chart, 0.5 * (lo + hi), &tols, tol, true)?];

    let passed = validity.passed;
    let doc = Document {
        schema: SCHEMA,
        config: ConfigEcho {
            command: "report",
            surface: common.surface.clone(),
            n: chart.screen_dim(),
            grid: counts,
            ranges: echo_ranges(&chart, &ranges),
            tol_frame: common.tol_frame,
            tol_verdict: common.tol_verdict,
            format: common.format.as_str(),
            jobs: common.jobs,
            suite: None,
            seed: None,
            values: None,
        },
        validity: Some(validity),
        per_point,
        per_leaf,
        suites: Vec::new(),
    };
    render(&doc, common.format, common.out.as_ref(), &chart)?;
    Ok(if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    })
}

pub fn cmd_verify(args: VerifyArgs) -> anyhow::Result<ExitCode> {
    let common = &args.common;
    let chart = resolve_chart(&common.surface, common.n)?;
    let tols = FrameTolerances::default();
    require_positive_tols(common.tol_frame, common.tol_verdict)?;

    let suites = if args.suite == "all" {
        run_all(&chart, &tols, args.seed)?
    } else {
        if !SUITE_NAMES.contains(&args.suite.as_str()) {
            bail!(
                "unknown suite '{}' (available: {}, or all)",
                args.suite,
                SUITE_NAMES.join(", ")
            );
        }
        vec![run_suite(&chart, &args.suite, &tols, args.seed)?]
    };
    let passed = suites.iter().all(|s| s.passed);

    let doc = Document {
        schema: SCHEMA,
        config: ConfigEcho {
            command: "verify",
            surface: common.surface.clone(),
            n: chart.screen_dim(),
            grid: Vec::new(),
            ranges: Vec::new(),
            tol_frame: common.tol_frame,
            tol_verdict: common.tol_verdict,
            format: common.format.as_str(),
            jobs: common.jobs,
            suite: Some(args.suite.clone()),
            seed: Some(args.seed),
            values: None,
        },
        validity: None,
        per_point: Vec::new(),
        per_leaf: Vec::new(),
        suites,
    };
    render(&doc, common.format, common.out.as_ref(), &chart)?;
    Ok(if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(4)
    })
}

pub fn cmd_sweep(args: SweepArgs) -> anyhow::Result<ExitCode> {
    let common = &args.common;
    let chart = resolve_chart(&common.surface, common.n)?;
    let tols = FrameTolerances::default();
    require_positive_tols(common.tol_frame, common.tol_verdict)?;

    let (lo, hi) = chart.domain().interval(0);
    let values: Vec<f64> = match &args.values {
        Some(list) => list
            .split(',')
            .map(|part| {
                part.trim()
                    .parse::<f64>()
                    .with_context(|| format!("sweep value '{part}' is not a number"))
            })
            .collect::<anyhow::Result<_>>()?,
        None => [0.25, 0.5, 0.75]
            .iter()
            .map(|f| lo + f * (hi - lo))
            .collect(),
    };
    for &u in &values {
        if u < lo - 1e-12 || u > hi + 1e-12 {
            bail!("sweep value {u} leaves the leaf-coordinate domain [{lo}, {hi}]");
        }
    }

    let per_leaf = values
        .iter()
        .map(|&u| leaf_record(&chart, u, &tols, common.tol_verdict, false))
        .collect::<anyhow::Result<Vec<_>>>()?;

    let doc = Document {
        schema: SCHEMA,
        config: ConfigEcho {
            command: "sweep",
            surface: common.surface.clone(),
            n: chart.screen_dim(),
            grid: Vec::new(),
            ranges: Vec::new(),
            tol_frame: common.tol_frame,
            tol_verdict: common.tol_verdict,
            format: common.format.as_str(),
            jobs: common.jobs,
            suite: None,
            seed: None,
            values: Some(values),
        },
        validity: None,
        per_point: Vec::new(),
        per_leaf,
        suites: Vec::new(),
    };
    render(&doc, common.format, common.out.as_ref(), &chart)?;
    Ok(ExitCode::SUCCESS)
}

fn require_positive_tols(tol_frame: f64, tol_verdict: f64) -> anyhow::Result<()> {
    let positive = |t: f64| t.is_finite() && t > 0.0;
    if !positive(tol_frame) || !positive(tol_verdict) {
        bail!("tolerances must be positive (got --tol-frame {tol_frame}, --tol-verdict {tol_verdict})");
    }
    Ok(())
}

/// Render the document in the selected format and emit it.
fn render(
    doc: &Document,
    format: OutputFormat,
    out: Option<&std::path::PathBuf>,
    chart: &NullChart,
) -> anyhow::Result<()> {
    let content = match format {
        OutputFormat::Json => output::to_json(doc)?,
        OutputFormat::Csv => to_csv(doc, chart),
        OutputFormat::Text => to_text(doc),
    };
    output::emit(&content, out)
}

/// Flatten the document to CSV, one row per point, check, or leaf.
fn to_csv(doc: &Document, chart: &NullChart) -> String {
    match doc.config.command {
        "verify" => {
            let header = [
                "suite",
                "chart",
                "suite_passed",
                "points",
                "check",
                "check_passed",
                "worst",
                "tolerance",
            ];
            let rows: Vec<Vec<String>> = doc
                .suites
                .iter()
                .flat_map(|suite| {
                    suite.checks.iter().map(move |check| {
                        vec![
                            suite.suite.clone(),
                            suite.chart.clone(),
                            suite.passed.to_string(),
                            suite.points.to_string(),
                            check.name.clone(),
                            check.passed.to_string(),
                            output::float(check.worst),
                            output::float(check.tolerance),
                        ]
                    })
                })
                .collect();
            output::csv(&header, &rows)
        }
        "sweep" => {
            let header = [
                "u",
                "rho",
                "varrho",
                "psi",
                "lambda",
                "r2",
                "containment_residual",
            ];
            let rows: Vec<Vec<String>> = doc
                .per_leaf
                .iter()
                .map(|leaf| {
                    vec![
                        output::float(leaf.u),
                        output::float(leaf.rho),
                        output::float(leaf.varrho),
                        output::opt_float(leaf.psi),
                        output::opt_float(leaf.lambda),
                        output::opt_float(leaf.r2),
                        output::opt_float(leaf.containment_residual),
                    ]
                })
                .collect();
            output::csv(&header, &rows)
        }
        _ => {
            let mut header: Vec<&str> = vec!["index"];
            let names: Vec<String> = chart.coord_names().to_vec();
            header.extend(names.iter().map(String::as_str));
            header.extend([
                "rho",
                "varrho",
                "psi",
                "umbilic",
                "screen_umbilic",
                "screen_conformal",
                "mean_trace",
                "minimal",
                "kernel_dim",
                "first_normal_dim",
                "verdict",
            ]);
            let rows: Vec<Vec<String>> = doc
                .per_point
                .iter()
                .map(|pp| {
                    let rec = &pp.classification;
                    let mut row = vec![pp.index.to_string()];
                    row.extend(rec.point.iter().map(|&x| output::float(x)));
                    row.extend([
                        output::float(rec.rho),
                        output::float(rec.varrho),
                        output::opt_float(rec.psi),
                        rec.umbilic.to_string(),
                        rec.screen_umbilic.to_string(),
                        rec.screen_conformal
                            .map(|b| b.to_string())
                            .unwrap_or_default(),
                        output::float(rec.mean_curvature.trace),
                        rec.mean_curvature.minimal.to_string(),
                        rec.kernel_dim.to_string(),
                        rec.first_normal_dim.to_string(),
                        pp.verdict.clone(),
                    ]);
                    row
                })
                .collect();
            output::csv(&header, &rows)
        }
    }
}

/// Human-readable summary.
fn to_text(doc: &Document) -> String {
    let mut out = String::new();
    let cfg = &doc.config;
    let _ = writeln!(
        out,
        "nullgeo {} — surface '{}' (screen dimension {})",
        cfg.command, cfg.surface, cfg.n
    );
    if let Some(validity) = &doc.validity {
        let _ = writeln!(
            out,
            "frame validity: {} ({} points, max residual {:.3e}, tol {:.1e})",
            if validity.passed { "PASS" } else { "FAIL" },
            validity.points_checked,
            validity.max_residual,
            validity.tolerance
        );
    }
    if !doc.per_point.is_empty() {
        let mut verdicts: BTreeMap<&str, usize> = BTreeMap::new();
        for pp in &doc.per_point {
            *verdicts.entry(pp.verdict.as_str()).or_insert(0) += 1;
        }
        let summary: Vec<String> = verdicts
            .iter()
            .map(|(verdict, count)| format!("{verdict} x{count}"))
            .collect();
        let _ = writeln!(
            out,
            "points: {} — {}",
            doc.per_point.len(),
            summary.join(", ")
        );
    }
    for leaf in &doc.per_leaf {
        let _ = write!(
            out,
            "leaf u={:.6}: rho={:.6e} varrho={:.6e}",
            leaf.u, leaf.rho, leaf.varrho
        );
        if let Some(psi) = leaf.psi {
            let _ = write!(out, " psi={psi:.6e}");
        }
        if let Some(lambda) = leaf.lambda {
            let _ = write!(out, " lambda={lambda:.6e}");
        }
        match (leaf.r2, leaf.containment_residual) {
            (Some(r2), Some(resid)) => {
                let _ = writeln!(out, " r2={r2:.6e} residual={resid:.3e}");
            }
            _ => {
                let _ = writeln!(out, " (no quadric containment)");
            }
        }
    }
    for suite in &doc.suites {
        let worst = suite
            .checks
            .iter()
            .map(|c| c.worst)
            .fold(0.0_f64, f64::max);
        let _ = writeln!(
            out,
            "{:<18} {}  worst {:.3e}  checks {}",
            suite.suite,
            if suite.passed { "PASS" } else { "FAIL" },
            worst,
            suite.checks.len()
        );
    }
    if !doc.suites.is_empty() {
        let failed = doc.suites.iter().filter(|s| !s.passed).count();
        let _ = if failed == 0 {
            writeln!(out, "all {} suites passed", doc.suites.len())
        } else {
            writeln!(out, "{failed} of {} suites failed", doc.suites.len())
        };
    }
    out
}
