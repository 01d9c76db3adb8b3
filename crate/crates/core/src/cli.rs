//! Command-line front end: `report`, `check`, `classify`, `decompose`, `flow`.
//!
//! Exit codes: 0 success, 1 usage error or unknown frame, 2 evaluation
//! failure, 3 the frame is not flat where flatness is required, 4 a check
//! ran to completion but something failed its tolerance.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use nalgebra::DMatrix;

use crate::algebra::{curvature_cross_check_with, ClassifyOptions};
use crate::connections::pre_one_parameter_flow;
use crate::curvature::{decomposition_report, identity_suite, IdentityStatus, SuiteTolerances};
use crate::domain::sample_points;
use crate::error::Error;
use crate::frame::{catalog_lookup, parse_frame_expr, FrameProvider};
use crate::report::Report;
use crate::tensor::{FdConfig, TensorValue};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_EVAL: i32 = 2;
pub const EXIT_NOT_FLAT: i32 = 3;
pub const EXIT_CHECK_FAILED: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "paralex", version, about = "Numerical laboratory for absolute parallelisms")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print every per-point object (frame, metric, connection, curvatures).
    Report(ReportArgs),
    /// Run the identity suite on seeded random samples.
    Check(CheckArgs),
    /// Classify the Lie algebra of a flat frame and cross-check it against curvature.
    Classify(ClassifyArgs),
    /// Compare 𝔉 − 𝒮 with the Levi-Civita curvature of the canonical metric.
    Decompose(DecomposeArgs),
    /// Integrate a pre-1-parameter path and print it as CSV.
    Flow(FlowArgs),
}

#[derive(Debug, Args)]
pub struct FrameArgs {
    /// Catalog frame name (euclidean-N, heisenberg3, affine2, quaternion3, rotor2).
    #[arg(long, required_unless_present = "frame_file", conflicts_with = "frame_file")]
    pub frame: Option<String>,
    /// Frame given as an expression file.
    #[arg(long, value_name = "PATH")]
    pub frame_file: Option<PathBuf>,
    /// Absolute finite-difference step.
    #[arg(long, value_name = "X")]
    pub fd_step: Option<f64>,
    /// Ignore analytic Jacobians and difference the frame numerically.
    #[arg(long)]
    pub finite_differences: bool,
}

#[derive(Debug, Args)]
pub struct PointArgs {
    /// Evaluation point as comma-separated coordinates; repeatable.
    #[arg(long, value_name = "CSV", allow_hyphen_values = true)]
    pub at: Vec<String>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub points: PointArgs,
    /// Number of random sample points (ignored when --at is given).
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    pub samples: u64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct JsonArgs {
    /// Write the JSON report to PATH, or to standard output without a value.
    #[arg(long, value_name = "PATH", num_args = 0..=1, default_missing_value = "-")]
    pub json: Option<String>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub frame: FrameArgs,
    #[command(flatten)]
    pub points: PointArgs,
    #[command(flatten)]
    pub json: JsonArgs,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub frame: FrameArgs,
    #[command(flatten)]
    pub samples: SampleArgs,
    /// One tolerance for every identity (the flatness gate is unaffected).
    #[arg(long, value_name = "X")]
    pub tol: Option<f64>,
    #[command(flatten)]
    pub json: JsonArgs,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub frame: FrameArgs,
    #[command(flatten)]
    pub samples: SampleArgs,
    /// Tolerance for the curvature side of the cross-checks.
    #[arg(long, value_name = "X", default_value_t = 1e-6)]
    pub tol: f64,
    /// Singular-value threshold for Killing-form rank and signature.
    #[arg(long, value_name = "X", default_value_t = 1e-8)]
    pub rank_tol: f64,
    #[command(flatten)]
    pub json: JsonArgs,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub frame: FrameArgs,
    #[command(flatten)]
    pub samples: SampleArgs,
    /// Also list the worst residual under every convention.
    #[arg(long)]
    pub all_conventions: bool,
    #[command(flatten)]
    pub json: JsonArgs,
}

#[derive(Debug, Args)]
pub struct FlowArgs {
    #[command(flatten)]
    pub frame: FrameArgs,
    /// Starting point.
    #[arg(long, value_name = "CSV", allow_hyphen_values = true)]
    pub from: String,
    /// Initial velocity.
    #[arg(long, value_name = "CSV", allow_hyphen_values = true)]
    pub dir: String,
    /// Final time.
    #[arg(long, value_name = "X", default_value_t = 1.0, allow_hyphen_values = true)]
    pub t: f64,
    /// Step size.
    #[arg(long, value_name = "X", default_value_t = 1e-2)]
    pub dt: f64,
}

enum Failure {
    Usage(String),
    Eval(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Eval(e)
    }
}

type Outcome = std::result::Result<i32, Failure>;

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match &cli.command {
        Command::Report(a) => cmd_report(a, out),
        Command::Check(a) => cmd_check(a, out),
        Command::Classify(a) => cmd_classify(a, out),
        Command::Decompose(a) => cmd_decompose(a, out),
        Command::Flow(a) => cmd_flow(a, out, err),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Eval(e)) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::NotFlat { .. } | Error::NotConstant { .. } => EXIT_NOT_FLAT,
                _ => EXIT_EVAL,
            }
        }
    }
}

fn load_frame(a: &FrameArgs) -> std::result::Result<FrameProvider, Failure> {
    let p = match (&a.frame, &a.frame_file) {
        (Some(name), _) => catalog_lookup(name).map_err(|e| Failure::Usage(e.to_string()))?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
            parse_frame_expr(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
        }
        (None, None) => return Err(Failure::Usage("one of --frame or --frame-file is required".into())),
    };
    let mut p = if a.finite_differences { p.without_jacobian() } else { p };
    if let Some(h) = a.fd_step {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Failure::Usage(format!("--fd-step must be positive, got {h}")));
        }
        let fd = FdConfig { step: Some(h), ..*p.fd() };
        p = p.with_fd(fd);
    }
    Ok(p)
}

fn parse_csv(text: &str, dim: usize, flag: &str) -> std::result::Result<Vec<f64>, Failure> {
    let v: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Failure::Usage(format!("{flag} {text}: {e}")))?;
    if v.len() != dim {
        return Err(Failure::Usage(format!("{flag} {text}: expected {dim} coordinates, got {}", v.len())));
    }
    Ok(v)
}

fn explicit_points(p: &FrameProvider, a: &PointArgs) -> std::result::Result<Vec<Vec<f64>>, Failure> {
    a.at.iter().map(|s| parse_csv(s, p.dim(), "--at")).collect()
}

fn points_or_samples(p: &FrameProvider, a: &SampleArgs) -> std::result::Result<Vec<Vec<f64>>, Failure> {
    let explicit = explicit_points(p, &a.points)?;
    if explicit.is_empty() {
        Ok(sample_points(p.domain(), a.samples as usize, a.seed))
    } else {
        Ok(explicit)
    }
}

fn emit_json(a: &JsonArgs, report: &Report, out: &mut dyn Write) -> std::result::Result<bool, Failure> {
    match a.json.as_deref() {
        None => Ok(false),
        Some("-") => {
            out.write_all(report.to_json().as_bytes()).map_err(|e| Failure::Usage(e.to_string()))?;
            Ok(true)
        }
        Some(path) => {
            std::fs::write(path, report.to_json()).map_err(|e| Failure::Usage(format!("cannot write {path}: {e}")))?;
            Ok(false)
        }
    }
}

fn fmt_point(x: &[f64]) -> String {
    let parts: Vec<String> = x.iter().map(|v| format!("{v:.6}")).collect();
    format!("({})", parts.join(", "))
}

fn fmt_matrix(m: &DMatrix<f64>) -> String {
    m.row_iter()
        .map(|r| {
            let cells: Vec<String> = r.iter().map(|v| format!("{:>12.6}", clean(*v))).collect();
            format!("    {}", cells.join(" "))
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn clean(v: f64) -> f64 {
    if v.abs() < 1e-12 {
        0.0
    } else {
        v
    }
}

fn fmt_entries(name: &str, t: &TensorValue) -> String {
    let lines: Vec<String> = t
        .indices()
        .filter(|ix| t.get(ix).abs() >= 1e-12)
        .map(|ix| {
            let idx: Vec<String> = ix.iter().map(|i| (i + 1).to_string()).collect();
            format!("    {name}[{}] = {:.9}", idx.join(","), t.get(&ix))
        })
        .collect();
    if lines.is_empty() {
        "    0 (all entries)".to_string()
    } else {
        lines.join("\n")
    }
}

fn cmd_report(a: &ReportArgs, out: &mut dyn Write) -> Outcome {
    let p = load_frame(&a.frame)?;
    let mut points = explicit_points(&p, &a.points)?;
    if points.is_empty() {
        points.push(p.domain().center());
    }
    let report = Report::geometry(&p, &points)?;
    if emit_json(&a.json, &report, out)? {
        return Ok(EXIT_OK);
    }
    let geos: Vec<_> = points.iter().map(|x| crate::curvature::point_geometry(&p, x)).collect::<crate::Result<_>>()?;
    let mut s = format!("frame {} (dim {})\n", p.name(), p.dim());
    for g in &geos {
        s.push_str(&format!("\nat x = {}\n", fmt_point(&g.x)));
        s.push_str(&format!("  w (row = coordinate, column = frame label)\n{}\n", fmt_matrix(&g.frame.w)));
        s.push_str(&format!("  w inverse\n{}\n", fmt_matrix(&g.frame.w_inv)));
        s.push_str(&format!("  canonical metric g\n{}\n", fmt_matrix(&g.metric.g.to_matrix()?)));
        s.push_str(&format!("  connection Γ^i_jk\n{}\n", fmt_entries("Γ", &g.gamma)));
        s.push_str(&format!("  integrability I^i_jk\n{}\n", fmt_entries("I", &g.integrability)));
        s.push_str(&format!("  linear curvature 𝔉^i_kj,r\n{}\n", fmt_entries("𝔉", &g.frak_r)));
        s.push_str(&format!("  primary curvature 𝒮^i_kj,r\n{}\n", fmt_entries("𝒮", &g.primary.upper)));
        s.push_str(&format!("  Ric(𝒮)\n{}\n", fmt_matrix(&g.ricci.to_matrix()?)));
        s.push_str(&format!("  scalar K = {:.9}\n", clean(g.scalar)));
        s.push_str(&format!("  sectional S_kl\n{}\n", fmt_matrix(&g.sectional)));
    }
    out.write_all(s.as_bytes()).map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(EXIT_OK)
}

fn cmd_check(a: &CheckArgs, out: &mut dyn Write) -> Outcome {
    let p = load_frame(&a.frame)?;
    let points = points_or_samples(&p, &a.samples)?;
    let tol = match a.tol {
        Some(t) if !(t >= 0.0) => return Err(Failure::Usage(format!("--tol must be non-negative, got {t}"))),
        Some(t) => SuiteTolerances::uniform(t),
        None => SuiteTolerances::default(),
    };
    let suite = identity_suite(&p, &points, &tol)?;
    let pass = suite.all_pass();
    let mut s = format!(
        "frame {}: {} points, max |𝔉| = {:.3e} (tolerance {:.1e}): {}\n",
        p.name(),
        suite.samples,
        suite.flatness.max_residual,
        suite.flatness.tol,
        if suite.flatness.flat { "flat" } else { "not flat" }
    );
    for r in &suite.records {
        let tag = match r.status {
            IdentityStatus::Pass => "PASS",
            IdentityStatus::Fail => "FAIL",
            IdentityStatus::Skipped => "SKIP",
            IdentityStatus::Property => "INFO",
        };
        let residual = r.max_residual.map_or("-".to_string(), |v| format!("{v:.3e}"));
        let tol = r.tolerance.map_or("-".to_string(), |v| format!("{v:.1e}"));
        let note = r.note.as_deref().map_or(String::new(), |n| format!("  [{n}]"));
        s.push_str(&format!("{tag}  {:<24} residual {residual:>10}  tol {tol:>7}  {}{note}\n", r.id, r.description));
    }
    let failed = suite.records.iter().filter(|r| r.status == IdentityStatus::Fail).count();
    if pass {
        s.push_str("all applicable identities pass\n");
    } else {
        s.push_str(&format!("{failed} identities failed\n"));
    }
    let report = Report::new(&p, &points).with_identities(suite);
    if !emit_json(&a.json, &report, out)? {
        out.write_all(s.as_bytes()).map_err(|e| Failure::Usage(e.to_string()))?;
    }
    Ok(if pass { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn cmd_classify(a: &ClassifyArgs, out: &mut dyn Write) -> Outcome {
    let p = load_frame(&a.frame)?;
    let points = points_or_samples(&p, &a.samples)?;
    let opts = ClassifyOptions { killing_threshold: a.rank_tol, ..ClassifyOptions::default() };
    let r = curvature_cross_check_with(&p, &points, a.tol, &opts)?;
    let consistent = r.consistent;
    let c = &r.classification;
    let mut s = format!("{}: {}\n", p.name(), c.summary);
    s.push_str(&format!("  derived series dims       {:?}\n", c.series.derived));
    s.push_str(&format!("  lower central series dims {:?}\n", c.series.lower_central));
    s.push_str(&format!(
        "  Killing form rank {} signature (+{}, -{}, 0:{})\n",
        c.killing_rank, c.killing_signature.positive, c.killing_signature.negative, c.killing_signature.zero
    ));
    let rows: Vec<String> = r.killing.iter().map(|row| format!("{row:?}")).collect();
    s.push_str(&format!("  Killing form {}\n", rows.join(" ")));
    s.push_str(&format!("  Jacobi residual {:.3e}, constancy residual {:.3e}\n", r.structure_constants.jacobi_residual, r.structure_constants.constancy_residual));
    for cl in &r.clauses {
        s.push_str(&format!("  [{}] {:<48} {}\n", cl.clause, cl.statement, if cl.consistent { "consistent" } else { "INCONSISTENT" }));
    }
    let report = Report::new(&p, &points).with_classification(r);
    if !emit_json(&a.json, &report, out)? {
        out.write_all(s.as_bytes()).map_err(|e| Failure::Usage(e.to_string()))?;
    }
    Ok(if consistent { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn cmd_decompose(a: &DecomposeArgs, out: &mut dyn Write) -> Outcome {
    let p = load_frame(&a.frame)?;
    let points = points_or_samples(&p, &a.samples)?;
    let d = decomposition_report(&p, &points)?;
    let conv = d.convention;
    let mut s = format!(
        "frame {}: best convention sign {:+} lower-slot permutation {:?} {}\n",
        p.name(),
        conv.sign,
        conv.permutation,
        if conv.lowered { "(fully lowered)" } else { "(mixed)" }
    );
    s.push_str(&format!("worst residual |R_LC − (𝔉 − 𝒮)| = {:.6e}\n", d.worst_residual));
    s.push_str(&format!("{:<40} {:>12} {:>12} {:>12} {:>12} {:>12}\n", "x", "residual", "|R_LC|", "|𝔉 − 𝒮|", "|𝔉|", "|𝒮|"));
    for pt in &d.points {
        s.push_str(&format!(
            "{:<40} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e}\n",
            fmt_point(&pt.x),
            pt.residual,
            pt.norm_levi_civita,
            pt.norm_frak_minus_s,
            pt.norm_frak_r,
            pt.norm_s
        ));
    }
    if a.all_conventions {
        for c in &d.by_convention {
            s.push_str(&format!(
                "  sign {:+} permutation {:?} lowered {:<5} worst residual {:.6e}\n",
                c.convention.sign, c.convention.permutation, c.convention.lowered, c.worst_residual
            ));
        }
    }
    let report = Report::new(&p, &points).with_decomposition(d);
    if !emit_json(&a.json, &report, out)? {
        out.write_all(s.as_bytes()).map_err(|e| Failure::Usage(e.to_string()))?;
    }
    Ok(EXIT_OK)
}

fn cmd_flow(a: &FlowArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let p = load_frame(&a.frame)?;
    let x0 = parse_csv(&a.from, p.dim(), "--from")?;
    let v = parse_csv(&a.dir, p.dim(), "--dir")?;
    if !(a.dt > 0.0) || !a.t.is_finite() {
        return Err(Failure::Usage("--dt must be positive and --t finite".into()));
    }
    let path = pre_one_parameter_flow(&p, &x0, &v, a.t, a.dt)?;
    out.write_all(path.to_csv().as_bytes()).map_err(|e| Failure::Usage(e.to_string()))?;
    if path.truncated {
        let (t, _) = path.points.last().expect("path has its starting point");
        let _ = writeln!(err, "warning: path left the chart domain; truncated at t = {t}");
    }
    Ok(EXIT_OK)
}
