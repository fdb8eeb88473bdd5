//! Command-line front end for the compound-matrix toolkit.
//!
//! Problems arrive either as a JSON problem file (`--problem`) or as flags
//! naming a system source and its parameters; both funnel into the same
//! canonical form, so reports carry a source-independent input digest.
//! Reports go to stdout (or `--out`) as JSON; `simulate` and `trace`
//! additionally write CSV time series.

mod expr;
mod problem;
mod report;

use clap::{Args, Parser, Subcommand};
use kcomp::classify::{
    certify_k_contracting, certify_k_cooperative, certify_k_positive, k_diag_stability_check,
    CertOptions, GridMeta, MatrixSample, Verdict,
};
use kcomp::combinat::binomial;
use kcomp::compound::{add_compound, alpha_add_compound, mult_compound};
use kcomp::dynamics::{integrate, sign_variation_trace, transition_matrix};
use kcomp::matrix::DenseMatrix;
use kcomp::measures::{compound_measure, measure, MeasureKind};
use problem::{
    input_digest, opt_bool, opt_f64, opt_f64_array, opt_span, opt_string, opt_usize,
    reject_unknown_keys, ProblemFile, RuntimeSystem, SystemSpec,
};
use report::{Report, ReportGrid};
use serde_json::{json, Map, Value};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "kcomp",
    version,
    about = "Compound matrices, matrix measures, contraction certificates, and trajectory tools"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Form the k-th additive or multiplicative compound of a matrix.
    Compound(CompoundArgs),
    /// Evaluate a matrix measure of a compound, using the closed forms.
    Measure(MeasureArgs),
    /// Certify a property over a sample grid and report a verdict.
    Certify(CertifyArgs),
    /// Integrate a system and write state or volume time series to CSV.
    Simulate(SimulateArgs),
    /// Track sign-variation counts along a trajectory, written to CSV.
    Trace(TraceArgs),
    /// Run the built-in golden checks; exits nonzero on any mismatch.
    Selftest,
}

/// Flags naming the system under study (or a problem file carrying it).
#[derive(Args, Default)]
struct SystemArgs {
    /// JSON problem file; conflicts with system and parameter flags.
    #[arg(long, value_name = "FILE")]
    problem: Option<PathBuf>,
    /// Named builtin system: thomas, example5, or example8.
    #[arg(long, value_name = "NAME")]
    builtin: Option<String>,
    /// Inline matrix literal, e.g. '[[0,1],["cos(t)",0]]'.
    #[arg(long, value_name = "JSON", allow_hyphen_values = true)]
    matrix: Option<String>,
    /// File holding a matrix literal.
    #[arg(long, value_name = "FILE")]
    matrix_file: Option<PathBuf>,
    /// Whole matrix as one expression, e.g. '[[-1,0],[-2*cos(t),0]]'.
    #[arg(long, value_name = "EXPR", allow_hyphen_values = true)]
    matrix_expr: Option<String>,
    /// Damping parameter of the thomas builtin (default 0.1).
    #[arg(long, allow_hyphen_values = true)]
    b: Option<f64>,
    /// Feedback gain of the thomas builtin (default 0).
    #[arg(long, allow_hyphen_values = true)]
    c: Option<f64>,
}

impl SystemArgs {
    fn has_source_flags(&self) -> bool {
        self.builtin.is_some()
            || self.matrix.is_some()
            || self.matrix_file.is_some()
            || self.matrix_expr.is_some()
    }
}

/// Report destination.
#[derive(Args, Default)]
struct OutArgs {
    /// Write the JSON report here instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompoundArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// Compound order.
    #[arg(long)]
    k: Option<u64>,
    /// Compound kind: additive | multiplicative.
    #[arg(long)]
    kind: Option<String>,
    /// Evaluation time for time-varying matrices (default 0).
    #[arg(long, allow_hyphen_values = true)]
    t: Option<f64>,
    /// Jacobian evaluation point for the nonlinear builtin, comma-separated.
    #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
    x0: Option<String>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct MeasureArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// Measure kind: l1 | l2 | linf.
    #[arg(long)]
    kind: Option<String>,
    /// Integer compound order (default 1; mutually exclusive with --alpha).
    #[arg(long)]
    k: Option<u64>,
    /// Fractional compound order in [1, n].
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    /// Evaluation time for time-varying matrices (default 0).
    #[arg(long, allow_hyphen_values = true)]
    t: Option<f64>,
    /// Jacobian evaluation point for the nonlinear builtin, comma-separated.
    #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
    x0: Option<String>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct CertifyArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// Property: k-positive | k-contracting | alpha-contracting |
    /// k-cooperative | k-diag-stable.
    #[arg(long)]
    property: Option<String>,
    /// Compound order for the k-indexed properties.
    #[arg(long)]
    k: Option<u64>,
    /// Fractional order for alpha-contracting.
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    /// Convex interpolation weight: shorthand for alpha = k_floor + s.
    #[arg(long, allow_hyphen_values = true)]
    s: Option<f64>,
    /// Measure kind for the contraction properties: l1 | l2 | linf.
    #[arg(long)]
    kind: Option<String>,
    /// Require irreducibility as well (strong positivity/cooperativity).
    #[arg(long)]
    strong: bool,
    /// Sampling resolution: points per axis (state grids) or time samples.
    #[arg(long)]
    grid: Option<u64>,
    /// Time span a:b for sampling time-varying systems.
    #[arg(long, value_name = "A:B", allow_hyphen_values = true)]
    t_span: Option<String>,
    /// Evaluation time for k-diag-stable on time-varying matrices.
    #[arg(long, allow_hyphen_values = true)]
    t: Option<f64>,
    /// Evaluation point for k-diag-stable on the nonlinear builtin.
    #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
    x0: Option<String>,
    /// Positive diagonal scaling entries for k-diag-stable, comma-separated.
    #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
    d_diag: Option<String>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// Initial state, comma-separated (states task).
    #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
    x0: Option<String>,
    /// Integration span a:b.
    #[arg(long, value_name = "A:B", allow_hyphen_values = true)]
    t_span: Option<String>,
    /// Fixed integration step (default 1e-3).
    #[arg(long)]
    step: Option<f64>,
    /// What to tabulate: states | volume.
    #[arg(long)]
    task: Option<String>,
    /// Volume order (volume task; default: full dimension).
    #[arg(long)]
    k: Option<u64>,
    /// CSV output path (required).
    #[arg(long, value_name = "FILE")]
    csv: PathBuf,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct TraceArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// Initial state, comma-separated.
    #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
    x0: Option<String>,
    /// Integration span a:b.
    #[arg(long, value_name = "A:B", allow_hyphen_values = true)]
    t_span: Option<String>,
    /// Fixed integration step (default 1e-3).
    #[arg(long)]
    step: Option<f64>,
    /// CSV output path (required).
    #[arg(long, value_name = "FILE")]
    csv: PathBuf,
    #[command(flatten)]
    out: OutArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Compound(args) => cmd_compound(args),
        Command::Measure(args) => cmd_measure(args),
        Command::Certify(args) => cmd_certify(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Trace(args) => cmd_trace(args),
        Command::Selftest => Ok(cmd_selftest()),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}

// ---------------------------------------------------------------------------
// Problem resolution
// ---------------------------------------------------------------------------

struct ResolvedProblem {
    system: RuntimeSystem,
    params: Map<String, Value>,
    digest: String,
}

/// Merges flags or a problem file into the canonical problem form.
fn resolve(
    task: &str,
    sys_args: &SystemArgs,
    flag_params: Map<String, Value>,
    finalize: impl FnOnce(&RuntimeSystem, &mut Map<String, Value>) -> Result<(), String>,
) -> Result<ResolvedProblem, String> {
    let (spec, mut params) = resolve_source(task, sys_args, flag_params)?;
    let system = RuntimeSystem::from_spec(&spec, &params)?;
    finalize(&system, &mut params)?;
    let canonical = ProblemFile {
        schema_version: 1,
        system: spec,
        task: task.to_string(),
        parameters: params.clone(),
    };
    let digest = input_digest(&canonical);
    Ok(ResolvedProblem { system, params, digest })
}

fn resolve_source(
    task: &str,
    sys: &SystemArgs,
    flag_params: Map<String, Value>,
) -> Result<(SystemSpec, Map<String, Value>), String> {
    if let Some(path) = &sys.problem {
        if sys.has_source_flags() || sys.b.is_some() || sys.c.is_some() {
            return Err(
                "--problem already names the system; drop --builtin/--matrix/--matrix-file/\
                 --matrix-expr/--b/--c"
                    .to_string(),
            );
        }
        if !flag_params.is_empty() {
            let keys: Vec<&str> = flag_params.keys().map(String::as_str).collect();
            return Err(format!(
                "--problem already carries the parameters; drop the flag(s) for: {}",
                keys.join(", ")
            ));
        }
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read problem file {}: {e}", path.display()))?;
        let file: ProblemFile = serde_json::from_str(&text)
            .map_err(|e| format!("malformed problem file {}: {e}", path.display()))?;
        file.validate()
            .map_err(|e| format!("invalid problem file {}: {e}", path.display()))?;
        if file.task != task {
            return Err(format!(
                "problem file requests task '{}' but the subcommand is '{task}'",
                file.task
            ));
        }
        return Ok((file.system, file.parameters));
    }

    let literal = match (&sys.matrix, &sys.matrix_file) {
        (Some(_), Some(_)) => {
            return Err("give either --matrix or --matrix-file, not both".to_string())
        }
        (Some(text), None) => Some(parse_matrix_literal(text, "--matrix")?),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read matrix file {}: {e}", path.display()))?;
            Some(parse_matrix_literal(&text, "--matrix-file")?)
        }
        (None, None) => None,
    };
    let spec = SystemSpec {
        matrix: literal,
        matrix_expr: sys.matrix_expr.clone(),
        builtin: sys.builtin.clone(),
    };
    let sources = [spec.matrix.is_some(), spec.matrix_expr.is_some(), spec.builtin.is_some()]
        .iter()
        .filter(|&&p| p)
        .count();
    if sources != 1 {
        return Err(format!(
            "exactly one of --problem, --builtin, --matrix, --matrix-file, --matrix-expr \
             must be given ({sources} system sources present)"
        ));
    }
    if let Some(name) = &spec.builtin {
        if !problem::BUILTINS.contains(&name.as_str()) {
            return Err(format!(
                "unknown builtin '{name}' (expected one of {})",
                problem::BUILTINS.join(", ")
            ));
        }
    }
    Ok((spec, flag_params))
}

fn parse_matrix_literal(text: &str, what: &str) -> Result<Vec<Vec<Value>>, String> {
    serde_json::from_str(text).map_err(|e| format!("{what}: not a JSON array of arrays: {e}"))
}

fn parse_list(text: &str, what: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|_| format!("{what}: '{part}' is not a number"))
        })
        .collect()
}

fn parse_span_flag(text: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 2 {
        return Err(format!("--t-span: expected A:B, got '{text}'"));
    }
    let a = parts[0].trim().parse::<f64>().map_err(|_| format!("--t-span: bad number '{}'", parts[0]))?;
    let b = parts[1].trim().parse::<f64>().map_err(|_| format!("--t-span: bad number '{}'", parts[1]))?;
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(format!("--t-span: need finite A < B, got {a}:{b}"));
    }
    Ok((a, b))
}

fn measure_kind(name: &str) -> Result<MeasureKind, String> {
    match name {
        "l1" => Ok(MeasureKind::L1),
        "l2" => Ok(MeasureKind::L2),
        "linf" => Ok(MeasureKind::LInf),
        other => Err(format!("unknown measure kind '{other}' (expected l1, l2, or linf)")),
    }
}

/// Inserts thomas parameter defaults so the digest reflects effective values.
fn finalize_builtin(system: &RuntimeSystem, params: &mut Map<String, Value>) {
    if let RuntimeSystem::Thomas { b, c } = system {
        params.entry("b").or_insert(json!(b));
        params.entry("c").or_insert(json!(c));
    }
}

/// Defaults and validation for the single evaluation point (t, x0).
fn finalize_eval_point(
    system: &RuntimeSystem,
    params: &mut Map<String, Value>,
) -> Result<(), String> {
    if system.is_time_dependent() {
        params.entry("t").or_insert(json!(0.0));
    } else if params.contains_key("t") {
        return Err("parameter 't' applies only to time-varying systems".to_string());
    }
    if system.is_state_dependent() {
        let n = system.dims().0;
        let x0 = opt_f64_array(params, "x0")?.unwrap_or_else(|| vec![0.0; n]);
        if x0.len() != n {
            return Err(format!("x0 has {} entries, the system has dimension {n}", x0.len()));
        }
        params.insert("x0".to_string(), json!(x0));
    } else if params.contains_key("x0") {
        return Err(
            "parameter 'x0' selects the Jacobian point and applies only to the nonlinear builtin"
                .to_string(),
        );
    }
    Ok(())
}

fn eval_point(params: &Map<String, Value>) -> (f64, Vec<f64>) {
    let t = opt_f64(params, "t").ok().flatten().unwrap_or(0.0);
    let x0 = opt_f64_array(params, "x0").ok().flatten().unwrap_or_default();
    (t, x0)
}

fn warn_if_large(rows: usize, cols: usize, k: usize) {
    if rows.max(cols) > 10 {
        eprintln!(
            "warning: enumerating order-{k} minors of a {rows}x{cols} matrix grows \
             binomially; dimensions beyond 10 may be very slow"
        );
    }
}

fn emit(report: &Report, out: &OutArgs) -> Result<(), String> {
    let text = report.render();
    match &out.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| format!("cannot write report {}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_csv(
    path: &Path,
    header: &str,
    rows: impl Iterator<Item = String>,
) -> Result<(), String> {
    let mut text = String::with_capacity(1 << 16);
    text.push_str(header);
    text.push('\n');
    for row in rows {
        text.push_str(&row);
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|e| format!("cannot write CSV {}: {e}", path.display()))
}

// ---------------------------------------------------------------------------
// compound
// ---------------------------------------------------------------------------

fn cmd_compound(args: CompoundArgs) -> Result<u8, String> {
    let start = Instant::now();
    let mut flag_params = Map::new();
    if let Some(k) = args.k {
        flag_params.insert("k".to_string(), json!(k));
    }
    if let Some(kind) = &args.kind {
        flag_params.insert("kind".to_string(), json!(kind));
    }
    if let Some(t) = args.t {
        flag_params.insert("t".to_string(), json!(t));
    }
    if let Some(x0) = &args.x0 {
        flag_params.insert("x0".to_string(), json!(parse_list(x0, "--x0")?));
    }
    if let Some(b) = args.system.b {
        flag_params.insert("b".to_string(), json!(b));
    }
    if let Some(c) = args.system.c {
        flag_params.insert("c".to_string(), json!(c));
    }

    let resolved = resolve("compound", &args.system, flag_params, |system, params| {
        reject_unknown_keys(params, &["k", "kind", "t", "x0", "b", "c"])?;
        let k = opt_usize(params, "k")?.ok_or("missing parameter 'k' (--k)")?;
        if k == 0 {
            return Err("k must be at least 1".to_string());
        }
        let kind = opt_string(params, "kind")?
            .ok_or("missing parameter 'kind' (--kind additive|multiplicative)")?;
        if kind != "additive" && kind != "multiplicative" {
            return Err(format!("unknown compound kind '{kind}'"));
        }
        finalize_eval_point(system, params)?;
        finalize_builtin(system, params);
        Ok(())
    })?;

    let (t, x0) = eval_point(&resolved.params);
    let k = opt_usize(&resolved.params, "k")?.unwrap();
    let kind = opt_string(&resolved.params, "kind")?.unwrap();
    let base = resolved.system.matrix_at(t, &x0).map_err(|e| e.to_string())?;
    warn_if_large(base.rows(), base.cols(), k);
    let matrix = match kind.as_str() {
        "additive" => add_compound(&base, k),
        _ => mult_compound(&base, k),
    }
    .map_err(|e| e.to_string())?
    .matrix;

    let mut report = Report::new("compound", resolved.digest);
    report.result_matrix = Some(matrix.to_rows());
    report.timing_ms = start.elapsed().as_millis() as u64;
    emit(&report, &args.out)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// measure
// ---------------------------------------------------------------------------

fn cmd_measure(args: MeasureArgs) -> Result<u8, String> {
    let start = Instant::now();
    let mut flag_params = Map::new();
    if let Some(kind) = &args.kind {
        flag_params.insert("kind".to_string(), json!(kind));
    }
    if let Some(k) = args.k {
        flag_params.insert("k".to_string(), json!(k));
    }
    if let Some(alpha) = args.alpha {
        flag_params.insert("alpha".to_string(), json!(alpha));
    }
    if let Some(t) = args.t {
        flag_params.insert("t".to_string(), json!(t));
    }
    if let Some(x0) = &args.x0 {
        flag_params.insert("x0".to_string(), json!(parse_list(x0, "--x0")?));
    }
    if let Some(b) = args.system.b {
        flag_params.insert("b".to_string(), json!(b));
    }
    if let Some(c) = args.system.c {
        flag_params.insert("c".to_string(), json!(c));
    }

    let resolved = resolve("measure", &args.system, flag_params, |system, params| {
        reject_unknown_keys(params, &["k", "alpha", "kind", "t", "x0", "b", "c"])?;
        let kind =
            opt_string(params, "kind")?.ok_or("missing parameter 'kind' (--kind l1|l2|linf)")?;
        measure_kind(&kind)?;
        match (opt_usize(params, "k")?, opt_f64(params, "alpha")?) {
            (Some(_), Some(_)) => {
                return Err("give either 'k' or 'alpha', not both".to_string())
            }
            (Some(0), None) => return Err("k must be at least 1".to_string()),
            (None, None) => {
                params.insert("k".to_string(), json!(1));
            }
            _ => {}
        }
        finalize_eval_point(system, params)?;
        finalize_builtin(system, params);
        Ok(())
    })?;

    let (t, x0) = eval_point(&resolved.params);
    let kind = measure_kind(&opt_string(&resolved.params, "kind")?.unwrap())?;
    let base = resolved.system.matrix_at(t, &x0).map_err(|e| e.to_string())?;
    let value = match opt_f64(&resolved.params, "alpha")? {
        Some(alpha) => {
            warn_if_large(base.rows(), base.cols(), alpha.ceil() as usize);
            measure(&alpha_add_compound(&base, alpha).map_err(|e| e.to_string())?, kind)
                .map_err(|e| e.to_string())?
        }
        None => {
            let k = opt_usize(&resolved.params, "k")?.unwrap();
            warn_if_large(base.rows(), base.cols(), k);
            compound_measure(&base, k, kind).map_err(|e| e.to_string())?
        }
    };

    let mut report = Report::new("measure", resolved.digest);
    report.result_matrix = Some(vec![vec![value]]);
    report.timing_ms = start.elapsed().as_millis() as u64;
    emit(&report, &args.out)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// certify
// ---------------------------------------------------------------------------

const PROPERTIES: [&str; 5] =
    ["k-positive", "k-contracting", "alpha-contracting", "k-cooperative", "k-diag-stable"];

fn cmd_certify(args: CertifyArgs) -> Result<u8, String> {
    let start = Instant::now();
    let mut flag_params = Map::new();
    if let Some(property) = &args.property {
        flag_params.insert("property".to_string(), json!(property));
    }
    if let Some(k) = args.k {
        flag_params.insert("k".to_string(), json!(k));
    }
    if let Some(alpha) = args.alpha {
        flag_params.insert("alpha".to_string(), json!(alpha));
    }
    if let Some(s) = args.s {
        flag_params.insert("s".to_string(), json!(s));
    }
    if let Some(kind) = &args.kind {
        flag_params.insert("kind".to_string(), json!(kind));
    }
    if args.strong {
        flag_params.insert("strong".to_string(), json!(true));
    }
    if let Some(grid) = args.grid {
        flag_params.insert("grid".to_string(), json!(grid));
    }
    if let Some(span) = &args.t_span {
        flag_params.insert("t_span".to_string(), json!(parse_span_flag(span)?));
    }
    if let Some(t) = args.t {
        flag_params.insert("t".to_string(), json!(t));
    }
    if let Some(x0) = &args.x0 {
        flag_params.insert("x0".to_string(), json!(parse_list(x0, "--x0")?));
    }
    if let Some(d) = &args.d_diag {
        flag_params.insert("D".to_string(), json!(parse_list(d, "--d-diag")?));
    }
    if let Some(b) = args.system.b {
        flag_params.insert("b".to_string(), json!(b));
    }
    if let Some(c) = args.system.c {
        flag_params.insert("c".to_string(), json!(c));
    }

    let resolved = resolve("certify", &args.system, flag_params, finalize_certify)?;
    let params = &resolved.params;
    let system = &resolved.system;
    let property = opt_string(params, "property")?.unwrap();

    let mut report = Report::new("certify", resolved.digest.clone());
    let verdict;
    if property == "k-diag-stable" {
        let (t, x0) = eval_point(params);
        let k = opt_usize(params, "k")?.unwrap();
        let base = system.matrix_at(t, &x0).map_err(|e| e.to_string())?;
        warn_if_large(base.rows(), base.cols(), k);
        let d = opt_f64_array(params, "D")?.unwrap();
        let stability = k_diag_stability_check(&base, k, &d).map_err(|e| e.to_string())?;
        verdict = if stability.stable { Verdict::Certified } else { Verdict::Refuted };
        report.verdict = Some(verdict.to_string());
        report.margin = Some(-stability.lambda_max);
        report.grid =
            Some(ReportGrid { description: "single matrix".to_string(), samples: 1 });
    } else {
        let (n, _) = system.dims();
        let cert = match property.as_str() {
            "k-cooperative" => {
                let k = opt_usize(params, "k")?.unwrap();
                warn_if_large(n, n, k);
                let strong = opt_bool(params, "strong")?.unwrap_or(false);
                let points_per_axis = opt_usize(params, "grid")?.unwrap();
                let def = system.system_def().map_err(|e| e.to_string())?;
                let region = def
                    .state_space
                    .as_ref()
                    .ok_or("the builtin does not declare a state-space box")?;
                let points = region.grid(points_per_axis).map_err(|e| e.to_string())?;
                let meta = GridMeta {
                    description: format!(
                        "uniform state-space grid, {points_per_axis} points per axis"
                    ),
                    samples: points.len(),
                };
                certify_k_cooperative(
                    |x| system.matrix_at(0.0, x),
                    &points,
                    k,
                    strong,
                    meta,
                    &CertOptions::default(),
                )
                .map_err(|e| e.to_string())?
            }
            _ => {
                let (samples, meta) = build_samples(system, params)?;
                match property.as_str() {
                    "k-positive" => {
                        let k = opt_usize(params, "k")?.unwrap();
                        warn_if_large(n, n, k);
                        let strong = opt_bool(params, "strong")?.unwrap_or(false);
                        certify_k_positive(&samples, k, strong, meta, &CertOptions::default())
                            .map_err(|e| e.to_string())?
                    }
                    "k-contracting" => {
                        let k = opt_usize(params, "k")?.unwrap();
                        warn_if_large(n, n, k);
                        let kind = measure_kind(&opt_string(params, "kind")?.unwrap())?;
                        certify_k_contracting(&samples, k as f64, kind, meta)
                            .map_err(|e| e.to_string())?
                    }
                    _ => {
                        let alpha = effective_alpha(params)?;
                        warn_if_large(n, n, alpha.ceil() as usize);
                        let kind = measure_kind(&opt_string(params, "kind")?.unwrap())?;
                        certify_k_contracting(&samples, alpha, kind, meta)
                            .map_err(|e| e.to_string())?
                    }
                }
            }
        };
        verdict = cert.verdict;
        report = report.with_certification(&cert);
    }

    report.timing_ms = start.elapsed().as_millis() as u64;
    emit(&report, &args.out)?;
    Ok(match verdict {
        Verdict::Certified => 0,
        _ => 2,
    })
}

fn finalize_certify(system: &RuntimeSystem, params: &mut Map<String, Value>) -> Result<(), String> {
    reject_unknown_keys(
        params,
        &["property", "k", "alpha", "s", "kind", "strong", "grid", "t_span", "t", "x0", "D", "b", "c"],
    )?;
    let property = opt_string(params, "property")?
        .ok_or("missing parameter 'property' (--property)")?;
    if !PROPERTIES.contains(&property.as_str()) {
        return Err(format!(
            "unknown property '{property}' (expected one of {})",
            PROPERTIES.join(", ")
        ));
    }

    let forbid = |params: &Map<String, Value>, keys: &[&str]| -> Result<(), String> {
        for key in keys {
            if params.contains_key(*key) {
                return Err(format!("parameter '{key}' does not apply to '{property}'"));
            }
        }
        Ok(())
    };

    match property.as_str() {
        "k-positive" | "k-cooperative" => {
            forbid(params, &["alpha", "s", "kind", "D"])?;
            require_order(params)?;
            let strong = opt_bool(params, "strong")?.unwrap_or(false);
            params.insert("strong".to_string(), json!(strong));
            if property == "k-cooperative" && !system.is_state_dependent() {
                return Err(
                    "k-cooperative needs the nonlinear builtin; use k-positive for explicit \
                     matrices"
                        .to_string(),
                );
            }
        }
        "k-contracting" => {
            forbid(params, &["alpha", "s", "strong", "D"])?;
            require_order(params)?;
            let kind = opt_string(params, "kind")?
                .ok_or("missing parameter 'kind' (--kind l1|l2|linf)")?;
            measure_kind(&kind)?;
        }
        "alpha-contracting" => {
            forbid(params, &["k", "strong", "D"])?;
            match (opt_f64(params, "alpha")?, opt_f64(params, "s")?) {
                (Some(_), Some(_)) => {
                    return Err("give either 'alpha' or 's', not both".to_string())
                }
                (None, None) => {
                    return Err("alpha-contracting needs 'alpha' (--alpha) or 's' (--s)".to_string())
                }
                (None, Some(s)) if !(0.0..1.0).contains(&s) => {
                    return Err(format!("s must lie in [0, 1), got {s}"))
                }
                _ => {}
            }
            let kind = opt_string(params, "kind")?
                .ok_or("missing parameter 'kind' (--kind l1|l2|linf)")?;
            measure_kind(&kind)?;
        }
        _ => {
            // k-diag-stable: a single-matrix check.
            forbid(params, &["alpha", "s", "kind", "strong", "grid", "t_span"])?;
            let k = require_order(params)?;
            finalize_eval_point(system, params)?;
            let n = system.dims().0;
            let dim = binomial(n, k).map_err(|e| e.to_string())? as usize;
            let d = opt_f64_array(params, "D")?.unwrap_or_else(|| vec![1.0; dim]);
            if d.len() != dim {
                return Err(format!(
                    "D must have one entry per order-{k} index set ({dim}), got {}",
                    d.len()
                ));
            }
            params.insert("D".to_string(), json!(d));
            finalize_builtin(system, params);
            return Ok(());
        }
    }

    // Sampled properties: grid/t_span defaults by system shape.
    if system.is_state_dependent() {
        forbid(params, &["t", "x0", "t_span"])?;
        let grid = opt_usize(params, "grid")?.unwrap_or(21);
        if grid == 0 {
            return Err("grid must be at least 1".to_string());
        }
        params.insert("grid".to_string(), json!(grid));
    } else if system.is_time_dependent() {
        forbid(params, &["t", "x0"])?;
        if opt_span(params, "t_span")?.is_none() {
            return Err(
                "time-varying systems need 't_span' (--t-span A:B) to sample over".to_string()
            );
        }
        let grid = opt_usize(params, "grid")?.unwrap_or(201);
        if grid < 2 {
            return Err("grid must be at least 2 time samples".to_string());
        }
        params.insert("grid".to_string(), json!(grid));
    } else {
        forbid(params, &["t", "x0", "t_span", "grid"])?;
    }
    finalize_builtin(system, params);
    Ok(())
}

fn require_order(params: &Map<String, Value>) -> Result<usize, String> {
    let k = opt_usize(params, "k")?.ok_or("missing parameter 'k' (--k)")?;
    if k == 0 {
        return Err("k must be at least 1".to_string());
    }
    Ok(k)
}

fn effective_alpha(params: &Map<String, Value>) -> Result<f64, String> {
    match (opt_f64(params, "alpha")?, opt_f64(params, "s")?) {
        (Some(alpha), None) => Ok(alpha),
        (None, Some(s)) => Ok(2.0 + s),
        _ => Err("alpha-contracting needs exactly one of 'alpha' or 's'".to_string()),
    }
}

/// Builds certification samples: a state-space grid for the nonlinear
/// builtin, a uniform time grid for time-varying matrices, or the single
/// constant matrix.
fn build_samples(
    system: &RuntimeSystem,
    params: &Map<String, Value>,
) -> Result<(Vec<MatrixSample>, GridMeta), String> {
    if system.is_state_dependent() {
        let points_per_axis = opt_usize(params, "grid")?.unwrap();
        let def = system.system_def().map_err(|e| e.to_string())?;
        let region =
            def.state_space.as_ref().ok_or("the builtin does not declare a state-space box")?;
        let points = region.grid(points_per_axis).map_err(|e| e.to_string())?;
        let mut samples = Vec::with_capacity(points.len());
        for (i, x) in points.iter().enumerate() {
            samples.push(MatrixSample::at_point(
                i,
                x.clone(),
                system.matrix_at(0.0, x).map_err(|e| e.to_string())?,
            ));
        }
        let meta = GridMeta {
            description: format!("uniform state-space grid, {points_per_axis} points per axis"),
            samples: samples.len(),
        };
        Ok((samples, meta))
    } else if system.is_time_dependent() {
        let (a, b) = opt_span(params, "t_span")?.unwrap();
        let count = opt_usize(params, "grid")?.unwrap();
        let mut samples = Vec::with_capacity(count);
        for i in 0..count {
            let t = a + (b - a) * i as f64 / (count - 1) as f64;
            samples.push(MatrixSample::at_time(
                t,
                system.matrix_at(t, &[]).map_err(|e| e.to_string())?,
            ));
        }
        let meta = GridMeta {
            description: format!("{count} uniform time samples on [{a}, {b}]"),
            samples: count,
        };
        Ok((samples, meta))
    } else {
        let m = system.matrix_at(0.0, &[]).map_err(|e| e.to_string())?;
        Ok((
            vec![MatrixSample::at_time(0.0, m)],
            GridMeta { description: "single constant matrix".to_string(), samples: 1 },
        ))
    }
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

fn cmd_simulate(args: SimulateArgs) -> Result<u8, String> {
    let start = Instant::now();
    let mut flag_params = Map::new();
    if let Some(task) = &args.task {
        flag_params.insert("task".to_string(), json!(task));
    }
    if let Some(x0) = &args.x0 {
        flag_params.insert("x0".to_string(), json!(parse_list(x0, "--x0")?));
    }
    if let Some(span) = &args.t_span {
        flag_params.insert("t_span".to_string(), json!(parse_span_flag(span)?));
    }
    if let Some(step) = args.step {
        flag_params.insert("step".to_string(), json!(step));
    }
    if let Some(k) = args.k {
        flag_params.insert("k".to_string(), json!(k));
    }
    if let Some(b) = args.system.b {
        flag_params.insert("b".to_string(), json!(b));
    }
    if let Some(c) = args.system.c {
        flag_params.insert("c".to_string(), json!(c));
    }

    let resolved = resolve("simulate", &args.system, flag_params, |system, params| {
        reject_unknown_keys(params, &["task", "x0", "t_span", "step", "k", "b", "c"])?;
        let sub = opt_string(params, "task")?.unwrap_or_else(|| "states".to_string());
        if sub != "states" && sub != "volume" {
            return Err(format!("unknown simulate task '{sub}' (expected states or volume)"));
        }
        params.insert("task".to_string(), json!(sub.clone()));
        if opt_span(params, "t_span")?.is_none() {
            return Err("missing parameter 't_span' (--t-span A:B)".to_string());
        }
        let step = opt_f64(params, "step")?.unwrap_or(1e-3);
        if !(step.is_finite() && step > 0.0) {
            return Err(format!("step must be positive and finite, got {step}"));
        }
        params.insert("step".to_string(), json!(step));
        let n = system.dims().0;
        if sub == "states" {
            let x0 = opt_f64_array(params, "x0")?
                .ok_or("the states task needs 'x0' (--x0)")?;
            if x0.len() != n {
                return Err(format!(
                    "x0 has {} entries, the system has dimension {n}",
                    x0.len()
                ));
            }
            if params.contains_key("k") {
                return Err("parameter 'k' applies only to the volume task".to_string());
            }
        } else {
            if system.is_state_dependent() {
                return Err(
                    "the volume task tracks a transition matrix and needs a linear system"
                        .to_string(),
                );
            }
            if params.contains_key("x0") {
                return Err("the volume task starts from the identity; drop 'x0'".to_string());
            }
            let k = opt_usize(params, "k")?.unwrap_or(n);
            if k == 0 || k > n {
                return Err(format!("volume order k must lie in 1..={n}, got {k}"));
            }
            params.insert("k".to_string(), json!(k));
        }
        finalize_builtin(system, params);
        Ok(())
    })?;

    let params = &resolved.params;
    let (a, b) = opt_span(params, "t_span")?.unwrap();
    let step = opt_f64(params, "step")?.unwrap();
    let sub = opt_string(params, "task")?.unwrap();
    let def = resolved.system.system_def().map_err(|e| e.to_string())?;

    let mut report = Report::new("simulate", resolved.digest.clone());
    if sub == "states" {
        let x0 = opt_f64_array(params, "x0")?.unwrap();
        let traj = integrate(&def, &x0, (a, b), step).map_err(|e| e.to_string())?;
        let header = {
            let mut h = String::from("t");
            for i in 1..=def.dim() {
                h.push_str(&format!(",x{i}"));
            }
            h
        };
        write_csv(
            &args.csv,
            &header,
            traj.times.iter().zip(&traj.states).map(|(t, x)| {
                let mut row = format!("{t}");
                for v in x {
                    row.push_str(&format!(",{v}"));
                }
                row
            }),
        )?;
        report.result_matrix = Some(vec![traj.last_state().to_vec()]);
    } else {
        let k = opt_usize(params, "k")?.unwrap();
        let flow = transition_matrix(&def, (a, b), step).map_err(|e| e.to_string())?;
        let mut volumes = Vec::with_capacity(flow.times.len());
        for m in &flow.matrices {
            let vectors: Vec<Vec<f64>> =
                (0..k).map(|j| (0..m.rows()).map(|i| m.get(i, j)).collect()).collect();
            volumes.push(kcomp::dynamics::k_volume(&vectors).map_err(|e| e.to_string())?);
        }
        write_csv(
            &args.csv,
            "t,volume",
            flow.times.iter().zip(&volumes).map(|(t, v)| format!("{t},{v}")),
        )?;
        report.result_matrix = Some(vec![vec![*volumes.last().unwrap()]]);
    }

    report.timing_ms = start.elapsed().as_millis() as u64;
    emit(&report, &args.out)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// trace
// ---------------------------------------------------------------------------

fn cmd_trace(args: TraceArgs) -> Result<u8, String> {
    let start = Instant::now();
    let mut flag_params = Map::new();
    if let Some(x0) = &args.x0 {
        flag_params.insert("x0".to_string(), json!(parse_list(x0, "--x0")?));
    }
    if let Some(span) = &args.t_span {
        flag_params.insert("t_span".to_string(), json!(parse_span_flag(span)?));
    }
    if let Some(step) = args.step {
        flag_params.insert("step".to_string(), json!(step));
    }
    if let Some(b) = args.system.b {
        flag_params.insert("b".to_string(), json!(b));
    }
    if let Some(c) = args.system.c {
        flag_params.insert("c".to_string(), json!(c));
    }

    let resolved = resolve("trace", &args.system, flag_params, |system, params| {
        reject_unknown_keys(params, &["x0", "t_span", "step", "b", "c"])?;
        let n = system.dims().0;
        let x0 = opt_f64_array(params, "x0")?.ok_or("missing parameter 'x0' (--x0)")?;
        if x0.len() != n {
            return Err(format!("x0 has {} entries, the system has dimension {n}", x0.len()));
        }
        if opt_span(params, "t_span")?.is_none() {
            return Err("missing parameter 't_span' (--t-span A:B)".to_string());
        }
        let step = opt_f64(params, "step")?.unwrap_or(1e-3);
        if !(step.is_finite() && step > 0.0) {
            return Err(format!("step must be positive and finite, got {step}"));
        }
        params.insert("step".to_string(), json!(step));
        finalize_builtin(system, params);
        Ok(())
    })?;

    let params = &resolved.params;
    let x0 = opt_f64_array(params, "x0")?.unwrap();
    let (a, b) = opt_span(params, "t_span")?.unwrap();
    let step = opt_f64(params, "step")?.unwrap();
    let def = resolved.system.system_def().map_err(|e| e.to_string())?;
    let trace = sign_variation_trace(&def, &x0, (a, b), step).map_err(|e| e.to_string())?;

    write_csv(
        &args.csv,
        "t,s_minus,s_plus",
        trace.iter().map(|(t, sm, sp)| format!("{t},{sm},{sp}")),
    )?;

    let (_, last_sm, last_sp) = *trace.last().unwrap();
    let mut report = Report::new("trace", resolved.digest.clone());
    report.result_matrix = Some(vec![vec![last_sm as f64, last_sp as f64]]);
    report.timing_ms = start.elapsed().as_millis() as u64;
    emit(&report, &args.out)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// selftest
// ---------------------------------------------------------------------------

fn cmd_selftest() -> u8 {
    use kcomp::dynamics::{example5_transition, example8_matrix, thomas_gain_bound, thomas_system};
    use kcomp::signvar::{s_minus, s_plus};

    let mut failed = false;
    let mut check = |name: &str, ok: bool, detail: String| {
        if ok {
            println!("ok {name}");
        } else {
            println!("MISMATCH {name}: {detail}");
            failed = true;
        }
    };

    let comp = add_compound(&example8_matrix(), 2).unwrap().matrix.to_rows();
    let want = vec![vec![0.0, 0.1, 2.0], vec![0.0, 0.0, 1.0], vec![3.0, 0.0, 2.0]];
    check("order-2 additive compound of the demo 3x3", comp == want, format!("{comp:?}"));

    let x = [-1.0, 0.0, 0.0, 2.0, -3.0];
    let (sm, sp) = (s_minus(&x).unwrap(), s_plus(&x).unwrap());
    check("sign-variation counts of the golden vector", sm == 2 && sp == 4, format!("({sm}, {sp})"));

    let upper =
        DenseMatrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![0.0, 4.0, 5.0], vec![0.0, 0.0, 6.0]])
            .unwrap();
    let got = mult_compound(&upper, 2).unwrap().matrix.to_rows();
    let want = vec![vec![4.0, 5.0, -2.0], vec![0.0, 6.0, 12.0], vec![0.0, 0.0, 24.0]];
    check("order-2 multiplicative compound, upper-triangular closed form", got == want, format!("{got:?}"));

    let flow = transition_matrix(&kcomp::dynamics::example5_system(), (0.0, 1.0), 1e-3).unwrap();
    let dev = flow.last_matrix().sub(&example5_transition(1.0)).unwrap().max_abs();
    check("time-varying transition matrix against its closed form", dev < 1e-8, format!("deviation {dev}"));

    let cstar = thomas_gain_bound(0.1, 0.0).unwrap();
    check("feedback gain bound at s = 0", cstar == -0.8, format!("{cstar}"));

    let jac = thomas_system(0.1, 0.0).unwrap().jacobian_at(0.0, &[0.0, 0.0, 0.0]).unwrap();
    let mu = measure(&alpha_add_compound(&jac, 2.5).unwrap(), MeasureKind::L1).unwrap();
    check(
        "fractional-order measure closed form at the origin",
        (mu - 0.25).abs() < 1e-12,
        format!("{mu}"),
    );

    if failed {
        1
    } else {
        0
    }
}
