//! Command-line front end. Each subcommand writes one JSON report (to
//! `--out` or stdout) that embeds the resolved arguments and the library
//! version; `theta` can also write a `t,W,raw_quotient` CSV curve.
//!
//! Exit codes: 0 success, 1 internal error, 2 invalid input or validation
//! failure, 3 a result carrying a numeric-confidence flag.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::bochner::{finiteness_bound, refined_delta};
use crate::curvature::{
    cd_convexity_check, geometric_grid, sturm_bounds, theta_plus_with_order, theta_star, SturmBounds, ThetaEstimate,
    ThetaStarOptions,
};
use crate::error::{Error, Result};
use crate::heat::{build_witten, heat_flow, WittenOperator};
use crate::io::{budget_from_config, model_from_config, read_space, KeyValues};
use crate::isometry::{default_tolerance, enumerate_isometries_with_budget, rigidity_scan, DEFAULT_NODE_BUDGET};
use crate::mms::{dirac, FiniteMMS, ModelManifold};

/// Groups above this order are reported by their generators only.
pub const MAX_LISTED_ELEMENTS: usize = 10_000;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_LOW_CONFIDENCE: i32 = 3;

#[derive(Debug, Parser, Serialize)]
#[command(name = "synthric", version, about = "Synthetic Ricci bounds, isometry groups and Bochner constants")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Seed for randomized sampling; recorded in every report.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads for parallel sweeps (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Check metric axioms, weights and adjacency of a space.
    Validate(SpaceArgs),
    /// Estimate θ⁺ for one pair from the heat-flow contraction curve.
    Theta(ThetaArgs),
    /// Estimate θ* at a point over a descending list of radii.
    ThetaStar(ThetaStarArgs),
    /// Compare θ⁺ with the analytic two-sided bounds on a model.
    SturmVerify(SturmArgs),
    /// Enumerate the measure-preserving isometry group.
    IsoGroup(IsoArgs),
    /// Evaluate δ, the packing count L and L! from a geometry budget.
    BochnerBound(BochnerArgs),
    /// Check entropy convexity along an interpolation of two smoothed Diracs.
    CdCheck(CdArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct SpaceArgs {
    /// Space as CSV (`# mms n=<n>` header, distance rows, weight row).
    #[arg(long, conflicts_with = "model")]
    pub space: Option<PathBuf>,
    /// Mesh edge list `i,j,length` for a CSV space.
    #[arg(long, requires = "space")]
    pub edges: Option<PathBuf>,
    /// Model manifold config (`kind=circle`, `radius=1.0`, ...).
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Override the model config's `resolution`.
    #[arg(long)]
    pub resolution: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct ThetaArgs {
    #[command(flatten)]
    pub input: SpaceArgs,
    /// Point pair `i,j`.
    #[arg(long, value_parser = parse_pair)]
    pub pair: (usize, usize),
    /// Time grid, `geometric:<t0>,<t1>,<k>` or a comma list of times.
    #[arg(long)]
    pub tgrid: String,
    /// Polynomial order of the extrapolation fit.
    #[arg(long, default_value_t = 1)]
    pub order: usize,
    /// Also write the contraction curve as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ThetaStarArgs {
    #[command(flatten)]
    pub input: SpaceArgs,
    /// Center point index.
    #[arg(long)]
    pub point: usize,
    /// Strictly descending radii, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub radii: Vec<f64>,
    #[arg(long, default_value_t = 6)]
    pub t_points: usize,
    /// Upper end of each pair's time window as a fraction of d².
    #[arg(long, default_value_t = 1.0)]
    pub window_fraction: f64,
    #[arg(long, default_value_t = 1)]
    pub order: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct SturmArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub resolution: Option<usize>,
    #[arg(long, value_parser = parse_pair)]
    pub pair: (usize, usize),
    #[arg(long)]
    pub tgrid: String,
    #[arg(long, default_value_t = 1)]
    pub order: usize,
    /// Sandwich tolerance; defaults to max(0.1·|θ⁺|, 0.05).
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct IsoArgs {
    #[arg(long)]
    pub space: PathBuf,
    /// Distance/weight tolerance; defaults to 1e-9·diameter.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Maximum number of search nodes.
    #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
    pub node_budget: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct BochnerArgs {
    /// Budget config (`n`, `N`, `i0`, `Lambda1`, ..., optional `delta1`, `C_G`).
    #[arg(long)]
    pub budget: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct CdArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Dirac locations `i,j` of the two endpoint measures.
    #[arg(long, value_parser = parse_pair)]
    pub pair: (usize, usize),
    /// Curvature lower bound K to test.
    #[arg(long, allow_hyphen_values = true)]
    pub curvature_k: f64,
    /// Interpolation times in [0, 1].
    #[arg(long, value_delimiter = ',', default_value = "0,0.25,0.5,0.75,1")]
    pub ts: Vec<f64>,
    /// Heat-flow time used to smooth the Diracs.
    #[arg(long, default_value_t = 0.01)]
    pub smoothing: f64,
}

fn parse_pair(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected `i,j`, got `{s}`"))?;
    let p = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("`{v}`: {e}"));
    Ok((p(a)?, p(b)?))
}

/// Parses `geometric:<t0>,<t1>,<k>` or an explicit comma list of times.
pub fn parse_tgrid(s: &str) -> Result<Vec<f64>> {
    let bad = |m: String| Error::Precondition(format!("--tgrid: {m}"));
    let nums = |body: &str| {
        body.split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|_| bad(format!("`{v}` is not a number"))))
            .collect::<Result<Vec<f64>>>()
    };
    if let Some(body) = s.strip_prefix("geometric:") {
        let v = nums(body)?;
        if v.len() != 3 || v[2].fract() != 0.0 || v[2] < 2.0 {
            return Err(bad("expected geometric:<t0>,<t1>,<k> with integer k >= 2".into()));
        }
        geometric_grid(v[0], v[1], v[2] as usize)
    } else {
        nums(s)
    }
}

/// Prefixes line-anchored parse errors with the file they came from.
fn in_file<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Parse { line, message } => Error::Parse { line, message: format!("{}: {message}", path.display()) },
        other => other,
    })
}

fn load_model(path: &Path, resolution: Option<usize>) -> Result<(ModelManifold, FiniteMMS)> {
    let cfg = in_file(path, KeyValues::read(path).and_then(|kv| model_from_config(&kv)))?;
    let res = resolution
        .or(cfg.resolution)
        .ok_or_else(|| Error::Precondition(format!("{}: no `resolution` given", path.display())))?;
    let space = cfg.model.discretize(res)?;
    Ok((cfg.model, space))
}

fn load_space(args: &SpaceArgs) -> Result<(Option<ModelManifold>, FiniteMMS)> {
    match (&args.model, &args.space) {
        (Some(m), _) => load_model(m, args.resolution).map(|(model, s)| (Some(model), s)),
        (None, Some(p)) => Ok((None, in_file(p, read_space(p, args.edges.as_deref()))?)),
        (None, None) => Err(Error::Precondition("one of --space or --model is required".into())),
    }
}

fn label(space: &FiniteMMS, i: usize) -> Result<[f64; 2]> {
    let labels = space.labels().ok_or_else(|| Error::Precondition("space has no model coordinates".into()))?;
    labels.get(i).copied().ok_or(Error::IndexOutOfRange { index: i, n: space.n() })
}

#[derive(Serialize)]
struct ThetaReport<'a> {
    pair: (usize, usize),
    d: f64,
    t_grid: &'a [f64],
    w: &'a [f64],
    raw: &'a [f64],
    value: f64,
    residual: f64,
    order: usize,
    low_confidence: bool,
    bounds: Option<SturmBounds>,
    /// JSON has no infinity: an unbounded upper bound serializes as `null`.
    #[serde(skip_serializing_if = "Option::is_none")]
    upper_infinite: Option<bool>,
}

impl<'a> ThetaReport<'a> {
    fn new(est: &'a ThetaEstimate, bounds: Option<SturmBounds>) -> Self {
        Self {
            pair: est.pair,
            d: est.d,
            t_grid: &est.t_grid,
            w: &est.w,
            raw: &est.raw,
            value: est.value,
            residual: est.fit_residual,
            order: est.order,
            low_confidence: est.low_confidence,
            upper_infinite: bounds.map(|b| !b.upper_is_finite()),
            bounds,
        }
    }
}

fn curve_csv(est: &ThetaEstimate) -> String {
    let mut out = String::from("t,W,raw_quotient\n");
    for ((t, w), r) in est.t_grid.iter().zip(&est.w).zip(&est.raw) {
        let _ = writeln!(out, "{t:?},{w:?},{r:?}");
    }
    out
}

fn pair_estimate(space: &FiniteMMS, op: &WittenOperator, pair: (usize, usize), tgrid: &str, order: usize) -> Result<ThetaEstimate> {
    let grid = parse_tgrid(tgrid)?;
    theta_plus_with_order(space, op, pair.0, pair.1, &grid, order)
}

/// Outcome of one command: the JSON result and the exit code it implies.
struct Outcome {
    result: serde_json::Value,
    code: i32,
}

fn ok(result: serde_json::Value) -> Outcome {
    Outcome { result, code: EXIT_OK }
}

fn execute(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Validate(args) => {
            let (_, space) = load_space(args)?;
            let report = space.validate();
            let code = if report.is_valid() { EXIT_OK } else { EXIT_INVALID };
            Ok(Outcome { result: json!({ "n": space.n(), "valid": report.is_valid(), "report": report }), code })
        }
        Command::Theta(args) => {
            let (model, space) = load_space(&args.input)?;
            let op = build_witten(&space)?;
            let est = pair_estimate(&space, &op, args.pair, &args.tgrid, args.order)?;
            let bounds = match &model {
                Some(m) => Some(sturm_bounds(m, label(&space, args.pair.0)?, label(&space, args.pair.1)?)?),
                None => None,
            };
            if let Some(path) = &args.csv {
                std::fs::write(path, curve_csv(&est))?;
            }
            let code = if est.low_confidence { EXIT_LOW_CONFIDENCE } else { EXIT_OK };
            Ok(Outcome { result: serde_json::to_value(ThetaReport::new(&est, bounds)).map_err(internal)?, code })
        }
        Command::ThetaStar(args) => {
            let (_, space) = load_space(&args.input)?;
            let op = build_witten(&space)?;
            let opts = ThetaStarOptions {
                t_points: args.t_points,
                window_fraction: args.window_fraction,
                order: args.order,
                workers: cli.workers,
            };
            let ts = theta_star(&space, &op, args.point, &args.radii, &opts)?;
            Ok(ok(serde_json::to_value(ts).map_err(internal)?))
        }
        Command::SturmVerify(args) => {
            let (model, space) = load_model(&args.model, args.resolution)?;
            let op = build_witten(&space)?;
            let est = pair_estimate(&space, &op, args.pair, &args.tgrid, args.order)?;
            let bounds = sturm_bounds(&model, label(&space, args.pair.0)?, label(&space, args.pair.1)?)?;
            let tol = args.tol.unwrap_or_else(|| (0.1 * est.value.abs()).max(0.05));
            let inside = bounds.contains(est.value, tol);
            let code = if inside && !est.low_confidence { EXIT_OK } else { EXIT_LOW_CONFIDENCE };
            let mut result = serde_json::to_value(ThetaReport::new(&est, Some(bounds))).map_err(internal)?;
            result["tol"] = json!(tol);
            result["within_bounds"] = json!(inside);
            Ok(Outcome { result, code })
        }
        Command::IsoGroup(args) => {
            let space = in_file(&args.space, read_space(&args.space, None))?;
            let tol = args.tol.unwrap_or_else(|| default_tolerance(&space));
            let group = enumerate_isometries_with_budget(&space, tol, args.node_budget)?;
            let lambda = rigidity_scan(&space, &group)?;
            let perms = |v: &[crate::isometry::IsometryPermutation]| v.iter().map(|p| p.perm.clone()).collect::<Vec<_>>();
            let mut result = json!({
                "order": group.order(),
                "generators": perms(&group.generators),
                "tol": tol,
                "nodes_explored": group.nodes_explored,
                // JSON has no infinity: a trivial group reports null plus the flag.
                "rigidity_lambda": lambda.is_finite().then_some(lambda),
                "rigidity_lambda_infinite": lambda.is_infinite(),
            });
            if group.order() <= MAX_LISTED_ELEMENTS {
                result["elements"] = json!(perms(&group.elements));
            }
            Ok(ok(result))
        }
        Command::BochnerBound(args) => {
            let cfg = in_file(&args.budget, KeyValues::read(&args.budget).and_then(|kv| budget_from_config(&kv)))?;
            let constants = finiteness_bound(&cfg.budget)?;
            let mut result = json!({ "budget": cfg.budget, "constants": constants });
            if cfg.delta1.is_some() || cfg.c_g.is_some() || cfg.budget.e.is_some() {
                result["refined"] = serde_json::to_value(refined_delta(&cfg.budget, cfg.delta1, cfg.c_g)?).map_err(internal)?;
            }
            Ok(ok(result))
        }
        Command::CdCheck(args) => {
            let (model, space) = load_model(&args.model, args.resolution)?;
            let op = build_witten(&space)?;
            let mu0 = heat_flow(&op, &dirac(&space, args.pair.0)?, args.smoothing)?.density;
            let mu1 = heat_flow(&op, &dirac(&space, args.pair.1)?, args.smoothing)?.density;
            let report = cd_convexity_check(&space, &model, &mu0, &mu1, args.curvature_k, &args.ts)?;
            Ok(ok(serde_json::to_value(report).map_err(internal)?))
        }
    }
}

fn internal(e: serde_json::Error) -> Error {
    Error::Internal(format!("serialization failed: {e}"))
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Internal(_) => EXIT_INTERNAL,
        Error::Coalesced { .. } | Error::BudgetExceeded { .. } => EXIT_LOW_CONFIDENCE,
        _ => EXIT_INVALID,
    }
}

/// Runs one parsed command and returns its exit code.
pub fn run(cli: &Cli) -> i32 {
    let outcome = match execute(cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let report = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "config": cli,
        "result": outcome.result,
    });
    let mut text = serde_json::to_string_pretty(&report).expect("JSON values always serialize");
    text.push('\n');
    let written = match &cli.out {
        Some(path) => std::fs::write(path, text),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush())
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return EXIT_INVALID;
    }
    outcome.code
}

/// Parses arguments (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let _ = e.print();
            match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_INVALID,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tgrid_forms() {
        let g = parse_tgrid("geometric:1e-3,1e-1,3").unwrap();
        assert_eq!(g.len(), 3);
        assert!((g[1] - 1e-2).abs() < 1e-15);
        assert_eq!(parse_tgrid("0.1,0.2").unwrap(), vec![0.1, 0.2]);
        assert!(parse_tgrid("geometric:1,2").is_err());
    }

    #[test]
    fn pair_parsing() {
        assert_eq!(parse_pair("3, 7"), Ok((3, 7)));
        assert!(parse_pair("3").is_err());
    }
}
