//! `lab`: command-line front end for the martinet-lab experiments.
//!
//! Exit codes: 0 success, 1 failure (including failed verify suites), 2 bad
//! input, 3 a feasible competitor shorter than the reference was found.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` rejects NaN on purpose

mod output;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use martinet_lab::flow::{shoot_to, ShootConfig};
use martinet_lab::geometry::{detect_loops, loop_stats, rado_check, sign_partition, total_turning_closed, weighted_area_line, ClosedCurve, GeometryExport};
use martinet_lab::io::{fmt_f64, CurveDocument};
use martinet_lab::levelset::{asymptotic_coefficient, calibrate_k_fit, log_grid, sweep, write_sweep_csv};
use martinet_lab::martinet::{gamma_length, LengthMode};
use martinet_lab::optimizer::{branch_compare, run_probe, CompetitorProblem, OptimizerConfig};
use martinet_lab::verify::{run_suite, Suite};
use martinet_lab::{LabError, StructureParams};

use output::{sha256_hex, Outputs, RunManifest};

#[derive(Debug, Parser)]
#[command(name = "lab", version, about = "Martinet geodesic laboratory")]
struct Cli {
    /// Exponent b of the structure (odd, ≥ 5).
    #[arg(long, global = true)]
    b: Option<u32>,
    /// Run directory; results go to stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// JSON configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Length of the reference curve: quadrature, asymptotic, remainder.
    Gamma {
        #[arg(long)]
        s: f64,
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        eps: Vec<f64>,
    },
    /// Level-set geodesic sweep over (ε, ζ).
    Levelset {
        #[arg(long, default_value_t = 0.0)]
        s: f64,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        eps: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        zeta: Vec<f64>,
    },
    /// Minimality probe against the reference curve.
    Minimize {
        #[arg(long)]
        s: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        mirror: bool,
        #[arg(long)]
        seeds: Option<usize>,
        #[arg(long)]
        nodes: Option<usize>,
        /// Skip the shooting sweep.
        #[arg(long)]
        no_shooting: bool,
    },
    /// Single shooting run for the competitor endpoints and holonomy.
    Shoot {
        #[arg(long)]
        s: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long, allow_hyphen_values = true)]
        theta: f64,
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
        /// Initial guess for the length; defaults to the reference length.
        #[arg(long)]
        length: Option<f64>,
        #[arg(long)]
        mirror: bool,
    },
    /// Loops, sign partition and (for closed input) area checks of a curve file.
    Geometry {
        /// Curve as JSON document or `t,x1,x2` CSV.
        #[arg(long)]
        input: PathBuf,
    },
    /// Invariant suites.
    Verify {
        #[arg(value_parser = parse_suite, default_value = "all")]
        suite: Suite,
    },
    /// Branching symmetry report.
    Branch {
        #[arg(long)]
        s: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        nodes: Option<usize>,
    },
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|e: LabError| e.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct LabConfig {
    b: u32,
    eps_grid: Vec<f64>,
    s_grid: Vec<f64>,
    zeta_grid: Vec<f64>,
    optimizer: OptimizerConfig,
    out_dir: Option<PathBuf>,
}

impl Default for LabConfig {
    fn default() -> Self {
        Self {
            b: 5,
            eps_grid: vec![0.05, 0.1, 0.2],
            s_grid: vec![0.0],
            zeta_grid: log_grid(1e-12, 1e-6, 13),
            optimizer: OptimizerConfig::default(),
            out_dir: None,
        }
    }
}

enum CliError {
    Usage(String),
    Failure(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast_ref::<LabError>() {
            Some(le) if is_usage(le) => CliError::Usage(format!("{e:#}")),
            _ => CliError::Failure(e),
        }
    }
}

impl From<LabError> for CliError {
    fn from(e: LabError) -> Self {
        if is_usage(&e) {
            CliError::Usage(e.to_string())
        } else {
            CliError::Failure(e.into())
        }
    }
}

fn is_usage(e: &LabError) -> bool {
    matches!(
        e,
        LabError::InvalidExponent(_) | LabError::InvalidParameter(_) | LabError::InvalidCurve(_) | LabError::Json(_) | LabError::Csv(_)
    )
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

struct Ctx {
    cfg: LabConfig,
    params: StructureParams,
    out: Option<PathBuf>,
    seed: u64,
    format: Option<Format>,
    input_hashes: BTreeMap<String, String>,
}

impl Ctx {
    fn manifest(&self, command: &str, params: BTreeMap<String, Value>) -> RunManifest {
        RunManifest {
            command: command.into(),
            params,
            rng_seed: self.seed,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            timestamp: chrono::Utc::now().to_rfc3339(),
            input_hashes: self.input_hashes.clone(),
            output_files: Vec::new(),
        }
    }

    fn hash_input(&mut self, path: &Path) -> Result<Vec<u8>, CliError> {
        let bytes = fs::read(path).map_err(|e| usage(format!("reading {}: {e}", path.display())))?;
        self.input_hashes.insert(path.display().to_string(), sha256_hex(&bytes));
        Ok(bytes)
    }
}

fn params_map(pairs: &[(&str, Value)]) -> BTreeMap<String, Value> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Failure(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    if let Ok(v) = std::env::var("LAB_THREADS") {
        let n: usize = v.parse().map_err(|_| usage(format!("LAB_THREADS must be a positive integer, got {v:?}")))?;
        if n == 0 {
            return Err(usage("LAB_THREADS must be positive"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Failure(e.into()))?;
    }
    let mut input_hashes = BTreeMap::new();
    let cfg = match &cli.config {
        Some(path) => {
            let bytes = fs::read(path).map_err(|e| usage(format!("reading {}: {e}", path.display())))?;
            input_hashes.insert(path.display().to_string(), sha256_hex(&bytes));
            serde_json::from_slice::<LabConfig>(&bytes).map_err(|e| usage(format!("config {}: {e}", path.display())))?
        }
        None => LabConfig::default(),
    };
    let b = cli.b.unwrap_or(cfg.b);
    let params = StructureParams::new(b)?;
    let seed = cli.seed.unwrap_or(cfg.optimizer.rng_seed);
    let out = cli.out.clone().or_else(|| cfg.out_dir.clone());
    let mut ctx = Ctx { cfg, params, out, seed, format: cli.format, input_hashes };
    match cli.command {
        Command::Gamma { s, eps } => cmd_gamma(&ctx, s, &eps),
        Command::Levelset { s, eps, zeta } => cmd_levelset(&ctx, s, eps, zeta),
        Command::Minimize { s, eps, mirror, seeds, nodes, no_shooting } => cmd_minimize(&ctx, s, eps, mirror, seeds, nodes, !no_shooting),
        Command::Shoot { s, eps, theta, lambda, length, mirror } => cmd_shoot(&ctx, s, eps, theta, lambda, length, mirror),
        Command::Geometry { input } => cmd_geometry(&mut ctx, &input),
        Command::Verify { suite } => cmd_verify(&ctx, suite),
        Command::Branch { s, eps, nodes } => cmd_branch(&ctx, s, eps, nodes),
    }
}

fn check_positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(usage(format!("--{name} must be positive and finite, got {v}")))
    }
}

fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Vec<u8> {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out.into_bytes()
}

fn cmd_gamma(ctx: &Ctx, s: f64, eps: &[f64]) -> Result<u8, CliError> {
    if !(s >= 0.0) {
        return Err(usage(format!("--s must be nonnegative, got {s}")));
    }
    for &e in eps {
        check_positive("eps", e)?;
    }
    let p = ctx.params;
    let expo = 2.0 * p.q() - 1.0;
    let header = ["b", "s", "eps", "L_quadrature", "L_asymptotic", "remainder", "remainder_scaled"];
    let mut rows = Vec::new();
    let mut json_rows = Vec::new();
    for &e in eps {
        let lq = gamma_length(p, s, e, LengthMode::Quadrature)?;
        let la = gamma_length(p, s, e, LengthMode::Asymptotic)?;
        let rem = lq - la;
        let scaled = rem / e.powf(expo);
        rows.push(vec![p.b().to_string(), fmt_f64(s), fmt_f64(e), fmt_f64(lq), fmt_f64(la), fmt_f64(rem), fmt_f64(scaled)]);
        json_rows.push(json!({"b": p.b(), "s": s, "eps": e, "L_quadrature": lq, "L_asymptotic": la, "remainder": rem, "remainder_scaled": scaled}));
    }
    let mut outs = Outputs::default();
    match ctx.format {
        Some(Format::Json) => outs.add_json("result.json", &json_rows)?,
        _ => outs.add("result.csv", csv_bytes(&header, &rows)),
    }
    let m = ctx.manifest("gamma", params_map(&[("b", json!(p.b())), ("s", json!(s)), ("eps", json!(eps))]));
    outs.finish(ctx.out.as_deref(), m)?;
    Ok(0)
}

fn cmd_levelset(ctx: &Ctx, s: f64, eps: Vec<f64>, zeta: Vec<f64>) -> Result<u8, CliError> {
    let eps = if eps.is_empty() { ctx.cfg.eps_grid.clone() } else { eps };
    let zeta = if zeta.is_empty() { ctx.cfg.zeta_grid.clone() } else { zeta };
    if eps.is_empty() || zeta.is_empty() {
        return Err(usage("levelset needs nonempty ε and ζ grids"));
    }
    if !(s >= 0.0) {
        return Err(usage(format!("--s must be nonnegative, got {s}")));
    }
    for &e in &eps {
        check_positive("eps", e)?;
    }
    for &z in &zeta {
        check_positive("zeta", z)?;
    }
    let p = ctx.params;
    let rows = sweep(p, |_| s, &eps, &zeta);
    let cal = calibrate_k_fit(p)?;
    let coef = asymptotic_coefficient(p);
    let max_dev = rows
        .iter()
        .filter(|r| r.status == "ok" && r.xi < 1e-3)
        .map(|r| (r.ratio / coef - 1.0).abs())
        .fold(0.0f64, f64::max);
    let min_deficit = rows.iter().filter(|r| r.status == "ok").map(|r| r.deficit).fold(f64::INFINITY, f64::min);
    let summary = json!({
        "k_fit": cal.k_fit,
        "k_fit_spread": cal.spread(),
        "calibration_points": cal.points,
        "ratio_limit": coef,
        "max_ratio_deviation": max_dev,
        "min_deficit": min_deficit,
        "rows": rows.len(),
        "rows_ok": rows.iter().filter(|r| r.status == "ok").count(),
    });
    let mut outs = Outputs::default();
    match ctx.format {
        Some(Format::Json) => outs.add_json("result.json", &rows)?,
        _ => {
            let mut buf = Vec::new();
            write_sweep_csv(&rows, &mut buf)?;
            outs.add("result.csv", buf);
        }
    }
    outs.add_json("summary.json", &summary)?;
    if ctx.out.is_none() {
        eprintln!("{}", serde_json::to_string(&summary).map_err(anyhow::Error::from)?);
    }
    let m = ctx.manifest(
        "levelset",
        params_map(&[("b", json!(p.b())), ("s", json!(s)), ("eps", json!(eps)), ("zeta", json!(zeta)), ("k_fit", json!(cal.k_fit))]),
    );
    outs.finish(ctx.out.as_deref(), m)?;
    Ok(0)
}

fn optimizer_cfg(ctx: &Ctx, seeds: Option<usize>, nodes: Option<usize>) -> Result<OptimizerConfig, CliError> {
    let mut cfg = ctx.cfg.optimizer.clone();
    cfg.rng_seed = ctx.seed;
    if let Some(n) = seeds {
        cfg.n_seeds = n;
    }
    if let Some(n) = nodes {
        cfg.n_nodes = n;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_minimize(ctx: &Ctx, s: f64, eps: f64, mirror: bool, seeds: Option<usize>, nodes: Option<usize>, shooting: bool) -> Result<u8, CliError> {
    check_positive("s", s)?;
    check_positive("eps", eps)?;
    let cfg = optimizer_cfg(ctx, seeds, nodes)?;
    let problem = CompetitorProblem::new(ctx.params, s, eps, mirror)?;
    for w in &problem.warnings {
        eprintln!("warning: {w}");
    }
    let (report, direct, _) = run_probe(&problem, &cfg, &ShootConfig::default(), shooting)?;
    let diag = report.diagnostics.as_ref().expect("probe fills diagnostics");
    if !diag.merit_monotone {
        return Err(CliError::Failure(anyhow::anyhow!("merit increased in an inner solve")));
    }
    let mut outs = Outputs::default();
    outs.add_json("result.json", &report)?;
    for r in direct.iter().filter(|r| r.feasible || r.seed.is_none()) {
        let name = format!("curves/{}_{}.json", r.init, r.seed.map_or("base".to_string(), |s| s.to_string()));
        outs.add_json(name, &CurveDocument::from_planar(ctx.params.b(), &r.curve))?;
    }
    let m = ctx.manifest(
        "minimize",
        params_map(&[
            ("b", json!(ctx.params.b())),
            ("s", json!(s)),
            ("eps", json!(eps)),
            ("mirrored", json!(mirror)),
            ("optimizer", serde_json::to_value(&cfg).map_err(anyhow::Error::from)?),
            ("shooting", json!(shooting)),
        ]),
    );
    outs.finish(ctx.out.as_deref(), m)?;
    eprintln!("{}", report.verdict);
    Ok(if report.beaten { 3 } else { 0 })
}

fn cmd_shoot(ctx: &Ctx, s: f64, eps: f64, theta: f64, lambda: f64, length: Option<f64>, mirror: bool) -> Result<u8, CliError> {
    check_positive("s", s)?;
    check_positive("eps", eps)?;
    if !theta.is_finite() || !lambda.is_finite() {
        return Err(usage("--theta and --lambda must be finite"));
    }
    let problem = CompetitorProblem::new(ctx.params, s, eps, mirror)?;
    let t0 = length.unwrap_or(problem.gamma_length);
    check_positive("length", t0)?;
    let sol = shoot_to(ctx.params, &problem.shoot_target(), (theta, lambda, t0), &ShootConfig::default())?;
    let summary = json!({
        "theta0": sol.theta0,
        "lambda": sol.lambda,
        "t_final": sol.t_final,
        "endpoint_residual": sol.endpoint_residual,
        "holonomy_residual": sol.holonomy_residual,
        "converged": sol.converged,
        "iterations": sol.iterations,
        "gap": sol.t_final - problem.gamma_length,
    });
    let mut outs = Outputs::default();
    outs.add_json("result.json", &summary)?;
    outs.add_json("curves/trace.json", &CurveDocument::from_trace(ctx.params.b(), &sol.trace))?;
    let m = ctx.manifest(
        "shoot",
        params_map(&[("b", json!(ctx.params.b())), ("s", json!(s)), ("eps", json!(eps)), ("theta", json!(theta)), ("lambda", json!(lambda)), ("length", json!(t0)), ("mirrored", json!(mirror))]),
    );
    outs.finish(ctx.out.as_deref(), m)?;
    Ok(if sol.converged { 0 } else { 1 })
}

fn cmd_geometry(ctx: &mut Ctx, input: &Path) -> Result<u8, CliError> {
    let bytes = ctx.hash_input(input)?;
    let doc = if input.extension().is_some_and(|e| e == "csv") {
        CurveDocument::read_csv(ctx.params.b(), false, bytes.as_slice())?
    } else {
        CurveDocument::read_json(bytes.as_slice())?
    };
    let curve = doc.to_planar()?;
    let p = ctx.params;
    let loops = detect_loops(&curve)?;
    let sp = sign_partition(p, &curve, None)?;
    let stats: Vec<_> = loops.iter().filter_map(|l| loop_stats(p, &curve, l).ok()).collect();
    let export = GeometryExport { loops, taus: sp.taus, signs: sp.signs };
    let mut result = serde_json::to_value(&export).map_err(anyhow::Error::from)?;
    result["loop_stats"] = serde_json::to_value(&stats).map_err(anyhow::Error::from)?;
    if curve.start().dist(&curve.end()) <= martinet_lab::geometry::TOL_CLOSE {
        let closed = ClosedCurve::new(curve.clone())?;
        let r = rado_check(p, &closed);
        result["weighted_area"] = json!(weighted_area_line(p, &closed));
        result["rado"] = serde_json::to_value(r).map_err(anyhow::Error::from)?;
        result["total_turning"] = json!(total_turning_closed(&closed).ok());
    }
    let mut outs = Outputs::default();
    outs.add_json("result.json", &result)?;
    let m = ctx.manifest("geometry", params_map(&[("b", json!(p.b())), ("input", json!(input.display().to_string()))]));
    outs.finish(ctx.out.as_deref(), m)?;
    Ok(0)
}

fn cmd_verify(ctx: &Ctx, suite: Suite) -> Result<u8, CliError> {
    let reports = run_suite(suite);
    let mut text = String::new();
    for r in &reports {
        for c in &r.checks {
            text.push_str(&format!(
                "{} [{}] {}: measured {:e}, threshold {:e}, margin {:e}\n",
                if c.passed { "PASS" } else { "FAIL" },
                r.suite,
                c.name,
                c.measured,
                c.threshold,
                c.margin
            ));
        }
    }
    let ok = reports.iter().all(|r| r.passed());
    text.push_str(if ok { "all checks passed\n" } else { "some checks failed\n" });
    let mut outs = Outputs::default();
    match ctx.format {
        Some(Format::Json) => outs.add_json("result.json", &reports)?,
        _ => {
            outs.add("result.txt", text.clone().into_bytes());
            outs.add_json("result.json", &reports)?;
        }
    }
    if ctx.out.is_some() {
        print!("{text}");
    }
    let m = ctx.manifest("verify", params_map(&[("suite", json!(suite.to_string()))]));
    outs.finish(ctx.out.as_deref(), m)?;
    Ok(if ok { 0 } else { 1 })
}

fn cmd_branch(ctx: &Ctx, s: f64, eps: f64, nodes: Option<usize>) -> Result<u8, CliError> {
    check_positive("s", s)?;
    check_positive("eps", eps)?;
    let cfg = optimizer_cfg(ctx, None, nodes)?;
    let problem = CompetitorProblem::new(ctx.params, s, eps, false)?;
    let report = branch_compare(&problem, &cfg).context("branch comparison")?;
    let mut outs = Outputs::default();
    outs.add_json("result.json", &report)?;
    let m = ctx.manifest("branch", params_map(&[("b", json!(ctx.params.b())), ("s", json!(s)), ("eps", json!(eps)), ("n_nodes", json!(cfg.n_nodes))]));
    outs.finish(ctx.out.as_deref(), m)?;
    Ok(if report.ok { 0 } else { 1 })
}
