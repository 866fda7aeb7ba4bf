//! `hablab <command> --scenario FILE [flags]`
//!
//! Every run writes its artifacts plus a single `manifest.json` into the
//! output directory. Exit codes: 0 success, 1 output I/O failure, 2 invalid
//! input, 3 solver failure. Errors are reported on stderr as one JSON object.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::analysis::{
    contour_table, default_contour_c_grid, default_contour_deltas, find_extinction_threshold_with,
    log_grid, probe_decay_rate, sweep_c_with, ThresholdOptions,
};
use crate::discretization::{
    assemble_destruction_laplacian, assemble_neumann_laplacian, build_grid, DiscreteDomain,
};
use crate::dynamics::{
    default_initial_condition, evolve, steady_state_with, Classification, EvolutionProblem,
    SteadyStateOptions,
};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::landscape::{Landscape, Rate};
use crate::spectral::{
    lambda_degradation, lambda_destruction, mu_principal, EigenOptions, EigenResult,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

pub const THREADS_ENV: &str = "HABLAB_THREADS";

const DEFAULT_DT: f64 = 0.01;
const DEFAULT_T_EVOLVE: f64 = 100.0;
const DEFAULT_T_DECAY: f64 = 200.0;

#[derive(Debug, Parser)]
#[command(
    name = "hablab",
    version,
    about = "Reaction-diffusion populations on degraded landscapes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Principal eigenpair of d·Δ + m_c for each rate c.
    Eig {
        #[command(flatten)]
        common: Common,
        /// Also dump the stiffness matrices (Matrix Market).
        #[arg(long)]
        matrix_market: bool,
    },
    /// Positive principal eigenvalue of the indefinite weight problem.
    Lambda {
        #[command(flatten)]
        common: Common,
    },
    /// Steady state of the logistic problem for each rate c.
    Steady {
        #[command(flatten)]
        common: Common,
    },
    /// Time series from the default initial data for each rate c.
    Evolve {
        #[command(flatten)]
        common: Common,
        /// Record norms every this many steps.
        #[arg(long, default_value_t = 10)]
        sample_every: usize,
        /// Snapshot times (defaults to the final time).
        #[arg(long, value_delimiter = ',')]
        snapshot_times: Vec<f64>,
    },
    /// Locate the extinction threshold c0.
    Threshold {
        #[command(flatten)]
        common: Common,
        /// Fit the decay rate at this multiple of c0.
        #[arg(long)]
        decay_probe: Option<f64>,
        /// Start of the decay fitting window.
        #[arg(long, default_value_t = 5.0)]
        window_start: f64,
    },
    /// Eigenvalue and steady-state convergence table over c.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Remaining-population ratio over (habitat removed, c).
    Contour {
        #[command(flatten)]
        common: Common,
        /// Half-widths of the centred degraded region.
        #[arg(long, value_delimiter = ',')]
        deltas: Vec<f64>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Eig { .. } => "eig",
            Command::Lambda { .. } => "lambda",
            Command::Steady { .. } => "steady",
            Command::Evolve { .. } => "evolve",
            Command::Threshold { .. } => "threshold",
            Command::Sweep { .. } => "sweep",
            Command::Contour { .. } => "contour",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Eig { common, .. }
            | Command::Lambda { common }
            | Command::Steady { common }
            | Command::Evolve { common, .. }
            | Command::Threshold { common, .. }
            | Command::Sweep { common }
            | Command::Contour { common, .. } => common,
        }
    }
}

#[derive(Debug, Args)]
pub struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    pub scenario: PathBuf,
    /// Output directory [default: hablab-out/<command>].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Grid nodes per axis [default: 2001 in 1D, 201 in 2D].
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t_final: Option<f64>,
    /// Degradation rates, comma separated; `inf` is the destruction limit.
    #[arg(long, value_delimiter = ',')]
    pub c: Vec<Rate>,
    /// Diffusion coefficient.
    #[arg(long)]
    pub d: Option<f64>,
    /// Print the run summary as JSON on stdout.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub scenario: String,
    pub scenario_sha256: String,
    pub out_dir: String,
    pub parameters: Value,
    /// Scenario after command-line overrides.
    pub resolved_scenario: String,
    pub files: Vec<String>,
}

struct Context {
    command: &'static str,
    scenario_path: PathBuf,
    scenario_hash: String,
    landscape: Landscape,
    nodes: usize,
    dt: f64,
    t_final: Option<f64>,
    out: PathBuf,
}

impl Context {
    fn resolve(command: &Command) -> Result<Self> {
        let common = command.common();
        let text = fs::read_to_string(&common.scenario).map_err(|e| {
            Error::Parse(format!(
                "cannot read scenario {}: {e}",
                common.scenario.display()
            ))
        })?;
        let mut landscape = Landscape::from_toml_str(&text)?;
        if let Some(d) = common.d {
            landscape = landscape.with_diffusion(d)?;
        }
        if !common.c.is_empty() {
            landscape = landscape.with_c_values(common.c.clone())?;
        }
        let nodes = common
            .nodes
            .unwrap_or(if landscape.dim() == 1 { 2001 } else { 201 });
        let dt = common.dt.unwrap_or(DEFAULT_DT);
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "dt must be positive, got {dt}"
            )));
        }
        if let Some(t) = common.t_final {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "t-final must be positive, got {t}"
                )));
            }
        }
        Ok(Context {
            command: command.name(),
            scenario_path: common.scenario.clone(),
            scenario_hash: hex::encode(Sha256::digest(text.as_bytes())),
            landscape,
            nodes,
            dt,
            t_final: common.t_final,
            out: common
                .out
                .clone()
                .unwrap_or_else(|| Path::new("hablab-out").join(command.name())),
        })
    }

    fn d(&self) -> f64 {
        self.landscape.diffusion()
    }

    fn rates(&self) -> Result<Vec<Rate>> {
        let rates = self.landscape.c_values().to_vec();
        if rates.is_empty() {
            return Err(Error::InvalidParameter(
                "no degradation rate given: set `c` in the scenario or pass --c".into(),
            ));
        }
        Ok(rates)
    }

    fn grid(&self) -> Result<DiscreteDomain> {
        build_grid(&self.landscape, self.nodes)
    }

    fn steady_options(&self) -> SteadyStateOptions {
        SteadyStateOptions {
            dt: self.dt,
            ..SteadyStateOptions::default()
        }
    }

    fn parameters(&self, extra: Value) -> Value {
        let eig = EigenOptions::default();
        let ss = self.steady_options();
        let th = ThresholdOptions::default();
        let mut p = json!({
            "nodes_per_axis": self.nodes,
            "dt": self.dt,
            "t_final": self.t_final,
            "d": self.d(),
            "c": self.landscape.c_values().iter().map(|r| rate_json(*r)).collect::<Vec<_>>(),
            "tolerances": {
                "eigen_residual": eig.residual_tol,
                "eigen_max_iterations": eig.max_iterations,
                "lambda_root": eig.secant_tol,
                "march": ss.march_tol,
                "max_march_time": ss.max_march_time,
                "newton": ss.newton_tol,
                "extinction": ss.extinction_tol,
                "threshold_rel_width": th.rel_width,
                "threshold_mu": th.mu_tol,
            },
        });
        if let (Value::Object(map), Value::Object(more)) = (&mut p, extra) {
            map.extend(more);
        }
        p
    }
}

/// Artifacts of one command, written by [`Output::write`] once everything succeeded.
struct Output {
    files: Vec<(String, Vec<u8>)>,
    summary: Value,
    parameters: Value,
}

impl Output {
    fn new(summary: Value, parameters: Value) -> Self {
        Output {
            files: Vec::new(),
            summary,
            parameters,
        }
    }

    fn add(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        self.files.push((name.into(), bytes));
    }

    fn add_json(&mut self, name: impl Into<String>, v: &Value) {
        let mut bytes = serde_json::to_vec_pretty(v).expect("json values serialize");
        bytes.push(b'\n');
        self.add(name, bytes);
    }

    fn write(self, ctx: &Context) -> Result<Value> {
        fs::create_dir_all(&ctx.out)?;
        let mut names = Vec::with_capacity(self.files.len());
        for (name, bytes) in &self.files {
            fs::write(ctx.out.join(name), bytes)?;
            names.push(name.clone());
        }
        let manifest = RunManifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: ctx.command.into(),
            scenario: ctx.scenario_path.display().to_string(),
            scenario_sha256: ctx.scenario_hash.clone(),
            out_dir: ctx.out.display().to_string(),
            parameters: self.parameters,
            resolved_scenario: ctx.landscape.to_toml_string(),
            files: names,
        };
        let mut bytes = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
        bytes.push(b'\n');
        fs::write(ctx.out.join("manifest.json"), bytes)?;
        Ok(self.summary)
    }
}

fn rate_json(r: Rate) -> Value {
    match r {
        Rate::Finite(c) => json!(c),
        Rate::Infinite => json!("inf"),
    }
}

fn num(v: f64) -> String {
    format!("{v:e}")
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(&row).map_err(io)?;
    }
    w.into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
}

fn coord_header(dim: usize) -> Vec<&'static str> {
    ["x[L]", "y[L]"][..dim].to_vec()
}

fn nodal_csv(g: &DiscreteDomain, f: &Field, value_col: &str) -> Result<Vec<u8>> {
    let mut header = coord_header(g.dim());
    header.push(value_col);
    let rows = (0..g.len()).map(|i| {
        let mut row: Vec<String> = g.coord(i).into_iter().map(num).collect();
        row.push(num(f.values()[i]));
        row
    });
    csv_bytes(&header, rows)
}

fn classification_str(c: Classification) -> &'static str {
    match c {
        Classification::Persistent => "persistent",
        Classification::Extinct => "extinct",
    }
}

fn eigen_header(ctx: &Context, rate: Option<Rate>, r: &EigenResult) -> Value {
    json!({
        "kind": r.kind.label(),
        "c": rate.map(rate_json),
        "d": ctx.d(),
        "value": r.value,
        "residual": r.residual,
        "normalization": r.normalization,
        "iterations": r.iterations,
    })
}

fn cmd_eig(ctx: &Context, matrix_market: bool) -> Result<Output> {
    let g = ctx.grid()?;
    let rates = ctx.rates()?;
    let results = rates
        .par_iter()
        .map(|&r| mu_principal(&g, ctx.d(), r))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Output::new(
        Value::Null,
        ctx.parameters(json!({ "matrix_market": matrix_market })),
    );
    let mut summary = Vec::new();
    for (i, (rate, res)) in rates.iter().zip(&results).enumerate() {
        let header = eigen_header(ctx, Some(*rate), res);
        out.add(
            format!("eigen_{i:03}.csv"),
            nodal_csv(&g, &res.eigenfunction, "phi[-]")?,
        );
        out.add_json(format!("eigen_{i:03}.json"), &header);
        summary.push(header);
    }
    if matrix_market {
        out.add(
            "neumann_stiffness.mtx",
            assemble_neumann_laplacian(&g, ctx.d())
                .to_matrix_market()
                .into_bytes(),
        );
        if g.has_degraded_region() {
            out.add(
                "destruction_stiffness.mtx",
                assemble_destruction_laplacian(&g, ctx.d())
                    .to_matrix_market()
                    .into_bytes(),
            );
        }
    }
    out.summary = json!({ "command": "eig", "results": summary });
    Ok(out)
}

fn cmd_lambda(ctx: &Context) -> Result<Output> {
    let g = ctx.grid()?;
    let rates = ctx.rates()?;
    let results = rates
        .par_iter()
        .map(|&r| match r {
            Rate::Finite(c) => lambda_degradation(&g, c),
            Rate::Infinite => lambda_destruction(&g),
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = Output::new(Value::Null, ctx.parameters(json!({})));
    let mut summary = Vec::new();
    for (i, (rate, res)) in rates.iter().zip(&results).enumerate() {
        let mut header = eigen_header(ctx, Some(*rate), res);
        header["critical_d"] = json!(1.0 / res.value);
        out.add(
            format!("lambda_{i:03}.csv"),
            nodal_csv(&g, &res.eigenfunction, "psi[-]")?,
        );
        out.add_json(format!("lambda_{i:03}.json"), &header);
        summary.push(header);
    }
    out.summary = json!({ "command": "lambda", "results": summary });
    Ok(out)
}

fn cmd_steady(ctx: &Context) -> Result<Output> {
    let g = ctx.grid()?;
    let rates = ctx.rates()?;
    let opts = ctx.steady_options();
    let results = rates
        .par_iter()
        .map(|&r| steady_state_with(&g, ctx.d(), r.into(), &opts))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Output::new(Value::Null, ctx.parameters(json!({})));
    let mut summary = Vec::new();
    for (i, (rate, ss)) in rates.iter().zip(&results).enumerate() {
        let header = json!({
            "c": rate_json(*rate),
            "d": ctx.d(),
            "classification": classification_str(ss.classification),
            "residual": ss.residual,
            "mu1": ss.mu1,
            "march_steps": ss.march_steps,
            "newton_iterations": ss.newton_iterations,
            "newton_fallback": ss.newton_fallback,
            "mean": ss.field.mean(&g),
            "sup": ss.field.sup_norm(),
            "min_habitat": ss.field.min_on_habitat(&g),
        });
        out.add(
            format!("steady_{i:03}.csv"),
            nodal_csv(&g, &ss.field, "u[density]")?,
        );
        out.add_json(format!("steady_{i:03}.json"), &header);
        summary.push(header);
    }
    out.summary = json!({ "command": "steady", "results": summary });
    Ok(out)
}

fn cmd_evolve(ctx: &Context, sample_every: usize, snapshot_times: &[f64]) -> Result<Output> {
    let g = ctx.grid()?;
    let rates = ctx.rates()?;
    let t_final = ctx.t_final.unwrap_or(DEFAULT_T_EVOLVE);
    let snapshots = if snapshot_times.is_empty() {
        vec![t_final]
    } else {
        snapshot_times.to_vec()
    };
    let u0 = default_initial_condition(&g);
    let results = rates
        .par_iter()
        .map(|&r| {
            let mut p = EvolutionProblem::new(&g, ctx.d(), r.into(), u0.clone(), ctx.dt, t_final)?;
            p.sample_every = sample_every;
            p.snapshot_times = snapshots.clone();
            p.validate()?;
            evolve(&p)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = Output::new(
        Value::Null,
        ctx.parameters(json!({
            "t_final": t_final,
            "sample_every": sample_every,
            "snapshot_times": snapshots,
            "initial_condition": "0.5 where dist(x, B) > 1, else 0",
        })),
    );
    let mut summary = Vec::new();
    for (i, (rate, ts)) in rates.iter().zip(&results).enumerate() {
        let rows = (0..ts.len()).map(|k| {
            vec![
                num(ts.times[k]),
                num(ts.sup_norm[k]),
                num(ts.l2_norm[k]),
                num(ts.mean[k]),
            ]
        });
        out.add(
            format!("timeseries_{i:03}.csv"),
            csv_bytes(
                &[
                    "t[T]",
                    "sup[density]",
                    "l2[density*L^(dim/2)]",
                    "mean[density]",
                ],
                rows,
            )?,
        );
        let mut header = vec!["t[T]"];
        header.extend(coord_header(g.dim()));
        header.push("u[density]");
        let grid = &g;
        let rows = ts.snapshots.iter().flat_map(|(t, f)| {
            (0..grid.len()).map(move |n| {
                let mut row = vec![num(*t)];
                row.extend(grid.coord(n).into_iter().map(num));
                row.push(num(f.values()[n]));
                row
            })
        });
        out.add(format!("snapshots_{i:03}.csv"), csv_bytes(&header, rows)?);
        let entry = json!({
            "c": rate_json(*rate),
            "samples": ts.len(),
            "final_sup": ts.sup_norm.last(),
            "final_mean": ts.mean.last(),
            "clipped_total": ts.clipped_total,
        });
        out.add_json(format!("timeseries_{i:03}.json"), &entry);
        summary.push(entry);
    }
    out.summary = json!({ "command": "evolve", "results": summary });
    Ok(out)
}

fn cmd_threshold(ctx: &Context, decay_probe: Option<f64>, window_start: f64) -> Result<Output> {
    let g = ctx.grid()?;
    let mut report = find_extinction_threshold_with(&g, ctx.d(), &ThresholdOptions::default())?;
    let t_final = ctx.t_final.unwrap_or(DEFAULT_T_DECAY);
    if let (Some(factor), Some(c0)) = (decay_probe, report.c0) {
        if !(factor.is_finite() && factor > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "decay probe factor must exceed 1, got {factor}"
            )));
        }
        report.decay_rate = Some(probe_decay_rate(
            &g,
            ctx.d(),
            factor * c0,
            ctx.dt,
            t_final,
            (window_start, t_final),
        )?);
    }
    let summary = json!({
        "exists": report.exists,
        "c0": report.c0,
        "mu_inf": report.mu_infinity,
        "c_star": report.c_star_lower_bound,
        "d": ctx.d(),
        "bracket": report.bracket,
        "iterations": report.iterations,
        "decay_rate": report.decay_rate,
    });
    let mut out = Output::new(
        summary.clone(),
        ctx.parameters(json!({
            "decay_probe": decay_probe,
            "decay_window": [window_start, t_final],
        })),
    );
    out.add_json("threshold.json", &summary);
    Ok(out)
}

fn cmd_sweep(ctx: &Context) -> Result<Output> {
    let g = ctx.grid()?;
    let mut cs: Vec<f64> = ctx
        .landscape
        .c_values()
        .iter()
        .filter_map(|r| r.finite())
        .collect();
    if cs.is_empty() {
        cs = log_grid(0, 6, 1);
    }
    let report = sweep_c_with(&g, ctx.d(), &cs, &ctx.steady_options())?;
    let rows = report.rows.iter().map(|r| {
        vec![
            num(r.c),
            num(r.mu),
            r.lambda.map(num).unwrap_or_default(),
            num(r.steady_gap),
            num(r.eigenfunction_gap),
            num(r.mean_density),
            classification_str(r.classification).to_string(),
        ]
    });
    let csv = csv_bytes(
        &[
            "c[1/T]",
            "mu[1/T]",
            "lambda[1/L^2]",
            "steady_gap[density]",
            "eigenfunction_gap[-]",
            "mean_density[density]",
            "classification",
        ],
        rows,
    )?;
    let summary = json!({
        "d": ctx.d(),
        "c": cs,
        "limit": report.limit,
        "mu_gap_orders": report.mu_gap_orders,
    });
    let mut out = Output::new(summary.clone(), ctx.parameters(json!({ "c": cs })));
    out.add("sweep.csv", csv);
    out.add_json("sweep.json", &summary);
    Ok(out)
}

fn cmd_contour(ctx: &Context, deltas: &[f64]) -> Result<Output> {
    let deltas = if deltas.is_empty() {
        default_contour_deltas()
    } else {
        deltas.to_vec()
    };
    let mut cs: Vec<f64> = ctx
        .landscape
        .c_values()
        .iter()
        .filter_map(|r| r.finite())
        .collect();
    if cs.is_empty() {
        cs = default_contour_c_grid();
    }
    let table = contour_table(
        &ctx.landscape,
        ctx.d(),
        &deltas,
        &cs,
        ctx.nodes,
        &ctx.steady_options(),
    )?;
    let rows = table
        .cells
        .iter()
        .map(|cell| vec![num(cell.delta_fraction), num(cell.c), num(cell.ratio)]);
    let csv = csv_bytes(&["delta_fraction[-]", "c[1/T]", "ratio[-]"], rows)?;
    let summary = json!({
        "d": ctx.d(),
        "baseline_mean": table.baseline_mean,
        "cells": table.cells.len(),
        "ratio_at_least_0.9": table.count(|c| c.ratio >= 0.9),
        "ratio_below_0.01": table.count(|c| c.ratio < 0.01),
    });
    let mut out = Output::new(
        summary.clone(),
        ctx.parameters(json!({ "deltas": deltas, "c": cs })),
    );
    out.add("contour.csv", csv);
    out.add_json("contour.json", &summary);
    Ok(out)
}

fn execute(cli: &Cli) -> Result<(Value, bool)> {
    let ctx = Context::resolve(&cli.command)?;
    let out = match &cli.command {
        Command::Eig { matrix_market, .. } => cmd_eig(&ctx, *matrix_market)?,
        Command::Lambda { .. } => cmd_lambda(&ctx)?,
        Command::Steady { .. } => cmd_steady(&ctx)?,
        Command::Evolve {
            sample_every,
            snapshot_times,
            ..
        } => cmd_evolve(&ctx, *sample_every, snapshot_times)?,
        Command::Threshold {
            decay_probe,
            window_start,
            ..
        } => cmd_threshold(&ctx, *decay_probe, *window_start)?,
        Command::Sweep { .. } => cmd_sweep(&ctx)?,
        Command::Contour { deltas, .. } => cmd_contour(&ctx, deltas)?,
    };
    Ok((out.write(&ctx)?, cli.command.common().json))
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => EXIT_IO,
        e if e.is_validation() => EXIT_VALIDATION,
        _ => EXIT_SOLVER,
    }
}

fn report_error(kind: &str, message: &str, code: i32) {
    eprintln!(
        "{}",
        json!({ "error": kind, "message": message, "exit_code": code })
    );
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
            Error::InvalidParameter(format!(
                "{THREADS_ENV} must be a positive integer, got {v:?}"
            ))
        })?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start worker pool: {e}")))
}

/// Parse `argv` (including the program name), run the command and return the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return EXIT_OK;
        }
        Err(e) => {
            report_error("usage", e.to_string().trim(), EXIT_VALIDATION);
            return EXIT_VALIDATION;
        }
    };
    let result = thread_pool().and_then(|pool| pool.install(|| execute(&cli)));
    match result {
        Ok((summary, print)) => {
            if print {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&summary).expect("json values serialize")
                );
            }
            EXIT_OK
        }
        Err(e) => {
            let code = exit_code(&e);
            report_error(e.kind(), &e.to_string(), code);
            code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rate_lists() {
        let cli = Cli::try_parse_from(["hablab", "eig", "--scenario", "s.toml", "--c", "0,10,inf"])
            .unwrap();
        assert_eq!(
            cli.command.common().c,
            vec![Rate::Finite(0.0), Rate::Finite(10.0), Rate::Infinite]
        );
    }

    #[test]
    fn scenario_is_required() {
        assert!(Cli::try_parse_from(["hablab", "eig"]).is_err());
    }

    #[test]
    fn exit_codes_by_error_class() {
        assert_eq!(exit_code(&Error::Parse("x".into())), EXIT_VALIDATION);
        assert_eq!(exit_code(&Error::Precondition("x".into())), EXIT_VALIDATION);
        assert_eq!(
            exit_code(&Error::NonConvergence {
                what: "x",
                iterations: 1,
                residual: 1.0
            }),
            EXIT_SOLVER
        );
        assert_eq!(exit_code(&Error::Io(std::io::Error::other("x"))), EXIT_IO);
    }

    #[test]
    fn csv_numbers_round_trip() {
        for v in [0.1, 1e-35, 123456.789, -0.0] {
            assert_eq!(num(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }
}
