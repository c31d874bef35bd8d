//! `mmtrade` command-line front end.
//!
//! Distribution specs:
//!
//! * `gaussian:<mean>,<sigma>`
//! * `maxent:<a>,<T>`
//! * `uniform:<lo>,<hi>`
//! * `tabulated:<path.csv>` with header `edge,mass`, one row per bin edge;
//!   the last row closes the final bin and leaves its mass empty.
//!
//! Tables are CSV with 10 significant digits and LF line endings. JSON
//! output is a single object with `command`, `inputs`, `results` and
//! `diagnostics` keys. Exit codes: 0 success, 1 validation error,
//! 2 solver/quadrature failure (or a failing `demo-all` check), 3 I/O error.

use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::battery;
use crate::distributions::{make_gaussian, make_uniform, PriceDistribution, TabulatedDist};
use crate::engine::{self, MMConfig, Orientation, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::info::{self, figure_curves, Verdict};
use crate::market::{self, MarketPair};
use crate::maxent::{self, MaxEntModel, GOLDEN};
use crate::sim::{self, SimConfig};

#[derive(Debug, Parser)]
#[command(name = "mmtrade", version, about = "Trading-cycle profit intensity and max-entropy demand toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output format; each command has its own default.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write to this file instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StrategyArgs {
    /// Quotation law, e.g. `gaussian:0,1`.
    #[arg(long)]
    pub dist: String,
    #[arg(long, default_value = "buyer")]
    pub orientation: String,
    /// Mean single-transaction time.
    #[arg(long, default_value_t = 1.0)]
    pub theta: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve ρ(a) = a for the optimal withdrawal price.
    FixedPoint {
        #[command(flatten)]
        strategy: StrategyArgs,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        max_iter: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Golden-ratio transaction probability, analytic and by root finding.
    Golden {
        /// Withdrawal prices for the numeric cross-check.
        #[arg(long, value_delimiter = ',', default_values_t = [0.1, 1.0, 7.3])]
        a: Vec<f64>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Monte Carlo simulation of the trading cycle.
    Simulate {
        #[command(flatten)]
        strategy: StrategyArgs,
        /// Withdrawal price.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, default_value_t = 100_000)]
        n: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        shards: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Information measures over a grid of transaction probabilities.
    InfoScan {
        /// Withdrawal price of the max-entropy model.
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        /// Comma-separated P values; defaults to 0.05..0.95 plus the golden point.
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<f64>>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Supply/demand curves and the equilibrium price.
    Curves {
        /// Supply law (also used for demand unless --demand-dist is given).
        #[arg(long)]
        dist: String,
        #[arg(long)]
        demand_dist: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        x_min: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        x_max: Option<f64>,
        #[arg(long, default_value_t = 101)]
        points: usize,
        /// Swap axes in CSV output (quantity columns first).
        #[arg(long)]
        marshall: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Compare the mean-relative reference closed forms with quadrature.
    AuditRed {
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<f64>>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Run the full check battery and print a pass/fail summary.
    DemoAll {
        #[command(flatten)]
        out: OutputArgs,
    },
}

/// Parses a distribution spec string.
pub fn parse_dist(spec: &str) -> Result<Arc<dyn PriceDistribution>> {
    let (family, params) = spec
        .split_once(':')
        .ok_or_else(|| Error::invalid(format!("distribution spec `{spec}` must look like family:params")))?;
    let two = || -> Result<(f64, f64)> {
        let v: Vec<&str> = params.split(',').map(str::trim).collect();
        if v.len() != 2 {
            return Err(Error::invalid(format!("`{family}` takes two comma-separated numbers, got `{params}`")));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| Error::invalid(format!("not a number: `{s}`")));
        Ok((num(v[0])?, num(v[1])?))
    };
    Ok(match family {
        "gaussian" => {
            let (m, s) = two()?;
            Arc::new(make_gaussian(m, s)?)
        }
        "maxent" => {
            let (a, t) = two()?;
            Arc::new(MaxEntModel::new(a, t)?)
        }
        "uniform" => {
            let (lo, hi) = two()?;
            Arc::new(make_uniform(lo, hi)?)
        }
        "tabulated" => Arc::new(TabulatedDist::from_csv_path(params)?),
        other => return Err(Error::invalid(format!("unknown distribution family `{other}`"))),
    })
}

/// Formats with 10 significant digits, plain decimal where reasonable.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let e = x.abs().log10().floor() as i32;
    if (-5..15).contains(&e) {
        format!("{:.*}", (9 - e).max(0) as usize, x)
    } else {
        format!("{x:.9e}")
    }
}

/// Pretty-printed JSON envelope. Rendering goes through `serde_json::Value`
/// so re-parsing and re-rendering reproduces the same bytes.
pub fn render_json(command: &str, inputs: Value, results: Value, diagnostics: Value) -> String {
    let v = json!({
        "command": command,
        "inputs": inputs,
        "results": results,
        "diagnostics": diagnostics,
    });
    let mut s = serde_json::to_string_pretty(&v).expect("JSON values always serialise");
    s.push('\n');
    s
}

fn csv_line(cells: &[String]) -> String {
    let mut s = cells.join(",");
    s.push('\n');
    s
}

struct Outcome {
    text: String,
    exit: i32,
}

impl From<String> for Outcome {
    fn from(text: String) -> Self {
        Outcome { text, exit: 0 }
    }
}

fn strategy(args: &StrategyArgs, withdrawal: f64) -> Result<MMConfig> {
    let orientation: Orientation = args.orientation.parse()?;
    MMConfig::new(parse_dist(&args.dist)?, withdrawal, args.theta, orientation)
}

fn strategy_inputs(args: &StrategyArgs) -> Value {
    json!({ "dist": args.dist, "orientation": args.orientation, "theta": args.theta })
}

fn fixed_point(strategy_args: &StrategyArgs, tol: f64, max_iter: usize, format: Format) -> Result<Outcome> {
    let cfg = strategy(strategy_args, 0.0)?;
    let r = engine::solve_fixed_point(&cfg, tol, max_iter)?;
    let intensity = engine::profit_intensity(&cfg.with_withdrawal(r.a_max))?;
    Ok(match format {
        Format::Json => {
            let mut inputs = strategy_inputs(strategy_args);
            inputs["tol"] = json!(tol);
            inputs["max_iter"] = json!(max_iter);
            render_json(
                "fixed-point",
                inputs,
                json!({
                    "a_max": r.a_max,
                    "rho_at_max": r.rho_at_max,
                    "profit_intensity": intensity,
                    "trace": r.trace.iter().map(|(a, rho)| json!([a, rho])).collect::<Vec<_>>(),
                }),
                json!({
                    "converged": r.converged,
                    "iterations": r.iterations,
                    "residual": r.residual,
                    "method": r.method,
                }),
            )
        }
        Format::Csv => {
            let mut s = csv_line(&["iteration".into(), "a".into(), "rho".into()]);
            for (i, (a, rho)) in r.trace.iter().enumerate() {
                s += &csv_line(&[i.to_string(), fmt_num(*a), fmt_num(*rho)]);
            }
            s
        }
        Format::Text => format!(
            "a_max       {}\nrho(a_max)  {}\nintensity   {}\nresidual    {:.3e}\niterations  {}\nmethod      {}\nconverged   {}\n",
            fmt_num(r.a_max),
            fmt_num(r.rho_at_max),
            fmt_num(intensity),
            r.residual,
            r.iterations,
            r.method,
            r.converged
        ),
    }
    .into())
}

fn golden(a_values: &[f64], format: Format) -> Result<Outcome> {
    let exact = maxent::golden_optimum();
    let numeric =
        a_values.iter().map(|&a| maxent::golden_optimum_numeric(a).map(|p| (a, p))).collect::<Result<Vec<_>>>()?;
    Ok(match format {
        Format::Json => render_json(
            "golden",
            json!({ "a": a_values }),
            json!({
                "analytic": exact,
                "numeric": numeric.iter().map(|(a, p)| json!({"a": a, "P": p})).collect::<Vec<_>>(),
            }),
            json!({ "max_deviation": numeric.iter().map(|(_, p)| (p - exact).abs()).fold(0.0, f64::max) }),
        ),
        Format::Csv => {
            let mut s = csv_line(&["a".into(), "P_numeric".into(), "P_analytic".into()]);
            for (a, p) in &numeric {
                s += &csv_line(&[fmt_num(*a), fmt_num(*p), fmt_num(exact)]);
            }
            s
        }
        Format::Text => {
            let mut s = format!("golden optimum P = {exact:?}\n");
            for (a, p) in &numeric {
                s += &format!("numeric (a = {a}): P = {p:.12}  |diff| = {:.2e}\n", (p - exact).abs());
            }
            s
        }
    }
    .into())
}

fn simulate(strategy_args: &StrategyArgs, a: f64, n: u64, seed: u64, shards: usize, format: Format) -> Result<Outcome> {
    let mm = strategy(strategy_args, a)?;
    let analytic_intensity = engine::profit_intensity(&mm)?;
    let analytic_tau = engine::expected_cycle_length(&mm)?;
    let analytic_rate = engine::expected_log_return(&mm)? / analytic_tau;
    let acceptance = engine::acceptance_prob(&mm);
    let s = sim::simulate(&SimConfig::new(mm, n, seed)?.with_shards(shards)?)?;
    Ok(match format {
        Format::Json => {
            let mut inputs = strategy_inputs(strategy_args);
            inputs["a"] = json!(a);
            inputs["n"] = json!(n);
            inputs["seed"] = json!(seed);
            inputs["shards"] = json!(shards);
            render_json(
                "simulate",
                inputs,
                serde_json::to_value(&s).expect("stats serialise"),
                json!({
                    "analytic_return_rate": analytic_rate,
                    "cycle_profit_intensity": analytic_intensity,
                    "analytic_mean_tau": analytic_tau,
                    "analytic_acceptance": acceptance,
                }),
            )
        }
        Format::Csv => {
            let v = serde_json::to_value(&s).expect("stats serialise");
            let obj = v.as_object().expect("struct");
            let mut s = csv_line(&["field".into(), "value".into()]);
            for (k, val) in obj {
                s += &csv_line(&[k.clone(), fmt_num(val.as_f64().unwrap_or(f64::NAN))]);
            }
            s
        }
        Format::Text => format!(
            "cycles              {}\nmean tau            {} ± {}  (analytic {})\nmean return         {} ± {}\nintensity           {} ± {}  (analytic E(r)/E(tau) {}; rho/theta {})\nfirst-draw accepted {} ± {}  (analytic {})\nwald residual       {} ± {}\nwald var residual   {} ± {}\n",
            s.n_cycles,
            fmt_num(s.mean_tau),
            fmt_num(s.se_tau),
            fmt_num(analytic_tau),
            fmt_num(s.mean_return),
            fmt_num(s.se_return),
            fmt_num(s.intensity_estimate),
            fmt_num(s.se_intensity),
            fmt_num(analytic_rate),
            fmt_num(analytic_intensity),
            fmt_num(s.acceptance_fraction),
            fmt_num(s.se_acceptance),
            fmt_num(acceptance),
            fmt_num(s.wald_residual),
            fmt_num(s.se_wald),
            fmt_num(s.wald_var_residual),
            fmt_num(s.se_wald_var),
        ),
    }
    .into())
}

pub const INFO_SCAN_COLUMNS: [&str; 14] = [
    "P",
    "S_rel_a",
    "S_rel_mean",
    "I_scaled_a",
    "I_scaled_mean",
    "H_rel_a",
    "H_rel_mean",
    "S_rel_a_as_published",
    "S_rel_mean_as_published",
    "I_scaled_a_as_published",
    "I_scaled_mean_as_published",
    "H_rel_a_as_published",
    "H_rel_mean_as_published",
    "is_golden",
];

fn info_scan(a: f64, grid: Option<Vec<f64>>, format: Format) -> Result<Outcome> {
    let grid = grid.unwrap_or_else(info::scan_grid);
    if grid.is_empty() {
        return Err(Error::invalid("grid is empty"));
    }
    let mut rows = Vec::with_capacity(grid.len());
    for &p in &grid {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::invalid(format!("grid value {p} is outside (0, 1)")));
        }
        let report = info::info_report(&MaxEntModel::from_probability(a, p)?)?;
        let curves = figure_curves(p)?;
        rows.push((report, curves, (p - GOLDEN).abs() < 1e-6));
    }
    Ok(match format {
        Format::Json => render_json(
            "info-scan",
            json!({ "a": a, "grid": grid }),
            json!(rows
                .iter()
                .map(|(r, c, g)| json!({ "computed": r, "as_published": c, "is_golden": g }))
                .collect::<Vec<_>>()),
            json!({}),
        ),
        Format::Csv | Format::Text => {
            let mut s = csv_line(&INFO_SCAN_COLUMNS.map(String::from));
            for (r, c, g) in &rows {
                let mut cells: Vec<String> = [
                    r.p,
                    r.s_rel_a,
                    r.s_rel_mean,
                    r.i_scaled_a,
                    r.i_scaled_mean,
                    r.h_rel_a,
                    r.h_rel_mean,
                    c.s_rel_a,
                    c.s_rel_mean,
                    c.i_scaled_a,
                    c.i_scaled_mean,
                    c.h_rel_a,
                    c.h_rel_mean,
                ]
                .iter()
                .map(|v| fmt_num(*v))
                .collect();
                cells.push(g.to_string());
                s += &csv_line(&cells);
            }
            s
        }
    }
    .into())
}

#[allow(clippy::too_many_arguments)]
fn curves(
    dist: &str,
    demand_dist: Option<&str>,
    x_min: Option<f64>,
    x_max: Option<f64>,
    points: usize,
    marshall: bool,
    format: Format,
) -> Result<Outcome> {
    let eta_s = parse_dist(dist)?;
    let eta_d = match demand_dist {
        Some(d) => parse_dist(d)?,
        None => eta_s.clone(),
    };
    let mp = MarketPair::new(eta_s.clone(), eta_d.clone());
    let eq = market::equilibrium_price(&mp)?;
    if points < 2 {
        return Err(Error::invalid("need at least two curve points"));
    }
    let lo = x_min.unwrap_or_else(|| eta_s.quantile(0.001).min(eta_d.quantile(0.001)));
    let hi = x_max.unwrap_or_else(|| eta_s.quantile(0.999).max(eta_d.quantile(0.999)));
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::invalid(format!("bad curve range [{lo}, {hi}]")));
    }
    let xs: Vec<f64> = (0..points).map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64).collect();
    let table: Vec<(f64, f64, f64)> =
        xs.iter().map(|&x| (x, market::supply_curve(&mp, x), market::demand_curve(&mp, x))).collect();
    Ok(match format {
        Format::Json => render_json(
            "curves",
            json!({ "dist": dist, "demand_dist": demand_dist, "x_min": lo, "x_max": hi, "points": points }),
            json!({
                "equilibrium": eq.price,
                "supply_at_equilibrium": eq.supply,
                "demand_at_equilibrium": eq.demand,
                "curve": table.iter().map(|(x, s, d)| json!({"x": x, "supply": s, "demand": d})).collect::<Vec<_>>(),
            }),
            json!({ "warning": eq.warning }),
        ),
        Format::Csv => {
            let header: Vec<String> = if marshall {
                vec!["supply".into(), "demand".into(), "x".into()]
            } else {
                vec!["x".into(), "supply".into(), "demand".into()]
            };
            let mut s = csv_line(&header);
            for (x, sv, dv) in &table {
                let cells = if marshall {
                    vec![fmt_num(*sv), fmt_num(*dv), fmt_num(*x)]
                } else {
                    vec![fmt_num(*x), fmt_num(*sv), fmt_num(*dv)]
                };
                s += &csv_line(&cells);
            }
            s
        }
        Format::Text => {
            let mut s = format!(
                "equilibrium {}\nsupply      {}\ndemand      {}\n",
                fmt_num(eq.price),
                fmt_num(eq.supply),
                fmt_num(eq.demand)
            );
            if let Some(w) = &eq.warning {
                s += &format!("warning     {w}\n");
            }
            s
        }
    }
    .into())
}

fn audit_red(grid: Option<Vec<f64>>, format: Format) -> Result<Outcome> {
    let grid = grid.unwrap_or_else(info::standard_grid);
    let report = info::audit_red_curves(&grid)?;
    Ok(match format {
        Format::Json => render_json(
            "audit-red",
            json!({ "grid": grid }),
            serde_json::to_value(&report).expect("report serialises"),
            json!({}),
        ),
        Format::Csv => {
            let mut s = csv_line(
                &["quantity", "P", "computed", "as_published", "derived", "published_deviation", "derived_deviation"]
                    .map(String::from),
            );
            for q in &report.quantities {
                for p in &q.points {
                    s += &csv_line(&[
                        q.quantity.clone(),
                        fmt_num(p.p),
                        fmt_num(p.computed),
                        fmt_num(p.as_published),
                        fmt_num(p.derived),
                        fmt_num(p.published_deviation),
                        fmt_num(p.derived_deviation),
                    ]);
                }
            }
            s
        }
        Format::Text => {
            let mut s = format!("audit on a = {} model, tolerance {:e}\n", report.a, report.tolerance);
            for q in &report.quantities {
                let verdict = match q.verdict {
                    Verdict::AsPublished => "as-published formula matches",
                    Verdict::Derived => "derived formula matches; as-published formula does not",
                    Verdict::Both => "as-published and derived formula both match",
                    Verdict::Neither => "neither formula matches",
                };
                s += &format!(
                    "{}\n  as-published {}  max dev {:.3e}\n  derived      {}  max dev {:.3e}\n  verdict: {verdict}\n",
                    q.quantity,
                    q.published_formula,
                    q.published_max_deviation,
                    q.derived_formula,
                    q.derived_max_deviation
                );
            }
            s
        }
    }
    .into())
}

fn demo_all(format: Format) -> Result<Outcome> {
    let checks = battery::run_all();
    let all = checks.iter().all(|c| c.passed);
    let text = match format {
        Format::Json => render_json(
            "demo-all",
            json!({}),
            serde_json::to_value(&checks).expect("checks serialise"),
            json!({ "all_passed": all }),
        ),
        Format::Csv => {
            let mut s = csv_line(&["id", "name", "passed", "seconds"].map(String::from));
            for c in &checks {
                s += &csv_line(&[c.id.to_string(), c.name.clone(), c.passed.to_string(), fmt_num(c.seconds)]);
            }
            s
        }
        Format::Text => {
            let mut s = String::new();
            for c in &checks {
                s += &format!(
                    "[{}] {:<4} {} ({:.2}s): {}\n",
                    c.id,
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.seconds,
                    c.detail
                );
            }
            let passed = checks.iter().filter(|c| c.passed).count();
            s += &format!("{passed}/{} checks passed\n", checks.len());
            s
        }
    };
    Ok(Outcome { text, exit: if all { 0 } else { 2 } })
}

fn dispatch(cmd: &Command) -> Result<(Outcome, Option<&PathBuf>)> {
    let pick = |out: &OutputArgs, default: Format| out.format.unwrap_or(default);
    Ok(match cmd {
        Command::FixedPoint { strategy, tol, max_iter, out } => {
            (fixed_point(strategy, *tol, *max_iter, pick(out, Format::Text))?, out.output.as_ref())
        }
        Command::Golden { a, out } => (golden(a, pick(out, Format::Text))?, out.output.as_ref()),
        Command::Simulate { strategy, a, n, seed, shards, out } => {
            (simulate(strategy, *a, *n, *seed, *shards, pick(out, Format::Text))?, out.output.as_ref())
        }
        Command::InfoScan { a, grid, out } => {
            (info_scan(*a, grid.clone(), pick(out, Format::Csv))?, out.output.as_ref())
        }
        Command::Curves { dist, demand_dist, x_min, x_max, points, marshall, out } => (
            curves(dist, demand_dist.as_deref(), *x_min, *x_max, *points, *marshall, pick(out, Format::Text))?,
            out.output.as_ref(),
        ),
        Command::AuditRed { grid, out } => (audit_red(grid.clone(), pick(out, Format::Text))?, out.output.as_ref()),
        Command::DemoAll { out } => (demo_all(pick(out, Format::Text))?, out.output.as_ref()),
    })
}

/// Runs the CLI on `args` (including the program name), writing normal
/// output to `stdout` and diagnostics to `stderr`. Returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let rendered = e.render().to_string();
            let _ =
                if code == 0 { stdout.write_all(rendered.as_bytes()) } else { stderr.write_all(rendered.as_bytes()) };
            return code;
        }
    };
    let (outcome, path) = match dispatch(&cli.command) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return e.exit_code();
        }
    };
    let written = match path {
        Some(p) => std::fs::write(p, outcome.text.as_bytes()).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => stdout.write_all(outcome.text.as_bytes()).map_err(Error::from),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: {e}");
        return e.exit_code();
    }
    outcome.exit
}
