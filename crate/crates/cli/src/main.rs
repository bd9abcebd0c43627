//! `tclqem`: sweeps, single-gate evolution, calibration and the consistency
//! report of the non-Markovian noise model, emitted as CSV or JSON.

mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use tclqem::calibration::BUNDLED_COUNTS;
use tclqem::{
    cost_closed_form, cost_numeric, estimate_alpha_with, evolve_populations, gaussian_rho11, kernel_k,
    kernel_k_quadratic, load_counts, parse_counts, population_matrix_for, ConversionRule, Estimator, Gate,
    MultipletState, NoiseParams,
};

use config::Config;
use output::{emit, fmt_g, json, Csv};

const DEFAULT_X_START: f64 = 0.0;
const DEFAULT_X_END: f64 = 3.0;
const DEFAULT_STEPS: usize = 61;
const DEFAULT_OMEGA_C_TAU_S: f64 = 100.0;
/// Number of couplings sampled between 7e-4 and 7e-3 by default.
const DEFAULT_CURVES: usize = 7;
const ERROR_CELL: &str = "error";

/// Invalid arguments, reported with exit code 2 like parse errors.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Parser)]
#[command(
    name = "tclqem",
    version,
    about = "Non-Markovian gate noise, error-mitigation cost and calibration"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Re k, Im k and the quadratic approximation along t/τ_s
    KernelSweep(SweepArgs),
    /// Outcome probabilities of one gate from one multiplet state
    Evolve(EvolveArgs),
    /// Mitigation cost along t/τ_s, numeric and closed form
    CostSweep(SweepArgs),
    /// Gaussian and linear ground-state population along t/τ_s
    GaussianSweep(SweepArgs),
    /// Estimate Re k(τ_s) and the coupling from outcome counts
    Calibrate(CalibrateArgs),
    /// Compare closed forms against independent oracles
    Verify(OutputArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct OutputArgs {
    /// Write to this file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct ParamArgs {
    /// Coupling Γ₀ω_cτ_s; repeat for several curves
    #[arg(long = "gamma0-omega-tau")]
    gamma0_omega_tau: Vec<f64>,
    /// Cutoff ω_cτ_s
    #[arg(long = "omega-c-tau-s")]
    omega_c_tau_s: Option<f64>,
    /// Shift scale Δ₀
    #[arg(long)]
    delta0: Option<f64>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long = "x-start")]
    x_start: Option<f64>,
    #[arg(long = "x-end")]
    x_end: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct EvolveArgs {
    #[arg(long, value_parser = parse_gate)]
    gate: Gate,
    #[arg(long = "initial-state", value_parser = parse_state)]
    initial_state: MultipletState,
    /// Re k at the end of the gate
    #[arg(long, conflicts_with = "x")]
    alpha: Option<f64>,
    /// Evaluate Re k from the kernel at this t/τ_s instead
    #[arg(long)]
    x: Option<f64>,
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct CalibrateArgs {
    /// Counts file (JSON array); the bundled tables when omitted
    #[arg(long)]
    counts: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "designated-outcome")]
    estimator: EstimatorArg,
    /// Conversion rule reported as `coupling_hat`
    #[arg(long, value_parser = parse_rule, default_value = "eq32_prefactor")]
    rule: ConversionRule,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorArg {
    DesignatedOutcome,
    LeastSquares,
}

impl From<EstimatorArg> for Estimator {
    fn from(e: EstimatorArg) -> Self {
        match e {
            EstimatorArg::DesignatedOutcome => Estimator::DesignatedOutcome,
            EstimatorArg::LeastSquares => Estimator::LeastSquares,
        }
    }
}

fn parse_gate(s: &str) -> Result<Gate, String> {
    s.parse().map_err(|e: tclqem::Error| e.to_string())
}

fn parse_state(s: &str) -> Result<MultipletState, String> {
    s.parse().map_err(|e: tclqem::Error| e.to_string())
}

fn parse_rule(s: &str) -> Result<ConversionRule, String> {
    s.parse().map_err(|e: tclqem::Error| e.to_string())
}

/// Parameters after merging flags, config file and defaults.
struct Resolved {
    couplings: Vec<f64>,
    omega_c_tau_s: f64,
    delta0: f64,
    tau_s: f64,
}

impl Resolved {
    fn new(p: &ParamArgs, cfg: &Config) -> anyhow::Result<Self> {
        let couplings = if !p.gamma0_omega_tau.is_empty() {
            p.gamma0_omega_tau.clone()
        } else if let Some(c) = &cfg.gamma0_omega_tau {
            c.clone()
        } else {
            default_couplings()
        };
        if couplings.is_empty() {
            return Err(usage("at least one --gamma0-omega-tau value is required"));
        }
        if let Some(bad) = couplings.iter().find(|c| !(c.is_finite() && **c >= 0.0)) {
            return Err(usage(format!("--gamma0-omega-tau must be >= 0, got {bad}")));
        }
        let resolved = Self {
            couplings,
            omega_c_tau_s: p.omega_c_tau_s.or(cfg.omega_c_tau_s).unwrap_or(DEFAULT_OMEGA_C_TAU_S),
            delta0: p.delta0.or(cfg.delta0).unwrap_or(0.0),
            tau_s: cfg.tau_s.unwrap_or(1.0),
        };
        resolved.params(resolved.couplings[0])?;
        Ok(resolved)
    }

    fn params(&self, coupling: f64) -> anyhow::Result<NoiseParams> {
        NoiseParams::from_coupling(coupling, self.omega_c_tau_s)
            .and_then(|p| p.with_delta0(self.delta0))
            .and_then(|p| p.with_tau_s(self.tau_s))
            .map_err(|e| usage(e.to_string()))
    }
}

/// `7e-4 · 10^(k/6)` for `k = 0..6`, spanning one decade.
fn default_couplings() -> Vec<f64> {
    (0..DEFAULT_CURVES)
        .map(|k| 7e-4 * 10f64.powf(k as f64 / (DEFAULT_CURVES - 1) as f64))
        .collect()
}

struct Grid {
    x: Vec<f64>,
    params: Resolved,
}

impl Grid {
    fn new(a: &SweepArgs, cfg: &Config) -> anyhow::Result<Self> {
        let start = a.x_start.or(cfg.x_start).unwrap_or(DEFAULT_X_START);
        let end = a.x_end.or(cfg.x_end).unwrap_or(DEFAULT_X_END);
        let steps = a.steps.or(cfg.steps).unwrap_or(DEFAULT_STEPS);
        if !(start.is_finite() && start >= 0.0) {
            return Err(usage(format!("--x-start must be >= 0, got {start}")));
        }
        if !(end.is_finite() && end > start) {
            return Err(usage(format!("--x-end must exceed --x-start, got {end}")));
        }
        if steps < 2 {
            return Err(usage(format!("--steps must be at least 2, got {steps}")));
        }
        let x = (0..steps)
            .map(|i| {
                if i == steps - 1 {
                    end
                } else {
                    start + (end - start) * i as f64 / (steps - 1) as f64
                }
            })
            .collect();
        Ok(Self {
            x,
            params: Resolved::new(&a.params, cfg)?,
        })
    }
}

fn sweep_format(o: &OutputArgs) -> Format {
    o.format.unwrap_or(Format::Csv)
}

fn report_format(o: &OutputArgs) -> Format {
    o.format.unwrap_or(Format::Json)
}

#[derive(Serialize)]
struct KernelRow {
    gamma0_omega_tau: f64,
    x: f64,
    re_k: f64,
    im_k: f64,
    re_k_quadratic: f64,
}

fn kernel_sweep(a: &SweepArgs, cfg: &Config) -> anyhow::Result<String> {
    let grid = Grid::new(a, cfg)?;
    let mut rows = Vec::new();
    for &c in &grid.params.couplings {
        let p = grid.params.params(c)?;
        for &x in &grid.x {
            let k = kernel_k(x, &p)?;
            rows.push(KernelRow {
                gamma0_omega_tau: c,
                x,
                re_k: k.re,
                im_k: k.im,
                re_k_quadratic: kernel_k_quadratic(x, &p)?,
            });
        }
    }
    match sweep_format(&a.output) {
        Format::Json => json(&rows),
        Format::Csv => {
            let mut csv = Csv::new(&["gamma0_omega_tau", "x", "re_k", "im_k", "re_k_quadratic"]);
            for r in &rows {
                csv.row(&[r.gamma0_omega_tau, r.x, r.re_k, r.im_k, r.re_k_quadratic].map(fmt_g));
            }
            Ok(csv.finish())
        }
    }
}

#[derive(Serialize)]
struct CostRow {
    gamma0_omega_tau: f64,
    x: f64,
    alpha: f64,
    cost_numeric: Option<f64>,
    cost_paper_eq39: Option<f64>,
}

fn cost_sweep(a: &SweepArgs, cfg: &Config) -> anyhow::Result<String> {
    let grid = Grid::new(a, cfg)?;
    let mut rows = Vec::new();
    for &c in &grid.params.couplings {
        let p = grid.params.params(c)?;
        for &x in &grid.x {
            let alpha = kernel_k(x, &p)?.re;
            // near the singular point the row is kept and marked
            rows.push(CostRow {
                gamma0_omega_tau: c,
                x,
                alpha,
                cost_numeric: cost_numeric(alpha).ok().map(|r| r.cost),
                cost_paper_eq39: cost_closed_form(alpha).ok(),
            });
        }
    }
    let cell = |v: Option<f64>| v.map(fmt_g).unwrap_or_else(|| ERROR_CELL.to_string());
    match sweep_format(&a.output) {
        Format::Json => json(&rows),
        Format::Csv => {
            let mut csv = Csv::new(&["gamma0_omega_tau", "x", "alpha", "cost_numeric", "cost_paper_eq39"]);
            for r in &rows {
                csv.row(&[
                    fmt_g(r.gamma0_omega_tau),
                    fmt_g(r.x),
                    fmt_g(r.alpha),
                    cell(r.cost_numeric),
                    cell(r.cost_paper_eq39),
                ]);
            }
            Ok(csv.finish())
        }
    }
}

#[derive(Serialize)]
struct GaussianRow {
    gamma0_omega_tau: f64,
    x: f64,
    rho11_gaussian: f64,
    rho11_linear: f64,
}

fn gaussian_sweep(a: &SweepArgs, cfg: &Config) -> anyhow::Result<String> {
    let grid = Grid::new(a, cfg)?;
    let mut rows = Vec::new();
    for &c in &grid.params.couplings {
        let p = grid.params.params(c)?;
        for &x in &grid.x {
            rows.push(GaussianRow {
                gamma0_omega_tau: c,
                x,
                rho11_gaussian: gaussian_rho11(x, &p)?,
                // the Gaussian is built from the quadratic kernel, so compare
                // against the same kernel
                rho11_linear: 1.0 - 2.0 * kernel_k_quadratic(x, &p)?,
            });
        }
    }
    match sweep_format(&a.output) {
        Format::Json => json(&rows),
        Format::Csv => {
            let mut csv = Csv::new(&["gamma0_omega_tau", "x", "rho11_gaussian", "rho11_linear"]);
            for r in &rows {
                csv.row(&[r.gamma0_omega_tau, r.x, r.rho11_gaussian, r.rho11_linear].map(fmt_g));
            }
            Ok(csv.finish())
        }
    }
}

#[derive(Serialize)]
struct Evolution {
    gate: Gate,
    initial_state: MultipletState,
    #[serde(skip_serializing_if = "Option::is_none")]
    x: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma0_omega_tau: Option<f64>,
    alpha: f64,
    probabilities: [f64; 4],
    population_matrix: [[f64; 4]; 4],
}

const OUTCOMES: [&str; 4] = ["00", "01", "10", "11"];

fn evolve(a: &EvolveArgs, cfg: &Config) -> anyhow::Result<String> {
    let (alpha, x, coupling) = match (a.alpha, a.x) {
        (Some(alpha), _) => (alpha, None, None),
        (None, Some(x)) => {
            let params = Resolved::new(&a.params, cfg)?;
            if params.couplings.len() != 1 {
                return Err(usage("--x needs exactly one --gamma0-omega-tau value"));
            }
            if !(x.is_finite() && x >= 0.0) {
                return Err(usage(format!("--x must be >= 0, got {x}")));
            }
            let c = params.couplings[0];
            (kernel_k(x, &params.params(c)?)?.re, Some(x), Some(c))
        }
        (None, None) => return Err(usage("one of --alpha or --x is required")),
    };
    if !(0.0..=0.5).contains(&alpha) {
        return Err(usage(format!("alpha must lie in [0, 0.5], got {alpha}")));
    }
    let basis = a.gate.basis();
    let result = Evolution {
        gate: a.gate,
        initial_state: a.initial_state,
        x,
        gamma0_omega_tau: coupling,
        alpha,
        probabilities: evolve_populations(a.initial_state, alpha, &basis)?,
        population_matrix: population_matrix_for(&basis, alpha)?.p,
    };
    match report_format(&a.output) {
        Format::Json => json(&result),
        Format::Csv => {
            let mut csv = Csv::new(&["outcome", "probability"]);
            for (o, p) in OUTCOMES.iter().zip(result.probabilities) {
                csv.row(&[o.to_string(), fmt_g(p)]);
            }
            Ok(csv.finish())
        }
    }
}

fn calibrate(a: &CalibrateArgs) -> anyhow::Result<String> {
    let records = match &a.counts {
        Some(path) => load_counts(path)?,
        None => parse_counts(BUNDLED_COUNTS)?,
    };
    let results = records
        .iter()
        .map(|r| estimate_alpha_with(r, a.estimator.into(), a.rule))
        .collect::<tclqem::Result<Vec<_>>>()?;
    match report_format(&a.output) {
        Format::Json => json(&results),
        Format::Csv => {
            let mut csv = Csv::new(&[
                "device",
                "gate",
                "initial_state",
                "estimator",
                "alpha_hat",
                "clamped",
                "accepted",
                "eq32_prefactor",
                "table1_implied",
                "si_tables_implied",
            ]);
            for r in &results {
                csv.row(&[
                    r.device.clone(),
                    r.gate.to_string(),
                    r.initial_state.to_string(),
                    r.estimator.name().to_string(),
                    fmt_g(r.alpha_hat),
                    r.clamped.to_string(),
                    r.accepted.to_string(),
                    fmt_g(r.couplings.eq32_prefactor),
                    fmt_g(r.couplings.table1_implied),
                    fmt_g(r.couplings.si_tables_implied),
                ]);
            }
            Ok(csv.finish())
        }
    }
}

fn verify(o: &OutputArgs) -> anyhow::Result<String> {
    let report = tclqem::discrepancy_report()?;
    match report_format(o) {
        Format::Json => json(&report),
        Format::Csv => {
            let mut csv = Csv::new(&["id", "status", "max_deviation", "tolerance"]);
            for e in &report.entries {
                let status = serde_json::to_value(e.status)?;
                csv.row(&[
                    e.id.clone(),
                    status.as_str().unwrap_or_default().to_string(),
                    fmt_g(e.max_deviation),
                    fmt_g(e.tolerance),
                ]);
            }
            Ok(csv.finish())
        }
    }
}

fn out_path(c: &Command) -> Option<&Path> {
    let o = match c {
        Command::KernelSweep(a) | Command::CostSweep(a) | Command::GaussianSweep(a) => &a.output,
        Command::Evolve(a) => &a.output,
        Command::Calibrate(a) => &a.output,
        Command::Verify(o) => o,
    };
    o.out.as_deref()
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    let cfg = Config::from_env().map_err(|e| usage(format!("{e:#}")))?;
    let text = match &cli.command {
        Command::KernelSweep(a) => kernel_sweep(a, &cfg)?,
        Command::CostSweep(a) => cost_sweep(a, &cfg)?,
        Command::GaussianSweep(a) => gaussian_sweep(a, &cfg)?,
        Command::Evolve(a) => evolve(a, &cfg)?,
        Command::Calibrate(a) => calibrate(a).context("calibration failed")?,
        Command::Verify(o) => verify(o)?,
    };
    if text.is_empty() {
        bail!("no output produced");
    }
    emit(&text, out_path(&cli.command))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
