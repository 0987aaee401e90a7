//! Command-line front end: scenario files, the `solve`, `sweep` and
//! `validate` commands, and the CSV/JSON writers.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration or precondition
//! error, 3 no convergence, 4 invariant violation.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::MfgError;
use crate::fixed_point::{energy_gap, energy_gap_dirichlet, solve_mfg, system_residuals, FixedPointOptions, InitialPath, MfgSolution, SolveReport};
use crate::geometry::{trapezoid_raw, Grid, ScalarField, TimeSlice};
use crate::market::{derive_params, BoundarySpec, MarketParams};
use crate::variational::{competitor_corpus, evaluate_j, first_order_residual, optimality_gap, ControlPair};
use crate::viscosity::{sigma_sweep, SweepOptions};

/// Environment variable overriding the root of relative output directories.
pub const OUTPUT_ROOT_ENV: &str = "MFG_OUTPUT_ROOT";

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NO_CONVERGENCE: i32 = 3;
pub const EXIT_INVARIANT: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "market-mfg", version, about = "Mean-field-game solver for exhaustible-resource market competition")]
pub struct Cli {
    /// Seed for the Hoelder-pair sampler.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one scenario and dump the fields.
    Solve { config: PathBuf },
    /// Solve along a decreasing list of diffusion levels.
    Sweep {
        config: PathBuf,
        /// Comma-separated, strictly decreasing diffusion levels.
        #[arg(long, value_delimiter = ',', num_args = 1)]
        sigmas: Vec<f64>,
        /// Solve the sweep entries concurrently.
        #[arg(long)]
        parallel: bool,
    },
    /// Run the invariant battery and write validate.json.
    Validate { config: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub epsilon: f64,
    pub r: f64,
    pub sigma: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(rename = "L")]
    pub length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub nx: usize,
    pub nt: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DensitySpec {
    /// `cos^2` bump with full support width `width`.
    Bump { center: f64, width: f64 },
    /// Flat density on `[margin, L - margin]` with `sin^2` shoulders.
    UniformInterior { margin: f64 },
    /// Two-column `x,value` table, interpolated linearly.
    CustomTable { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TerminalSpec {
    Constant { value: f64 },
    /// `slope (x - L sin(2 pi x / L) / (2 pi))`: flat at both ends.
    Ramp { slope: f64 },
    CustomTable { path: PathBuf },
}

fn default_bc() -> BoundarySpec {
    BoundarySpec::NeumannReflection
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub params: ParamsConfig,
    pub grid: GridConfig,
    #[serde(default = "default_bc")]
    pub bc: BoundarySpec,
    pub m0: DensitySpec,
    #[serde(rename = "u_T")]
    pub u_t: TerminalSpec,
    #[serde(default)]
    pub solver: FixedPointOptions,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Solver(MfgError),
    Io(std::io::Error),
    Invariant(Vec<String>),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Io(_) => EXIT_IO,
            CliError::Invariant(_) => EXIT_INVARIANT,
            CliError::Solver(MfgError::NoConvergence { .. }) => EXIT_NO_CONVERGENCE,
            CliError::Solver(_) => EXIT_CONFIG,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Solver(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::Invariant(names) => write!(f, "invariant violation: {}", names.join(", ")),
        }
    }
}

impl From<MfgError> for CliError {
    fn from(e: MfgError) -> Self {
        CliError::Solver(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn normalize(values: Vec<f64>, grid: Grid) -> CliResult<TimeSlice> {
    let mass = trapezoid_raw(&values, grid.dx());
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(CliError::Config(format!("initial density has non-positive mass {mass}")));
    }
    Ok(TimeSlice { grid, values: values.into_iter().map(|v| v / mass).collect() })
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Reads an `x,value` table (header and blank lines skipped) and
/// interpolates it linearly onto the grid nodes.
fn read_table(path: &Path, grid: Grid) -> CliResult<TimeSlice> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for line in text.lines() {
        let cells: Vec<&str> = line.split([',', ' ', '\t']).filter(|s| !s.is_empty()).collect();
        if cells.len() < 2 {
            continue;
        }
        if let (Ok(x), Ok(v)) = (cells[0].parse::<f64>(), cells[1].parse::<f64>()) {
            pts.push((x, v));
        }
    }
    if pts.len() < 2 || pts.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(CliError::Config(format!("{}: need at least two rows with increasing x", path.display())));
    }
    let values = grid
        .xs()
        .iter()
        .map(|&x| {
            let j = pts.partition_point(|p| p.0 <= x).clamp(1, pts.len() - 1);
            let ((x0, v0), (x1, v1)) = (pts[j - 1], pts[j]);
            let s = ((x - x0) / (x1 - x0)).clamp(0.0, 1.0);
            v0 + s * (v1 - v0)
        })
        .collect();
    Ok(TimeSlice { grid, values })
}

impl DensitySpec {
    pub fn build(&self, grid: Grid, base: &Path) -> CliResult<TimeSlice> {
        let l = grid.length;
        let raw = match self {
            DensitySpec::Bump { center, width } => {
                if !(*width > 0.0) || center - width / 2.0 < 0.0 || center + width / 2.0 > l {
                    return Err(CliError::Config("bump must have positive width and lie inside [0, L]".into()));
                }
                grid.xs()
                    .iter()
                    .map(|&x| {
                        let z = (x - center) / width;
                        if z.abs() < 0.5 {
                            (std::f64::consts::PI * z).cos().powi(2)
                        } else {
                            0.0
                        }
                    })
                    .collect()
            }
            DensitySpec::UniformInterior { margin } => {
                if !(*margin > 0.0 && 2.0 * margin < l) {
                    return Err(CliError::Config("margin must lie in (0, L/2)".into()));
                }
                grid.xs()
                    .iter()
                    .map(|&x| {
                        let d = x.min(l - x);
                        if d >= *margin {
                            1.0
                        } else {
                            (std::f64::consts::FRAC_PI_2 * d / margin).sin().powi(2)
                        }
                    })
                    .collect()
            }
            DensitySpec::CustomTable { path } => read_table(&resolve(base, path), grid)?.values,
        };
        normalize(raw, grid)
    }
}

impl TerminalSpec {
    pub fn build(&self, grid: Grid, base: &Path) -> CliResult<TimeSlice> {
        let l = grid.length;
        Ok(match self {
            TerminalSpec::Constant { value } => TimeSlice::constant(grid, *value),
            TerminalSpec::Ramp { slope } => {
                let w = 2.0 * std::f64::consts::PI / l;
                TimeSlice::from_fn(grid, |x| slope * (x - (w * x).sin() / w))
            }
            TerminalSpec::CustomTable { path } => read_table(&resolve(base, path), grid)?,
        })
    }
}

/// Fully built scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub params: MarketParams,
    pub grid: Grid,
    pub bc: BoundarySpec,
    pub m0: TimeSlice,
    pub u_t: TimeSlice,
    pub opts: FixedPointOptions,
    pub output_dir: PathBuf,
    pub terminal: TerminalSpec,
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn build(&self, base: &Path) -> CliResult<Scenario> {
        let p = &self.params;
        let params = derive_params(p.epsilon, p.r, p.sigma, p.horizon, p.length)?;
        let grid = Grid::new(self.grid.nx, self.grid.nt, p.length, p.horizon)?;
        if grid.nx < 2 {
            return Err(MfgError::GridTooSmall { nx: grid.nx, required: 2 }.into());
        }
        self.solver.validate()?;
        let m0 = self.m0.build(grid, base)?;
        let u_t = self.u_t.build(grid, base)?;
        let output_dir = match std::env::var_os(OUTPUT_ROOT_ENV) {
            Some(root) if self.output_dir.is_relative() => PathBuf::from(root).join(&self.output_dir),
            _ => resolve(base, &self.output_dir),
        };
        Ok(Scenario { params, grid, bc: self.bc, m0, u_t, opts: self.solver.clone(), output_dir, terminal: self.u_t.clone() })
    }
}

pub fn load_scenario(path: &Path) -> CliResult<Scenario> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let cfg = ScenarioConfig::parse(&text)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    cfg.build(&base)
}

fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_field(path: &Path, field: &ScalarField) -> CliResult<()> {
    let grid = field.grid;
    let mut out = BufWriter::new(fs::File::create(path)?);
    let mut header = String::from("t");
    for x in grid.xs() {
        write!(header, ",{}", fmt_float(x)).ok();
    }
    writeln!(out, "{header}")?;
    for k in 0..=grid.nt {
        let mut line = fmt_float(grid.t(k));
        for v in field.row(k) {
            line.push(',');
            line.push_str(&fmt_float(*v));
        }
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

fn write_path(path: &Path, sol: &MfgSolution) -> CliResult<()> {
    let grid = sol.grid();
    let mut out = BufWriter::new(fs::File::create(path)?);
    writeln!(out, "t,f,p_bar")?;
    for k in 0..=grid.nt {
        writeln!(out, "{},{},{}", fmt_float(grid.t(k)), fmt_float(sol.path.f[k]), fmt_float(sol.path.p_bar[k]))?;
    }
    out.flush()?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(std::io::Error::other(e)))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

/// Closed-form value for constant terminal data and constant level `b`.
pub fn ode_value(k0: f64, b: f64, r: f64, tau: f64) -> f64 {
    if r == 0.0 {
        k0 + 0.25 * b * b * tau
    } else {
        k0 * (-r * tau).exp() + b * b / (4.0 * r) * (1.0 - (-r * tau).exp())
    }
}

/// Measured quantities shared by `report.json` and `validate.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    pub converged: bool,
    pub mass_error_max: f64,
    pub u_min: f64,
    pub gradient_max: f64,
    pub gradient_bound: f64,
    /// `gradient_max / gradient_bound`; absent when the bound is zero.
    pub grad_bound_ratio: Option<f64>,
    pub energy_gap_term1: f64,
    pub energy_gap_term2: f64,
    pub first_order_residual: f64,
    pub j_equilibrium: Option<f64>,
    /// `min J(competitor) - J(equilibrium)` over the competitor corpus.
    pub j_gap_min: Option<f64>,
    /// `max |optimality_gap - (J(competitor) - J(equilibrium))|`.
    pub gap_identity_max: Option<f64>,
    pub hjb_residual: f64,
    pub fp_weak_residual: f64,
    pub energy_norm: f64,
    /// Sup distance to the closed-form value for constant terminal data.
    pub ode_oracle_error: Option<f64>,
    pub invariant_flags: crate::fixed_point::InvariantFlags,
    pub wall_time: f64,
}

fn diagnostics(sol: &MfgSolution, scenario: &Scenario, converged: bool) -> CliResult<Diagnostics> {
    let (params, grid) = (&sol.params, &sol.grid());
    let SolveReport { iterations, residual_history, invariant_flags, wall_time, mass_error_max, u_min, gradient_max, gradient_bound, energy_norm, energy_gap_last } =
        sol.report.clone();
    let (hjb, fp) = system_residuals(sol, params, grid);
    let eq = ControlPair::equilibrium(sol)?;
    let j_eq = evaluate_j(&eq, &sol.terminal_value, params, grid)?.value();
    let (mut j_gap_min, mut gap_identity_max) = (None, None);
    if let Some(j_eq) = j_eq {
        let corpus = competitor_corpus(sol, params, grid)?;
        let rows: Vec<(Option<f64>, f64)> = corpus
            .par_iter()
            .map(|comp| -> crate::Result<(Option<f64>, f64)> {
                let j = evaluate_j(comp, &sol.terminal_value, params, grid)?;
                let gap = optimality_gap(&eq, comp, &sol.u, params, grid)?;
                Ok((j.value().map(|v| v - j_eq), gap))
            })
            .collect::<crate::Result<_>>()?;
        j_gap_min = rows.iter().filter_map(|r| r.0).reduce(f64::min);
        gap_identity_max = rows
            .iter()
            .filter_map(|(d, g)| d.map(|d| (g - d).abs()))
            .reduce(f64::max);
    }
    let ode_oracle_error = match (&scenario.terminal, sol.bc) {
        (TerminalSpec::Constant { value }, BoundarySpec::NeumannReflection) => {
            let mut worst: f64 = 0.0;
            for k in 0..=grid.nt {
                let exact = ode_value(*value, params.b, params.r, grid.horizon - grid.t(k));
                worst = sol.u.row(k).iter().fold(worst, |a, v| a.max((v - exact).abs()));
            }
            Some(worst)
        }
        _ => None,
    };
    Ok(Diagnostics {
        iterations,
        residual_history,
        converged,
        mass_error_max,
        u_min,
        gradient_max,
        gradient_bound,
        grad_bound_ratio: (gradient_bound > 0.0).then(|| gradient_max / gradient_bound),
        energy_gap_term1: energy_gap_last.0,
        energy_gap_term2: energy_gap_last.1,
        first_order_residual: first_order_residual(sol, params, grid)?,
        j_equilibrium: j_eq,
        j_gap_min,
        gap_identity_max,
        hjb_residual: hjb,
        fp_weak_residual: fp,
        energy_norm,
        ode_oracle_error,
        invariant_flags,
        wall_time,
    })
}

fn dump_solution(dir: &Path, sol: &MfgSolution) -> CliResult<()> {
    fs::create_dir_all(dir)?;
    write_field(&dir.join("u.csv"), &sol.u)?;
    write_field(&dir.join("m.csv"), &sol.m)?;
    write_field(&dir.join("q.csv"), &sol.q)?;
    write_path(&dir.join("path.csv"), sol)?;
    Ok(())
}

fn solve_scenario(s: &Scenario) -> CliResult<(MfgSolution, bool)> {
    match solve_mfg(&s.params, &s.m0, &s.u_t, &s.grid, s.bc, &s.opts) {
        Ok(sol) => Ok((sol, true)),
        Err(MfgError::NoConvergence { partial, .. }) => Ok((*partial, false)),
        Err(e) => Err(e.into()),
    }
}

pub fn run_solve(config: &Path) -> CliResult<()> {
    let scenario = load_scenario(config)?;
    let (sol, converged) = solve_scenario(&scenario)?;
    dump_solution(&scenario.output_dir, &sol)?;
    let diag = diagnostics(&sol, &scenario, converged)?;
    write_json(&scenario.output_dir.join("report.json"), &diag)?;
    if !converged {
        return Err(CliError::Solver(MfgError::NoConvergence {
            iterations: diag.iterations,
            residual: diag.residual_history.last().copied().unwrap_or(f64::NAN),
            partial: Box::new(sol),
        }));
    }
    let flags = diag.invariant_flags;
    let failed: Vec<String> = [
        ("mass-conserved", flags.mass_conserved),
        ("u-nonnegative", flags.u_nonnegative),
        ("gradient-bound", flags.gradient_bound),
        ("energy-gap-zero", flags.energy_gap_zero),
    ]
    .iter()
    .filter(|(_, ok)| !ok)
    .map(|(n, _)| n.to_string())
    .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Invariant(failed))
    }
}

pub fn run_sweep(config: &Path, sigmas: &[f64], parallel: bool, seed: u64) -> CliResult<()> {
    if sigmas.is_empty() {
        return Err(CliError::Config("empty sigma list".into()));
    }
    let scenario = load_scenario(config)?;
    let opts = SweepOptions { fixed_point: scenario.opts.clone(), seed, parallel };
    let sweep = sigma_sweep(&scenario.params, sigmas, &scenario.m0, &scenario.u_t, &scenario.grid, scenario.bc, &opts)?;
    fs::create_dir_all(&scenario.output_dir)?;
    let mut out = BufWriter::new(fs::File::create(scenario.output_dir.join("sweep.csv"))?);
    writeln!(out, "sigma,iterations,d1_to_next,f_supdiff_to_next,holder_d1,holder_u,ut_l2,fisher_like")?;
    let opt = |v: Option<&f64>| v.map(|x| fmt_float(*x)).unwrap_or_default();
    for (i, sigma) in sweep.sigmas.iter().enumerate() {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            fmt_float(*sigma),
            sweep.solutions[i].report.iterations,
            opt(sweep.d1_consecutive.get(i)),
            opt(sweep.f_sup_diffs.get(i)),
            fmt_float(sweep.holder_constants[i]),
            fmt_float(sweep.holder_u[i]),
            fmt_float(sweep.energy_norms.ut_l2[i]),
            fmt_float(sweep.energy_norms.fisher_like[i]),
        )?;
    }
    out.flush()?;
    if let Some(i) = sweep.converged.iter().position(|c| !c) {
        let sol = sweep.solutions[i].clone();
        return Err(CliError::Solver(MfgError::NoConvergence {
            iterations: sol.report.iterations,
            residual: sol.report.residual_history.last().copied().unwrap_or(f64::NAN),
            partial: Box::new(sol),
        }));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub value: Option<f64>,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
    pub diagnostics: Diagnostics,
    pub all_passed: bool,
}

/// Invariant battery on a solved scenario.
pub fn validate_scenario(scenario: &Scenario) -> CliResult<ValidationReport> {
    let (sol, converged) = solve_scenario(scenario)?;
    if !converged {
        return Err(CliError::Solver(MfgError::NoConvergence {
            iterations: sol.report.iterations,
            residual: sol.report.residual_history.last().copied().unwrap_or(f64::NAN),
            partial: Box::new(sol),
        }));
    }
    let diag = diagnostics(&sol, scenario, converged)?;
    let (grid, params) = (scenario.grid, scenario.params);
    let slack = 3.0 * (grid.dx() + grid.dt());

    let shifted = FixedPointOptions { initial_f: InitialPath::Constant(params.b + 0.3 * params.c), ..scenario.opts.clone() };
    let other = solve_mfg(&params, &scenario.m0, &scenario.u_t, &grid, scenario.bc, &shifted)?;
    let (t1, t2) = match scenario.bc {
        BoundarySpec::NeumannReflection => energy_gap(&sol, &other, &params, &grid)?,
        BoundarySpec::DirichletLeft => energy_gap_dirichlet(&sol, &other, params.epsilon, &grid)?,
    };

    let mut checks = Vec::new();
    let mut push = |name: &str, value: Option<f64>, threshold: f64, passed: bool| {
        checks.push(CheckResult { name: name.into(), passed, value, threshold });
    };
    let mass_tol = match scenario.bc {
        BoundarySpec::NeumannReflection => 1e-12,
        BoundarySpec::DirichletLeft => 0.0,
    };
    push("mass-conservation", Some(diag.mass_error_max), mass_tol, diag.mass_error_max <= mass_tol);
    push("u-nonnegative", Some(diag.u_min), -1e-8, diag.u_min >= -1e-8);
    let grad_limit = diag.gradient_bound * 1.05 + crate::fixed_point::GRADIENT_FLOOR;
    push("gradient-bound", Some(diag.gradient_max), grad_limit, diag.gradient_max <= grad_limit);
    push("energy-gap-term1", Some(t1), 1e-6, t1 <= 1e-6);
    push("energy-gap-term2", Some(t2), 1e-6, t2 <= 1e-6);
    push("optimality", diag.j_gap_min, -slack, diag.j_gap_min.is_some_and(|g| g >= -slack));
    push("gap-identity", diag.gap_identity_max, slack, diag.gap_identity_max.is_some_and(|g| g <= slack));
    let foc_tol = if params.sigma > 0.0 { 1e-6 } else { 1e-4 };
    push("first-order-condition", Some(diag.first_order_residual), foc_tol, diag.first_order_residual <= foc_tol);
    let all_passed = checks.iter().all(|c| c.passed);
    Ok(ValidationReport { checks, diagnostics: diag, all_passed })
}

pub fn run_validate(config: &Path) -> CliResult<()> {
    let scenario = load_scenario(config)?;
    let report = validate_scenario(&scenario)?;
    fs::create_dir_all(&scenario.output_dir)?;
    write_json(&scenario.output_dir.join("validate.json"), &report)?;
    if report.all_passed {
        Ok(())
    } else {
        Err(CliError::Invariant(report.checks.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect()))
    }
}

pub fn run(cli: &Cli) -> i32 {
    let outcome = match &cli.command {
        Command::Solve { config } => run_solve(config),
        Command::Sweep { config, sigmas, parallel } => run_sweep(config, sigmas, *parallel, cli.seed),
        Command::Validate { config } => run_validate(config),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("market-mfg: {e}");
            e.exit_code()
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            code
        }
    }
}
