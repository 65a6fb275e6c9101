//! The `sparse-lab` command line.
//!
//! Exit status is 0 on success, 1 when a computation fails and 2 for usage
//! errors. Data goes to stdout (or `--output`); progress and diagnostics go
//! to stderr.

pub mod config;
pub mod output;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::decoder::{decode, DecoderConfig, ProblemInstance};
use crate::error::{Error, Result};
use crate::experiments::{
    run_monte_carlo, sweep_phase_diagram, EnsembleSpec, LambdaMode, DEFAULT_SUCCESS_TOL,
};
use crate::replica::{
    find_critical_alpha, find_critical_rho_x, optimize_lambda, solve_mse_fixed_point, solve_threshold_fixed_point,
    LambdaObjective, MseOutcome, SolverConfig, SystemParams, ThresholdParams,
};
use crate::selftest;

use output::{Cell, Table};

pub const SEED_ENV: &str = "SPARSE_LAB_SEED";

#[derive(Debug, Parser)]
#[command(name = "sparse-lab", version, about = "Replica predictions and simulations for l1-l1 sparse recovery")]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    pub format: Format,
    /// Write data here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Flat `key = value` file of flag defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Critical signal density or compression ratio for perfect recovery.
    Threshold(ThresholdArgs),
    /// Predicted mse along a parameter axis.
    MseCurve(MseCurveArgs),
    /// Critical compression ratio at unit and optimal lambda.
    PhaseDiagram(PhaseArgs),
    /// Best regularization weight for a chosen criterion.
    OptimizeLambda(OptimizeArgs),
    /// Monte Carlo decoding of random instances.
    Mc(McArgs),
    /// Run the built-in invariant checks.
    Selftest(SelftestArgs),
    /// Decode one instance read from a JSON file.
    Decode(DecodeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveFor {
    RhoX,
    Alpha,
}

#[derive(Debug, Args, Serialize)]
pub struct ThresholdArgs {
    #[arg(long, value_enum)]
    pub solve_for: SolveFor,
    #[arg(long, required_if_eq("solve_for", "rho-x"))]
    pub alpha: Option<f64>,
    #[arg(long, required_if_eq("solve_for", "alpha"))]
    pub rho_x: Option<f64>,
    #[arg(long)]
    pub rho_w: f64,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Axis {
    RhoX,
    RhoW,
    Alpha,
    Lambda,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GridArgs {
    #[arg(long)]
    pub start: f64,
    #[arg(long)]
    pub stop: f64,
    /// Number of grid points; 0 gives an empty table.
    #[arg(long)]
    pub count: usize,
    /// Space the points logarithmically.
    #[arg(long)]
    pub log: bool,
}

impl GridArgs {
    pub fn points(&self) -> Result<Vec<f64>> {
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(Error::InvalidParams("grid ends must be finite".into()));
        }
        if self.log && !(self.start > 0.0 && self.stop > 0.0) {
            return Err(Error::InvalidParams("log grid needs positive ends".into()));
        }
        let n = self.count;
        let (a, b) = if self.log { (self.start.ln(), self.stop.ln()) } else { (self.start, self.stop) };
        Ok((0..n)
            .map(|i| {
                let t = if n == 1 { a } else { a + (b - a) * i as f64 / (n - 1) as f64 };
                if self.log {
                    t.exp()
                } else {
                    t
                }
            })
            .collect())
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ParamArgs {
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.1)]
    pub rho_x: f64,
    #[arg(long, default_value_t = 0.1)]
    pub rho_w: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma2_x: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma2_w: f64,
}

impl ParamArgs {
    fn params(&self) -> Result<SystemParams> {
        SystemParams::new(self.alpha, self.lambda, self.rho_x, self.rho_w, self.sigma2_x, self.sigma2_w)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimArgs {
    /// Signal dimension.
    #[arg(long, default_value_t = 256)]
    pub n: usize,
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    #[arg(long, env = SEED_ENV, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_SUCCESS_TOL)]
    pub success_tol: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_iters: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct MseCurveArgs {
    #[arg(long, value_enum, default_value_t = Axis::RhoX)]
    pub axis: Axis,
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArgs,
    /// Values of the non-axis parameters.
    #[command(flatten)]
    #[serde(flatten)]
    pub params: ParamArgs,
    /// Append Monte Carlo columns.
    #[arg(long)]
    pub with_mc: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub sim: SimArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LambdaModeArg {
    Unit,
    Optimal,
}

#[derive(Debug, Args, Serialize)]
pub struct PhaseArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArgs,
    /// Noise-to-signal density ratios.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.2, 0.1, 0.02])]
    pub deltas: Vec<f64>,
    #[arg(long, value_enum, default_value_t = LambdaModeArg::Optimal)]
    pub lambda_mode: LambdaModeArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectiveArg {
    /// Maximize the critical signal density (needs alpha, rho-w).
    CriticalRhoX,
    /// Minimize the critical compression ratio (needs rho-x, rho-w).
    CriticalAlpha,
    /// Minimize the predicted mse.
    Mse,
}

#[derive(Debug, Args, Serialize)]
pub struct OptimizeArgs {
    #[arg(long, value_enum, default_value_t = ObjectiveArg::CriticalRhoX)]
    pub objective: ObjectiveArg,
    #[command(flatten)]
    #[serde(flatten)]
    pub params: ParamArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct McArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub sim: SimArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct SelftestArgs {
    #[arg(long, env = SEED_ENV, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct DecodeArgs {
    /// JSON file with `a` (list of rows), `y`, and optionally `x0`, `w`.
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_iters: usize,
}

/// On-disk form of a [`ProblemInstance`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub a: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<Vec<f64>>,
}

impl InstanceFile {
    pub fn from_instance(inst: &ProblemInstance) -> Self {
        Self {
            a: inst.a().row_iter().map(|r| r.iter().copied().collect()).collect(),
            y: inst.y().iter().copied().collect(),
            x0: inst.x0().map(|v| v.iter().copied().collect()),
            w: inst.w().map(|v| v.iter().copied().collect()),
        }
    }

    pub fn into_instance(self) -> Result<ProblemInstance> {
        let m = self.a.len();
        let n = self.a.first().map_or(0, Vec::len);
        if self.a.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension("rows of a differ in length".into()));
        }
        let a = DMatrix::from_row_iterator(m, n, self.a.into_iter().flatten());
        ProblemInstance::from_parts(
            a,
            DVector::from_vec(self.y),
            self.x0.map(DVector::from_vec),
            self.w.map(DVector::from_vec),
        )
    }

    pub fn load(path: &Path) -> Result<ProblemInstance> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidParams(format!("cannot read {}: {e}", path.display())))?;
        let file: InstanceFile =
            serde_json::from_str(&text).map_err(|e| Error::InvalidParams(format!("bad instance file: {e}")))?;
        file.into_instance()
    }
}

/// What went wrong, sorted by exit status.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Compute(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Compute(_) => 1,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParams(_) | Error::Dimension(_) => Failure::Usage(e.to_string()),
            other => Failure::Compute(other.to_string()),
        }
    }
}

fn params_echo<T: Serialize>(prefix: &str, v: &T, out: &mut Vec<(String, String)>) {
    let Ok(value) = serde_json::to_value(v) else { return };
    flatten(prefix, &value, out);
}

fn flatten(prefix: &str, v: &serde_json::Value, out: &mut Vec<(String, String)>) {
    match v {
        serde_json::Value::Object(map) => {
            for (k, val) in map {
                let k = k.replace('_', "-");
                let key = if prefix.is_empty() { k } else { format!("{prefix}.{k}") };
                flatten(&key, val, out);
            }
        }
        serde_json::Value::String(s) => out.push((prefix.to_string(), s.clone())),
        serde_json::Value::Number(n) => {
            let s = n.as_f64().filter(|_| n.is_f64()).map_or_else(|| n.to_string(), output::format_float);
            out.push((prefix.to_string(), s));
        }
        serde_json::Value::Null => out.push((prefix.to_string(), "none".into())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

fn header(cli: &Cli, command: &impl Serialize) -> Vec<(String, String)> {
    let mut p = vec![
        ("format".to_string(), format!("{:?}", cli.format).to_lowercase()),
        (
            "workers".to_string(),
            cli.workers.map_or_else(|| "auto".into(), |w| w.to_string()),
        ),
    ];
    params_echo("", command, &mut p);
    p
}

fn with_axis(base: &ParamArgs, axis: Axis, v: f64) -> ParamArgs {
    let mut p = base.clone();
    match axis {
        Axis::RhoX => p.rho_x = v,
        Axis::RhoW => p.rho_w = v,
        Axis::Alpha => p.alpha = v,
        Axis::Lambda => p.lambda = v,
    }
    p
}

fn decoder_cfg(max_iters: usize) -> DecoderConfig {
    DecoderConfig {
        max_iters,
        ..DecoderConfig::default()
    }
}

fn cmd_threshold(args: &ThresholdArgs, params: Vec<(String, String)>) -> Result<Table> {
    let cfg = SolverConfig::default();
    let (alpha, rho_x) = match args.solve_for {
        SolveFor::RhoX => {
            let alpha = args.alpha.expect("required by parser");
            (alpha, find_critical_rho_x(alpha, args.lambda, args.rho_w, &cfg)?)
        }
        SolveFor::Alpha => {
            let rho_x = args.rho_x.expect("required by parser");
            (find_critical_alpha(args.lambda, rho_x, args.rho_w, &cfg)?, rho_x)
        }
    };
    let tp = ThresholdParams {
        alpha,
        lambda: args.lambda,
        rho_x,
        rho_w: args.rho_w,
    };
    let state = solve_threshold_fixed_point(&tp, &cfg)?;
    let critical = if args.solve_for == SolveFor::RhoX { rho_x } else { alpha };
    let mut t = Table::new(
        "threshold",
        params,
        vec!["solve_for", "critical", "alpha", "rho_x", "rho_w", "lambda", "a", "chi_hat", "condition_residual"],
    );
    let solved = match args.solve_for {
        SolveFor::RhoX => "rho-x",
        SolveFor::Alpha => "alpha",
    };
    t.push(vec![
        solved.into(),
        critical.into(),
        alpha.into(),
        rho_x.into(),
        args.rho_w.into(),
        args.lambda.into(),
        state.a.into(),
        state.chi_hat.into(),
        state.condition_residual.into(),
    ]);
    Ok(t)
}

fn cmd_mse_curve(args: &MseCurveArgs, params: Vec<(String, String)>) -> Result<Table> {
    let cfg = SolverConfig::default();
    let points = args.grid.points()?;
    let mut columns = vec!["value", "status", "mse", "chi", "m_hat", "chi_hat", "iterations"];
    if args.with_mc {
        columns.extend(["mc_mean_mse", "mc_std_error", "mc_median_mse", "mc_success_fraction", "mc_non_converged"]);
    }
    let mut t = Table::new("mse-curve", params, columns);
    for (k, &v) in points.iter().enumerate() {
        eprintln!("mse-curve: point {}/{} ({v})", k + 1, points.len());
        let p = with_axis(&args.params, args.axis, v).params()?;
        let mut row: Vec<Cell> = vec![v.into()];
        match solve_mse_fixed_point(&p, &cfg) {
            Ok(out) => {
                let s = out.state();
                let status = if let MseOutcome::Perfect(_) = out { "perfect" } else { "converged" };
                row.extend([
                    status.into(),
                    out.mse().into(),
                    s.chi.into(),
                    s.m_hat.into(),
                    s.chi_hat.into(),
                    s.iterations.into(),
                ]);
            }
            Err(e) => {
                eprintln!("mse-curve: {v}: {e}");
                row.push("failed".into());
                row.extend((0..4).map(|_| Cell::Num(f64::NAN)));
                row.push(Cell::Int(-1));
            }
        }
        if args.with_mc {
            let spec = EnsembleSpec {
                n: args.sim.n,
                params: p,
                trials: args.sim.trials,
                base_seed: args.sim.seed,
            };
            let agg = run_monte_carlo(&spec, &decoder_cfg(args.sim.max_iters), args.sim.success_tol)?;
            row.extend([
                agg.mean_mse.into(),
                agg.std_error.into(),
                agg.median_mse.into(),
                agg.success_fraction.into(),
                agg.non_converged.into(),
            ]);
        }
        t.push(row);
    }
    Ok(t)
}

fn cmd_phase_diagram(args: &PhaseArgs, params: Vec<(String, String)>) -> Result<Table> {
    let cfg = SolverConfig::default();
    let points = args.grid.points()?;
    let mode = match args.lambda_mode {
        LambdaModeArg::Unit => LambdaMode::Unit,
        LambdaModeArg::Optimal => LambdaMode::UnitAndOptimal,
    };
    let mut t = Table::new(
        "phase-diagram",
        params,
        vec!["rho_x", "delta", "rho_w", "alpha_c_unit", "alpha_c_optimal", "lambda_optimal"],
    );
    if points.is_empty() {
        return Ok(t);
    }
    eprintln!("phase-diagram: {} points", points.len() * args.deltas.len());
    for row in sweep_phase_diagram(&points, &args.deltas, mode, &cfg)? {
        t.push(vec![
            row.rho_x.into(),
            row.delta.into(),
            (row.delta * row.rho_x).into(),
            row.alpha_c_unit.into(),
            Cell::opt(row.alpha_c_optimal),
            Cell::opt(row.lambda_optimal),
        ]);
    }
    Ok(t)
}

fn cmd_optimize_lambda(args: &OptimizeArgs, params: Vec<(String, String)>) -> Result<Table> {
    let cfg = SolverConfig::default();
    let p = &args.params;
    let (objective, name) = match args.objective {
        ObjectiveArg::CriticalRhoX => (
            LambdaObjective::CriticalRhoX {
                alpha: p.alpha,
                rho_w: p.rho_w,
            },
            "critical-rho-x",
        ),
        ObjectiveArg::CriticalAlpha => (
            LambdaObjective::CriticalAlpha {
                rho_x: p.rho_x,
                rho_w: p.rho_w,
            },
            "critical-alpha",
        ),
        ObjectiveArg::Mse => (LambdaObjective::Mse { params: p.params()? }, "mse"),
    };
    let opt = optimize_lambda(&objective, &cfg)?;
    let at_unit = objective.value(1.0, &cfg)?;
    let mut t = Table::new(
        "optimize-lambda",
        params,
        vec!["objective", "lambda_opt", "value", "value_at_unit_lambda", "evaluations"],
    );
    t.push(vec![name.into(), opt.lambda.into(), opt.value.into(), at_unit.into(), opt.evaluations.into()]);
    Ok(t)
}

fn cmd_mc(args: &McArgs, params: Vec<(String, String)>) -> Result<Table> {
    let spec = EnsembleSpec {
        n: args.sim.n,
        params: args.params.params()?,
        trials: args.sim.trials,
        base_seed: args.sim.seed,
    };
    eprintln!("mc: {} trials at n = {}", spec.trials, spec.n);
    let agg = run_monte_carlo(&spec, &decoder_cfg(args.sim.max_iters), args.sim.success_tol)?;
    let mut t = Table::new(
        "mc",
        params,
        vec![
            "n",
            "m",
            "trials",
            "non_converged",
            "mean_mse",
            "std_error",
            "median_mse",
            "success_fraction",
            "success_tol",
            "replica_mse",
        ],
    );
    t.push(vec![
        spec.n.into(),
        spec.m().into(),
        agg.trials.into(),
        agg.non_converged.into(),
        agg.mean_mse.into(),
        agg.std_error.into(),
        agg.median_mse.into(),
        agg.success_fraction.into(),
        agg.success_tol.into(),
        Cell::opt(agg.replica_mse),
    ]);
    Ok(t)
}

fn cmd_selftest(args: &SelftestArgs, params: Vec<(String, String)>) -> (Table, usize) {
    let checks = selftest::run_all(args.seed);
    let mut t = Table::new("selftest", params, vec!["suite", "check", "status", "value", "tolerance"]);
    let mut failed = 0;
    for c in &checks {
        if !c.passed {
            failed += 1;
        }
        t.push(vec![
            c.suite.into(),
            c.name.as_str().into(),
            if c.passed { "pass" } else { "fail" }.into(),
            c.value.into(),
            c.tolerance.into(),
        ]);
    }
    eprintln!("selftest: {} passed, {failed} failed", checks.len() - failed);
    (t, failed)
}

fn cmd_decode(args: &DecodeArgs, params: Vec<(String, String)>) -> Result<Table> {
    let inst = InstanceFile::load(&args.instance)?;
    let res = decode(&inst, args.lambda, &decoder_cfg(args.max_iters))?;
    eprintln!(
        "decode: objective {} after {} iterations, converged = {}, certificate {:e}",
        res.objective, res.iterations, res.converged, res.certificate
    );
    let mut t = Table::new("decode", params, vec!["index", "x_hat", "x0"]);
    for (j, &v) in res.x_hat.iter().enumerate() {
        t.push(vec![j.into(), v.into(), Cell::opt(inst.x0().map(|x| x[j]))]);
    }
    Ok(t)
}

fn emit(cli: &Cli, table: &Table) -> std::result::Result<(), Failure> {
    let write = |w: &mut dyn Write| match cli.format {
        Format::Csv => table.write_csv(w),
        Format::Json => table.write_json(w),
    };
    let res = match &cli.output {
        Some(path) => {
            let file = File::create(path).map_err(|e| Failure::Usage(format!("cannot create {}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            write(&mut w).and_then(|_| w.flush())
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock)
        }
    };
    res.map_err(|e| Failure::Compute(format!("write failed: {e}")))
}

fn dispatch(cli: &Cli) -> std::result::Result<(), Failure> {
    let table = match &cli.command {
        Command::Threshold(a) => cmd_threshold(a, header(cli, a))?,
        Command::MseCurve(a) => cmd_mse_curve(a, header(cli, a))?,
        Command::PhaseDiagram(a) => cmd_phase_diagram(a, header(cli, a))?,
        Command::OptimizeLambda(a) => cmd_optimize_lambda(a, header(cli, a))?,
        Command::Mc(a) => cmd_mc(a, header(cli, a))?,
        Command::Decode(a) => cmd_decode(a, header(cli, a))?,
        Command::Selftest(a) => {
            let (table, failed) = cmd_selftest(a, header(cli, a));
            emit(cli, &table)?;
            return if failed == 0 {
                Ok(())
            } else {
                Err(Failure::Compute(format!("{failed} selftest checks failed")))
            };
        }
    };
    emit(cli, &table)
}

/// Parses `args` (including the program name), runs the command and
/// returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let mut args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    if let Some(path) = config::config_path(&args) {
        match config::read_config(Path::new(&path)) {
            Ok(entries) => args = config::merge(&args, &entries),
            Err(e) => {
                eprintln!("error: {e}");
                return 2;
            }
        }
    }
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    let workers = cli
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if workers == 0 {
        eprintln!("error: --workers must be positive");
        return 2;
    }
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return 1;
        }
    };
    match pool.install(|| dispatch(&cli)) {
        Ok(()) => 0,
        Err(f) => {
            match &f {
                Failure::Usage(m) | Failure::Compute(m) => eprintln!("error: {m}"),
            }
            f.exit_code()
        }
    }
}
