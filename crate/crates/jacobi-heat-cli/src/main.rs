#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use jacobi_heat::envelopes::{
    fit_grid_values, heat_grid_values, main_envelope, oracle_grid_values, EnvelopeConstants,
    WorstPoint,
};
use jacobi_heat::grid::log_spaced;
use jacobi_heat::kernels::{
    dirichlet_neumann_oracle_trig, func_factor, has_oracle, heat_series, log_trig_factor,
    reduction_heat_value, T_FLOOR,
};
use jacobi_heat::maximal::{run_weak_type_experiment, MultiParams, WeakTypeConfig, DEFAULT_WIDTHS};
use jacobi_heat::verify::{default_params, run_suite, Check, SuiteConfig, DEFAULT_SEED};
use jacobi_heat::{Error, GridSpec, HeatPoint, JacobiParams, KernelValue, SeriesTruncation};
use jacobi_heat_cli::{
    exit, fmt_num, parse_pair, thread_cap, write_report_rows, write_weak_type_rows, CliError,
    CliResult, ReportRow,
};

/// Jacobi heat and Poisson kernels: evaluation, envelope fits, verification suite,
/// maximal-operator experiments.
#[derive(Parser)]
#[command(name = "jacobi-heat", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one kernel value.
    Eval(EvalArgs),
    /// Run the verification suite and print a JSON list of check results.
    Verify(VerifyArgs),
    /// Fit envelope constants over a grid.
    Envelope(EnvelopeArgs),
    /// Weak-type ratios of the heat maximal operator for shrinking bumps.
    Maximal(MaximalArgs),
    /// Raw kernel table over a grid, as CSV.
    Table(TableArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Setting {
    /// G_t(cos θ, cos φ)
    Pure,
    /// 2^S e^{−tS²/4} G_t(cos θ, cos φ)
    Trig,
    /// F(θ) F(φ) times the trig kernel
    Func,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Method {
    Series,
    Reduction,
    /// Closed forms, α, β ∈ {−1/2, 1/2} only
    Oracle,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct EvalArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    beta: f64,
    #[arg(long)]
    theta: f64,
    #[arg(long)]
    phi: f64,
    #[arg(long)]
    t: f64,
    #[arg(long, value_enum, default_value = "pure")]
    setting: Setting,
    #[arg(long, value_enum, default_value = "series")]
    method: Method,
    /// Tail tolerance of the series paths.
    #[arg(long, default_value_t = 1e-16)]
    tol: f64,
    /// Print a JSON object instead of `key = value` lines.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct GridArgs {
    #[arg(long, default_value_t = 48)]
    theta_steps: usize,
    #[arg(long, default_value_t = 48)]
    phi_steps: usize,
    #[arg(long, default_value_t = 1e-3)]
    t_min: f64,
    #[arg(long, default_value_t = 1.0)]
    t_max: f64,
    /// Number of log-spaced t values in [t_min, t_max].
    #[arg(long, default_value_t = 25)]
    t_count: usize,
}

impl GridArgs {
    fn grid(&self) -> CliResult<GridSpec> {
        if !(self.t_min <= self.t_max) {
            return Err(CliError::Usage(format!(
                "--t-min {} exceeds --t-max {}",
                self.t_min, self.t_max
            )));
        }
        Ok(GridSpec::new(
            self.theta_steps,
            self.phi_steps,
            log_spaced(self.t_min, self.t_max, self.t_count),
        )?)
    }
}

#[derive(Args)]
struct VerifyArgs {
    /// Parameter pair ALPHA,BETA; repeat for several (default: the four standard pairs).
    #[arg(long = "pair", value_parser = parse_pair, allow_hyphen_values = true)]
    pairs: Vec<JacobiParams>,
    /// Check to run, e.g. `envelope` or `check_envelope`; repeat for several (default: all).
    #[arg(long = "check", value_parser = parse_check)]
    checks: Vec<Check>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[command(flatten)]
    grid: GridArgs,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct EnvelopeArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    beta: f64,
    #[command(flatten)]
    grid: GridArgs,
    /// Kernel values from the closed forms (±1/2 cases only) instead of the series.
    #[arg(long)]
    oracle: bool,
    /// Also write one CSV row per grid point, against the fitted upper envelope.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct MaximalArgs {
    /// Per-axis parameter pair ALPHA,BETA; repeat once per dimension (at most 3).
    /// Without it, --dims picks a default run.
    #[arg(long = "pair", value_parser = parse_pair, allow_hyphen_values = true)]
    pairs: Vec<JacobiParams>,
    /// Default run: 1 (Legendre, 1024 cells) or 2 ((0,0) x (1/2,1/2), 256 cells per axis).
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    dims: u8,
    #[arg(long)]
    cells: Option<usize>,
    /// Bump widths, comma separated.
    #[arg(long, value_delimiter = ',')]
    widths: Vec<f64>,
    #[arg(long, default_value_t = 1e-3)]
    t_min: f64,
    #[arg(long, default_value_t = 10.0)]
    t_max: f64,
    #[arg(long, default_value_t = 40)]
    t_count: usize,
    /// Write the full report (rows, per-width maxima, spread, warnings) as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct TableArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    beta: f64,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, value_enum, default_value = "pure")]
    setting: Setting,
    #[arg(long, value_enum, default_value = "series")]
    method: Method,
    /// Gaussian rate of the envelope column.
    #[arg(long, default_value_t = 0.25)]
    c: f64,
}

fn parse_check(s: &str) -> Result<Check, String> {
    s.parse::<Check>().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match thread_cap(std::env::var("JACOBI_HEAT_THREADS").ok().as_deref()) {
        Ok(Some(n)) => {
            if let Err(e) = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
            {
                eprintln!("error: {e}");
                return ExitCode::from(exit::USAGE);
            }
        }
        Ok(None) => {}
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit::USAGE);
        }
    }
    let result = match cli.command {
        Command::Eval(a) => cmd_eval(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Envelope(a) => cmd_envelope(a),
        Command::Maximal(a) => cmd_maximal(a),
        Command::Table(a) => cmd_table(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn stdout() -> BufWriter<io::StdoutLock<'static>> {
    BufWriter::new(io::stdout().lock())
}

fn write_json<T: Serialize>(path: Option<&PathBuf>, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Factor taking G_t(cos θ, cos φ) to the requested setting.
fn setting_factor(params: JacobiParams, p: HeatPoint, setting: Setting) -> f64 {
    match setting {
        Setting::Pure => 1.0,
        Setting::Trig => log_trig_factor(params, p.t()).exp(),
        Setting::Func => {
            log_trig_factor(params, p.t()).exp()
                * func_factor(params, p.theta())
                * func_factor(params, p.phi())
        }
    }
}

fn in_setting(v: KernelValue, factor: f64) -> KernelValue {
    KernelValue {
        value: v.value * factor,
        tail_bound: v.tail_bound * factor,
        round_bound: v.round_bound * factor,
        ..v
    }
}

fn pure_value(
    params: JacobiParams,
    p: HeatPoint,
    method: Method,
    trunc: SeriesTruncation,
) -> CliResult<KernelValue> {
    Ok(match method {
        Method::Series => heat_series(params, p.x(), p.y(), p.t(), trunc)?,
        Method::Reduction => reduction_heat_value(params, p, trunc)?,
        Method::Oracle => {
            let v =
                dirichlet_neumann_oracle_trig(params, p)? / log_trig_factor(params, p.t()).exp();
            KernelValue::exact(v)
        }
    })
}

#[derive(Serialize)]
struct EvalOutput {
    params: JacobiParams,
    point: HeatPoint,
    setting: Setting,
    method: Method,
    value: f64,
    tail_bound: f64,
    round_bound: f64,
    terms_used: usize,
    certified: bool,
}

fn cmd_eval(a: EvalArgs) -> CliResult<ExitCode> {
    let params = JacobiParams::new(a.alpha, a.beta)?;
    let point = HeatPoint::new(a.theta, a.phi, a.t)?;
    if a.t < T_FLOOR {
        return Err(Error::PrecisionFloor {
            t: a.t,
            floor: T_FLOOR,
        }
        .into());
    }
    let trunc = SeriesTruncation::new(SeriesTruncation::default().max_terms, a.tol)?;
    let v = pure_value(params, point, a.method, trunc)?;
    let v = in_setting(v, setting_factor(params, point, a.setting));
    let out = EvalOutput {
        params,
        point,
        setting: a.setting,
        method: a.method,
        value: v.value,
        tail_bound: v.tail_bound,
        round_bound: v.round_bound,
        terms_used: v.terms_used,
        certified: v.certified,
    };
    if a.json {
        write_json(None, &out)?;
    } else {
        let mut w = stdout();
        writeln!(w, "value = {}", fmt_num(out.value))?;
        writeln!(w, "tail_bound = {}", fmt_num(out.tail_bound))?;
        writeln!(w, "round_bound = {}", fmt_num(out.round_bound))?;
        writeln!(w, "terms_used = {}", out.terms_used)?;
        writeln!(w, "certified = {}", out.certified)?;
    }
    Ok(ExitCode::from(exit::PASS))
}

fn cmd_verify(a: VerifyArgs) -> CliResult<ExitCode> {
    let params = if a.pairs.is_empty() {
        default_params()
    } else {
        a.pairs
    };
    let checks = if a.checks.is_empty() {
        Check::ALL.to_vec()
    } else {
        a.checks
    };
    let cfg = SuiteConfig {
        grid: a.grid.grid()?,
        seed: a.seed,
        checks,
    };
    let results = run_suite(&params, &cfg);
    write_json(a.out.as_ref(), &results)?;
    let failed = results.iter().filter(|r| !r.pass).count();
    if failed > 0 {
        eprintln!("{failed} of {} checks failed", results.len());
        return Ok(ExitCode::from(exit::CHECK_FAILED));
    }
    Ok(ExitCode::from(exit::PASS))
}

#[derive(Serialize)]
struct EnvelopeOutput {
    params: JacobiParams,
    #[serde(flatten)]
    constants: EnvelopeConstants,
    grid: GridSpec,
    resolved: usize,
    skipped: usize,
    conjectural: bool,
    worst_points: Vec<WorstPoint>,
}

fn cmd_envelope(a: EnvelopeArgs) -> CliResult<ExitCode> {
    let params = JacobiParams::new(a.alpha, a.beta)?;
    let grid = a.grid.grid()?;
    if a.oracle && !has_oracle(params) {
        return Err(CliError::Usage(format!(
            "--oracle needs alpha, beta in {{-1/2, 1/2}}, got {params}"
        )));
    }
    let values = if a.oracle {
        oracle_grid_values(params, &grid)?
    } else {
        heat_grid_values(params, &grid)?
    };
    let (constants, report) = fit_grid_values(params, &grid, &values)?;
    if let Some(path) = &a.csv {
        let rows: Vec<ReportRow> = grid
            .points()
            .into_iter()
            .zip(&values)
            .map(|(p, v)| {
                let env = constants.scale * main_envelope(params, p, constants.c2);
                ReportRow {
                    params,
                    theta: p.theta(),
                    phi: p.phi(),
                    t: p.t(),
                    kernel: v.value,
                    envelope: env,
                    ratio: v.value / env,
                    tail_bound: v.tail_bound,
                    certified: v.certified,
                }
            })
            .collect();
        write_report_rows(BufWriter::new(File::create(path)?), &rows)?;
    }
    let out = EnvelopeOutput {
        params,
        constants,
        grid,
        resolved: report.resolved,
        skipped: report.skipped,
        conjectural: report.conjectural,
        worst_points: report.worst_points,
    };
    write_json(None, &out)?;
    Ok(ExitCode::from(exit::PASS))
}

fn cmd_maximal(a: MaximalArgs) -> CliResult<ExitCode> {
    let mut cfg = if a.pairs.is_empty() {
        if a.dims == 1 {
            WeakTypeConfig::default_d1()
        } else {
            WeakTypeConfig::default_d2()
        }
    } else {
        let mp = MultiParams::new(a.pairs)?;
        let cells = if mp.dims() == 1 {
            1024
        } else {
            256 >> (2 * (mp.dims() - 2))
        };
        WeakTypeConfig::with_defaults(mp, cells)
    };
    if let Some(c) = a.cells {
        cfg.cells_per_axis = c;
    }
    cfg.widths = if a.widths.is_empty() {
        DEFAULT_WIDTHS.to_vec()
    } else {
        a.widths
    };
    if !(a.t_min > 0.0 && a.t_min <= a.t_max) || a.t_count == 0 {
        return Err(CliError::Usage(
            "ladder needs 0 < --t-min <= --t-max and --t-count >= 1".into(),
        ));
    }
    cfg.t_ladder = log_spaced(a.t_min, a.t_max, a.t_count);
    let report = run_weak_type_experiment(&cfg)?;
    write_weak_type_rows(stdout(), &report.rows)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    eprintln!("spread = {}", fmt_num(report.spread));
    if let Some(path) = &a.json {
        write_json(Some(path), &report)?;
    }
    Ok(ExitCode::from(exit::PASS))
}

fn cmd_table(a: TableArgs) -> CliResult<ExitCode> {
    let params = JacobiParams::new(a.alpha, a.beta)?;
    let grid = a.grid.grid()?;
    let points = grid.points();
    let values = match a.method {
        Method::Series => heat_grid_values(params, &grid)?,
        Method::Oracle => oracle_grid_values(params, &grid)?,
        Method::Reduction => points
            .par_iter()
            .map(|&p| pure_value(params, p, Method::Reduction, SeriesTruncation::default()))
            .collect::<CliResult<Vec<_>>>()?,
    };
    let rows: Vec<ReportRow> = points
        .iter()
        .zip(values)
        .map(|(&p, v)| {
            let f = setting_factor(params, p, a.setting);
            let v = in_setting(v, f);
            let env = main_envelope(params, p, a.c) * f;
            ReportRow {
                params,
                theta: p.theta(),
                phi: p.phi(),
                t: p.t(),
                kernel: v.value,
                envelope: env,
                ratio: v.value / env,
                tail_bound: v.tail_bound,
                certified: v.certified,
            }
        })
        .collect();
    write_report_rows(stdout(), &rows)?;
    Ok(ExitCode::from(exit::PASS))
}
