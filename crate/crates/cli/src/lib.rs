//! `rflight` command line.
//!
//! Exit codes: 0 success, 1 validation failure or numerical breakdown,
//! 2 usage error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use rflight::charfn::{laplace_cf_closed, laplace_numeric_roundtrip, Representation, SeriesEvaluator, MAX_TERMS};
use rflight::coeffs::{derived_by_determinant, derived_by_recurrence};
use rflight::exactpoly::MonomialRecord;
use rflight::moments::{eval_moment_series, mixed_moment_all_ones, mixed_moment_all_twos_series};
use rflight::simulate::{estimate_cf, estimate_mixed_moment, estimate_no_switch_fraction, McConfig};
use rflight::validate::{compare, CompareConfig};
use rflight::{Dimension, Error, FlightParams, SeriesKind};

/// Environment variable that sets the worker count when `--workers` is absent.
pub const WORKERS_ENV: &str = "RFLIGHT_WORKERS";

/// Version tag written in the first line of every CSV report.
pub const CSV_VERSION: &str = "1";

const EVAL_COLUMNS: &str = "m,lambda,c,a,t,value_bessel,value_time,terms_b,terms_t,tail_b,tail_t";

#[derive(Debug, Parser)]
#[command(name = "rflight", version, about = "Characteristic function of the Markov random flight")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact coefficient polynomial of index n as JSON.
    Coeffs(CoeffsArgs),
    /// Evaluate the characteristic function with both series.
    Eval(EvalArgs),
    /// Compare the numerical Laplace transform with the closed form.
    LaplaceCheck(LaplaceArgs),
    /// Monte Carlo estimate of the characteristic function or a moment.
    Simulate(SimulateArgs),
    /// Mixed-moment series.
    Moments(MomentsArgs),
    /// Run the cross-validation grid.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Bessel,
    Time,
}

impl From<KindArg> for SeriesKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Bessel => SeriesKind::BesselSeries,
            KindArg::Time => SeriesKind::TimeSeries,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Recurrence,
    Determinant,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write the report here instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CoeffsArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    #[arg(long)]
    pub m: u32,
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum, default_value = "recurrence")]
    pub method: Method,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub m: u32,
    #[arg(long)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    /// Norms ‖α‖, comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with = "alpha", required_unless_present = "alpha")]
    pub a: Vec<f64>,
    /// A single α vector; only its norm matters.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub alpha: Option<Vec<f64>>,
    /// Times, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub t: Vec<f64>,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = MAX_TERMS)]
    pub max_terms: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct LaplaceArgs {
    #[arg(long)]
    pub m: u32,
    #[arg(long)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long)]
    pub a: f64,
    /// Laplace variables, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub s: Vec<f64>,
    /// Largest accepted |numeric − closed form|.
    #[arg(long, default_value_t = 1e-6)]
    pub threshold: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Estimand {
    /// Fraction of trajectories without a direction change.
    NoSwitch,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("what").required(true).args(["alpha", "moment", "estimand"])))]
pub struct SimulateArgs {
    #[arg(long)]
    pub m: u32,
    #[arg(long)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long)]
    pub t: f64,
    /// Estimate E cos⟨α, X(t)⟩ and E sin⟨α, X(t)⟩.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub alpha: Option<Vec<f64>>,
    /// Estimate E Π X_j^{q_j} for this multi-index.
    #[arg(long, value_delimiter = ',')]
    pub moment: Option<Vec<u32>>,
    #[arg(long, value_enum)]
    pub estimand: Option<Estimand>,
    #[command(flatten)]
    pub mc: McArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct McArgs {
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Worker count; falls back to RFLIGHT_WORKERS, then to the number of
    /// available cores. Results depend on it.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct MomentsArgs {
    #[arg(long)]
    pub m: u32,
    /// Multi-index: all ones or all twos, length m. Defaults to all twos.
    #[arg(long, value_delimiter = ',')]
    pub q: Option<Vec<u32>>,
    /// Highest power of t kept.
    #[arg(long, default_value_t = 7)]
    pub order: usize,
    #[arg(long, requires = "t")]
    pub lambda: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    /// Evaluate the truncated series at this time (needs --lambda).
    #[arg(long, requires = "lambda")]
    pub t: Option<f64>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[command(flatten)]
    pub mc: McArgs,
    /// Corrupt one Bessel-series coefficient; the run must then fail.
    #[arg(long)]
    pub fault_injection: bool,
    /// Skip the Monte Carlo check.
    #[arg(long)]
    pub no_monte_carlo: bool,
    #[command(flatten)]
    pub out: OutputArgs,
}

/// Failure of a subcommand, mapped to an exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failed(_) => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) | Error::OutOfRange(_) => CliError::Usage(e.to_string()),
            _ => CliError::Failed(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// A rendered report plus whether it records a validation failure.
struct Report {
    body: String,
    passed: bool,
}

impl Report {
    fn ok(body: String) -> Self {
        Report { body, passed: true }
    }
}

/// Parses `argv`, runs the subcommand and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            match &e {
                CliError::Usage(msg) => eprintln!("error: {msg}"),
                CliError::Failed(msg) => eprintln!("failed: {msg}"),
            }
            e.exit_code()
        }
    }
}

fn execute(cmd: &Command) -> CliResult<i32> {
    let (report, out) = match cmd {
        Command::Coeffs(a) => (coeffs(a)?, &a.out),
        Command::Eval(a) => (eval(a)?, &a.out),
        Command::LaplaceCheck(a) => (laplace_check(a)?, &a.out),
        Command::Simulate(a) => (simulate(a)?, &a.out),
        Command::Moments(a) => (moments(a)?, &a.out),
        Command::Compare(a) => (compare_cmd(a)?, &a.out),
    };
    emit(&report.body, out)?;
    Ok(if report.passed { 0 } else { 1 })
}

fn emit(body: &str, out: &OutputArgs) -> CliResult<()> {
    match &out.output {
        Some(path) => {
            std::fs::write(path, body).map_err(|e| CliError::Failed(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(body.as_bytes()).map_err(|e| CliError::Failed(e.to_string()))
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Failed(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// CSV body preceded by `# rflight <what> csv v<N>`; `header` is written
/// only when `rows` is empty, so the column line is always present.
fn to_csv<T: Serialize>(what: &str, header: &str, rows: &[T]) -> CliResult<String> {
    let mut w = csv::WriterBuilder::new().has_headers(true).from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Failed(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Failed(e.to_string()))?;
    let mut body = format!("# rflight {what} csv v{CSV_VERSION}\n");
    if rows.is_empty() {
        body.push_str(header);
        body.push('\n');
    }
    body.push_str(&String::from_utf8(bytes).map_err(|e| CliError::Failed(e.to_string()))?);
    Ok(body)
}

fn finite(name: &str, x: f64) -> CliResult<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(CliError::Usage(format!("{name} must be finite, got {x}")))
    }
}

fn positive(name: &str, x: f64) -> CliResult<f64> {
    if finite(name, x)? > 0.0 {
        Ok(x)
    } else {
        Err(CliError::Usage(format!("{name} must be > 0, got {x}")))
    }
}

/// `--workers`, then the environment variable, then available parallelism.
pub fn resolve_workers(flag: Option<usize>) -> CliResult<usize> {
    let workers = match flag {
        Some(w) => w,
        None => match std::env::var(WORKERS_ENV) {
            Ok(s) => s
                .trim()
                .parse::<usize>()
                .map_err(|_| CliError::Usage(format!("{WORKERS_ENV} must be a positive integer, got {s:?}")))?,
            Err(_) => std::thread::available_parallelism().map_or(1, |n| n.get()),
        },
    };
    if workers == 0 {
        return Err(CliError::Usage("worker count must be >= 1".into()));
    }
    Ok(workers)
}

#[derive(Serialize)]
struct CoeffsReport {
    kind: SeriesKind,
    m: u32,
    n: usize,
    poly: Vec<MonomialRecord>,
    text: String,
}

fn coeffs(a: &CoeffsArgs) -> CliResult<Report> {
    let m = Dimension::new(a.m)?;
    let kind = SeriesKind::from(a.kind);
    let poly = match a.method {
        Method::Recurrence => derived_by_recurrence(kind, m, a.n).derived[a.n].clone(),
        Method::Determinant => derived_by_determinant(kind, m, a.n)?,
    };
    let report = CoeffsReport { kind, m: a.m, n: a.n, poly: poly.to_records(), text: poly.to_string() };
    match a.out.format.unwrap_or(Format::Json) {
        Format::Json => Ok(Report::ok(to_json(&report)?)),
        Format::Csv => Ok(Report::ok(to_csv("coeffs", "dl,dv,num,den", &report.poly)?)),
    }
}

#[derive(Serialize)]
struct EvalRow {
    m: u32,
    lambda: f64,
    c: f64,
    a: f64,
    t: f64,
    value_bessel: f64,
    value_time: f64,
    terms_b: usize,
    terms_t: usize,
    tail_b: f64,
    tail_t: f64,
}

fn eval(args: &EvalArgs) -> CliResult<Report> {
    let params = FlightParams::new(args.m, args.lambda, args.c)?;
    positive("tol", args.tol)?;
    let norms = match &args.alpha {
        Some(alpha) => {
            if alpha.len() != args.m as usize {
                return Err(CliError::Usage(format!("--alpha has {} entries, expected m = {}", alpha.len(), args.m)));
            }
            vec![alpha.iter().map(|x| x * x).sum::<f64>().sqrt()]
        }
        None => args.a.clone(),
    };
    for &t in &args.t {
        positive("t", t)?;
    }
    let mut rows = Vec::new();
    for &a in &norms {
        finite("a", a)?;
        let b = SeriesEvaluator::with_max_terms(Representation::Bessel, &params, a, args.max_terms)?;
        let tp = SeriesEvaluator::with_max_terms(Representation::TimePower, &params, a, args.max_terms)?;
        for &t in &args.t {
            let eb = b.eval(t, args.tol)?;
            let et = tp.eval(t, args.tol)?;
            rows.push(EvalRow {
                m: args.m,
                lambda: args.lambda,
                c: args.c,
                a,
                t,
                value_bessel: eb.value,
                value_time: et.value,
                terms_b: eb.terms_used,
                terms_t: et.terms_used,
                tail_b: eb.tail_estimate,
                tail_t: et.tail_estimate,
            });
        }
    }
    match args.out.format.unwrap_or(Format::Csv) {
        Format::Csv => Ok(Report::ok(to_csv("eval", EVAL_COLUMNS, &rows)?)),
        Format::Json => Ok(Report::ok(to_json(&rows)?)),
    }
}

#[derive(Serialize)]
struct LaplaceRow {
    m: u32,
    lambda: f64,
    c: f64,
    a: f64,
    s: f64,
    numeric: f64,
    closed: f64,
    abs_diff: f64,
    passed: bool,
}

fn laplace_check(args: &LaplaceArgs) -> CliResult<Report> {
    let params = FlightParams::new(args.m, args.lambda, args.c)?;
    positive("threshold", args.threshold)?;
    finite("a", args.a)?;
    let quad_tol = args.threshold * 1e-3;
    let mut rows = Vec::new();
    for &s in &args.s {
        positive("s", s)?;
        let closed = laplace_cf_closed(&params, args.a, s)?;
        let numeric = laplace_numeric_roundtrip(&params, args.a, s, quad_tol)?;
        let abs_diff = (numeric - closed).abs();
        rows.push(LaplaceRow {
            m: args.m,
            lambda: args.lambda,
            c: args.c,
            a: args.a,
            s,
            numeric,
            closed,
            abs_diff,
            passed: abs_diff <= args.threshold,
        });
    }
    let passed = rows.iter().all(|r| r.passed);
    let body = match args.out.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&rows)?,
        Format::Csv => to_csv("laplace-check", "m,lambda,c,a,s,numeric,closed,abs_diff,passed", &rows)?,
    };
    Ok(Report { body, passed })
}

#[derive(Serialize)]
struct ImagPart {
    mean: f64,
    stderr: f64,
}

#[derive(Serialize)]
struct SimulateReport {
    estimand: String,
    mean: f64,
    stderr: f64,
    samples: u64,
    seed: u64,
    workers: usize,
    /// Imaginary part, for characteristic-function estimates.
    #[serde(skip_serializing_if = "Option::is_none")]
    imag: Option<ImagPart>,
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn simulate(args: &SimulateArgs) -> CliResult<Report> {
    let params = FlightParams::new(args.m, args.lambda, args.c)?;
    let workers = resolve_workers(args.mc.workers)?;
    let cfg = McConfig::new(params, args.t, args.mc.samples, args.mc.seed, workers)?;
    let report = if let Some(alpha) = &args.alpha {
        let est = estimate_cf(&cfg, alpha)?;
        SimulateReport {
            estimand: format!("cf[alpha={}]", join(alpha)),
            mean: est.re.mean,
            stderr: est.re.stderr,
            samples: est.re.samples,
            seed: est.re.seed,
            workers,
            imag: Some(ImagPart { mean: est.im.mean, stderr: est.im.stderr }),
        }
    } else if let Some(q) = &args.moment {
        let est = estimate_mixed_moment(&cfg, q)?;
        SimulateReport {
            estimand: format!("moment[q={}]", join(q)),
            mean: est.mean,
            stderr: est.stderr,
            samples: est.samples,
            seed: est.seed,
            workers,
            imag: None,
        }
    } else {
        let est = estimate_no_switch_fraction(&cfg);
        SimulateReport {
            estimand: "no-switch".into(),
            mean: est.mean,
            stderr: est.stderr,
            samples: est.samples,
            seed: est.seed,
            workers,
            imag: None,
        }
    };
    match args.out.format.unwrap_or(Format::Json) {
        Format::Json => Ok(Report::ok(to_json(&report)?)),
        Format::Csv => Err(CliError::Usage("simulate writes JSON only".into())),
    }
}

#[derive(Serialize)]
struct MomentRow {
    n: u32,
    coeff_num: String,
    coeff_den: String,
    deg_lambda: u32,
    deg_c: u32,
}

#[derive(Serialize)]
struct MomentsReport {
    m: u32,
    q: Vec<u32>,
    /// Dimension other than 3: same rule, outside the derived case.
    extension: bool,
    order: usize,
    /// Coefficients of `λ^deg_lambda c^deg_c tⁿ` inside `e^{-λt}(…)`.
    terms: Vec<MomentRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    value_at_t: Option<f64>,
}

fn moments(args: &MomentsArgs) -> CliResult<Report> {
    let m = Dimension::new(args.m)?;
    let q = args.q.clone().unwrap_or_else(|| vec![2; args.m as usize]);
    if q.len() != args.m as usize {
        return Err(CliError::Usage(format!("--q has {} entries, expected m = {}", q.len(), args.m)));
    }
    let series = if q.iter().all(|&x| x == 2) {
        mixed_moment_all_twos_series(m, args.order)?
    } else if q.iter().all(|&x| x == 1) {
        mixed_moment_all_ones(m)
    } else {
        return Err(CliError::Usage(
            "series are available for q = (1,…,1) and q = (2,…,2); use `simulate --moment` otherwise".into(),
        ));
    };
    let mut terms = Vec::new();
    for term in &series.terms {
        for (k, coeff) in series.power_coefficient(term.n) {
            terms.push(MomentRow {
                n: term.n,
                coeff_num: coeff.numer().to_string(),
                coeff_den: coeff.denom().to_string(),
                deg_lambda: k,
                deg_c: term.deg_c,
            });
        }
    }
    let value_at_t = match (args.t, args.lambda) {
        (Some(t), Some(lambda)) => {
            FlightParams::new(args.m, lambda, args.c)?;
            Some(eval_moment_series(&series, lambda, args.c, t)?)
        }
        _ => None,
    };
    let report = MomentsReport { m: args.m, q, extension: series.extension, order: args.order, terms, value_at_t };
    match args.out.format.unwrap_or(Format::Json) {
        Format::Json => Ok(Report::ok(to_json(&report)?)),
        Format::Csv => Ok(Report::ok(to_csv("moments", "n,coeff_num,coeff_den,deg_lambda,deg_c", &report.terms)?)),
    }
}

#[derive(Serialize)]
struct CheckRow<'a> {
    name: &'a str,
    points: usize,
    metric: &'a str,
    max_deviation: f64,
    threshold: f64,
    retried: usize,
    passed: bool,
}

fn compare_cmd(args: &CompareArgs) -> CliResult<Report> {
    positive("tol", args.tol)?;
    if args.mc.samples < 2 {
        return Err(CliError::Usage("--samples must be >= 2".into()));
    }
    let cfg = CompareConfig {
        tol: args.tol,
        samples: args.mc.samples,
        seed: args.mc.seed,
        workers: resolve_workers(args.mc.workers)?,
        fault_injection: args.fault_injection,
        monte_carlo: !args.no_monte_carlo,
    };
    let report = compare(&cfg);
    let body = match args.out.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&report)?,
        Format::Csv => {
            let rows: Vec<CheckRow> = report
                .checks
                .iter()
                .map(|c| CheckRow {
                    name: &c.name,
                    points: c.points,
                    metric: match c.metric {
                        rflight::validate::Metric::Abs => "abs",
                        rflight::validate::Metric::Sigma => "sigma",
                    },
                    max_deviation: c.max_deviation,
                    threshold: c.threshold,
                    retried: c.retried,
                    passed: c.passed,
                })
                .collect();
            to_csv("compare", "name,points,metric,max_deviation,threshold,retried,passed", &rows)?
        }
    };
    Ok(Report { body, passed: report.passed })
}
