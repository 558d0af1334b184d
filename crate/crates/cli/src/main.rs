//! `entconv`: information measures, sweeps over n and convergence certificates.
//!
//! Exit codes: 0 finite / certified / all checks passed, 1 usage, config or
//! I/O error, 2 diverged or over budget, 3 hypothesis failed, 4 inconclusive
//! (including failed golden comparisons).

mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use entconv::certifier::{
    certify_corollary, certify_discrete_pointwise, certify_thm1, certify_thm2, certify_thm3, CertifyOptions,
};
use entconv::discrete::DEFAULT_EPS;
use entconv::scenarios::{self, default_continuous_ns, default_discrete_ns};
use entconv::sweep::{self, QuantitySet, SweepRecord};
use entconv::{Error, Finiteness, Quantity, Scenario, ScenarioFamily, Verdict};
use rayon::prelude::*;

use config::{parse_range, resolve_scenario, Config};

const EXIT_OK: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_DIVERGED: u8 = 2;
const EXIT_HYPOTHESIS: u8 = 3;
const EXIT_INCONCLUSIVE: u8 = 4;

const DEFAULT_SWEEP_RANGE: &str = "1..16";

#[derive(Parser)]
#[command(name = "entconv", version, about = "Entropy, KL and variation along density sequences")]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Registered scenario name; overrides the config.
    #[arg(long, global = true)]
    scenario: Option<String>,
    /// Quadrature tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Probe-point seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One quantity for member n against the limit.
    Measure {
        #[arg(long, value_enum)]
        quantity: QuantityArg,
        #[arg(long, default_value_t = 1)]
        n: u64,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// A table of the measures over an n range.
    Sweep(SweepArgs),
    /// Run a convergence certificate.
    Certify {
        #[arg(long, value_enum)]
        theorem: Option<TheoremArg>,
        /// Comma-separated n list.
        #[arg(long, value_delimiter = ',')]
        n: Vec<u64>,
        #[arg(long)]
        n_range: Option<String>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Spike-family sweep with closed-form comparison.
    Counterexample(SweepArgs),
    /// Golden-value and certificate self-test.
    Selftest,
}

#[derive(clap::Args)]
struct SweepArgs {
    #[arg(long)]
    n_range: Option<String>,
    /// Repeatable; all quantities when absent.
    #[arg(long, value_enum)]
    quantity: Vec<QuantityArg>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum QuantityArg {
    Entropy,
    Kl,
    Variation,
    Kolmogorov,
}

impl From<QuantityArg> for Quantity {
    fn from(q: QuantityArg) -> Self {
        match q {
            QuantityArg::Entropy => Quantity::Entropy,
            QuantityArg::Kl => Quantity::Kl,
            QuantityArg::Variation => Quantity::Variation,
            QuantityArg::Kolmogorov => Quantity::Kolmogorov,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum TheoremArg {
    Thm1,
    Thm2,
    Thm3,
    Corollary,
    Discrete,
}

/// A run that ends before producing its result.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::BudgetExceeded { .. } => EXIT_DIVERGED,
            _ => EXIT_USAGE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type Run = Result<u8, Failure>;

struct Context {
    cfg: Config,
    scenario_flag: Option<String>,
    opts: CertifyOptions,
}

impl Context {
    fn new(cli: &Cli) -> Result<Self, Failure> {
        let cfg = match &cli.config {
            Some(p) => Config::load(p).map_err(Failure::usage)?,
            None => Config::default(),
        };
        let mut opts = CertifyOptions::default();
        let t = &cfg.tolerances;
        opts.tol = cli.tol.or(t.quadrature).unwrap_or(opts.tol);
        opts.threshold = t.threshold.unwrap_or(opts.threshold);
        opts.cap = t.divergence_cap.unwrap_or(opts.cap);
        opts.probes = t.probes.unwrap_or(opts.probes);
        opts.seed = cli.seed.or(cfg.seed).unwrap_or(0);
        if !(opts.tol.is_finite() && opts.tol > 0.0) {
            return Err(Failure::usage(format!("tolerance must be positive, got {}", opts.tol)));
        }
        Ok(Self {
            scenario_flag: cli.scenario.clone(),
            cfg,
            opts,
        })
    }

    fn scenario(&self) -> Result<Scenario, Failure> {
        Ok(resolve_scenario(self.scenario_flag.as_deref(), self.cfg.scenario.as_ref())?)
    }
}

fn parse_format(flag: Option<Format>, cfg: Option<&str>, default: Format, allowed: &[Format]) -> Result<Format, Failure> {
    let f = match (flag, cfg) {
        (Some(f), _) => f,
        (None, Some(s)) => Format::from_str(s, true).map_err(|_| Failure::usage(format!("unknown format '{s}'")))?,
        (None, None) => default,
    };
    if allowed.contains(&f) {
        Ok(f)
    } else {
        let names: Vec<String> = allowed
            .iter()
            .map(|a| a.to_possible_value().unwrap().get_name().to_string())
            .collect();
        Err(Failure::usage(format!("format must be one of {}", names.join("|"))))
    }
}

/// Writes to `out` when given, else stdout.
fn emit(out: Option<&PathBuf>, bytes: &[u8]) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, bytes).map_err(|e| Failure::usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut s = std::io::stdout().lock();
            s.write_all(bytes)
                .and_then(|_| s.flush())
                .map_err(|e| Failure::usage(format!("cannot write stdout: {e}")))
        }
    }
}

fn cmd_measure(ctx: &Context, quantity: Quantity, n: u64, format: Option<Format>) -> Run {
    let format = parse_format(format, None, Format::Text, &[Format::Text, Format::Json])?;
    let s = ctx.scenario()?;
    let v = s.compute(quantity, n, &ctx.opts.measure_options())?;
    let text = match format {
        Format::Json => serde_json::to_string_pretty(&v).expect("measure value serializes") + "\n",
        _ => {
            let verdict = match v.verdict {
                Finiteness::Finite => "finite",
                Finiteness::Diverged => "diverged",
                Finiteness::BudgetExceeded => "budget-exceeded",
            };
            format!("value {}\nerror {}\nverdict {verdict}\n", v.value, v.error_estimate)
        }
    };
    emit(None, text.as_bytes())?;
    Ok(if v.is_finite() { EXIT_OK } else { EXIT_DIVERGED })
}

fn quantities(flag: &[QuantityArg], cfg: Option<&Vec<String>>) -> Result<QuantitySet, Failure> {
    if !flag.is_empty() {
        let qs: Vec<Quantity> = flag.iter().map(|&q| q.into()).collect();
        return Ok(QuantitySet::from_list(&qs)?);
    }
    match cfg {
        None => Ok(QuantitySet::all()),
        Some(names) => {
            let qs = names
                .iter()
                .map(|n| {
                    QuantityArg::from_str(n, true)
                        .map(Quantity::from)
                        .map_err(|_| Failure::usage(format!("unknown quantity '{n}'")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(QuantitySet::from_list(&qs)?)
        }
    }
}

/// Rows are computed in parallel and assembled in n order.
fn run_sweep(s: &Scenario, ns: &[u64], q: QuantitySet, opts: &CertifyOptions) -> Result<Vec<SweepRecord>, Failure> {
    let plan = sweep::plan(s, ns, q, opts)?;
    Ok(ns
        .par_iter()
        .map(|&n| sweep::sweep_row(s, &plan, n, opts))
        .collect::<entconv::Result<Vec<_>>>()?)
}

fn render_rows(rows: &[SweepRecord], format: Format) -> Result<Vec<u8>, Failure> {
    match format {
        Format::Json => Ok((serde_json::to_string_pretty(rows).expect("sweep rows serialize") + "\n").into_bytes()),
        _ => {
            let mut w = csv::Writer::from_writer(Vec::new());
            if rows.is_empty() {
                w.write_record(sweep::COLUMNS).map_err(|e| Failure::usage(e.to_string()))?;
            }
            for r in rows {
                w.serialize(r).map_err(|e| Failure::usage(e.to_string()))?;
            }
            w.into_inner().map_err(|e| Failure::usage(e.to_string()))
        }
    }
}

fn cmd_sweep(ctx: &Context, args: &SweepArgs) -> Run {
    let sc = &ctx.cfg.sweep;
    let format = parse_format(args.format, sc.format.as_deref(), Format::Csv, &[Format::Csv, Format::Json])?;
    let range = args.n_range.as_deref().or(sc.n_range.as_deref()).unwrap_or(DEFAULT_SWEEP_RANGE);
    let ns = parse_range(range).map_err(Failure::usage)?;
    let q = quantities(&args.quantity, sc.quantities.as_ref())?;
    let s = ctx.scenario()?;
    let rows = run_sweep(&s, &ns, q, &ctx.opts)?;
    let out = args.out.clone().or_else(|| sc.out.as_ref().map(PathBuf::from));
    emit(out.as_ref(), &render_rows(&rows, format)?)?;
    Ok(EXIT_OK)
}

fn cmd_counterexample(ctx: &Context, args: &SweepArgs) -> Run {
    let format = parse_format(args.format, None, Format::Csv, &[Format::Csv, Format::Json])?;
    let ns = parse_range(args.n_range.as_deref().unwrap_or(DEFAULT_SWEEP_RANGE)).map_err(Failure::usage)?;
    let q = quantities(&args.quantity, None)?;
    let s = scenarios::scenario("counterexample")?;
    let rows = run_sweep(&s, &ns, q, &ctx.opts)?;
    emit(args.out.as_ref(), &render_rows(&rows, format)?)?;
    let checks = s.check_golden(&ns)?;
    let mut err = std::io::stderr().lock();
    for c in &checks {
        let _ = writeln!(
            err,
            "{} {:?} n={} computed={} expected={}",
            if c.passed { "PASS" } else { "FAIL" },
            c.quantity,
            c.n,
            c.computed,
            c.expected
        );
    }
    Ok(if checks.iter().all(|c| c.passed) { EXIT_OK } else { EXIT_INCONCLUSIVE })
}

fn cmd_certify(
    ctx: &Context,
    theorem: Option<TheoremArg>,
    n_flag: &[u64],
    n_range: Option<&str>,
    format: Option<Format>,
    out: Option<&PathBuf>,
) -> Run {
    let cc = &ctx.cfg.certify;
    let format = parse_format(format, cc.format.as_deref(), Format::Text, &[Format::Text, Format::Json])?;
    let theorem = match (theorem, cc.theorem.as_deref()) {
        (Some(t), _) => t,
        (None, Some(s)) => TheoremArg::from_str(s, true).map_err(|_| Failure::usage(format!("unknown theorem '{s}'")))?,
        (None, None) => return Err(Failure::usage("certify needs --theorem thm1|thm2|thm3|corollary|discrete")),
    };
    let s = ctx.scenario()?;
    let ns: Option<Vec<u64>> = if !n_flag.is_empty() {
        Some(n_flag.to_vec())
    } else if let Some(r) = n_range {
        Some(parse_range(r).map_err(Failure::usage)?)
    } else {
        cc.n.clone()
    };
    let opts = &ctx.opts;
    let cert = match (&s.family, theorem) {
        (ScenarioFamily::Discrete(f), TheoremArg::Discrete) => {
            certify_discrete_pointwise(f, &ns.unwrap_or_else(default_discrete_ns), DEFAULT_EPS, opts)?
        }
        (ScenarioFamily::Continuous(f), t) if !matches!(t, TheoremArg::Discrete) => {
            let ns = ns.unwrap_or_else(default_continuous_ns);
            match t {
                TheoremArg::Thm1 => certify_thm1(f, &ns, opts)?,
                TheoremArg::Thm2 => certify_thm2(f, &ns, opts)?,
                TheoremArg::Thm3 => certify_thm3(f, &ns, opts)?,
                _ => certify_corollary(f, &ns, opts)?,
            }
        }
        (ScenarioFamily::Discrete(_), _) => {
            return Err(Failure::usage("a discrete scenario only supports --theorem discrete"))
        }
        (ScenarioFamily::Continuous(_), _) => {
            return Err(Failure::usage("--theorem discrete needs a discrete scenario"))
        }
    };
    let text = match format {
        Format::Json => serde_json::to_string_pretty(&cert).expect("certificate serializes") + "\n",
        _ => format!("{cert}\n"),
    };
    emit(out, text.as_bytes())?;
    Ok(match cert.verdict {
        Verdict::Certified => EXIT_OK,
        Verdict::HypothesisFailed => EXIT_HYPOTHESIS,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    })
}

fn cmd_selftest() -> Run {
    let lines = scenarios::selftest();
    let mut text = String::new();
    for l in &lines {
        text += &format!("{} {} {}\n", if l.passed { "PASS" } else { "FAIL" }, l.name, l.detail);
    }
    let failed = lines.iter().filter(|l| !l.passed).count();
    text += &format!("{} checks, {failed} failed\n", lines.len());
    emit(None, text.as_bytes())?;
    Ok(if failed == 0 { EXIT_OK } else { EXIT_INCONCLUSIVE })
}

fn run(cli: Cli) -> Run {
    let ctx = Context::new(&cli)?;
    match &cli.command {
        Command::Measure { quantity, n, format } => cmd_measure(&ctx, (*quantity).into(), *n, *format),
        Command::Sweep(a) => cmd_sweep(&ctx, a),
        Command::Counterexample(a) => cmd_counterexample(&ctx, a),
        Command::Certify {
            theorem,
            n,
            n_range,
            format,
            out,
        } => cmd_certify(&ctx, *theorem, n, n_range.as_deref(), *format, out.as_ref()),
        Command::Selftest => cmd_selftest(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // help and version go to stdout and are not errors
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
