//! Command-line front end.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 usage or input error, 3 enumeration
//! cap exceeded, 4 invalid measure or violated invariant. Errors are reported
//! as one JSON line on standard error: `{"error": kind, "message": text}`.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::distribution::{self, DistributionTable, LimitTail};
use crate::divergence::{self, DivergenceSeq, MethodChoice, Rate, RateEstimate};
use crate::error::{Error, Result};
use crate::experiments::{self, ExperimentConfig, ExperimentKind};
use crate::limits;
use crate::measures::{Measure, MeasureKind, MeasureSpec};
use crate::overlap;
use crate::word::{Alphabet, Word};

pub const VERSION: &str = env!("RECURSTAT_VERSION");
pub const TOOL: &str = "recurstat";
pub const ENV_WORKERS: &str = "RECURSTAT_WORKERS";
pub const ENV_ENUM_CAP: &str = "RECURSTAT_ENUM_CAP";
pub const CSV_HEADER: &str = "k,E_k_log,E_k,rate_k,method";

#[derive(Debug, Parser)]
#[command(name = "recurstat", version = VERSION, about = "Recurrence statistics between stationary symbolic processes")]
struct Cli {
    /// Worker threads; defaults to $RECURSTAT_WORKERS or the number of CPUs.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Enumeration cap; defaults to $RECURSTAT_ENUM_CAP or 2^26.
    #[arg(long, global = true)]
    enum_cap: Option<u64>,
    /// Logarithm base for displayed logs and rates: `e`, `2`, `10` or any
    /// number above 1. Computation is always in nats.
    #[arg(long, global = true, default_value = "e")]
    log_base: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Shortest path T_n(x, y).
    Path(PathArgs),
    /// Shortest return T_n(w) of a word to itself.
    #[command(name = "return")]
    Return(ReturnArgs),
    /// Waiting time W_n(x, stream).
    Wait(WaitArgs),
    /// The k-divergence E(1..=kmax).
    Divergence(DivergenceArgs),
    /// Rate sequence, window extremes and exact rate.
    Rate(RateArgs),
    /// Exact law of T_n, or its n -> infinity limit with --limit.
    Law(LawArgs),
    /// Avoiding-pairs probability P(T_n = n).
    Avoid(PairArgs),
    /// Monte Carlo and exact experiment drivers.
    Experiment(ExperimentArgs),
    /// Checks a measure file.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
struct AlphabetArg {
    /// Symbol labels, comma or space separated; inferred from the words when
    /// absent.
    #[arg(long)]
    alphabet: Option<String>,
}

#[derive(Debug, Args)]
struct PathArgs {
    #[arg(long)]
    x: String,
    #[arg(long)]
    y: String,
    /// Truncate both words to this length.
    #[arg(long)]
    n: Option<usize>,
    #[command(flatten)]
    alphabet: AlphabetArg,
}

#[derive(Debug, Args)]
struct ReturnArgs {
    #[arg(long)]
    w: String,
    #[arg(long)]
    n: Option<usize>,
    #[command(flatten)]
    alphabet: AlphabetArg,
}

#[derive(Debug, Args)]
struct WaitArgs {
    #[arg(long)]
    x: String,
    #[arg(long)]
    stream: String,
    #[command(flatten)]
    alphabet: AlphabetArg,
}

#[derive(Debug, Args)]
struct PairArgs {
    /// Measure file, or inline JSON.
    #[arg(long)]
    mu: String,
    #[arg(long)]
    nu: String,
    #[arg(long)]
    n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct DivergenceArgs {
    #[arg(long)]
    mu: String,
    #[arg(long)]
    nu: String,
    #[arg(long)]
    kmax: usize,
    #[arg(long, value_enum, default_value_t = MethodChoice::Auto)]
    method: MethodChoice,
    #[arg(long, value_enum, default_value_t = OutFormat::Csv)]
    out: OutFormat,
}

#[derive(Debug, Args)]
struct RateArgs {
    #[arg(long)]
    mu: String,
    #[arg(long)]
    nu: String,
    #[arg(long)]
    kmax: usize,
    #[arg(long, value_enum, default_value_t = MethodChoice::Auto)]
    method: MethodChoice,
}

#[derive(Debug, Args)]
struct LawArgs {
    #[arg(long)]
    mu: String,
    #[arg(long)]
    nu: String,
    /// Word length of the exact law.
    #[arg(long, required_unless_present = "limit")]
    n: Option<usize>,
    /// Report the limit tail at --k truncated at --mmax instead.
    #[arg(long, requires_all = ["k", "mmax"])]
    limit: bool,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    mmax: Option<usize>,
    /// Also enumerate every pair and report the largest discrepancy.
    #[arg(long)]
    oracle: bool,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    #[arg(value_enum)]
    kind: ExperimentKind,
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Report path; standard output when absent and the config names none.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    file: PathBuf,
}

/// Envelope of every JSON report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report<T> {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: serde_json::Value,
    pub result: T,
}

impl<T: Serialize> Report<T> {
    fn new(command: &str, config: serde_json::Value, result: T) -> Self {
        Report {
            tool: TOOL.into(),
            version: VERSION.into(),
            command: command.into(),
            config,
            result,
        }
    }
}

/// Divergence row as displayed, with logs and rates in the chosen base.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DivergenceRow {
    pub k: usize,
    #[serde(with = "crate::prob::ln_serde")]
    pub e_k_log: f64,
    pub e_k: f64,
    pub rate_k: Rate,
    pub method: divergence::Method,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DivergenceResult {
    pub log_base: f64,
    pub rows: Vec<DivergenceRow>,
    pub zero_from: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateResult {
    pub log_base: f64,
    pub estimate: RateEstimate,
    pub rates: Vec<Rate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawResult {
    pub table: DistributionTable,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_max_discrepancy: Option<f64>,
}

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let msg = e.to_string();
            let text = msg
                .lines()
                .take_while(|l| !l.trim().is_empty())
                .map(str::trim)
                .collect::<Vec<_>>()
                .join(" ");
            let text = text.trim_start_matches("error: ");
            let _ = writeln!(err, "{}", json!({"error": "usage", "message": text}));
            return 2;
        }
    };
    match execute(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "{}", json!({"error": e.kind(), "message": e.to_string()}));
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => 1,
        Error::CapExceeded { .. } => 3,
        Error::Invariant(_) | Error::InvalidMeasure { .. } | Error::Reducible { .. } => 4,
        _ => 2,
    }
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<()> {
    let cap = match cli.enum_cap {
        Some(c) => Some(c),
        None => env_number(ENV_ENUM_CAP)?,
    };
    if let Some(c) = cap {
        limits::set_enum_cap(c);
    }
    let workers = match cli.workers {
        Some(w) => Some(w),
        None => env_number::<usize>(ENV_WORKERS)?,
    };
    let base = parse_log_base(&cli.log_base)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        if w == 0 {
            return Err(Error::InvalidArgument("--workers must be at least 1".into()));
        }
        pool = pool.num_threads(w);
    }
    let pool = pool
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let text = pool.install(|| dispatch(cli.command, base))?;
    out.write_all(text.as_bytes())?;
    Ok(())
}

fn env_number<T: std::str::FromStr>(name: &str) -> Result<Option<T>> {
    match std::env::var(name) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::InvalidArgument(format!("${name} must be a nonnegative integer, got {v:?}"))),
        Err(_) => Ok(None),
    }
}

fn parse_log_base(s: &str) -> Result<f64> {
    let b = match s {
        "e" => std::f64::consts::E,
        other => other
            .parse::<f64>()
            .map_err(|_| Error::InvalidArgument(format!("log base {other:?} is not a number")))?,
    };
    if !(b > 1.0 && b.is_finite()) {
        return Err(Error::InvalidArgument(format!("log base must exceed 1, got {s}")));
    }
    Ok(b)
}

/// Reads a measure from a file, or from the argument itself when it is JSON.
fn load_measure(arg: &str) -> Result<(MeasureSpec, Measure)> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg)
            .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{arg}: {e}"))))?
    };
    let spec = MeasureSpec::from_json(&text)?;
    let m = spec.build()?;
    Ok((spec, m))
}

fn words(texts: &[&str], alphabet: &AlphabetArg) -> Result<Vec<Word>> {
    let a = match &alphabet.alphabet {
        Some(labels) => Alphabet::new(&Alphabet::split_labels(labels))?,
        None => {
            let mut all: Vec<String> = texts.iter().flat_map(|t| Alphabet::split_labels(t)).collect();
            all.sort();
            all.dedup();
            Alphabet::new(&all)?
        }
    };
    texts.iter().map(|t| a.parse_word(t)).collect()
}

fn truncate(w: Word, n: Option<usize>) -> Result<Word> {
    match n {
        Some(n) if n > w.len() => Err(Error::InvalidArgument(format!(
            "--n {n} exceeds word length {}",
            w.len()
        ))),
        Some(n) => Ok(w.truncated(n)),
        None => Ok(w),
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Error::Invariant(format!("serialization: {e}")))?;
    s.push('\n');
    Ok(s)
}

fn dispatch(cmd: Command, base: f64) -> Result<String> {
    let ln_base = base.ln();
    match cmd {
        Command::Path(a) => {
            let w = words(&[&a.x, &a.y], &a.alphabet)?;
            let mut it = w.into_iter();
            let (x, y) = (truncate(it.next().unwrap(), a.n)?, truncate(it.next().unwrap(), a.n)?);
            Ok(format!("{}\n", overlap::shortest_path(&x, &y)?))
        }
        Command::Return(a) => {
            let w = truncate(words(&[&a.w], &a.alphabet)?.remove(0), a.n)?;
            Ok(format!("{}\n", overlap::shortest_return(&w)?))
        }
        Command::Wait(a) => {
            let w = words(&[&a.x, &a.stream], &a.alphabet)?;
            Ok(match overlap::waiting_time(&w[0], &w[1])? {
                Some(k) => format!("{k}\n"),
                None => "not-found\n".into(),
            })
        }
        Command::Divergence(a) => {
            let (ms, mu) = load_measure(&a.mu)?;
            let (ns, nu) = load_measure(&a.nu)?;
            let seq = divergence::divergence_seq(&mu, &nu, a.kmax, a.method)?;
            let config = json!({"mu": ms, "nu": ns, "kmax": a.kmax, "method": a.method, "log_base": base});
            let result = divergence_result(&seq, base);
            match a.out {
                OutFormat::Json => to_json(&Report::new("divergence", config, result)),
                OutFormat::Csv => Ok(divergence_csv(&config, &result)),
            }
        }
        Command::Rate(a) => {
            let (ms, mu) = load_measure(&a.mu)?;
            let (ns, nu) = load_measure(&a.nu)?;
            let (mut estimate, seq) = divergence::divergence_rate(&mu, &nu, a.kmax, a.method)?;
            let scale = 1.0 / ln_base;
            estimate.liminf_est = estimate.liminf_est.scaled(scale);
            estimate.limsup_est = estimate.limsup_est.scaled(scale);
            if let Some(x) = estimate.exact_rate.as_mut() {
                x.value = x.value.scaled(scale);
                x.bracket = x.bracket.map(|(l, h)| (l * scale, h * scale));
            }
            let config = json!({"mu": ms, "nu": ns, "kmax": a.kmax, "method": a.method, "log_base": base});
            let rates = seq.rates().into_iter().map(|r| r.scaled(scale)).collect();
            to_json(&Report::new(
                "rate",
                config,
                RateResult {
                    log_base: base,
                    estimate,
                    rates,
                },
            ))
        }
        Command::Law(a) => {
            let (ms, mu) = load_measure(&a.mu)?;
            let (ns, nu) = load_measure(&a.nu)?;
            if a.limit {
                let (k, mmax) = (a.k.unwrap(), a.mmax.unwrap());
                let lim: LimitTail = distribution::law_limit(&mu, &nu, k, mmax)?;
                let config = json!({"mu": ms, "nu": ns, "k": k, "mmax": mmax});
                return to_json(&Report::new("law_limit", config, lim));
            }
            let n = a.n.unwrap();
            let table = distribution::law_exact(&mu, &nu, n)?;
            let oracle_max_discrepancy = if a.oracle {
                Some(table.max_discrepancy(&distribution::law_bruteforce(&mu, &nu, n)?))
            } else {
                None
            };
            let config = json!({"mu": ms, "nu": ns, "n": n, "oracle": a.oracle});
            to_json(&Report::new(
                "law",
                config,
                LawResult {
                    table,
                    oracle_max_discrepancy,
                },
            ))
        }
        Command::Avoid(a) => {
            let (ms, mu) = load_measure(&a.mu)?;
            let (ns, nu) = load_measure(&a.nu)?;
            let p = distribution::avoiding_pairs_prob(&mu, &nu, a.n)?;
            let config = json!({"mu": ms, "nu": ns, "n": a.n});
            to_json(&Report::new("avoid", config, json!({"avoiding_mass": p})))
        }
        Command::Experiment(a) => run_experiment_cmd(a),
        Command::Validate(a) => validate(&a.file, ln_base),
    }
}

fn divergence_result(seq: &DivergenceSeq, base: f64) -> DivergenceResult {
    let ln_base = base.ln();
    DivergenceResult {
        log_base: base,
        rows: seq
            .entries
            .iter()
            .map(|e| DivergenceRow {
                k: e.k,
                e_k_log: e.e.ln / ln_base,
                e_k: e.e.value,
                rate_k: e.rate.scaled(1.0 / ln_base),
                method: e.method,
            })
            .collect(),
        zero_from: seq.zero_from,
    }
}

fn csv_float(x: f64) -> String {
    if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x:.16e}")
    }
}

fn divergence_csv(config: &serde_json::Value, r: &DivergenceResult) -> String {
    let mut s = format!("# {TOOL} {VERSION} divergence {config}\n{CSV_HEADER}\n");
    for row in &r.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            row.k,
            csv_float(row.e_k_log),
            csv_float(row.e_k),
            row.rate_k,
            row.method
        );
    }
    s
}

fn run_experiment_cmd(a: ExperimentArgs) -> Result<String> {
    let text = std::fs::read_to_string(&a.config)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", a.config.display()))))?;
    let cfg = ExperimentConfig::from_json(&text)?;
    let base_dir = a.config.parent().unwrap_or(Path::new("."));
    let resolved = cfg.resolved(base_dir)?;
    let report = experiments::run_experiment(a.kind, &resolved, a.seed, VERSION)?;
    let body = to_json(&report)?;
    let dest = a.out.or_else(|| cfg.output.map(|p| if p.is_relative() { base_dir.join(p) } else { p }));
    match dest {
        Some(path) => {
            std::fs::write(&path, body)?;
            Ok(format!("{}\n", path.display()))
        }
        None => Ok(body),
    }
}

fn validate(file: &Path, ln_base: f64) -> Result<String> {
    let text = std::fs::read_to_string(file)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", file.display()))))?;
    let spec = MeasureSpec::from_json(&text)?;
    let m = spec.build()?;
    let residual = match m.kind() {
        MeasureKind::Markov(c) => format!("{:.0e}", c.stationary_residual()),
        MeasureKind::Iid(_) => "0".into(),
        _ => "n/a".into(),
    };
    let entropy = match m.shannon_entropy() {
        Ok(h) => format!("{:.4}", h / ln_base),
        Err(_) => "n/a".into(),
    };
    let grammar: Vec<String> = (1..=3)
        .map(|n| match m.is_complete_grammar(n) {
            Ok(true) => format!("n={n} yes"),
            Ok(false) => format!("n={n} no"),
            Err(_) => format!("n={n} unknown"),
        })
        .collect();
    Ok(format!(
        "ok, stationary residual {residual}, entropy {entropy}, variant {}, alphabet size {}, complete grammar [{}]\n",
        m.variant_name(),
        m.alphabet().size(),
        grammar.join(", ")
    ))
}
