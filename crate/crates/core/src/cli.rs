//! The `fogmatch` command line: experiment subcommands writing CSV, and the
//! self-check suites.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::analytic::{
    conditional_dmt, conditional_upper_bound, content_outage_high_snr, content_outage_low_snr, dmr, exact_conditional_outage,
    ConditionalModel, SaddleConfig, SystemConfig,
};
use crate::channel::SnrPoint;
use crate::coding::{optimal_k, CodeScheme, CodingError, ContentSpec, Rounding};
use crate::matching::{FairnessPolicy, SolveMethod};
use crate::report::{write_csv, CsvRow, RunManifest};
use crate::sim::{
    simulate_conditional_outage, simulate_content_outage, ConditionalConfig, Estimator, ExperimentConfig, OutageCurve, RateMode,
    SimError, TrialBudget,
};
use crate::verify::{run_all, Fault, VerifyOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

pub const SEED_ENV: &str = "FOGMATCH_SEED";
const DEFAULT_SEED: u64 = 1;
const DEFAULT_ETA: f64 = 0.5;
/// Keys that a sidecar manifest carries but that are not settings.
const MANIFEST_ONLY: [&str; 4] = ["experiment", "version", "output", "wall_clock_secs"];

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("infeasible configuration: {0}")]
    Infeasible(String),
    #[error("verification failed")]
    VerifyFailed,
    #[error("{0}")]
    Runtime(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Runtime(_) | CliError::Io(_) => EXIT_USAGE,
            CliError::Infeasible(_) => EXIT_INFEASIBLE,
            CliError::VerifyFailed => EXIT_VERIFY,
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Graph(_) | SimError::Coding(_) => CliError::Infeasible(e.to_string()),
            SimError::InvalidConfig(_) => CliError::Usage(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "fogmatch", version, about = "Fog-AP selection by fairness b-matching: outage experiments and self-checks")]
struct Cli {
    /// key=value file supplying defaults for any flag
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Write the CSV here, with a PATH.manifest sidecar, instead of stdout
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Base seed (falls back to the config file, then FOGMATCH_SEED)
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Conditional outage given k of K fragments above threshold
    Conditional(ConditionalArgs),
    /// Content outage of the b-matching selection
    Content(ContentArgs),
    /// Content outage under different regenerating codes
    CompareCodes(CompareArgs),
    /// Run the oracle and property suites
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct ConditionalArgs {
    #[arg(long = "K")]
    big_k: Option<usize>,
    #[arg(long = "k")]
    small_k: Option<usize>,
    /// Content size in nats
    #[arg(long = "R")]
    rate: Option<f64>,
    /// start:stop:step in dB, or a comma list
    #[arg(long = "snr-db-range")]
    snr_db_range: Option<String>,
    /// Initial trials per point
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long = "max-trials")]
    max_trials: Option<u64>,
}

#[derive(Debug, Args, Default)]
struct SystemArgs {
    #[arg(long = "M")]
    users: Option<usize>,
    #[arg(long = "N")]
    aps: Option<usize>,
    #[arg(long = "L")]
    capacity: Option<usize>,
    #[arg(long = "K")]
    demand: Option<usize>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long = "snr-db-range")]
    snr_db_range: Option<String>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long = "max-trials")]
    max_trials: Option<u64>,
    /// plain (every user) or stratified (one user)
    #[arg(long)]
    estimator: Option<String>,
    /// User followed by the stratified estimator
    #[arg(long)]
    user: Option<usize>,
    /// flow, bp or exact
    #[arg(long)]
    solver: Option<String>,
}

#[derive(Debug, Args)]
struct ContentArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// Fixed content size in nats
    #[arg(long, conflicts_with = "mux")]
    rate: Option<f64>,
    /// Multiplexing gain r, rate r ln(snr)
    #[arg(long)]
    mux: Option<f64>,
    /// Comma-separated per-user content sizes
    #[arg(long)]
    rates: Option<String>,
    /// Split the N APs among contents proportionally to their sizes
    #[arg(long = "optimal-k")]
    optimal_k: bool,
    /// msr, mbr or mds
    #[arg(long)]
    scheme: Option<String>,
    /// Repair degree
    #[arg(long = "D")]
    repair: Option<usize>,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[arg(long = "R")]
    rate: Option<f64>,
    #[arg(long = "D")]
    repair: Option<usize>,
    /// Comma-separated schemes
    #[arg(long)]
    schemes: Option<String>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Reduced instance counts
    #[arg(long)]
    quick: bool,
    #[arg(long = "inject-fault", hide = true)]
    inject_fault: Option<String>,
}

/// Settings resolved with precedence flag > config file > default, each
/// recorded into the manifest.
struct Settings {
    file: BTreeMap<String, String>,
    manifest: RunManifest,
}

impl Settings {
    fn value<T: FromStr + Display>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError> {
        let v = match self.optional(key, flag)? {
            Some(v) => v,
            None => {
                self.manifest.set(key, &default);
                default
            }
        };
        Ok(v)
    }

    fn optional<T: FromStr + Display>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError> {
        let v = match flag {
            Some(v) => Some(v),
            None => match self.file.get(key) {
                Some(s) => Some(s.parse().map_err(|_| CliError::Usage(format!("config key {key}: cannot parse {s:?}")))?),
                None => None,
            },
        };
        if let Some(v) = &v {
            self.manifest.set(key, v);
        }
        Ok(v)
    }

    fn flag(&mut self, key: &str, flag: bool) -> Result<bool, CliError> {
        let from_file = match self.file.get(key).map(String::as_str) {
            None => false,
            Some("true" | "1" | "yes") => true,
            Some("false" | "0" | "no") => false,
            Some(s) => return Err(CliError::Usage(format!("config key {key}: expected a boolean, got {s:?}"))),
        };
        let v = flag || from_file;
        self.manifest.set(key, v);
        Ok(v)
    }
}

pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value", i + 1)))?;
        let k = k.trim();
        if MANIFEST_ONLY.contains(&k) {
            continue;
        }
        map.insert(k.to_string(), v.trim().to_string());
    }
    Ok(map)
}

/// `start:stop:step` (inclusive) or a comma-separated list, in dB.
pub fn parse_snr_range(s: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Usage(format!("bad SNR range {s:?}; use start:stop:step or a comma list"));
    if s.contains(':') {
        let parts: Vec<f64> = s.split(':').map(|t| t.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<_, _>>()?;
        let [a, b, step] = parts[..] else { return Err(bad()) };
        if !(step > 0.0) || b < a {
            return Err(bad());
        }
        let n = ((b - a) / step + 1e-9).floor() as usize;
        Ok((0..=n).map(|i| a + step * i as f64).collect())
    } else {
        s.split(',').map(|t| t.trim().parse::<f64>().map_err(|_| bad())).collect()
    }
}

fn parse_list<T: FromStr>(s: &str, what: &str) -> Result<Vec<T>, CliError> {
    s.split(',').map(|t| t.trim().parse::<T>().map_err(|_| CliError::Usage(format!("bad {what} entry {t:?}")))).collect()
}

fn parse_solver(s: &str) -> Result<SolveMethod, CliError> {
    match s {
        "flow" | "max-weight" => Ok(SolveMethod::MaxWeight),
        "bp" | "message-passing" => Ok(SolveMethod::MessagePassing),
        "exact" => Ok(SolveMethod::Exact),
        _ => Err(CliError::Usage(format!("unknown solver {s:?}; use flow, bp or exact"))),
    }
}

/// Entry point shared by the binary and the tests. Returns the exit code.
pub fn run<I, S>(args: I, env_seed: Option<String>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{e}");
                    EXIT_USAGE
                }
            };
            return code;
        }
    };
    match execute(cli, env_seed, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            if !matches!(e, CliError::VerifyFailed) {
                let _ = writeln!(stderr, "error: {e}");
            } else {
                let _ = writeln!(stderr, "{e}");
            }
            e.exit_code()
        }
    }
}

fn execute(cli: Cli, env_seed: Option<String>, stdout: &mut dyn Write) -> Result<(), CliError> {
    let file = match &cli.config {
        Some(p) => parse_config(&std::fs::read_to_string(p).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", p.display())))?)?,
        None => BTreeMap::new(),
    };
    let seed = match cli.seed {
        Some(s) => s,
        None => match file.get("seed").or(env_seed.as_ref()) {
            Some(s) => s.trim().parse().map_err(|_| CliError::Usage(format!("bad seed {s:?}")))?,
            None => DEFAULT_SEED,
        },
    };
    let name = match &cli.command {
        Command::Conditional(_) => "conditional",
        Command::Content(_) => "content",
        Command::CompareCodes(_) => "compare-codes",
        Command::Verify(_) => "verify",
    };
    let mut settings = Settings { file, manifest: RunManifest::new(name, seed) };
    let started = Instant::now();
    let rows = match cli.command {
        Command::Conditional(a) => cmd_conditional(a, &mut settings)?,
        Command::Content(a) => cmd_content(a, &mut settings)?,
        Command::CompareCodes(a) => cmd_compare_codes(a, &mut settings)?,
        Command::Verify(a) => return cmd_verify(a, &mut settings, stdout),
    };
    let csv = write_csv(&settings.manifest, &rows);
    match &cli.out {
        Some(path) => {
            std::fs::write(path, &csv)?;
            let mut m = settings.manifest.clone();
            m.outputs.push(path.display().to_string());
            m.wall_clock_secs = Some(started.elapsed().as_secs_f64());
            std::fs::write(sidecar_path(path), m.sidecar())?;
        }
        None => stdout.write_all(csv.as_bytes())?,
    }
    Ok(())
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    let mut s = csv.as_os_str().to_owned();
    s.push(".manifest");
    PathBuf::from(s)
}

fn budget(settings: &mut Settings, trials: Option<u64>, max: Option<u64>, default: u64, growth: u64) -> Result<TrialBudget, CliError> {
    let initial = settings.value("trials", trials, default)?;
    let max = settings.value("max-trials", max, initial.saturating_mul(growth))?;
    if initial == 0 || max < initial {
        return Err(CliError::Usage(format!("need 1 <= trials <= max-trials, got {initial} and {max}")));
    }
    Ok(TrialBudget::adaptive(initial, max))
}

fn snr(db: f64) -> Result<SnrPoint, CliError> {
    SnrPoint::from_db(db).map_err(|e| CliError::Usage(e.to_string()))
}

const LN_STEP: f64 = 0.05;

fn ln_bound_at(big_k: usize, small_k: usize, rate: f64, s: SnrPoint) -> Option<f64> {
    let cfg = SaddleConfig::for_rate(big_k, small_k, rate, s).ok()?;
    conditional_upper_bound(&cfg).ok().filter(|b| !b.clamped).map(|b| b.ln_value)
}

fn cmd_conditional(a: ConditionalArgs, st: &mut Settings) -> Result<Vec<CsvRow>, CliError> {
    let big_k = st.value("K", a.big_k, 2)?;
    let small_k = st.value("k", a.small_k, 1)?;
    let rate = st.value("R", a.rate, 2.0)?;
    let range = st.value("snr-db-range", a.snr_db_range, "0:40:5".to_string())?;
    let grid = parse_snr_range(&range)?;
    let budget = budget(st, a.trials, a.max_trials, 100_000, 16)?;
    st.value("eta", None, DEFAULT_ETA)?;
    if big_k == 0 || small_k > big_k {
        return Err(CliError::Usage(format!("need 1 <= K and k <= K, got K = {big_k}, k = {small_k}")));
    }
    if !(rate > 0.0) {
        return Err(CliError::Usage(format!("R = {rate} must be positive")));
    }
    let seed = st.manifest.seed;
    let d = conditional_dmt(big_k, small_k, 0.0).map_err(|e| CliError::Usage(e.to_string()))?.d;
    let mut rows = Vec::new();
    let mut mc = Vec::new();
    for &db in &grid {
        let s = snr(db)?;
        let cfg = ConditionalConfig { big_k, small_k, rate, snr: s, budget };
        let e = simulate_conditional_outage(&cfg, seed)?;
        mc.push((db, e.estimate));
        rows.push(CsvRow {
            gamma_db: db,
            user: None,
            source: "mc".into(),
            value: e.estimate,
            ci_lo: Some(e.ci_lo),
            ci_hi: Some(e.ci_hi),
            trials: Some(e.trials),
        });
        let sc = SaddleConfig::for_rate(big_k, small_k, rate, s).map_err(|e| CliError::Usage(e.to_string()))?;
        match conditional_upper_bound(&sc) {
            Ok(b) => rows.push(CsvRow::analytic(db, None, "bound", b.value)),
            // no saddle: the event is not in the tail and only the trivial bound holds
            Err(_) if small_k < big_k => rows.push(CsvRow::analytic(db, None, "bound_trivial", 1.0)),
            Err(_) => rows.push(CsvRow::analytic(db, None, "bound_trivial", 0.0)),
        }
        if let Ok(x) = exact_conditional_outage(&sc) {
            rows.push(CsvRow::analytic(db, None, "exact", x));
        }
        let (lo, hi) = (snr(db - 10.0 * LN_STEP / std::f64::consts::LN_10)?, snr(db + 10.0 * LN_STEP / std::f64::consts::LN_10)?);
        if let (Some(a), Some(b)) = (ln_bound_at(big_k, small_k, rate, lo), ln_bound_at(big_k, small_k, rate, hi)) {
            rows.push(CsvRow::analytic(db, None, "bound_exponent", -(b - a) / (2.0 * LN_STEP)));
        }
        rows.push(CsvRow::analytic(db, None, "cdmt", d));
    }
    if let Ok(exps) = crate::sim::estimate_exponent(&mc) {
        for ((db, _), e) in mc.iter().zip(exps) {
            if let Some(e) = e {
                rows.push(CsvRow::analytic(*db, None, "mc_exponent", e));
            }
        }
    }
    Ok(rows)
}

/// System settings shared by `content` and `compare-codes`.
struct System {
    users: usize,
    aps: usize,
    capacity: usize,
    demand: Vec<usize>,
    eta: f64,
    grid: Vec<f64>,
    budget: TrialBudget,
    estimator: Estimator,
    solver: SolveMethod,
}

fn resolve_system(a: SystemArgs, st: &mut Settings, demand_override: Option<Vec<usize>>) -> Result<System, CliError> {
    let users = match &demand_override {
        Some(d) => {
            if let Some(m) = st.optional::<usize>("M", a.users)? {
                if m != d.len() {
                    return Err(CliError::Usage(format!("M = {m} but {} contents were given", d.len())));
                }
            }
            st.manifest.set("M", d.len());
            d.len()
        }
        None => st.value("M", a.users, 10)?,
    };
    let aps = st.value("N", a.aps, 5)?;
    let capacity = st.value("L", a.capacity, 4)?;
    let demand = match demand_override {
        Some(d) => {
            st.manifest.set("K", d.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(" "));
            d
        }
        None => vec![st.value("K", a.demand, 2)?; users],
    };
    let eta = st.value("eta", a.eta, DEFAULT_ETA)?;
    if !(eta > 0.0 && eta < 1.0) {
        return Err(CliError::Usage(format!("eta = {eta} must lie in (0, 1)")));
    }
    let range = st.value("snr-db-range", a.snr_db_range, "-10:35:5".to_string())?;
    let grid = parse_snr_range(&range)?;
    let budget = budget(st, a.trials, a.max_trials, 20_000, 16)?;
    let est = st.value("estimator", a.estimator, "plain".to_string())?;
    let estimator = match est.as_str() {
        "plain" => Estimator::Plain,
        "stratified" => Estimator::Stratified { user: st.value("user", a.user, 0)? },
        other => return Err(CliError::Usage(format!("unknown estimator {other:?}; use plain or stratified"))),
    };
    let solver = parse_solver(&st.value("solver", a.solver, "flow".to_string())?)?;
    if users == 0 || aps == 0 || capacity == 0 {
        return Err(CliError::Usage("M, N and L must be positive".into()));
    }
    // reject before any sampling
    crate::graph::BipartiteInstance::new(crate::bitmatrix::BitMatrix::new(users, aps), demand.clone(), capacity)
        .map_err(|e| CliError::Infeasible(e.to_string()))?;
    Ok(System { users, aps, capacity, demand, eta, grid, budget, estimator, solver })
}

fn experiment(sys: &System, rates: RateMode, scheme: CodeScheme, repair: Option<usize>, seed: u64) -> Result<ExperimentConfig, CliError> {
    let policy = FairnessPolicy::new(sys.eta, 0.5, seed).map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(ExperimentConfig {
        aps: sys.aps,
        capacity: sys.capacity,
        demand: sys.demand.clone(),
        rates,
        scheme,
        repair_degree: repair,
        snr_db: sys.grid.clone(),
        budget: sys.budget,
        seed,
        policy,
        solver: sys.solver,
        estimator: sys.estimator,
        greedy_shortcut: true,
    })
}

fn curve_rows(curve: &OutageCurve, source: &str, rows: &mut Vec<CsvRow>) {
    for p in &curve.points {
        rows.push(CsvRow {
            gamma_db: p.snr_db,
            user: Some(curve.user),
            source: source.into(),
            value: p.estimate.estimate,
            ci_lo: Some(p.estimate.ci_lo),
            ci_hi: Some(p.estimate.ci_hi),
            trials: Some(p.estimate.trials),
        });
    }
    if let Ok(exps) = curve.exponents() {
        for (p, e) in curve.points.iter().zip(exps) {
            if let Some(e) = e {
                rows.push(CsvRow::analytic(p.snr_db, Some(curve.user), &format!("{source}_exponent"), e));
            }
        }
    }
}

fn cmd_content(a: ContentArgs, st: &mut Settings) -> Result<Vec<CsvRow>, CliError> {
    let seed = st.manifest.seed;
    let contents: Option<Vec<f64>> = match st.optional("rates", a.rates)? {
        Some(s) => Some(parse_list(&s, "rate")?),
        None => None,
    };
    let use_optimal = st.flag("optimal-k", a.optimal_k)?;
    let aps_hint = a.system.aps.or_else(|| st.file.get("N").and_then(|s| s.parse().ok())).unwrap_or(5);
    let demand_override = match (&contents, use_optimal) {
        (Some(c), true) => {
            let spec = ContentSpec::new(c.clone()).map_err(|e| CliError::Usage(e.to_string()))?;
            let cap = a.system.capacity.or_else(|| st.file.get("L").and_then(|s| s.parse().ok())).unwrap_or(4);
            Some(optimal_k(&spec, aps_hint, Rounding::LargestRemainder { max_total: Some(aps_hint * cap) }).map_err(|e| match e {
                CodingError::RoundingInfeasible { .. } => CliError::Infeasible(e.to_string()),
                other => CliError::Usage(other.to_string()),
            })?)
        }
        (None, true) => return Err(CliError::Usage("--optimal-k needs --rates".into())),
        _ => None,
    };
    let mux = st.optional::<f64>("mux", a.mux)?;
    let fixed = st.optional::<f64>("rate", a.rate)?;
    if mux.is_some() && (fixed.is_some() || contents.is_some()) {
        return Err(CliError::Usage("--mux excludes --rate and --rates".into()));
    }
    if fixed.is_some() && contents.is_some() {
        return Err(CliError::Usage("--rate excludes --rates".into()));
    }
    let sys = resolve_system(a.system, st, demand_override)?;
    let rates = match (mux, fixed, &contents) {
        (Some(r), _, _) => RateMode::Multiplexing(vec![r; sys.users]),
        (None, _, Some(c)) => {
            if c.len() != sys.users {
                return Err(CliError::Usage(format!("{} rates for M = {}", c.len(), sys.users)));
            }
            RateMode::Fixed(c.clone())
        }
        (None, f, None) => {
            let r = f.unwrap_or(2.0);
            st.manifest.set("rate", r);
            RateMode::Fixed(vec![r; sys.users])
        }
    };
    let scheme: CodeScheme = st.value("scheme", a.scheme, "msr".to_string())?.parse().map_err(|e: CodingError| CliError::Usage(e.to_string()))?;
    let repair = st.optional::<usize>("D", a.repair)?;
    let cfg = experiment(&sys, rates.clone(), scheme, repair, seed)?;
    cfg.validate()?;
    let curves = simulate_content_outage(&cfg)?;
    let mut rows = Vec::new();
    let k_sum: usize = sys.demand.iter().sum();
    for curve in &curves {
        curve_rows(curve, "mc", &mut rows);
        let user = curve.user;
        let Ok(model) = SystemConfig::new(sys.users, sys.aps, sys.capacity, sys.demand[user], k_sum, sys.eta) else { continue };
        let mut anchor = None;
        for p in &curve.points {
            let s = snr(p.snr_db)?;
            if p.rate <= 0.0 {
                continue;
            }
            if let Ok(v) = content_outage_high_snr(&model, p.rate, s, ConditionalModel::Auto) {
                rows.push(CsvRow::analytic(p.snr_db, Some(user), "analytic_high", v.value));
                anchor = Some((p.snr_db, v.value));
            }
            if let Ok(v) = content_outage_low_snr(sys.aps, sys.demand[user], p.rate, s, ConditionalModel::Auto) {
                rows.push(CsvRow::analytic(p.snr_db, Some(user), "analytic_low", v.value));
            }
        }
        let r = match &rates {
            RateMode::Multiplexing(r) => r[user],
            RateMode::Fixed(_) => f64::MIN_POSITIVE,
        };
        if let (Ok(d), Some((db0, v0))) = (dmr(&model, r), anchor) {
            // slope line through the last analytic point
            for p in &curve.points {
                rows.push(CsvRow::analytic(p.snr_db, Some(user), "dmr_asymptote", v0 * 10f64.powf(-d * (p.snr_db - db0) / 10.0)));
            }
        }
    }
    Ok(rows)
}

fn cmd_compare_codes(a: CompareArgs, st: &mut Settings) -> Result<Vec<CsvRow>, CliError> {
    let seed = st.manifest.seed;
    let rate = st.value("R", a.rate, 2.0)?;
    let sys = resolve_system(a.system, st, None)?;
    let k = sys.demand[0];
    let default_d = (sys.aps - 1).max(k);
    let repair = st.value("D", a.repair, default_d)?;
    let schemes: Vec<CodeScheme> = parse_list(&st.value("schemes", a.schemes, "msr,mbr".to_string())?, "scheme")?;
    let mut rows = Vec::new();
    for scheme in schemes {
        let cfg = experiment(&sys, RateMode::Fixed(vec![rate; sys.users]), scheme, Some(repair), seed)?;
        for curve in simulate_content_outage(&cfg)? {
            curve_rows(&curve, &format!("mc:{scheme}"), &mut rows);
        }
    }
    Ok(rows)
}

fn cmd_verify(a: VerifyArgs, st: &mut Settings, stdout: &mut dyn Write) -> Result<(), CliError> {
    let quick = st.flag("quick", a.quick)?;
    let fault = match a.inject_fault.as_deref() {
        None => None,
        Some("degree") => Some(Fault::DegreeViolation),
        Some(other) => return Err(CliError::Usage(format!("unknown fault {other:?}"))),
    };
    let reports = run_all(&VerifyOptions { quick, seed: st.manifest.seed, fault });
    for r in &reports {
        writeln!(stdout, "{}", r.line())?;
    }
    if reports.iter().all(|r| r.ok()) {
        Ok(())
    } else {
        Err(CliError::VerifyFailed)
    }
}
