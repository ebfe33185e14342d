//! Command-line front end.
//!
//! Every subcommand validates its arguments and inputs before computing,
//! writes its artifacts, and then records a `manifest_<subcommand>.json` next
//! to them holding the configuration, its hash, the crate version, the seeds
//! in use and a digest of each output. Manifests carry no timestamps, so the
//! same configuration always yields the same manifest.
//!
//! `--config FILE` reads `key = value` lines (one per long flag, `#` starts a
//! comment, `key = true` sets a bare switch). Values from the file are placed
//! before the command-line flags, so flags given explicitly take precedence.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::community::{
    girvan_newman, modularity, nmi, partition_records, write_partition_csv, Detector, Partition, PartitionRecord,
};
use crate::coreperiphery::{
    cp_fit_distance, default_core_size, minres_coreness, rombach_coreness, rossa_coreness, rossa_profile, CpMethod,
    DEFAULT_MINRES_MAX_ITER, DEFAULT_MINRES_TOL, DEFAULT_ROMBACH_SAMPLES,
};
use crate::error::{Error, Result};
use crate::market_data::{compute_log_returns, filter_complete_stocks, ingest_prices, PriceSchema, ReturnPanel};
use crate::network::WeightTransform;
use crate::portfolio::{run_strategies, write_report_csv, PortfolioConfig, StrategyId, Weighting};
use crate::randomization::{cp_significance, DEFAULT_NULL_SAMPLES, DEFAULT_SWAP_FACTOR};
use crate::report::{
    emit_report, write_rows, write_rows_with_header, CentralizationRow, CorenessRow, CpSummaryRow, ModularityRow,
    NmiRow, CENTRALIZATION_FILE, CORENESS_FILE, CP_SUMMARY_FILE, MODULARITY_FILE, NMI_FILE, PORTFOLIO_FILE,
};
use crate::rolling::{
    enumerate_windows, mode_networks, run_rolling_to_dir, write_atomic, Mode, ModeNetworks, RollingConfig,
    RunOptions, WindowSpec,
};
use crate::seed::derive_seed;
use crate::spectral::{mp_density, MpVariant};

pub const THREADS_ENV: &str = "SPECNET_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "specnet", version, about = "Filtered correlation networks of stock returns")]
struct Cli {
    /// Key-value file supplying default flag values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Clean a long-format price file into a log-return panel.
    Ingest(IngestArgs),
    /// Eigenvalues, noise band and sector count of the correlation matrix.
    Spectra(SpectraArgs),
    /// Planar maximally filtered graph of each mode.
    Pmfg(NetworkArgs),
    /// Coreness scores, block-structure distance and cp-centralization.
    Coreperiphery(CoreArgs),
    /// Community partitions, modularity and cross-mode NMI.
    Communities(CommunityArgs),
    /// Per-window analysis over a rolling window.
    Rolling(RollingArgs),
    /// Community-informed portfolio backtests.
    Portfolio(PortfolioArgs),
    /// Summary tables from a results directory.
    Report(ReportArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Ingest(_) => "ingest",
            Command::Spectra(_) => "spectra",
            Command::Pmfg(_) => "pmfg",
            Command::Coreperiphery(_) => "coreperiphery",
            Command::Communities(_) => "communities",
            Command::Rolling(_) => "rolling",
            Command::Portfolio(_) => "portfolio",
            Command::Report(_) => "report",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(args_override_self = true)]
struct IngestArgs {
    /// Long-format price CSV.
    #[arg(long)]
    input: PathBuf,
    /// Output return panel CSV.
    #[arg(long, default_value = "returns.csv")]
    out: PathBuf,
    #[arg(long, default_value = "date")]
    date_col: String,
    #[arg(long, default_value = "ticker")]
    ticker_col: String,
    #[arg(long, default_value = "close")]
    close_col: String,
    /// Calendar days between consecutive dates beyond which the return is dropped.
    #[arg(long, default_value_t = crate::market_data::DEFAULT_MAX_GAP_DAYS)]
    max_gap_days: i64,
    /// Fraction of dates a stock must be priced on to be kept.
    #[arg(long, default_value_t = 1.0)]
    min_coverage: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(args_override_self = true)]
struct SpectraArgs {
    /// Return panel CSV.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long, default_value = "standard")]
    mp_variant: String,
    #[arg(long)]
    k_override: Option<usize>,
    /// Points in the noise density grid.
    #[arg(long, default_value_t = 200)]
    grid: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(args_override_self = true)]
struct NetworkArgs {
    /// Return panel CSV.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Comma-separated subset of full,market,sector.
    #[arg(long, default_value = "full,market,sector")]
    modes: String,
    #[arg(long)]
    k_override: Option<usize>,
    #[arg(long, default_value = "standard")]
    mp_variant: String,
    /// signed, absolute or shifted.
    #[arg(long, default_value = "absolute")]
    transform: String,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(args_override_self = true)]
struct CoreArgs {
    #[command(flatten)]
    #[serde(flatten)]
    network: NetworkArgs,
    /// Comma-separated subset of rossa,minres,rombach.
    #[arg(long, default_value = "rossa,minres,rombach")]
    methods: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_ROMBACH_SAMPLES)]
    samples: usize,
    #[arg(long, default_value_t = DEFAULT_MINRES_TOL)]
    tol: f64,
    #[arg(long, default_value_t = DEFAULT_MINRES_MAX_ITER)]
    max_iter: usize,
    /// Core size for the block-structure distance; N/4 when unset.
    #[arg(long)]
    core_size: Option<usize>,
    /// Test cp-centralization against degree-preserving nulls.
    #[arg(long)]
    significance: bool,
    #[arg(long, default_value_t = DEFAULT_NULL_SAMPLES)]
    n_rand: usize,
    #[arg(long, default_value_t = DEFAULT_SWAP_FACTOR)]
    swap_factor: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(args_override_self = true)]
struct CommunityArgs {
    #[command(flatten)]
    #[serde(flatten)]
    network: NetworkArgs,
    /// Comma-separated subset of louvain,lpa,gn.
    #[arg(long, default_value = "louvain,lpa,gn")]
    detectors: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(args_override_self = true)]
struct RollingArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 250)]
    window: usize,
    #[arg(long, default_value_t = 1)]
    step: usize,
    #[arg(long, default_value = "full,market,sector")]
    modes: String,
    #[arg(long, default_value = "louvain,lpa,gn")]
    detectors: String,
    /// Methods whose block-structure distance is reported.
    #[arg(long, default_value = "rossa")]
    cp_methods: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    k_override: Option<usize>,
    #[arg(long, default_value = "standard")]
    mp_variant: String,
    #[arg(long, default_value = "absolute")]
    transform: String,
    /// on, off or auto (on for at most 200 windows).
    #[arg(long, default_value = "auto")]
    significance: String,
    #[arg(long, default_value_t = DEFAULT_NULL_SAMPLES)]
    n_rand: usize,
    #[arg(long, default_value_t = DEFAULT_SWAP_FACTOR)]
    swap_factor: usize,
    #[arg(long, default_value_t = 1000)]
    rombach_samples: usize,
    #[arg(long)]
    core_size: Option<usize>,
    /// Start over instead of resuming from an existing checkpoint.
    #[arg(long)]
    fresh: bool,
    #[arg(long, default_value_t = 64)]
    checkpoint_every: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(args_override_self = true)]
struct PortfolioArgs {
    #[arg(long)]
    returns: PathBuf,
    /// In-sample length in days.
    #[arg(long, default_value_t = 250)]
    window: usize,
    /// Days between window starts; defaults to the holding horizon.
    #[arg(long)]
    step: Option<usize>,
    /// Longest holding period in days.
    #[arg(long, default_value_t = 250)]
    max_hold: usize,
    /// Keep only the first N windows.
    #[arg(long)]
    max_windows: Option<usize>,
    /// `all` or a comma-separated list of strategy names.
    #[arg(long, default_value = "all")]
    strategies: String,
    #[arg(long, default_value = "uniform,markowitz")]
    weighting: String,
    /// Detector supplying the partitions.
    #[arg(long, default_value = "louvain")]
    detector: String,
    #[arg(long, default_value_t = 0.0)]
    rf: f64,
    #[arg(long, default_value_t = 252.0)]
    annualization: f64,
    #[arg(long)]
    ridge: Option<f64>,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    long_only: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "standard")]
    mp_variant: String,
    #[arg(long)]
    k_override: Option<usize>,
    #[arg(long, default_value = "absolute")]
    transform: String,
    #[arg(long, default_value = PORTFOLIO_FILE)]
    out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(args_override_self = true)]
struct ReportArgs {
    /// Directory holding the subcommand outputs.
    #[arg(long)]
    results: PathBuf,
    /// Where the tables go; the results directory when unset.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Runs the CLI on `argv` (program name first) and returns the exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let argv = match expand_config(argv) {
        Ok(a) => a,
        Err(e) => return report_error(&e),
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    if let Err(e) = configure_threads() {
        return report_error(&e);
    }
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => report_error(&e),
    }
}

fn report_error(e: &Error) -> i32 {
    eprintln!("error: {e}");
    if e.is_validation() {
        EXIT_VALIDATION
    } else {
        EXIT_RUNTIME
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::InvalidArgument(format!("{THREADS_ENV} must be a positive integer, got '{raw}'")))?;
    // A second call in the same process (tests) finds the pool already built.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Inserts flags read from `--config FILE` right after the subcommand name.
fn expand_config(argv: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut path = None;
    for (i, a) in argv.iter().enumerate() {
        let s = a.to_string_lossy();
        if s == "--config" {
            path = argv.get(i + 1).map(PathBuf::from);
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(PathBuf::from(p));
        }
    }
    let Some(path) = path else { return Ok(argv) };
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let injected = config_flags(&text)?;
    let names = ["ingest", "spectra", "pmfg", "coreperiphery", "communities", "rolling", "portfolio", "report"];
    let Some(pos) = argv.iter().position(|a| names.contains(&a.to_string_lossy().as_ref())) else {
        return Ok(argv);
    };
    let mut out = argv[..=pos].to_vec();
    out.extend(injected.into_iter().map(OsString::from));
    out.extend_from_slice(&argv[pos + 1..]);
    Ok(out)
}

/// Parses `key = value` lines into flags.
pub fn config_flags(text: &str) -> Result<Vec<String>> {
    let mut flags = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            row: n + 1,
            message: format!("expected key = value, got '{line}'"),
        })?;
        let key = key.trim().replace('_', "-");
        if key.is_empty() || key == "config" {
            return Err(Error::Parse { row: n + 1, message: format!("invalid key '{key}'") });
        }
        let value = value.trim();
        match value {
            "true" if !TAKES_BOOL_VALUE.contains(&key.as_str()) => flags.push(format!("--{key}")),
            "false" if !TAKES_BOOL_VALUE.contains(&key.as_str()) => {}
            _ => {
                flags.push(format!("--{key}"));
                flags.push(value.to_string());
            }
        }
    }
    Ok(flags)
}

/// Boolean options spelled `--flag true|false` rather than as bare switches.
const TAKES_BOOL_VALUE: [&str; 1] = ["long-only"];

fn dispatch(command: Command) -> Result<()> {
    let name = command.name();
    let config = match &command {
        Command::Ingest(a) => serde_json::to_value(a)?,
        Command::Spectra(a) => serde_json::to_value(a)?,
        Command::Pmfg(a) => serde_json::to_value(a)?,
        Command::Coreperiphery(a) => serde_json::to_value(a)?,
        Command::Communities(a) => serde_json::to_value(a)?,
        Command::Rolling(a) => serde_json::to_value(a)?,
        Command::Portfolio(a) => serde_json::to_value(a)?,
        Command::Report(a) => serde_json::to_value(a)?,
    };
    let run = match command {
        Command::Ingest(a) => ingest(a)?,
        Command::Spectra(a) => spectra(a)?,
        Command::Pmfg(a) => pmfg_cmd(a)?,
        Command::Coreperiphery(a) => coreperiphery(a)?,
        Command::Communities(a) => communities(a)?,
        Command::Rolling(a) => rolling(a)?,
        Command::Portfolio(a) => portfolio(a)?,
        Command::Report(a) => report(a)?,
    };
    write_manifest(name, &config, &run)
}

/// What a subcommand produced, for the manifest.
struct Run {
    dir: PathBuf,
    outputs: Vec<PathBuf>,
    seeds: BTreeMap<String, u64>,
}

impl Run {
    fn new(dir: &Path) -> Self {
        Run { dir: dir.to_path_buf(), outputs: Vec::new(), seeds: BTreeMap::new() }
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        write_atomic(&path, bytes)?;
        self.outputs.push(path);
        Ok(())
    }

    fn write_with<F>(&mut self, name: &str, f: F) -> Result<()>
    where
        F: FnOnce(&mut Vec<u8>) -> Result<()>,
    {
        let mut buf = Vec::new();
        f(&mut buf)?;
        self.write(name, &buf)
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes `manifest_<name>.json` into the run's output directory.
fn write_manifest(name: &str, config: &serde_json::Value, run: &Run) -> Result<()> {
    let config_bytes = serde_json::to_vec(config)?;
    let mut outputs = Vec::new();
    for path in &run.outputs {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let file = path.strip_prefix(&run.dir).unwrap_or(path);
        outputs.push(json!({ "file": file.to_string_lossy(), "sha256": sha256_hex(&bytes) }));
    }
    let manifest = json!({
        "subcommand": name,
        "versions": { "specnet": env!("CARGO_PKG_VERSION"), "manifest": 1 },
        "config": config,
        "config_hash": sha256_hex(&config_bytes),
        "seeds": run.seeds,
        "outputs": outputs,
    });
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    write_atomic(&run.dir.join(format!("manifest_{name}.json")), text.as_bytes())
}

fn parse_list<T: FromStr<Err = Error>>(raw: &str, what: &str) -> Result<Vec<T>> {
    let mut out: Vec<T> = Vec::new();
    for item in raw.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        out.push(item.parse()?);
    }
    if out.is_empty() {
        return Err(Error::InvalidArgument(format!("--{what} needs at least one value")));
    }
    Ok(out)
}

fn require_file(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("input file {} does not exist", path.display())))
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn read_panel(path: &Path) -> Result<ReturnPanel> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    ReturnPanel::read_csv(BufReader::new(file))
}

fn ingest(a: IngestArgs) -> Result<Run> {
    require_file(&a.input)?;
    if !(0.0..=1.0).contains(&a.min_coverage) {
        return Err(Error::InvalidArgument(format!("--min-coverage {} outside [0, 1]", a.min_coverage)));
    }
    let schema = PriceSchema { date: a.date_col, ticker: a.ticker_col, close: a.close_col, max_gap_days: a.max_gap_days };
    let file = File::open(&a.input).map_err(|e| Error::io(&a.input, e))?;
    let prices = ingest_prices(BufReader::new(file), &schema)?;
    let kept = filter_complete_stocks(&prices, a.min_coverage)?;
    let returns = compute_log_returns(&kept)?;

    let dir = a.out.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new(".")).to_path_buf();
    create_dir(&dir)?;
    let mut run = Run::new(&dir);
    let name = a.out.file_name().ok_or_else(|| Error::InvalidArgument("--out must name a file".into()))?;
    run.write_with(&name.to_string_lossy(), |buf| returns.write_csv(buf))?;
    Ok(run)
}

fn spectra(a: SpectraArgs) -> Result<Run> {
    require_file(&a.input)?;
    let variant: MpVariant = a.mp_variant.parse()?;
    if a.grid < 2 {
        return Err(Error::InvalidArgument("--grid needs at least 2 points".into()));
    }
    let panel = read_panel(&a.input)?;
    let nets = mode_networks(&panel, &[], a.k_override, variant, WeightTransform::Absolute)?;
    create_dir(&a.out)?;
    let mut run = Run::new(&a.out);
    run.write_with("eigenvalues.csv", |buf| nets.eigen.write_spectrum_csv(&nets.bounds, buf))?;

    let b = nets.bounds;
    run.write_with("mp_density.csv", |buf| {
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(["lambda", "density"])?;
        for i in 0..a.grid {
            let lambda = b.lambda_min + (b.lambda_max - b.lambda_min) * i as f64 / (a.grid - 1) as f64;
            w.write_record([lambda.to_string(), mp_density(lambda, &b)?.to_string()])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    })?;
    let summary = json!({
        "n_stocks": panel.n_stocks(),
        "n_days": panel.n_days(),
        "q": b.q,
        "lambda_min": b.lambda_min,
        "lambda_max": b.lambda_max,
        "variant": b.variant,
        "k_sector": nets.k_sector,
        "largest_eigenvalue": nets.eigen.eigenvalues.first(),
    });
    run.write("spectrum.json", serde_json::to_string_pretty(&summary)?.as_bytes())?;
    Ok(run)
}

struct Networks {
    modes: Vec<Mode>,
    nets: ModeNetworks,
    dir: PathBuf,
}

fn build_networks(a: &NetworkArgs) -> Result<Networks> {
    require_file(&a.input)?;
    let modes: Vec<Mode> = parse_list(&a.modes, "modes")?;
    let variant: MpVariant = a.mp_variant.parse()?;
    let transform: WeightTransform = a.transform.parse()?;
    let panel = read_panel(&a.input)?;
    let nets = mode_networks(&panel, &modes, a.k_override, variant, transform)?;
    create_dir(&a.out)?;
    Ok(Networks { modes, nets, dir: a.out.clone() })
}

fn warn_absent(mode: Mode) {
    eprintln!("warning: no {} network (no eigenvalues above the noise band); skipped", mode.name());
}

fn pmfg_cmd(a: NetworkArgs) -> Result<Run> {
    let Networks { modes, nets, dir } = build_networks(&a)?;
    let mut run = Run::new(&dir);
    for mode in modes {
        let Some(net) = nets.networks[&mode].as_ref() else {
            warn_absent(mode);
            continue;
        };
        run.write_with(&format!("pmfg_{}.csv", mode.name()), |buf| net.write_edge_csv(buf))?;
        run.write(&format!("pmfg_{}.json", mode.name()), net.to_json()?.as_bytes())?;
    }
    Ok(run)
}

fn coreperiphery(a: CoreArgs) -> Result<Run> {
    let methods: Vec<CpMethod> = parse_list(&a.methods, "methods")?;
    if a.samples == 0 || a.n_rand == 0 || a.max_iter == 0 || a.tol.is_nan() || a.tol <= 0.0 {
        return Err(Error::InvalidArgument("sample counts, iteration cap and tolerance must be positive".into()));
    }
    let Networks { modes, nets, dir } = build_networks(&a.network)?;
    let mut run = Run::new(&dir);
    let mut coreness_rows = Vec::new();
    let mut summary_rows = Vec::new();
    let mut central_rows = Vec::new();
    for mode in modes {
        let Some(net) = nets.networks[&mode].as_ref() else {
            warn_absent(mode);
            central_rows.push(CentralizationRow { mode, cp_centralization: None, p_value: None });
            continue;
        };
        let mode_seed = derive_seed(a.seed, mode as u64);
        run.seeds.insert(mode.name().to_string(), mode_seed);
        let adjacency = net.adjacency();
        let k = a.core_size.unwrap_or_else(|| default_core_size(net.n()));

        let profile = rossa_profile(net)?;
        run.write_with(&format!("profile_{}.csv", mode.name()), |buf| profile.write_csv(&nets.labels, buf))?;
        for &method in &methods {
            let coreness = match method {
                CpMethod::Rossa => rossa_coreness(net)?,
                CpMethod::Minres => minres_coreness(net, a.tol, a.max_iter)?.coreness,
                CpMethod::Rombach => rombach_coreness(net, a.samples, derive_seed(mode_seed, 1))?,
            };
            summary_rows.push(CpSummaryRow { mode, method, frobenius: cp_fit_distance(&adjacency, &coreness, k)? });
            for (ticker, &score) in nets.labels.iter().zip(&coreness.scores) {
                coreness_rows.push(CorenessRow { ticker: ticker.clone(), method, score, mode });
            }
        }

        let mut p_value = None;
        if a.significance {
            let sig = cp_significance(net, a.n_rand, derive_seed(mode_seed, 0), a.swap_factor)?;
            p_value = Some(sig.p_value);
            run.write(&format!("significance_{}.json", mode.name()), sig.to_json()?.as_bytes())?;
        }
        central_rows.push(CentralizationRow {
            mode,
            cp_centralization: profile.cp_centralization.map(|c| c.reported()),
            p_value,
        });
    }
    run.write_with(CORENESS_FILE, |buf| {
        write_rows_with_header(&["ticker", "method", "score", "mode"], &coreness_rows, buf)
    })?;
    run.write_with(CP_SUMMARY_FILE, |buf| write_rows_with_header(&["mode", "method", "frobenius"], &summary_rows, buf))?;
    run.write_with(CENTRALIZATION_FILE, |buf| write_rows(&central_rows, buf))?;
    Ok(run)
}

fn communities(a: CommunityArgs) -> Result<Run> {
    let detectors: Vec<Detector> = parse_list(&a.detectors, "detectors")?;
    let Networks { modes, nets, dir } = build_networks(&a.network)?;
    let mut run = Run::new(&dir);
    let mut records: Vec<PartitionRecord> = Vec::new();
    let mut mod_rows = Vec::new();
    let mut found: BTreeMap<(Detector, Mode), Partition> = BTreeMap::new();
    for &mode in &modes {
        let Some(net) = nets.networks[&mode].as_ref() else {
            warn_absent(mode);
            for &d in &detectors {
                mod_rows.push(ModularityRow { method: d.name().into(), mode, modularity: None, communities: None });
            }
            continue;
        };
        let mode_seed = derive_seed(a.seed, mode as u64);
        for (i, &d) in detectors.iter().enumerate() {
            let seed = derive_seed(mode_seed, 2 + i as u64);
            run.seeds.insert(format!("{}_{}", d.name(), mode.name()), seed);
            let partition = if d == Detector::Gn {
                let gn = girvan_newman(net)?;
                let mut text = serde_json::to_string_pretty(&gn.dendrogram)?;
                text.push('\n');
                run.write(&format!("dendrogram_{}.json", mode.name()), text.as_bytes())?;
                gn.partition
            } else {
                d.detect(net, seed)?.0
            };
            let q = modularity(net, &partition)?.q;
            mod_rows.push(ModularityRow {
                method: d.name().into(),
                mode,
                modularity: Some(q),
                communities: Some(partition.n_communities()),
            });
            let method = format!("{}_{}", d.name(), mode.name());
            records.extend(partition_records(&nets.labels, &partition, &method, None));
            found.insert((d, mode), partition);
        }
    }
    let mut nmi_rows = Vec::new();
    for &d in &detectors {
        for (i, &ma) in modes.iter().enumerate() {
            for &mb in &modes[i + 1..] {
                if let (Some(pa), Some(pb)) = (found.get(&(d, ma)), found.get(&(d, mb))) {
                    nmi_rows.push(NmiRow { method: d.name().into(), mode_a: ma, mode_b: mb, nmi: nmi(pa, pb)? });
                }
            }
        }
    }
    run.write_with("partitions.csv", |buf| write_partition_csv(&records, buf))?;
    run.write_with(MODULARITY_FILE, |buf| write_rows(&mod_rows, buf))?;
    run.write_with(NMI_FILE, |buf| write_rows_with_header(&["method", "mode_a", "mode_b", "nmi"], &nmi_rows, buf))?;
    Ok(run)
}

fn rolling(a: RollingArgs) -> Result<Run> {
    require_file(&a.input)?;
    let significance = match a.significance.trim().to_ascii_lowercase().as_str() {
        "on" | "true" => Some(true),
        "off" | "false" => Some(false),
        "auto" => None,
        other => return Err(Error::InvalidArgument(format!("--significance must be on, off or auto, got '{other}'"))),
    };
    let config = RollingConfig {
        modes: parse_list(&a.modes, "modes")?,
        detectors: parse_list(&a.detectors, "detectors")?,
        cp_methods: parse_list(&a.cp_methods, "cp-methods")?,
        master_seed: a.seed,
        k_override: a.k_override,
        mp_variant: a.mp_variant.parse()?,
        transform: a.transform.parse()?,
        significance,
        n_rand: a.n_rand,
        swap_factor: a.swap_factor,
        rombach_samples: a.rombach_samples,
        core_size: a.core_size,
    };
    config.validate()?;
    if a.checkpoint_every == 0 {
        return Err(Error::InvalidArgument("--checkpoint-every must be positive".into()));
    }
    let spec = WindowSpec { length: a.window, step: a.step };
    let panel = read_panel(&a.input)?;
    enumerate_windows(panel.n_days(), spec)?;

    create_dir(&a.out)?;
    let options = RunOptions { resume: !a.fresh, checkpoint_every: a.checkpoint_every, max_new_windows: None };
    run_rolling_to_dir(&panel, spec, &config, &a.out, options)?;
    let mut run = Run::new(&a.out);
    run.seeds.insert("master".into(), a.seed);
    for name in ["windows.csv", "heatmap_cp.csv", "heatmap_nmi.csv", "communities.csv"] {
        run.outputs.push(a.out.join(name));
    }
    Ok(run)
}

fn portfolio(a: PortfolioArgs) -> Result<Run> {
    require_file(&a.returns)?;
    let strategies: Vec<StrategyId> =
        if a.strategies.trim().eq_ignore_ascii_case("all") { StrategyId::ALL.to_vec() } else { parse_list(&a.strategies, "strategies")? };
    let weightings: Vec<Weighting> = parse_list(&a.weighting, "weighting")?;
    let detector: Detector = a.detector.parse()?;
    let variant: MpVariant = a.mp_variant.parse()?;
    let transform: WeightTransform = a.transform.parse()?;
    let step = a.step.unwrap_or(a.max_hold);
    if a.window < 3 || a.max_hold == 0 || step == 0 {
        return Err(Error::InvalidArgument("--window must be at least 3; --max-hold and --step positive".into()));
    }
    if let Some(r) = a.ridge.filter(|r| r.is_nan() || *r < 0.0) {
        return Err(Error::InvalidArgument(format!("--ridge {r} must be nonnegative")));
    }
    let config = PortfolioConfig {
        strategies: strategies.clone(),
        weightings,
        rf: a.rf,
        annualization: a.annualization,
        max_hold: a.max_hold,
        ridge: a.ridge,
        long_only: a.long_only,
        seed: a.seed,
    };
    let panel = read_panel(&a.returns)?;
    let mut windows = enumerate_windows(panel.n_days(), WindowSpec { length: a.window + a.max_hold, step })?;
    if let Some(cap) = a.max_windows {
        windows.truncate(cap);
    }
    let modes: Vec<Mode> = Mode::ALL.into_iter().filter(|m| strategies.iter().any(|s| s.mode() == Some(*m))).collect();

    let reports = windows
        .par_iter()
        .enumerate()
        .map(|(w, &(start, end))| {
            let inner = || -> Result<_> {
                let insample = panel.slice_days(start, start + a.window)?;
                let outsample = panel.slice_days(start + a.window, end)?;
                let nets = mode_networks(&insample, &modes, a.k_override, variant, transform)?;
                let window_seed = derive_seed(a.seed, w as u64);
                let mut partitions = BTreeMap::new();
                for &mode in &modes {
                    if let Some(net) = nets.networks[&mode].as_ref() {
                        let (p, _) = detector.detect(net, derive_seed(window_seed, 2 + mode as u64))?;
                        partitions.insert(mode, p);
                    }
                }
                let mut cfg = config.clone();
                cfg.strategies.retain(|s| s.mode().is_none_or(|m| partitions.contains_key(&m)));
                run_strategies(&insample, &outsample, &partitions, &cfg, w)
            };
            inner().map_err(|e| e.in_window(w))
        })
        .collect::<Result<Vec<_>>>()?;
    for rep in &reports {
        let have = rep.results.len() / config.weightings.len();
        if have < strategies.len() {
            eprintln!("warning: window {}: sector strategies skipped, no sector network", rep.window);
        }
    }

    let dir = a.out.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new(".")).to_path_buf();
    create_dir(&dir)?;
    let name = a.out.file_name().ok_or_else(|| Error::InvalidArgument("--out must name a file".into()))?;
    let mut run = Run::new(&dir);
    run.seeds.insert("master".into(), a.seed);
    run.write_with(&name.to_string_lossy(), |buf| write_report_csv(&reports, buf))?;
    Ok(run)
}

fn report(a: ReportArgs) -> Result<Run> {
    if !a.results.is_dir() {
        return Err(Error::InvalidArgument(format!("results directory {} does not exist", a.results.display())));
    }
    let out = a.out.clone().unwrap_or_else(|| a.results.clone());
    let mut run = Run::new(&out);
    run.outputs = emit_report(&a.results, &out)?;
    Ok(run)
}
