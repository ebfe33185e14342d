//! Sliding-window analysis: correlation, eigenmodes, filtered networks and
//! their core-periphery and community statistics, window by window.
//!
//! Window `w` uses the seed `derive_seed(master_seed, w)`, so results do not
//! depend on execution order or on the number of threads.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::NaiveDate;
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::community::{nmi, partition_records, write_partition_csv, Detector, Partition};
use crate::coreperiphery::{
    cp_fit_distance, default_core_size, minres_coreness, rombach_coreness, rossa_coreness, rossa_profile, CpMethod,
    DEFAULT_MINRES_MAX_ITER, DEFAULT_MINRES_TOL,
};
use crate::error::{Error, Result};
use crate::market_data::ReturnPanel;
use crate::network::{WeightTransform, WeightedNetwork};
use crate::pmfg::pmfg;
use crate::randomization::{cp_significance, DEFAULT_NULL_SAMPLES, DEFAULT_SWAP_FACTOR};
use crate::seed::derive_seed;
use crate::spectral::{
    correlation_matrix, decompose_modes, eigendecompose, mp_bounds, select_sector_count, EigenDecomposition, MpBounds,
    MpVariant,
};

pub const CHECKPOINT_VERSION: u32 = 1;
/// Significance testing is switched on automatically up to this many windows.
pub const AUTO_SIGNIFICANCE_MAX_WINDOWS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub length: usize,
    pub step: usize,
}

impl Default for WindowSpec {
    fn default() -> Self {
        WindowSpec { length: 250, step: 1 }
    }
}

/// Half-open day ranges `[s, s + length)` for `s = 0, step, 2 step, ...`.
pub fn enumerate_windows(t_total: usize, spec: WindowSpec) -> Result<Vec<(usize, usize)>> {
    if spec.step == 0 || spec.step > spec.length {
        return Err(Error::InvalidArgument(format!(
            "window step {} must lie in 1..={}",
            spec.step, spec.length
        )));
    }
    if spec.length == 0 || t_total < spec.length {
        return Err(Error::InvalidArgument(format!(
            "{t_total} days cannot hold a window of {} days",
            spec.length
        )));
    }
    Ok((0..=t_total - spec.length).step_by(spec.step).map(|s| (s, s + spec.length)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Full,
    Market,
    Sector,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Full, Mode::Market, Mode::Sector];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Full => "full",
            Mode::Market => "market",
            Mode::Sector => "sector",
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "full" => Ok(Mode::Full),
            "market" | "mar" => Ok(Mode::Market),
            "sector" | "sec" => Ok(Mode::Sector),
            other => Err(Error::InvalidArgument(format!("unknown mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RollingConfig {
    pub modes: Vec<Mode>,
    pub detectors: Vec<Detector>,
    /// Methods whose distance to the ideal block structure is reported.
    pub cp_methods: Vec<CpMethod>,
    pub master_seed: u64,
    pub k_override: Option<usize>,
    pub mp_variant: MpVariant,
    pub transform: WeightTransform,
    /// `None` enables significance up to [`AUTO_SIGNIFICANCE_MAX_WINDOWS`].
    pub significance: Option<bool>,
    pub n_rand: usize,
    pub swap_factor: usize,
    pub rombach_samples: usize,
    /// Core size for the ideal-structure distance; `N / 4` when unset.
    pub core_size: Option<usize>,
}

impl Default for RollingConfig {
    fn default() -> Self {
        RollingConfig {
            modes: Mode::ALL.to_vec(),
            detectors: Detector::ALL.to_vec(),
            cp_methods: vec![CpMethod::Rossa],
            master_seed: 0,
            k_override: None,
            mp_variant: MpVariant::Standard,
            transform: WeightTransform::Absolute,
            significance: None,
            n_rand: DEFAULT_NULL_SAMPLES,
            swap_factor: DEFAULT_SWAP_FACTOR,
            rombach_samples: 1000,
            core_size: None,
        }
    }
}

impl RollingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.modes.is_empty() {
            return Err(Error::InvalidArgument("at least one mode is required".into()));
        }
        if self.n_rand == 0 || self.rombach_samples == 0 {
            return Err(Error::InvalidArgument("sample counts must be positive".into()));
        }
        Ok(())
    }

    fn significance_for(&self, n_windows: usize) -> bool {
        self.significance.unwrap_or(n_windows <= AUTO_SIGNIFICANCE_MAX_WINDOWS)
    }
}

/// Statistics of one mode network. Fields are `None` when the mode has no
/// network (a sector mode with no eigenvalue above the noise edge) or the
/// statistic was not requested.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ModeResult {
    pub cp_centralization: Option<f64>,
    pub p_value: Option<f64>,
    pub frobenius: BTreeMap<CpMethod, f64>,
    pub modularity: BTreeMap<Detector, f64>,
    pub community_count: BTreeMap<Detector, usize>,
    pub nmi_vs_full: BTreeMap<Detector, f64>,
    pub partitions: BTreeMap<Detector, Partition>,
}

impl ModeResult {
    pub fn is_absent(&self) -> bool {
        self.cp_centralization.is_none() && self.modularity.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowResult {
    pub window_index: usize,
    pub start_date: NaiveDate,
    pub end_date: NaiveDate,
    pub k_sector: usize,
    pub modes: BTreeMap<Mode, ModeResult>,
}

/// Full pipeline on one window. `significance` overrides the config flag.
pub fn analyze_window(
    slice: &ReturnPanel,
    config: &RollingConfig,
    window_index: usize,
    significance: bool,
) -> Result<WindowResult> {
    analyze(slice, config, window_index, significance).map_err(|e| e.in_window(window_index))
}

/// Correlation spectrum of a panel and the filtered network of each mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeNetworks {
    pub labels: Vec<String>,
    pub eigen: EigenDecomposition,
    pub bounds: MpBounds,
    pub k_sector: usize,
    /// `None` for a sector mode without eigenvalues above the noise edge.
    pub networks: BTreeMap<Mode, Option<WeightedNetwork>>,
}

pub fn mode_networks(
    panel: &ReturnPanel,
    modes: &[Mode],
    k_override: Option<usize>,
    variant: MpVariant,
    transform: WeightTransform,
) -> Result<ModeNetworks> {
    let corr = correlation_matrix(panel)?;
    let eigen = eigendecompose(&corr)?;
    let bounds = mp_bounds(panel.n_stocks(), panel.n_days(), variant)?;
    let k_sector = select_sector_count(&eigen, &bounds, k_override)?;
    let split = decompose_modes(&eigen, k_sector)?;
    let resum = (&split.total() - &corr.values).amax();
    if resum > 1e-8 {
        return Err(Error::Numeric(format!("mode matrices re-sum with error {resum:e}")));
    }
    let mut networks = BTreeMap::new();
    for &mode in modes {
        let matrix: &DMatrix<f64> = match mode {
            Mode::Full => &corr.values,
            Mode::Market => &split.market,
            Mode::Sector => &split.sector,
        };
        let net = if mode == Mode::Sector && k_sector == 0 {
            None
        } else {
            Some(pmfg(&corr.labels, matrix, transform)?)
        };
        networks.insert(mode, net);
    }
    Ok(ModeNetworks { labels: corr.labels, eigen, bounds, k_sector, networks })
}

fn analyze(slice: &ReturnPanel, config: &RollingConfig, window_index: usize, significance: bool) -> Result<WindowResult> {
    let seed = derive_seed(config.master_seed, window_index as u64);
    let nets = mode_networks(slice, &config.modes, config.k_override, config.mp_variant, config.transform)?;

    let mut out = BTreeMap::new();
    let mut full_partitions: Option<BTreeMap<Detector, Partition>> = None;
    // BTreeMap order puts full first, so the other modes can be compared with it
    for (&mode, net) in &nets.networks {
        let Some(net) = net else {
            out.insert(mode, ModeResult::default());
            continue;
        };
        let mut r = mode_statistics(net, config, derive_seed(seed, mode as u64), significance)?;
        if let Some(full) = &full_partitions {
            for (d, p) in &r.partitions {
                if let Some(fp) = full.get(d) {
                    r.nmi_vs_full.insert(*d, nmi(fp, p)?);
                }
            }
        }
        if mode == Mode::Full {
            full_partitions = Some(r.partitions.clone());
        }
        out.insert(mode, r);
    }
    Ok(WindowResult {
        window_index,
        start_date: slice.dates[0],
        end_date: *slice.dates.last().expect("nonempty window"),
        k_sector: nets.k_sector,
        modes: out,
    })
}

fn mode_statistics(net: &WeightedNetwork, config: &RollingConfig, seed: u64, significance: bool) -> Result<ModeResult> {
    let mut r = ModeResult::default();
    let profile = rossa_profile(net)?;
    r.cp_centralization = profile.cp_centralization.map(|c| c.reported());
    if significance {
        let sig = cp_significance(net, config.n_rand, derive_seed(seed, 0), config.swap_factor)?;
        r.p_value = Some(sig.p_value);
    }
    let adjacency = net.adjacency();
    let k = config.core_size.unwrap_or_else(|| default_core_size(net.n()));
    for &method in &config.cp_methods {
        let coreness = match method {
            CpMethod::Rossa => rossa_coreness(net)?,
            CpMethod::Minres => minres_coreness(net, DEFAULT_MINRES_TOL, DEFAULT_MINRES_MAX_ITER)?.coreness,
            CpMethod::Rombach => rombach_coreness(net, config.rombach_samples, derive_seed(seed, 1))?,
        };
        r.frobenius.insert(method, cp_fit_distance(&adjacency, &coreness, k)?);
    }
    for (i, &d) in config.detectors.iter().enumerate() {
        let (p, q) = d.detect(net, derive_seed(seed, 2 + i as u64))?;
        r.modularity.insert(d, q);
        r.community_count.insert(d, p.n_communities());
        r.partitions.insert(d, p);
    }
    Ok(r)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RollingOutput {
    pub tickers: Vec<String>,
    pub n_windows: usize,
    /// Completed windows in index order.
    pub windows: Vec<WindowResult>,
}

impl RollingOutput {
    pub fn is_complete(&self) -> bool {
        self.windows.len() == self.n_windows
    }
}

/// Analyses every window in memory.
pub fn run_rolling(panel: &ReturnPanel, spec: WindowSpec, config: &RollingConfig) -> Result<RollingOutput> {
    config.validate()?;
    let ranges = enumerate_windows(panel.n_days(), spec)?;
    let significance = config.significance_for(ranges.len());
    let windows = analyze_range(panel, &ranges, 0..ranges.len(), config, significance)?;
    Ok(RollingOutput { tickers: panel.tickers.clone(), n_windows: ranges.len(), windows })
}

fn analyze_range(
    panel: &ReturnPanel,
    ranges: &[(usize, usize)],
    indices: std::ops::Range<usize>,
    config: &RollingConfig,
    significance: bool,
) -> Result<Vec<WindowResult>> {
    indices
        .into_par_iter()
        .map(|w| {
            let (s, e) = ranges[w];
            let slice = panel.slice_days(s, e)?;
            analyze_window(&slice, config, w, significance)
        })
        .collect()
}

/// Controls for [`run_rolling_to_dir`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    /// Continue from `checkpoint.json` in the output directory if present.
    pub resume: bool,
    /// Windows analysed between checkpoint writes.
    pub checkpoint_every: usize,
    /// Stop after this many newly analysed windows (outputs are still written).
    pub max_new_windows: Option<usize>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { resume: true, checkpoint_every: 64, max_new_windows: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Checkpoint {
    version: u32,
    fingerprint: String,
    n_windows: usize,
    windows: Vec<WindowResult>,
}

pub const CHECKPOINT_FILE: &str = "checkpoint.json";

/// Analyses windows in batches, checkpointing after each batch, and writes
/// `windows.csv`, `heatmap_cp.csv`, `heatmap_nmi.csv` and `communities.csv`.
pub fn run_rolling_to_dir(
    panel: &ReturnPanel,
    spec: WindowSpec,
    config: &RollingConfig,
    out_dir: &Path,
    options: RunOptions,
) -> Result<RollingOutput> {
    config.validate()?;
    let ranges = enumerate_windows(panel.n_days(), spec)?;
    let significance = config.significance_for(ranges.len());
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let fingerprint = fingerprint(panel, spec, config)?;
    let ckpt_path = out_dir.join(CHECKPOINT_FILE);

    let mut windows = Vec::new();
    if options.resume && ckpt_path.exists() {
        let text = fs::read_to_string(&ckpt_path).map_err(|e| Error::io(&ckpt_path, e))?;
        let ckpt: Checkpoint = serde_json::from_str(&text)
            .map_err(|e| Error::Checkpoint(format!("{}: {e}", ckpt_path.display())))?;
        if ckpt.version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!(
                "checkpoint version {} differs from {CHECKPOINT_VERSION}",
                ckpt.version
            )));
        }
        if ckpt.fingerprint != fingerprint || ckpt.n_windows != ranges.len() {
            return Err(Error::Checkpoint("checkpoint was written for different input or settings".into()));
        }
        windows = ckpt.windows;
    }

    let batch = options.checkpoint_every.max(1);
    let limit = options.max_new_windows.map_or(ranges.len(), |m| (windows.len() + m).min(ranges.len()));
    while windows.len() < limit {
        let start = windows.len();
        let end = (start + batch).min(limit);
        windows.extend(analyze_range(panel, &ranges, start..end, config, significance)?);
        let ckpt = Checkpoint {
            version: CHECKPOINT_VERSION,
            fingerprint: fingerprint.clone(),
            n_windows: ranges.len(),
            windows: windows.clone(),
        };
        write_atomic(&ckpt_path, serde_json::to_string(&ckpt)?.as_bytes())?;
    }

    let output = RollingOutput { tickers: panel.tickers.clone(), n_windows: ranges.len(), windows };
    output.write_all(out_dir)?;
    Ok(output)
}

/// SHA-256 over the settings and the exact panel contents.
fn fingerprint(panel: &ReturnPanel, spec: WindowSpec, config: &RollingConfig) -> Result<String> {
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(&(spec, config))?);
    h.update(serde_json::to_vec(&(&panel.tickers, &panel.dates))?);
    for v in panel.returns.iter() {
        h.update(v.to_le_bytes());
    }
    Ok(hex(&h.finalize()))
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Write to a sibling temporary file, then rename over the target.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = PathBuf::from(path);
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    tmp.set_file_name(format!(".{name}.tmp"));
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl RollingOutput {
    pub fn write_all(&self, dir: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write_windows_csv(&mut buf)?;
        write_atomic(&dir.join("windows.csv"), &buf)?;
        buf.clear();
        self.write_heatmap_cp(&mut buf)?;
        write_atomic(&dir.join("heatmap_cp.csv"), &buf)?;
        buf.clear();
        self.write_heatmap_nmi(&mut buf)?;
        write_atomic(&dir.join("heatmap_nmi.csv"), &buf)?;
        buf.clear();
        self.write_communities(&mut buf)?;
        write_atomic(&dir.join("communities.csv"), &buf)
    }

    /// Long format: `window,start_date,end_date,mode,metric,method,value`.
    /// Statistics of an absent mode are written with an empty value.
    pub fn write_windows_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["window", "start_date", "end_date", "mode", "metric", "method", "value"])?;
        for win in &self.windows {
            let head = [win.window_index.to_string(), win.start_date.to_string(), win.end_date.to_string()];
            let mut row = |mode: &str, metric: &str, method: &str, value: String| {
                w.write_record(head.iter().map(String::as_str).chain([mode, metric, method, value.as_str()]))
            };
            row("", "k_sector", "", win.k_sector.to_string())?;
            for (mode, r) in &win.modes {
                let m = mode.name();
                row(m, "cp_centralization", "rossa", opt(r.cp_centralization))?;
                if r.p_value.is_some() {
                    row(m, "p_value", "rossa", opt(r.p_value))?;
                }
                for (method, v) in &r.frobenius {
                    row(m, "frobenius", method.name(), v.to_string())?;
                }
                if r.is_absent() {
                    row(m, "modularity", "", String::new())?;
                    continue;
                }
                for (d, q) in &r.modularity {
                    row(m, "modularity", d.name(), q.to_string())?;
                }
                for (d, c) in &r.community_count {
                    row(m, "community_count", d.name(), c.to_string())?;
                }
                for (d, v) in &r.nmi_vs_full {
                    row(m, "nmi_vs_full", d.name(), v.to_string())?;
                }
            }
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    fn window_header(&self) -> Vec<String> {
        std::iter::once("row".to_string()).chain(self.windows.iter().map(|w| w.window_index.to_string())).collect()
    }

    /// One row per mode, one column per window.
    pub fn write_heatmap_cp<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(self.window_header())?;
        for mode in self.modes() {
            let mut rec = vec![mode.name().to_string()];
            rec.extend(self.windows.iter().map(|win| opt(win.modes.get(&mode).and_then(|r| r.cp_centralization))));
            w.write_record(rec)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    /// One row per `mode_detector` (NMI against the full-mode partition), one
    /// column per window.
    pub fn write_heatmap_nmi<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(self.window_header())?;
        for mode in self.modes().into_iter().filter(|m| *m != Mode::Full) {
            for d in self.detectors() {
                let mut rec = vec![format!("{}_{}", mode.name(), d.name())];
                rec.extend(
                    self.windows
                        .iter()
                        .map(|win| opt(win.modes.get(&mode).and_then(|r| r.nmi_vs_full.get(&d).copied()))),
                );
                w.write_record(rec)?;
            }
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    /// `ticker,community_id,method,window_id` with method `detector_mode`.
    pub fn write_communities<W: Write>(&self, writer: W) -> Result<()> {
        let mut records = Vec::new();
        for win in &self.windows {
            for (mode, r) in &win.modes {
                for (d, p) in &r.partitions {
                    let method = format!("{}_{}", d.name(), mode.name());
                    records.extend(partition_records(&self.tickers, p, &method, Some(win.window_index)));
                }
            }
        }
        write_partition_csv(&records, writer)
    }

    pub fn modes(&self) -> Vec<Mode> {
        let mut m: Vec<Mode> = self.windows.iter().flat_map(|w| w.modes.keys().copied()).collect();
        m.sort();
        m.dedup();
        m
    }

    pub fn detectors(&self) -> Vec<Detector> {
        let mut d: Vec<Detector> = self
            .windows
            .iter()
            .flat_map(|w| w.modes.values().flat_map(|r| r.modularity.keys().copied()))
            .collect();
        d.sort();
        d.dedup();
        d
    }
}
