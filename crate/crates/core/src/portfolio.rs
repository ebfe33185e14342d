//! Community-informed portfolios and their out-of-sample Sharpe curves.
//!
//! A strategy picks one stock per community of a mode network (the best
//! in-sample Sharpe ratio or a seeded uniform draw), or holds every stock.
//! The picks are weighted equally or by tangency weights and held without
//! rebalancing over the following days.

use std::collections::BTreeMap;
use std::io::Write;
use std::str::FromStr;

use chrono::NaiveDate;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::community::Partition;
use crate::error::{Error, Result};
use crate::market_data::ReturnPanel;
use crate::rolling::Mode;
use crate::seed::derive_seed;

pub const DEFAULT_ANNUALIZATION: f64 = 252.0;
pub const DEFAULT_MAX_HOLD: usize = 250;
/// Default ridge as a multiple of the mean in-sample variance.
pub const DEFAULT_RIDGE_SCALE: f64 = 1e-4;

/// `sqrt(factor) * (mean - rf) / s` with the `n - 1` sample deviation.
pub fn sharpe_ratio(returns: &[f64], rf: f64, annualization: f64) -> Result<f64> {
    if returns.len() < 2 {
        return Err(Error::InvalidArgument(format!("Sharpe ratio needs two returns, got {}", returns.len())));
    }
    let n = returns.len() as f64;
    let mean = returns.iter().sum::<f64>() / n;
    let var = returns.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let sd = var.sqrt();
    if !sd.is_finite() || sd <= 1e-300 {
        return Err(Error::Degenerate("degenerate series: zero standard deviation".into()));
    }
    Ok(annualization.sqrt() * (mean - rf) / sd)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Picker {
    MaxSharpe,
    Random,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selection {
    pub tickers: Vec<String>,
    pub warnings: Vec<String>,
}

/// One ticker per community. Partition node `i` is panel row `i`.
pub fn select_stocks(
    partition: &Partition,
    insample: &ReturnPanel,
    picker: Picker,
    seed: u64,
    rf: f64,
) -> Result<Selection> {
    if partition.len() != insample.n_stocks() {
        return Err(Error::InvalidArgument(format!(
            "partition covers {} stocks, panel has {}",
            partition.len(),
            insample.n_stocks()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tickers = Vec::new();
    let mut warnings = Vec::new();
    for members in partition.communities() {
        let pick = match picker {
            Picker::Random => members[rng.gen_range(0..members.len())],
            Picker::MaxSharpe => {
                let mut best: Option<(usize, f64)> = None;
                for &i in &members {
                    let Ok(s) = sharpe_ratio(&insample.row(i), rf, DEFAULT_ANNUALIZATION) else { continue };
                    let better = match best {
                        None => true,
                        Some((b, bs)) => s > bs || (s == bs && insample.tickers[i] < insample.tickers[b]),
                    };
                    if better {
                        best = Some((i, s));
                    }
                }
                match best {
                    Some((i, _)) => i,
                    None => {
                        let first = *members
                            .iter()
                            .min_by(|&&a, &&b| insample.tickers[a].cmp(&insample.tickers[b]))
                            .expect("communities are nonempty");
                        warnings.push(format!(
                            "no member of the community of {} has a finite Sharpe ratio; taking it",
                            insample.tickers[first]
                        ));
                        first
                    }
                }
            }
        };
        tickers.push(insample.tickers[pick].clone());
    }
    Ok(Selection { tickers, warnings })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    pub tickers: Vec<String>,
    pub weights: Vec<f64>,
}

impl WeightVector {
    pub fn get(&self, ticker: &str) -> Option<f64> {
        self.tickers.iter().position(|t| t == ticker).map(|i| self.weights[i])
    }
}

pub fn uniform_weights(stocks: &[String]) -> Result<WeightVector> {
    if stocks.is_empty() {
        return Err(Error::InvalidArgument("cannot weight an empty stock set".into()));
    }
    let w = 1.0 / stocks.len() as f64;
    Ok(WeightVector { tickers: stocks.to_vec(), weights: vec![w; stocks.len()] })
}

/// Tangency weights `w ~ (S + ridge I)^-1 (mu - rf)` from in-sample means and
/// sample covariance. `ridge = None` uses `1e-4` times the mean variance.
/// With `long_only`, negative entries are set to zero before normalising.
pub fn markowitz_weights(
    stocks: &[String],
    insample: &ReturnPanel,
    rf: f64,
    ridge: Option<f64>,
    long_only: bool,
) -> Result<WeightVector> {
    if stocks.len() < 2 {
        return Err(Error::InvalidArgument("Markowitz weights need at least two stocks".into()));
    }
    let rows: Vec<Vec<f64>> = stocks
        .iter()
        .map(|t| {
            insample
                .ticker_index(t)
                .map(|i| insample.row(i))
                .ok_or_else(|| Error::InvalidArgument(format!("ticker {t} not in the in-sample panel")))
        })
        .collect::<Result<_>>()?;
    let k = rows.len();
    let t = insample.n_days();
    if t < 2 {
        return Err(Error::InvalidArgument("in-sample panel needs two days".into()));
    }
    let means: Vec<f64> = rows.iter().map(|r| r.iter().sum::<f64>() / t as f64).collect();
    let mut cov = DMatrix::zeros(k, k);
    for a in 0..k {
        for b in a..k {
            let c = (0..t).map(|d| (rows[a][d] - means[a]) * (rows[b][d] - means[b])).sum::<f64>() / (t - 1) as f64;
            cov[(a, b)] = c;
            cov[(b, a)] = c;
        }
    }
    let ridge = ridge.unwrap_or(DEFAULT_RIDGE_SCALE * cov.diagonal().mean());
    if ridge.is_nan() || ridge < 0.0 {
        return Err(Error::InvalidArgument(format!("ridge must be nonnegative, got {ridge}")));
    }
    for a in 0..k {
        cov[(a, a)] += ridge;
    }
    let excess = DVector::from_iterator(k, means.iter().map(|m| m - rf));
    let chol = cov
        .cholesky()
        .ok_or_else(|| Error::Numeric("regularised covariance is not positive definite".into()))?;
    let mut x: Vec<f64> = chol.solve(&excess).iter().copied().collect();
    if long_only {
        for v in &mut x {
            *v = v.max(0.0);
        }
        if x.iter().all(|&v| v == 0.0) {
            return Err(Error::Degenerate("every tangency weight is negative under long-only".into()));
        }
    }
    let total: f64 = x.iter().sum();
    if total.abs() < 1e-300 || !total.is_finite() {
        return Err(Error::Numeric("tangency weights sum to zero".into()));
    }
    Ok(WeightVector { tickers: stocks.to_vec(), weights: x.iter().map(|v| v / total).collect() })
}

/// Daily simple returns of a buy-and-hold position opened at the first
/// out-of-sample close, using `exp(r) - 1` per stock.
pub fn buy_and_hold_returns(weights: &WeightVector, outsample: &ReturnPanel, days: usize) -> Result<Vec<f64>> {
    if days > outsample.n_days() {
        return Err(Error::InvalidArgument(format!(
            "holding {days} days needs that many out-of-sample days, have {}",
            outsample.n_days()
        )));
    }
    let rows: Vec<usize> = weights
        .tickers
        .iter()
        .map(|t| outsample.ticker_index(t).ok_or_else(|| Error::InvalidArgument(format!("ticker {t} missing out of sample"))))
        .collect::<Result<_>>()?;
    // capital currently held in each stock
    let mut holding: Vec<f64> = weights.weights.clone();
    let mut value: f64 = holding.iter().sum();
    let mut out = Vec::with_capacity(days);
    for d in 0..days {
        for (h, &i) in holding.iter_mut().zip(&rows) {
            *h *= outsample.returns[(i, d)].exp();
        }
        let next: f64 = holding.iter().sum();
        out.push(next / value - 1.0);
        value = next;
    }
    Ok(out)
}

/// Sharpe ratio of the first `h` daily portfolio returns for `h = 1..=max_hold`;
/// `h = 1` reports the raw excess return.
pub fn backtest(weights: &WeightVector, outsample: &ReturnPanel, max_hold: usize, rf: f64, annualization: f64) -> Result<Vec<f64>> {
    if max_hold == 0 {
        return Err(Error::InvalidArgument("max_hold must be at least 1".into()));
    }
    let daily = buy_and_hold_returns(weights, outsample, max_hold)?;
    sharpe_curve(&daily, rf, annualization)
}

fn sharpe_curve(daily: &[f64], rf: f64, annualization: f64) -> Result<Vec<f64>> {
    (1..=daily.len())
        .map(|h| if h == 1 { Ok(daily[0] - rf) } else { sharpe_ratio(&daily[..h], rf, annualization) })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StrategyId {
    #[serde(rename = "P_f_max")]
    FullMax,
    #[serde(rename = "P_f_rand")]
    FullRandom,
    #[serde(rename = "P_mar_max")]
    MarketMax,
    #[serde(rename = "P_mar_ran")]
    MarketRandom,
    #[serde(rename = "P_sec_max")]
    SectorMax,
    #[serde(rename = "P_sec_ran")]
    SectorRandom,
    #[serde(rename = "P_MKT")]
    Market,
}

impl StrategyId {
    pub const ALL: [StrategyId; 7] = [
        StrategyId::FullMax,
        StrategyId::FullRandom,
        StrategyId::MarketMax,
        StrategyId::MarketRandom,
        StrategyId::SectorMax,
        StrategyId::SectorRandom,
        StrategyId::Market,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyId::FullMax => "P_f_max",
            StrategyId::FullRandom => "P_f_rand",
            StrategyId::MarketMax => "P_mar_max",
            StrategyId::MarketRandom => "P_mar_ran",
            StrategyId::SectorMax => "P_sec_max",
            StrategyId::SectorRandom => "P_sec_ran",
            StrategyId::Market => "P_MKT",
        }
    }

    /// Network mode whose partition drives the selection; `None` for the market portfolio.
    pub fn mode(self) -> Option<Mode> {
        match self {
            StrategyId::FullMax | StrategyId::FullRandom => Some(Mode::Full),
            StrategyId::MarketMax | StrategyId::MarketRandom => Some(Mode::Market),
            StrategyId::SectorMax | StrategyId::SectorRandom => Some(Mode::Sector),
            StrategyId::Market => None,
        }
    }

    pub fn picker(self) -> Option<Picker> {
        match self {
            StrategyId::FullMax | StrategyId::MarketMax | StrategyId::SectorMax => Some(Picker::MaxSharpe),
            StrategyId::FullRandom | StrategyId::MarketRandom | StrategyId::SectorRandom => Some(Picker::Random),
            StrategyId::Market => None,
        }
    }
}

impl std::fmt::Display for StrategyId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StrategyId::ALL
            .into_iter()
            .find(|id| id.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown strategy '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    Uniform,
    Markowitz,
}

impl Weighting {
    pub const ALL: [Weighting; 2] = [Weighting::Uniform, Weighting::Markowitz];

    pub fn name(self) -> &'static str {
        match self {
            Weighting::Uniform => "uniform",
            Weighting::Markowitz => "markowitz",
        }
    }
}

impl FromStr for Weighting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "uniform" | "equal" => Ok(Weighting::Uniform),
            "markowitz" => Ok(Weighting::Markowitz),
            other => Err(Error::InvalidArgument(format!("unknown weighting '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortfolioConfig {
    pub strategies: Vec<StrategyId>,
    pub weightings: Vec<Weighting>,
    pub rf: f64,
    pub annualization: f64,
    pub max_hold: usize,
    pub ridge: Option<f64>,
    pub long_only: bool,
    pub seed: u64,
}

impl Default for PortfolioConfig {
    fn default() -> Self {
        PortfolioConfig {
            strategies: StrategyId::ALL.to_vec(),
            weightings: Weighting::ALL.to_vec(),
            rf: 0.0,
            annualization: DEFAULT_ANNUALIZATION,
            max_hold: DEFAULT_MAX_HOLD,
            ridge: None,
            long_only: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyResult {
    pub strategy: StrategyId,
    pub weighting: Weighting,
    pub weights: WeightVector,
    /// Daily simple returns of the held portfolio.
    pub daily_returns: Vec<f64>,
    /// `sharpe[h - 1]` is the Sharpe ratio over the first `h` days.
    pub sharpe: Vec<f64>,
    pub notes: Vec<String>,
}

impl StrategyResult {
    /// Sample variance of the daily returns.
    pub fn variance(&self) -> f64 {
        let n = self.daily_returns.len() as f64;
        let mean = self.daily_returns.iter().sum::<f64>() / n;
        self.daily_returns.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestReport {
    pub window: usize,
    pub in_sample: (NaiveDate, NaiveDate),
    pub out_of_sample: (NaiveDate, NaiveDate),
    pub results: Vec<StrategyResult>,
}

impl BacktestReport {
    pub fn get(&self, strategy: StrategyId, weighting: Weighting) -> Option<&StrategyResult> {
        self.results.iter().find(|r| r.strategy == strategy && r.weighting == weighting)
    }
}

/// Every configured strategy under every configured weighting. Random picks
/// use `derive_seed(derive_seed(config.seed, window), strategy)`.
pub fn run_strategies(
    insample: &ReturnPanel,
    outsample: &ReturnPanel,
    partitions: &BTreeMap<Mode, Partition>,
    config: &PortfolioConfig,
    window: usize,
) -> Result<BacktestReport> {
    if outsample.n_days() < config.max_hold {
        return Err(Error::InvalidArgument(format!(
            "out-of-sample range has {} days, max_hold is {}",
            outsample.n_days(),
            config.max_hold
        )));
    }
    let window_seed = derive_seed(config.seed, window as u64);
    let mut results = Vec::new();
    for &strategy in &config.strategies {
        let mut notes = Vec::new();
        let stocks = match (strategy.mode(), strategy.picker()) {
            (Some(mode), Some(picker)) => {
                let p = partitions.get(&mode).ok_or_else(|| {
                    Error::InvalidArgument(format!("no {} partition for {}", mode.name(), strategy.name()))
                })?;
                let sel = select_stocks(p, insample, picker, derive_seed(window_seed, strategy as u64), config.rf)?;
                notes.extend(sel.warnings);
                sel.tickers
            }
            _ => insample.tickers.clone(),
        };
        for &weighting in &config.weightings {
            let mut notes = notes.clone();
            let weights = match weighting {
                Weighting::Uniform => uniform_weights(&stocks)?,
                Weighting::Markowitz if stocks.len() == 1 => {
                    notes.push("single stock; uniform weights used".into());
                    uniform_weights(&stocks)?
                }
                Weighting::Markowitz => match markowitz_weights(&stocks, insample, config.rf, config.ridge, config.long_only) {
                    Ok(w) => w,
                    Err(Error::Degenerate(why)) => {
                        notes.push(format!("uniform weights used: {why}"));
                        uniform_weights(&stocks)?
                    }
                    Err(e) => return Err(e),
                },
            };
            let daily = buy_and_hold_returns(&weights, outsample, config.max_hold)?;
            let sharpe = sharpe_curve(&daily, config.rf, config.annualization)?;
            results.push(StrategyResult { strategy, weighting, weights, daily_returns: daily, sharpe, notes });
        }
    }
    let last = config.max_hold - 1;
    Ok(BacktestReport {
        window,
        in_sample: (insample.dates[0], *insample.dates.last().expect("nonempty in-sample")),
        out_of_sample: (outsample.dates[0], outsample.dates[last]),
        results,
    })
}

/// `window,strategy,weighting,holding_period,sharpe`.
pub fn write_report_csv<W: Write>(reports: &[BacktestReport], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["window", "strategy", "weighting", "holding_period", "sharpe"])?;
    for rep in reports {
        for r in &rep.results {
            for (h, s) in r.sharpe.iter().enumerate() {
                w.write_record([
                    rep.window.to_string(),
                    r.strategy.name().to_string(),
                    r.weighting.name().to_string(),
                    (h + 1).to_string(),
                    s.to_string(),
                ])?;
            }
        }
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::business_days;

    fn panel(tickers: &[&str], rows: &[&[f64]]) -> ReturnPanel {
        let t = rows[0].len();
        ReturnPanel::new(
            tickers.iter().map(|s| s.to_string()).collect(),
            business_days(t),
            DMatrix::from_fn(rows.len(), t, |i, d| rows[i][d]),
        )
        .unwrap()
    }

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn sharpe_fixtures() {
        let s = sharpe_ratio(&[0.01, 0.03], 0.0, 1.0).unwrap();
        assert!((s - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(sharpe_ratio(&[0.01, 0.03], 0.02, 252.0).unwrap(), 0.0);
        let err = sharpe_ratio(&[0.02; 5], 0.0, 1.0).unwrap_err();
        assert!(err.to_string().contains("degenerate series"));
        assert!(sharpe_ratio(&[0.1], 0.0, 1.0).is_err());
    }

    #[test]
    fn max_sharpe_per_community() {
        // Sharpe of A > B; C alone
        let p = panel(&["A", "B", "C"], &[&[0.02, 0.04, 0.03], &[0.01, 0.03, -0.01], &[0.0, 0.01, 0.005]]);
        let part = Partition::from_labels(&[0, 0, 1]);
        let sel = select_stocks(&part, &p, Picker::MaxSharpe, 0, 0.0).unwrap();
        assert_eq!(sel.tickers, names(&["A", "C"]));
        let one = select_stocks(&Partition::whole(3), &p, Picker::MaxSharpe, 0, 0.0).unwrap();
        assert_eq!(one.tickers.len(), 1);
    }

    #[test]
    fn degenerate_community_falls_back() {
        let p = panel(&["B", "A"], &[&[0.01, 0.01, 0.01], &[0.02, 0.02, 0.02]]);
        let sel = select_stocks(&Partition::whole(2), &p, Picker::MaxSharpe, 0, 0.0).unwrap();
        assert_eq!(sel.tickers, names(&["A"]));
        assert_eq!(sel.warnings.len(), 1);
    }

    #[test]
    fn random_picks_are_uniform() {
        let row: &[f64] = &[0.0, 0.1];
        let p = panel(&["A", "B", "C", "D", "E"], &[row; 5]);
        let part = Partition::from_labels(&[0, 0, 0, 1, 1]);
        assert_eq!(
            select_stocks(&part, &p, Picker::Random, 9, 0.0).unwrap(),
            select_stocks(&part, &p, Picker::Random, 9, 0.0).unwrap()
        );
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        let draws = 1000;
        for seed in 0..draws {
            for t in select_stocks(&part, &p, Picker::Random, seed, 0.0).unwrap().tickers {
                *counts.entry(t).or_default() += 1;
            }
        }
        for (t, c) in counts {
            let prob = if t.as_str() < "D" { 1.0 / 3.0 } else { 0.5 };
            let mean = draws as f64 * prob;
            let sd = (draws as f64 * prob * (1.0 - prob)).sqrt();
            assert!((c as f64 - mean).abs() <= 3.0 * sd, "{t}: {c}");
        }
    }

    #[test]
    fn uniform_fixtures() {
        assert_eq!(uniform_weights(&names(&["A", "B", "C", "D"])).unwrap().weights, vec![0.25; 4]);
        assert_eq!(uniform_weights(&names(&["A"])).unwrap().weights, vec![1.0]);
        assert!(uniform_weights(&[]).is_err());
    }

    /// Rows with given means and standard deviations and zero sample correlation.
    fn designed_panel(mean: [f64; 2], sd: [f64; 2]) -> ReturnPanel {
        let a = [1.0, -1.0, 1.0, -1.0];
        let b = [1.0, 1.0, -1.0, -1.0];
        // sample sd of a and b is sqrt(4/3)
        let s = (4.0f64 / 3.0).sqrt();
        let r0: Vec<f64> = a.iter().map(|x| mean[0] + sd[0] * x / s).collect();
        let r1: Vec<f64> = b.iter().map(|x| mean[1] + sd[1] * x / s).collect();
        panel(&["A", "B"], &[&r0, &r1])
    }

    #[test]
    fn markowitz_fixtures() {
        let ab = names(&["A", "B"]);
        let w = markowitz_weights(&ab, &designed_panel([0.01, 0.01], [0.1, 0.1]), 0.0, Some(0.0), false).unwrap();
        assert!((w.weights[0] - 0.5).abs() < 1e-12);
        let w = markowitz_weights(&ab, &designed_panel([0.01, 0.01], [1.0, 2.0]), 0.0, Some(0.0), false).unwrap();
        assert!((w.weights[0] - 0.8).abs() < 1e-12 && (w.weights[1] - 0.2).abs() < 1e-12);
        let w = markowitz_weights(&ab, &designed_panel([0.0, 0.01], [0.1, 0.2]), 0.0, Some(0.0), false).unwrap();
        assert!(w.weights[0].abs() < 1e-12 && (w.weights[1] - 1.0).abs() < 1e-12);
        assert!(markowitz_weights(&names(&["A"]), &designed_panel([0.0, 0.01], [0.1, 0.2]), 0.0, None, false).is_err());
        let neg = designed_panel([-0.01, -0.02], [0.1, 0.2]);
        assert!(matches!(markowitz_weights(&ab, &neg, 0.0, Some(0.0), true), Err(Error::Degenerate(_))));
    }

    #[test]
    fn large_ridge_with_equal_excess_means_is_uniform() {
        let w = markowitz_weights(&names(&["A", "B"]), &designed_panel([0.01, 0.01], [0.1, 0.3]), 0.0, Some(1e6), false).unwrap();
        assert!(w.weights.iter().all(|x| (x - 0.5).abs() < 1e-3));
    }

    #[test]
    fn backtest_fixtures() {
        let p = panel(&["A", "B"], &[&[0.01, -0.02, 0.03], &[0.02, 0.0, -0.01]]);
        let single = WeightVector { tickers: names(&["A"]), weights: vec![1.0] };
        let daily = buy_and_hold_returns(&single, &p, 3).unwrap();
        for (d, r) in daily.iter().zip([0.01f64, -0.02, 0.03]) {
            assert!((d - (r.exp() - 1.0)).abs() < 1e-15);
        }
        // two stocks, equal capital, two days by hand
        let both = uniform_weights(&names(&["A", "B"])).unwrap();
        let (a1, a2) = (0.01f64.exp(), (-0.02f64).exp());
        let (b1, b2) = (0.02f64.exp(), 1.0);
        let v1 = 0.5 * a1 + 0.5 * b1;
        let v2 = 0.5 * a1 * a2 + 0.5 * b1 * b2;
        let want = [v1 - 1.0, v2 / v1 - 1.0];
        let curve = backtest(&both, &p, 2, 0.0, 1.0).unwrap();
        assert!((curve[0] - want[0]).abs() < 1e-15);
        assert!((curve[1] - sharpe_ratio(&want, 0.0, 1.0).unwrap()).abs() < 1e-12);
        assert!(backtest(&both, &p, 4, 0.0, 1.0).is_err());
        let missing = WeightVector { tickers: names(&["Z"]), weights: vec![1.0] };
        assert!(backtest(&missing, &p, 2, 0.0, 1.0).is_err());
    }

    #[test]
    fn strategy_roster() {
        let m = crate::synthetic::FactorMarket { n_stocks: 12, n_days: 80, ..Default::default() }.generate().unwrap();
        let ins = m.panel.slice_days(0, 60).unwrap();
        let outs = m.panel.slice_days(60, 80).unwrap();
        let part = Partition::from_labels(&m.sectors);
        let parts: BTreeMap<Mode, Partition> = Mode::ALL.iter().map(|&md| (md, part.clone())).collect();
        let cfg = PortfolioConfig { max_hold: 20, ..Default::default() };
        let rep = run_strategies(&ins, &outs, &parts, &cfg, 0).unwrap();
        assert_eq!(rep.results.len(), 14);
        let mkt = rep.get(StrategyId::Market, Weighting::Uniform).unwrap();
        assert!(mkt.weights.weights.iter().all(|&w| (w - 1.0 / 12.0).abs() < 1e-15));
        for r in &rep.results {
            assert!((r.weights.weights.iter().sum::<f64>() - 1.0).abs() < 1e-10);
            assert_eq!(r.sharpe.len(), 20);
        }
        assert_eq!(rep, run_strategies(&ins, &outs, &parts, &cfg, 0).unwrap());
        let mut out = Vec::new();
        write_report_csv(&[rep], &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap().lines().count(), 1 + 14 * 20);
    }

    #[test]
    fn strategy_names_round_trip() {
        for s in StrategyId::ALL {
            assert_eq!(s.name().parse::<StrategyId>().unwrap(), s);
        }
    }
}
