//! Seeded synthetic inputs: factor-model markets, i.i.d. noise panels and
//! planted core-periphery networks.

use chrono::{Datelike, Days, NaiveDate, Weekday};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::market_data::ReturnPanel;
use crate::network::WeightedNetwork;

/// Daily log returns `r_it = mu_i + b_i f_t + g_i h_{s(i),t} + e_i z_it`
/// with one market factor `f`, one factor `h_s` per sector and independent
/// Gaussian shocks. Loadings and idiosyncratic scales vary across stocks.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorMarket {
    pub n_stocks: usize,
    pub n_days: usize,
    pub n_sectors: usize,
    pub market_vol: f64,
    pub sector_vol: f64,
    pub idio_vol: f64,
    /// Mean daily drift shared by all stocks.
    pub drift: f64,
    /// Half-width of the uniform per-stock drift spread.
    pub drift_spread: f64,
    pub seed: u64,
}

impl Default for FactorMarket {
    fn default() -> Self {
        FactorMarket {
            n_stocks: 60,
            n_days: 500,
            n_sectors: 4,
            market_vol: 0.01,
            sector_vol: 0.008,
            idio_vol: 0.012,
            drift: 3e-4,
            drift_spread: 2e-4,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticMarket {
    pub panel: ReturnPanel,
    /// Planted sector of each stock, `0..n_sectors`.
    pub sectors: Vec<usize>,
}

impl FactorMarket {
    pub fn generate(&self) -> Result<SyntheticMarket> {
        if self.n_stocks == 0 || self.n_days < 2 || self.n_sectors == 0 || self.n_sectors > self.n_stocks {
            return Err(Error::InvalidArgument("factor market needs stocks, two days and 1..=N sectors".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let n = self.n_stocks;
        // contiguous, nearly equal sector blocks
        let sectors: Vec<usize> = (0..n).map(|i| i * self.n_sectors / n).collect();
        let beta: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..1.5)).collect();
        let gamma: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..1.5)).collect();
        let sigma: Vec<f64> = (0..n).map(|_| self.idio_vol * rng.gen_range(0.8..1.2)).collect();
        let mu: Vec<f64> = (0..n).map(|_| self.drift + rng.gen_range(-1.0..=1.0) * self.drift_spread).collect();

        let mut returns = DMatrix::zeros(n, self.n_days);
        let mut h = vec![0.0; self.n_sectors];
        for t in 0..self.n_days {
            let f: f64 = self.market_vol * gaussian(&mut rng);
            for hs in &mut h {
                *hs = self.sector_vol * gaussian(&mut rng);
            }
            for i in 0..n {
                returns[(i, t)] = mu[i] + beta[i] * f + gamma[i] * h[sectors[i]] + sigma[i] * gaussian(&mut rng);
            }
        }
        let panel = ReturnPanel::new(tickers(n), business_days(self.n_days), returns)?;
        Ok(SyntheticMarket { panel, sectors })
    }
}

/// Independent standard normal returns.
pub fn iid_gaussian_panel(n: usize, t: usize, seed: u64) -> Result<ReturnPanel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let returns = DMatrix::from_fn(n, t, |_, _| gaussian(&mut rng));
    ReturnPanel::new(tickers(n), business_days(t), returns)
}

/// Unit-weight network with every core-core and core-periphery pair linked
/// (nodes `0..k` form the core), after which each of the `n(n-1)/2` pairs is
/// flipped independently with probability `noise`.
pub fn planted_core_periphery(n: usize, k: usize, noise: f64, seed: u64) -> Result<WeightedNetwork> {
    if k == 0 || k >= n || !(0.0..=1.0).contains(&noise) {
        return Err(Error::InvalidArgument("need 1 <= k < n and noise in [0, 1]".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let ideal = i < k;
            if ideal != rng.gen_bool(noise) {
                edges.push((i, j));
            }
        }
    }
    let mut net = WeightedNetwork::from_unit_edges(n, &edges)?;
    net.labels = tickers(n);
    Ok(net)
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn tickers(n: usize) -> Vec<String> {
    let width = n.saturating_sub(1).to_string().len().max(2);
    (0..n).map(|i| format!("S{i:0width$}")).collect()
}

/// Weekdays from 2010-01-04.
pub fn business_days(t: usize) -> Vec<NaiveDate> {
    let mut d = NaiveDate::from_ymd_opt(2010, 1, 4).expect("valid date");
    let mut out = Vec::with_capacity(t);
    while out.len() < t {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d = d + Days::new(1);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_market_shape_and_determinism() {
        let cfg = FactorMarket { n_stocks: 12, n_days: 30, n_sectors: 3, ..Default::default() };
        let a = cfg.generate().unwrap();
        assert_eq!(a.panel.returns.shape(), (12, 30));
        assert_eq!(a.sectors, vec![0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2]);
        assert_eq!(a, cfg.generate().unwrap());
        assert_ne!(a.panel.returns, FactorMarket { seed: 2, ..cfg }.generate().unwrap().panel.returns);
    }

    #[test]
    fn business_days_skip_weekends() {
        let d = business_days(6);
        assert_eq!(d[4], NaiveDate::from_ymd_opt(2010, 1, 8).unwrap());
        assert_eq!(d[5], NaiveDate::from_ymd_opt(2010, 1, 11).unwrap());
    }

    #[test]
    fn noiseless_planted_network_is_ideal() {
        let net = planted_core_periphery(6, 2, 0.0, 1).unwrap();
        assert_eq!(net.edge_count(), 1 + 2 * 4);
        assert_eq!(net.labels[0], "S00");
    }
}
