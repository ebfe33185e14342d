//! Community-informed portfolios against the all-stock benchmark.
//!
//! `cargo run --release --example portfolio_backtest`

use std::collections::BTreeMap;

use specnet::community::Detector;
use specnet::network::WeightTransform;
use specnet::portfolio::{run_strategies, PortfolioConfig};
use specnet::rolling::{mode_networks, Mode};
use specnet::spectral::MpVariant;
use specnet::synthetic::FactorMarket;

fn main() -> specnet::Result<()> {
    let market = FactorMarket::default().generate()?;
    let insample = market.panel.slice_days(0, 250)?;
    let outsample = market.panel.slice_days(250, 310)?;

    let nets = mode_networks(&insample, &Mode::ALL, None, MpVariant::Standard, WeightTransform::Absolute)?;
    let mut partitions = BTreeMap::new();
    for (mode, net) in &nets.networks {
        if let Some(net) = net {
            partitions.insert(*mode, Detector::Louvain.detect(net, 1)?.0);
        }
    }

    let config = PortfolioConfig { max_hold: 60, ..PortfolioConfig::default() };
    let report = run_strategies(&insample, &outsample, &partitions, &config, 0)?;
    println!("{:<10} {:<9} {:>6} {:>10} {:>12}", "strategy", "weights", "stocks", "sharpe@60", "variance");
    for r in &report.results {
        println!(
            "{:<10} {:<9} {:>6} {:>10.3} {:>12.3e}",
            r.strategy.name(),
            r.weighting.name(),
            r.weights.tickers.len(),
            r.sharpe[59],
            r.variance()
        );
        for note in &r.notes {
            println!("           note: {note}");
        }
    }
    Ok(())
}
