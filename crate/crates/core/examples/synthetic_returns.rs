//! Writes a factor-model return panel (one market factor, four sectors) to a
//! CSV that the `specnet` subcommands accept as `--input`.
//!
//! `cargo run --example synthetic_returns -- returns.csv [seed]`

use std::fs::File;

use specnet::synthetic::FactorMarket;

fn main() -> specnet::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| "returns.csv".into());
    let seed = args.next().map(|s| s.parse().expect("seed must be an integer")).unwrap_or(1);

    let market = FactorMarket { seed, ..FactorMarket::default() }.generate()?;
    let file = File::create(&path).map_err(|e| specnet::Error::InvalidArgument(format!("{path}: {e}")))?;
    market.panel.write_csv(file)?;
    println!("wrote {} stocks x {} days to {path}", market.panel.n_stocks(), market.panel.n_days());
    Ok(())
}
