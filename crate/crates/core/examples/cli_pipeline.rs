//! The full command-line pipeline driven in-process: synthetic returns,
//! structure subcommands, a short portfolio backtest and the summary tables.
//!
//! `cargo run --release --example cli_pipeline -- [out_dir]`

use std::path::PathBuf;

use specnet::cli::run_cli;
use specnet::synthetic::FactorMarket;

fn main() -> specnet::Result<()> {
    let out: PathBuf = std::env::args().nth(1).unwrap_or_else(|| "pipeline_out".into()).into();
    std::fs::create_dir_all(&out).map_err(|e| specnet::Error::InvalidArgument(e.to_string()))?;
    let returns = out.join("returns.csv");
    let market = FactorMarket { n_stocks: 40, n_days: 400, ..FactorMarket::default() }.generate()?;
    market.panel.write_csv(std::fs::File::create(&returns).map_err(|e| specnet::Error::InvalidArgument(e.to_string()))?)?;

    let r = returns.to_str().expect("utf-8 path");
    let o = out.to_str().expect("utf-8 path");
    let portfolio_csv = out.join("portfolio.csv");
    let steps: Vec<Vec<&str>> = vec![
        vec!["spectra", "--input", r, "--out", o],
        vec!["pmfg", "--input", r, "--out", o],
        vec!["coreperiphery", "--input", r, "--out", o, "--samples", "500", "--significance", "--n-rand", "20"],
        vec!["communities", "--input", r, "--out", o, "--seed", "3"],
        vec!["portfolio", "--returns", r, "--window", "250", "--max-hold", "60", "--step", "30", "--out", portfolio_csv.to_str().unwrap()],
        vec!["report", "--results", o],
    ];
    for step in steps {
        let code = run_cli(std::iter::once("specnet").chain(step.iter().copied()));
        println!("specnet {} -> exit {code}", step[0]);
        if code != 0 {
            std::process::exit(code);
        }
    }
    println!("tables and manifests in {}", out.display());
    Ok(())
}
