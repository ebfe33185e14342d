//! Long-format prices to a clean log-return panel.
//!
//! `cargo run --example ingest_prices`

use specnet::market_data::{compute_log_returns, filter_complete_stocks, ingest_prices, PriceSchema};

const PRICES: &str = "\
date,ticker,close
2024-01-02,AAA,100.0
2024-01-03,AAA,101.0
2024-01-04,AAA,99.5
2024-01-05,AAA,102.0
2024-01-15,AAA,103.0
2024-01-16,AAA,104.5
2024-01-02,BBB,50.0
2024-01-03,BBB,50.5
2024-01-04,BBB,50.2
2024-01-05,BBB,51.0
2024-01-15,BBB,51.5
2024-01-16,BBB,51.1
2024-01-02,CCC,20.0
2024-01-03,CCC,20.4
2024-01-05,CCC,20.1
2024-01-15,CCC,20.9
2024-01-16,CCC,21.0
";

fn main() -> specnet::Result<()> {
    let prices = ingest_prices(PRICES.as_bytes(), &PriceSchema::default())?;
    println!("{} tickers over {} dates", prices.n_stocks(), prices.n_dates());
    for (i, t) in prices.tickers.iter().enumerate() {
        println!("  {t}: coverage {:.2}", prices.coverage(i));
    }

    // CCC misses a date and is dropped; the 10-day hole is excluded from the returns.
    let complete = filter_complete_stocks(&prices, 1.0)?;
    let returns = compute_log_returns(&complete)?;
    println!("kept {:?}, {} return days", returns.tickers, returns.n_days());
    returns.write_csv(std::io::stdout())?;
    Ok(())
}
