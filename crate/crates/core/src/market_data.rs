//! Price ingestion, calendar alignment and the daily log-return panel.
//!
//! Input is long-format CSV, one row per `(date, ticker, close)`. The panel
//! keeps the union of tickers and dates; cells a ticker has no row for are
//! absent. Returns are only formed between successive trading days: a
//! calendar step longer than `max_gap_days` marks the later date as a gap
//! and the return that spans it is dropped.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{Read, Write};

use chrono::NaiveDate;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const RETURN_PANEL_SCHEMA_VERSION: u32 = 1;

/// Default largest calendar step (in days) still treated as successive
/// trading days: a weekend plus one holiday.
pub const DEFAULT_MAX_GAP_DAYS: i64 = 4;

/// Column names used when reading a long-format price file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PriceSchema {
    pub date: String,
    pub ticker: String,
    pub close: String,
    pub max_gap_days: i64,
}

impl Default for PriceSchema {
    fn default() -> Self {
        Self {
            date: "date".into(),
            ticker: "ticker".into(),
            close: "close".into(),
            max_gap_days: DEFAULT_MAX_GAP_DAYS,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PricePanel {
    pub tickers: Vec<String>,
    pub dates: Vec<NaiveDate>,
    /// Row per ticker, column per date; `None` where no price was observed.
    pub prices: Vec<Vec<Option<f64>>>,
    /// `gap_mask[t]` is set when `dates[t - 1] -> dates[t]` is not a
    /// successive trading-day step. Always false for `t = 0`.
    pub gap_mask: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReturnPanel {
    pub tickers: Vec<String>,
    pub dates: Vec<NaiveDate>,
    /// N x T daily log returns, ticker rows.
    pub returns: DMatrix<f64>,
}

pub fn parse_date(s: &str) -> Option<NaiveDate> {
    NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d").ok()
}

fn gap_mask_for(dates: &[NaiveDate], max_gap_days: i64) -> Vec<bool> {
    let mut mask = vec![false; dates.len()];
    for t in 1..dates.len() {
        mask[t] = (dates[t] - dates[t - 1]).num_days() > max_gap_days;
    }
    mask
}

/// Reads long-format prices. Row numbers in errors are 1-based and count the
/// header as row 1.
pub fn ingest_prices<R: Read>(reader: R, schema: &PriceSchema) -> Result<PricePanel> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Parse { row: 1, message: format!("missing column `{name}`") })
    };
    let (date_col, ticker_col, close_col) =
        (column(&schema.date)?, column(&schema.ticker)?, column(&schema.close)?);

    let mut cells: HashMap<(String, NaiveDate), f64> = HashMap::new();
    for (idx, record) in rdr.records().enumerate() {
        let row = idx + 2;
        let record = record.map_err(|e| Error::Parse { row, message: e.to_string() })?;
        let field = |col: usize| {
            record
                .get(col)
                .ok_or_else(|| Error::Parse { row, message: format!("missing field {col}") })
        };
        let raw_date = field(date_col)?;
        let date = parse_date(raw_date)
            .ok_or_else(|| Error::Parse { row, message: format!("bad ISO-8601 date `{raw_date}`") })?;
        let ticker = field(ticker_col)?.to_string();
        if ticker.is_empty() {
            return Err(Error::Parse { row, message: "empty ticker".into() });
        }
        let raw_close = field(close_col)?;
        let close: f64 = raw_close
            .parse()
            .map_err(|_| Error::Parse { row, message: format!("bad price `{raw_close}`") })?;
        if !close.is_finite() || close <= 0.0 {
            return Err(Error::Validation(format!(
                "row {row}: non-positive price {close} for {ticker} on {date}"
            )));
        }
        if cells.insert((ticker.clone(), date), close).is_some() {
            return Err(Error::Validation(format!("row {row}: duplicate entry for {ticker} on {date}")));
        }
    }
    Ok(panel_from_cells(cells, schema.max_gap_days))
}

fn panel_from_cells(cells: HashMap<(String, NaiveDate), f64>, max_gap_days: i64) -> PricePanel {
    let tickers: BTreeSet<&String> = cells.keys().map(|(t, _)| t).collect();
    let dates: BTreeSet<NaiveDate> = cells.keys().map(|(_, d)| *d).collect();
    let tickers: Vec<String> = tickers.into_iter().cloned().collect();
    let dates: Vec<NaiveDate> = dates.into_iter().collect();
    let date_index: BTreeMap<NaiveDate, usize> = dates.iter().enumerate().map(|(i, d)| (*d, i)).collect();
    let ticker_index: HashMap<&str, usize> =
        tickers.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();
    let mut prices = vec![vec![None; dates.len()]; tickers.len()];
    for ((ticker, date), close) in &cells {
        prices[ticker_index[ticker.as_str()]][date_index[date]] = Some(*close);
    }
    let gap_mask = gap_mask_for(&dates, max_gap_days);
    PricePanel { tickers, dates, prices, gap_mask }
}

impl PricePanel {
    /// Builds a complete panel from dense rows, checking every invariant.
    pub fn from_dense(
        tickers: Vec<String>,
        dates: Vec<NaiveDate>,
        prices: Vec<Vec<f64>>,
        max_gap_days: i64,
    ) -> Result<Self> {
        let prices = prices.into_iter().map(|row| row.into_iter().map(Some).collect()).collect();
        let panel = PricePanel { gap_mask: gap_mask_for(&dates, max_gap_days), tickers, dates, prices };
        panel.validate()?;
        Ok(panel)
    }

    pub fn validate(&self) -> Result<()> {
        if self.prices.len() != self.tickers.len() {
            return Err(Error::Validation("price rows do not match tickers".into()));
        }
        if self.gap_mask.len() != self.dates.len() {
            return Err(Error::Validation("gap mask does not match dates".into()));
        }
        if self.dates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Validation("dates must be strictly increasing".into()));
        }
        for (ticker, row) in self.tickers.iter().zip(&self.prices) {
            if row.len() != self.dates.len() {
                return Err(Error::Validation(format!("row for {ticker} has wrong length")));
            }
            if row.iter().flatten().any(|p| !(p.is_finite() && *p > 0.0)) {
                return Err(Error::Validation(format!("non-positive price for {ticker}")));
            }
        }
        Ok(())
    }

    pub fn n_stocks(&self) -> usize {
        self.tickers.len()
    }

    pub fn n_dates(&self) -> usize {
        self.dates.len()
    }

    pub fn coverage(&self, stock: usize) -> f64 {
        if self.dates.is_empty() {
            return 0.0;
        }
        let present = self.prices[stock].iter().filter(|p| p.is_some()).count();
        present as f64 / self.dates.len() as f64
    }

    pub fn is_complete(&self) -> bool {
        self.prices.iter().all(|row| row.iter().all(Option::is_some))
    }

    /// Recomputes the gap mask for a different gap threshold.
    pub fn with_max_gap_days(mut self, max_gap_days: i64) -> Self {
        self.gap_mask = gap_mask_for(&self.dates, max_gap_days);
        self
    }
}

/// Keeps tickers whose fraction of present cells is at least `min_coverage`.
pub fn filter_complete_stocks(panel: &PricePanel, min_coverage: f64) -> Result<PricePanel> {
    if !(min_coverage > 0.0 && min_coverage <= 1.0) {
        return Err(Error::InvalidArgument(format!("min_coverage {min_coverage} not in (0, 1]")));
    }
    let keep: Vec<usize> =
        (0..panel.n_stocks()).filter(|&i| panel.coverage(i) >= min_coverage).collect();
    if keep.is_empty() {
        return Err(Error::NoCompleteStocks);
    }
    Ok(PricePanel {
        tickers: keep.iter().map(|&i| panel.tickers[i].clone()).collect(),
        dates: panel.dates.clone(),
        prices: keep.iter().map(|&i| panel.prices[i].clone()).collect(),
        gap_mask: panel.gap_mask.clone(),
    })
}

/// `r_i(t) = ln p_i(t+1) - ln p_i(t)`, dropping every pair that spans a gap.
pub fn compute_log_returns(panel: &PricePanel) -> Result<ReturnPanel> {
    if panel.n_dates() < 2 {
        return Err(Error::InvalidArgument("at least two dates are required".into()));
    }
    let mut dense = Vec::with_capacity(panel.n_stocks());
    for (ticker, row) in panel.tickers.iter().zip(&panel.prices) {
        let row: Vec<f64> = row
            .iter()
            .map(|p| p.ok_or_else(|| Error::Validation(format!("{ticker} has missing prices"))))
            .collect::<Result<_>>()?;
        if row.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
            return Err(Error::Validation(format!("non-positive price for {ticker}")));
        }
        dense.push(row);
    }
    let kept: Vec<usize> = (1..panel.n_dates()).filter(|&t| !panel.gap_mask[t]).collect();
    let returns = DMatrix::from_fn(panel.n_stocks(), kept.len(), |i, c| {
        let t = kept[c];
        dense[i][t].ln() - dense[i][t - 1].ln()
    });
    Ok(ReturnPanel {
        tickers: panel.tickers.clone(),
        dates: kept.iter().map(|&t| panel.dates[t]).collect(),
        returns,
    })
}

#[derive(Serialize, Deserialize)]
struct ReturnEnvelope {
    schema_version: u32,
    tickers: Vec<String>,
    dates: Vec<NaiveDate>,
    returns: Vec<Vec<f64>>,
}

impl ReturnPanel {
    pub fn new(tickers: Vec<String>, dates: Vec<NaiveDate>, returns: DMatrix<f64>) -> Result<Self> {
        if returns.nrows() != tickers.len() || returns.ncols() != dates.len() {
            return Err(Error::Validation(format!(
                "returns are {}x{} but there are {} tickers and {} dates",
                returns.nrows(),
                returns.ncols(),
                tickers.len(),
                dates.len()
            )));
        }
        if returns.iter().any(|r| !r.is_finite()) {
            return Err(Error::Validation("returns contain missing or non-finite values".into()));
        }
        Ok(Self { tickers, dates, returns })
    }

    pub fn n_stocks(&self) -> usize {
        self.tickers.len()
    }

    pub fn n_days(&self) -> usize {
        self.dates.len()
    }

    pub fn row(&self, stock: usize) -> Vec<f64> {
        self.returns.row(stock).iter().copied().collect()
    }

    pub fn ticker_index(&self, ticker: &str) -> Option<usize> {
        self.tickers.iter().position(|t| t == ticker)
    }

    /// Columns `start..end`.
    pub fn slice_days(&self, start: usize, end: usize) -> Result<ReturnPanel> {
        if start >= end || end > self.n_days() {
            return Err(Error::InvalidArgument(format!(
                "day range {start}..{end} outside 0..{}",
                self.n_days()
            )));
        }
        Ok(ReturnPanel {
            tickers: self.tickers.clone(),
            dates: self.dates[start..end].to_vec(),
            returns: self.returns.columns(start, end - start).into_owned(),
        })
    }

    /// Writes tickers as rows: `ticker,<date>,<date>,...`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["ticker".to_string()];
        header.extend(self.dates.iter().map(|d| d.to_string()));
        w.write_record(&header)?;
        for (i, ticker) in self.tickers.iter().enumerate() {
            let mut rec = vec![ticker.clone()];
            rec.extend(self.returns.row(i).iter().map(|r| r.to_string()));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let dates = headers
            .iter()
            .skip(1)
            .map(|h| parse_date(h).ok_or_else(|| Error::Parse { row: 1, message: format!("bad date `{h}`") }))
            .collect::<Result<Vec<_>>>()?;
        let mut tickers = Vec::new();
        let mut values = Vec::new();
        for (idx, record) in rdr.records().enumerate() {
            let row = idx + 2;
            let record = record.map_err(|e| Error::Parse { row, message: e.to_string() })?;
            if record.len() != dates.len() + 1 {
                return Err(Error::Parse { row, message: "wrong number of fields".into() });
            }
            tickers.push(record[0].to_string());
            for field in record.iter().skip(1) {
                let v: f64 = field
                    .parse()
                    .map_err(|_| Error::Parse { row, message: format!("bad return `{field}`") })?;
                values.push(v);
            }
        }
        let returns = DMatrix::from_row_slice(tickers.len(), dates.len(), &values);
        ReturnPanel::new(tickers, dates, returns)
    }

    pub fn to_json(&self) -> Result<String> {
        let env = ReturnEnvelope {
            schema_version: RETURN_PANEL_SCHEMA_VERSION,
            tickers: self.tickers.clone(),
            dates: self.dates.clone(),
            returns: (0..self.n_stocks()).map(|i| self.row(i)).collect(),
        };
        Ok(serde_json::to_string(&env)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let env: ReturnEnvelope = serde_json::from_str(s)?;
        if env.schema_version != RETURN_PANEL_SCHEMA_VERSION {
            return Err(Error::Validation(format!("unsupported schema_version {}", env.schema_version)));
        }
        if env.returns.iter().any(|r| r.len() != env.dates.len()) {
            return Err(Error::Validation("ragged returns".into()));
        }
        let flat: Vec<f64> = env.returns.concat();
        let returns = DMatrix::from_row_slice(env.tickers.len(), env.dates.len(), &flat);
        ReturnPanel::new(env.tickers, env.dates, returns)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(s: &str) -> NaiveDate {
        parse_date(s).unwrap()
    }

    fn ingest(csv: &str) -> Result<PricePanel> {
        ingest_prices(csv.as_bytes(), &PriceSchema::default())
    }

    #[test]
    fn single_ticker_two_days() {
        let p = ingest("date,ticker,close\n2010-01-04,A,100.0\n2010-01-05,A,101.0\n").unwrap();
        assert_eq!(p.tickers, vec!["A"]);
        assert_eq!(p.dates, vec![d("2010-01-04"), d("2010-01-05")]);
        assert_eq!(p.prices, vec![vec![Some(100.0), Some(101.0)]]);
    }

    #[test]
    fn negative_price_rejected() {
        let err = ingest("date,ticker,close\n2010-01-04,A,-5.0\n").unwrap_err();
        assert!(matches!(err, Error::Validation(_)), "{err}");
    }

    #[test]
    fn missing_cell_is_absent() {
        let csv = "date,ticker,close\n\
                   2010-01-04,A,1\n2010-01-05,A,2\n2010-01-06,A,3\n\
                   2010-01-04,B,1\n2010-01-06,B,3\n";
        let p = ingest(csv).unwrap();
        assert_eq!(p.n_stocks(), 2);
        assert_eq!(p.n_dates(), 3);
        let absent: Vec<(usize, usize)> = (0..2)
            .flat_map(|i| (0..3).map(move |t| (i, t)))
            .filter(|&(i, t)| p.prices[i][t].is_none())
            .collect();
        assert_eq!(absent, vec![(1, 1)]);
    }

    #[test]
    fn malformed_row_reports_row_number() {
        let err = ingest("date,ticker,close\n2010-01-04,A,1\n04/01/2010,A,2\n").unwrap_err();
        match err {
            Error::Parse { row, .. } => assert_eq!(row, 3),
            other => panic!("unexpected {other}"),
        }
        let err = ingest("date,ticker,close\n2010-01-04,A,abc\n").unwrap_err();
        assert!(matches!(err, Error::Parse { row: 2, .. }));
    }

    #[test]
    fn custom_schema_columns() {
        let schema = PriceSchema {
            date: "Day".into(),
            ticker: "Sym".into(),
            close: "Px".into(),
            ..Default::default()
        };
        let p = ingest_prices("Px,Sym,Day\n5,X,2020-02-03\n".as_bytes(), &schema).unwrap();
        assert_eq!(p.prices[0][0], Some(5.0));
        assert!(ingest_prices("a,b\n1,2\n".as_bytes(), &schema).is_err());
    }

    fn half_panel() -> PricePanel {
        let csv = "date,ticker,close\n\
                   2010-01-04,A,1\n2010-01-05,A,2\n2010-01-06,A,3\n2010-01-07,A,4\n\
                   2010-01-04,B,1\n2010-01-06,B,3\n";
        ingest(csv).unwrap()
    }

    #[test]
    fn coverage_filter() {
        let p = half_panel();
        let strict = filter_complete_stocks(&p, 1.0).unwrap();
        assert_eq!(strict.tickers, vec!["A"]);
        let loose = filter_complete_stocks(&p, 0.4).unwrap();
        assert_eq!(loose.tickers, vec!["A", "B"]);
        assert!(filter_complete_stocks(&p, 0.0).is_err());
    }

    #[test]
    fn no_complete_stocks() {
        let csv = "date,ticker,close\n2010-01-04,A,1\n2010-01-05,B,1\n";
        let p = ingest(csv).unwrap();
        assert!(matches!(filter_complete_stocks(&p, 1.0), Err(Error::NoCompleteStocks)));
    }

    #[test]
    fn log_return_identity() {
        let p = PricePanel::from_dense(
            vec!["A".into()],
            vec![d("2010-01-04"), d("2010-01-05")],
            vec![vec![100.0, 100.0 * 0.01f64.exp()]],
            DEFAULT_MAX_GAP_DAYS,
        )
        .unwrap();
        let r = compute_log_returns(&p).unwrap();
        assert_eq!(r.n_days(), 1);
        assert!((r.returns[(0, 0)] - 0.01).abs() < 1e-15);
        assert_eq!(r.dates, vec![d("2010-01-05")]);
    }

    #[test]
    fn constant_price_zero_returns() {
        let p = PricePanel::from_dense(
            vec!["A".into()],
            vec![d("2010-01-04"), d("2010-01-05"), d("2010-01-06")],
            vec![vec![50.0, 50.0, 50.0]],
            DEFAULT_MAX_GAP_DAYS,
        )
        .unwrap();
        let r = compute_log_returns(&p).unwrap();
        assert_eq!(r.row(0), vec![0.0, 0.0]);
    }

    #[test]
    fn gap_pair_dropped() {
        // dates 2 -> 3 jump six calendar days
        let dates = vec![d("2010-01-04"), d("2010-01-05"), d("2010-01-11"), d("2010-01-12")];
        let p = PricePanel::from_dense(vec!["A".into()], dates, vec![vec![1.0, 2.0, 3.0, 4.0]], 4).unwrap();
        assert_eq!(p.gap_mask, vec![false, false, true, false]);
        let r = compute_log_returns(&p).unwrap();
        assert_eq!(r.n_days(), 2);
        assert!((r.returns[(0, 0)] - 2f64.ln()).abs() < 1e-15);
        assert!((r.returns[(0, 1)] - (4f64 / 3.0).ln()).abs() < 1e-15);
        assert_eq!(r.dates, vec![d("2010-01-05"), d("2010-01-12")]);
    }

    #[test]
    fn weekend_is_not_a_gap() {
        // Friday -> Monday, then a long weekend Friday -> Tuesday
        let dates = vec![d("2010-01-08"), d("2010-01-11"), d("2010-01-15"), d("2010-01-19")];
        let p = PricePanel::from_dense(vec!["A".into()], dates, vec![vec![1.0; 4]], 4).unwrap();
        assert_eq!(p.gap_mask, vec![false, false, false, false]);
        let p = p.with_max_gap_days(3);
        assert_eq!(p.gap_mask, vec![false, false, true, true]);
    }

    #[test]
    fn returns_need_two_dates_and_complete_rows() {
        let p = PricePanel::from_dense(vec!["A".into()], vec![d("2010-01-04")], vec![vec![1.0]], 4).unwrap();
        assert!(compute_log_returns(&p).is_err());
        assert!(compute_log_returns(&half_panel()).is_err());
    }

    #[test]
    fn csv_and_json_round_trip() {
        let r = ReturnPanel::new(
            vec!["A".into(), "B".into()],
            vec![d("2010-01-05"), d("2010-01-06")],
            DMatrix::from_row_slice(2, 2, &[0.1, -0.25, 1e-17, 0.3333333333333333]),
        )
        .unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        assert_eq!(ReturnPanel::read_csv(buf.as_slice()).unwrap(), r);
        let json = r.to_json().unwrap();
        assert!(json.contains("\"schema_version\":1"));
        assert_eq!(ReturnPanel::from_json(&json).unwrap(), r);
        let bad = json.replace("\"schema_version\":1", "\"schema_version\":9");
        assert!(ReturnPanel::from_json(&bad).is_err());
    }

    proptest! {
        #[test]
        fn exp_cumulating_returns_reconstructs_prices(
            start in 1.0f64..1000.0,
            steps in proptest::collection::vec(-0.2f64..0.2, 1..60),
        ) {
            let mut prices = vec![start];
            for s in &steps {
                let last = *prices.last().unwrap();
                prices.push(last * s.exp());
            }
            let base = d("2015-03-02");
            let dates: Vec<NaiveDate> = (0..prices.len()).map(|i| base + chrono::Days::new(i as u64)).collect();
            let p = PricePanel::from_dense(vec!["A".into()], dates, vec![prices.clone()], 4).unwrap();
            let r = compute_log_returns(&p).unwrap();
            let mut acc = start;
            for (t, ret) in r.row(0).iter().enumerate() {
                acc *= ret.exp();
                prop_assert!(((acc - prices[t + 1]) / prices[t + 1]).abs() < 1e-12);
            }
        }

        #[test]
        fn return_count_drops_one_plus_gaps(gaps in proptest::collection::vec(1i64..10, 2..40)) {
            let mut dates = vec![d("2012-01-02")];
            for g in &gaps {
                let last = *dates.last().unwrap();
                dates.push(last + chrono::Days::new(*g as u64));
            }
            let n = dates.len();
            let p = PricePanel::from_dense(vec!["A".into()], dates, vec![vec![10.0; n]], 4).unwrap();
            let n_gaps = p.gap_mask.iter().filter(|g| **g).count();
            let r = compute_log_returns(&p).unwrap();
            prop_assert_eq!(r.n_days(), n - 1 - n_gaps);
        }

        #[test]
        fn ingest_is_order_insensitive(seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut rows = Vec::new();
            for (k, t) in ["B", "A", "C"].iter().enumerate() {
                for day in 0..5u64 {
                    if (day + k as u64) % 4 != 3 {
                        let date = d("2011-06-01") + chrono::Days::new(day);
                        rows.push(format!("{date},{t},{}", 1.0 + day as f64 + k as f64));
                    }
                }
            }
            let original = format!("date,ticker,close\n{}\n", rows.join("\n"));
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            rows.shuffle(&mut rng);
            let shuffled = format!("date,ticker,close\n{}\n", rows.join("\n"));
            prop_assert_eq!(ingest(&original).unwrap(), ingest(&shuffled).unwrap());
        }
    }
}
