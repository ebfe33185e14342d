//! Artifact schemas shared by the subcommands and the summary tables built
//! from them.
//!
//! The analysis subcommands write the row types below as CSV into a results
//! directory; [`emit_report`] reads them back and renders six tables with a
//! fixed column contract.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::coreperiphery::{cosine_similarity, CpMethod};
use crate::error::{Error, Result};
use crate::rolling::{write_atomic, Mode};

pub const CORENESS_FILE: &str = "coreness.csv";
pub const CP_SUMMARY_FILE: &str = "cp_summary.csv";
pub const CENTRALIZATION_FILE: &str = "cp_centralization.csv";
pub const MODULARITY_FILE: &str = "modularity.csv";
pub const NMI_FILE: &str = "nmi.csv";
pub const PORTFOLIO_FILE: &str = "portfolio.csv";

pub const REPORT_TABLES: [&str; 6] = [
    "table_cosine_similarity.csv",
    "table_frobenius.csv",
    "table_modularity.csv",
    "table_nmi.csv",
    "table_cp_centralization.csv",
    "table_sharpe_curves.csv",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorenessRow {
    pub ticker: String,
    pub method: CpMethod,
    pub score: f64,
    pub mode: Mode,
}

/// Distance between the reordered adjacency and the ideal block structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CpSummaryRow {
    pub mode: Mode,
    pub method: CpMethod,
    pub frobenius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralizationRow {
    pub mode: Mode,
    pub cp_centralization: Option<f64>,
    pub p_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModularityRow {
    pub method: String,
    pub mode: Mode,
    pub modularity: Option<f64>,
    pub communities: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NmiRow {
    pub method: String,
    pub mode_a: Mode,
    pub mode_b: Mode,
    pub nmi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharpeRow {
    pub window: usize,
    pub strategy: String,
    pub weighting: String,
    pub holding_period: usize,
    pub sharpe: f64,
}

pub fn write_rows<T: Serialize, W: Write>(rows: &[T], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

/// Like [`write_rows`] but always writes the header, even with no rows.
pub fn write_rows_with_header<T: Serialize, W: Write>(header: &[&str], rows: &[T], writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn read_rows<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    if !path.exists() {
        return Err(Error::MissingArtifact(path.to_path_buf()));
    }
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    csv::Reader::from_reader(file).deserialize().map(|r| r.map_err(Error::from)).collect()
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Reads the artifacts in `results` and writes the six summary tables into
/// `out`. Returns the written paths in [`REPORT_TABLES`] order.
pub fn emit_report(results: &Path, out: &Path) -> Result<Vec<PathBuf>> {
    let coreness: Vec<CorenessRow> = read_rows(&results.join(CORENESS_FILE))?;
    let summary: Vec<CpSummaryRow> = read_rows(&results.join(CP_SUMMARY_FILE))?;
    let central: Vec<CentralizationRow> = read_rows(&results.join(CENTRALIZATION_FILE))?;
    let modularity: Vec<ModularityRow> = read_rows(&results.join(MODULARITY_FILE))?;
    let nmi: Vec<NmiRow> = read_rows(&results.join(NMI_FILE))?;
    let sharpe: Vec<SharpeRow> = read_rows(&results.join(PORTFOLIO_FILE))?;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;

    let tables = [
        cosine_table(&coreness)?,
        frobenius_table(&summary)?,
        modularity_table(&modularity)?,
        nmi_table(&nmi)?,
        centralization_table(&central)?,
        sharpe_table(&sharpe)?,
    ];
    let mut paths = Vec::new();
    for (name, bytes) in REPORT_TABLES.iter().zip(tables) {
        let path = out.join(name);
        write_atomic(&path, &bytes)?;
        paths.push(path);
    }
    Ok(paths)
}

fn csv_bytes(header: Vec<String>, rows: Vec<Vec<String>>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(&header)?;
        for r in rows {
            w.write_record(&r)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
    }
    Ok(buf)
}

fn mode_header(first: &str) -> Vec<String> {
    std::iter::once(first.to_string()).chain(Mode::ALL.iter().map(|m| m.name().to_string())).collect()
}

/// Rows are method pairs, columns are modes.
fn cosine_table(rows: &[CorenessRow]) -> Result<Vec<u8>> {
    let mut by: BTreeMap<(Mode, CpMethod), BTreeMap<String, f64>> = BTreeMap::new();
    for r in rows {
        by.entry((r.mode, r.method)).or_default().insert(r.ticker.clone(), r.score);
    }
    let methods: Vec<CpMethod> = CpMethod::ALL.into_iter().filter(|m| by.keys().any(|k| k.1 == *m)).collect();
    let mut out = Vec::new();
    for (a, ma) in methods.iter().enumerate() {
        for mb in &methods[a + 1..] {
            let mut row = vec![format!("{}-{}", ma.name(), mb.name())];
            for mode in Mode::ALL {
                let value = match (by.get(&(mode, *ma)), by.get(&(mode, *mb))) {
                    (Some(x), Some(y)) if x.len() == y.len() && x.keys().eq(y.keys()) => {
                        let xs: Vec<f64> = x.values().copied().collect();
                        let ys: Vec<f64> = y.values().copied().collect();
                        cosine_similarity(&xs, &ys).ok()
                    }
                    _ => None,
                };
                row.push(cell(value));
            }
            out.push(row);
        }
    }
    csv_bytes(mode_header("pair"), out)
}

/// One row per mode, one column per method.
fn frobenius_table(rows: &[CpSummaryRow]) -> Result<Vec<u8>> {
    let methods: Vec<CpMethod> = CpMethod::ALL.into_iter().filter(|m| rows.iter().any(|r| r.method == *m)).collect();
    let header = std::iter::once("mode".to_string()).chain(methods.iter().map(|m| m.name().to_string())).collect();
    let out = Mode::ALL
        .iter()
        .map(|&mode| {
            std::iter::once(mode.name().to_string())
                .chain(methods.iter().map(|&m| {
                    cell(rows.iter().find(|r| r.mode == mode && r.method == m).map(|r| r.frobenius))
                }))
                .collect()
        })
        .collect();
    csv_bytes(header, out)
}

/// One row per (method, mode).
fn modularity_table(rows: &[ModularityRow]) -> Result<Vec<u8>> {
    let mut sorted: Vec<&ModularityRow> = rows.iter().collect();
    sorted.sort_by(|a, b| a.method.cmp(&b.method).then(a.mode.cmp(&b.mode)));
    let header = ["method", "mode", "modularity", "communities"].map(String::from).to_vec();
    let out = sorted
        .into_iter()
        .map(|r| {
            vec![
                r.method.clone(),
                r.mode.name().to_string(),
                cell(r.modularity),
                r.communities.map(|c| c.to_string()).unwrap_or_default(),
            ]
        })
        .collect();
    csv_bytes(header, out)
}

/// One row per method, one column per mode pair.
fn nmi_table(rows: &[NmiRow]) -> Result<Vec<u8>> {
    let pairs = [(Mode::Full, Mode::Market), (Mode::Full, Mode::Sector), (Mode::Market, Mode::Sector)];
    let mut methods: Vec<&str> = rows.iter().map(|r| r.method.as_str()).collect();
    methods.sort_unstable();
    methods.dedup();
    let header = std::iter::once("method".to_string())
        .chain(pairs.iter().map(|(a, b)| format!("{}_vs_{}", a.name(), b.name())))
        .collect();
    let out = methods
        .into_iter()
        .map(|m| {
            std::iter::once(m.to_string())
                .chain(pairs.iter().map(|&(a, b)| {
                    cell(
                        rows.iter()
                            .find(|r| r.method == m && ((r.mode_a, r.mode_b) == (a, b) || (r.mode_a, r.mode_b) == (b, a)))
                            .map(|r| r.nmi),
                    )
                }))
                .collect()
        })
        .collect();
    csv_bytes(header, out)
}

fn centralization_table(rows: &[CentralizationRow]) -> Result<Vec<u8>> {
    let header = ["mode", "cp_centralization", "p_value"].map(String::from).to_vec();
    let out = Mode::ALL
        .iter()
        .map(|&mode| {
            let r = rows.iter().find(|r| r.mode == mode);
            vec![
                mode.name().to_string(),
                cell(r.and_then(|r| r.cp_centralization)),
                cell(r.and_then(|r| r.p_value)),
            ]
        })
        .collect();
    csv_bytes(header, out)
}

/// Mean Sharpe ratio over windows; one row per holding period, one column
/// per `strategy_weighting`.
fn sharpe_table(rows: &[SharpeRow]) -> Result<Vec<u8>> {
    let mut sums: BTreeMap<(String, usize), (f64, usize)> = BTreeMap::new();
    let mut columns: Vec<String> = Vec::new();
    let mut max_h = 0;
    for r in rows {
        let col = format!("{}_{}", r.strategy, r.weighting);
        if !columns.contains(&col) {
            columns.push(col.clone());
        }
        let e = sums.entry((col, r.holding_period)).or_insert((0.0, 0));
        e.0 += r.sharpe;
        e.1 += 1;
        max_h = max_h.max(r.holding_period);
    }
    let header = std::iter::once("holding_period".to_string()).chain(columns.iter().cloned()).collect();
    let out = (1..=max_h)
        .map(|h| {
            std::iter::once(h.to_string())
                .chain(columns.iter().map(|c| cell(sums.get(&(c.clone(), h)).map(|(s, n)| s / *n as f64))))
                .collect()
        })
        .collect();
    csv_bytes(header, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_artifact_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let err = emit_report(dir.path(), dir.path()).unwrap_err();
        assert!(matches!(&err, Error::MissingArtifact(p) if p.ends_with(CORENESS_FILE)));
        assert!(err.to_string().contains(CORENESS_FILE));
    }

    #[test]
    fn frobenius_layout() {
        let rows = vec![
            CpSummaryRow { mode: Mode::Full, method: CpMethod::Rossa, frobenius: 1.5 },
            CpSummaryRow { mode: Mode::Market, method: CpMethod::Minres, frobenius: 2.0 },
        ];
        let text = String::from_utf8(frobenius_table(&rows).unwrap()).unwrap();
        assert_eq!(text, "mode,rossa,minres\nfull,1.5,\nmarket,,2\nsector,,\n");
    }

    #[test]
    fn sharpe_table_averages_windows() {
        let row = |window, h, sharpe| SharpeRow {
            window,
            strategy: "P_MKT".into(),
            weighting: "uniform".into(),
            holding_period: h,
            sharpe,
        };
        let rows = vec![row(0, 1, 1.0), row(0, 2, 2.0), row(1, 1, 3.0), row(1, 2, 4.0)];
        let text = String::from_utf8(sharpe_table(&rows).unwrap()).unwrap();
        assert_eq!(text, "holding_period,P_MKT_uniform\n1,2\n2,3\n");
    }
}
