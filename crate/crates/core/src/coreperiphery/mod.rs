//! Coreness scores and core-periphery diagnostics.
//!
//! Three detectors produce a score per node: the random-walk persistence
//! profile ([`rossa`]), the rank-one MINRES fit ([`minres`]) and the
//! sampled transition-profile quality ([`rombach`]). The remaining
//! functions compare a network against the ideal block core-periphery shape.

pub mod minres;
pub mod rombach;
pub mod rossa;

use std::io::Write;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use minres::{minres_coreness, MinresFit, DEFAULT_MINRES_MAX_ITER, DEFAULT_MINRES_TOL};
pub use rombach::{rombach_coreness, rombach_profile_values, DEFAULT_ROMBACH_SAMPLES};
pub use rossa::{cp_centralization, rossa_coreness, rossa_profile, Centralization, CorePeripheryProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CpMethod {
    Rossa,
    Minres,
    Rombach,
}

impl CpMethod {
    pub const ALL: [CpMethod; 3] = [CpMethod::Rossa, CpMethod::Rombach, CpMethod::Minres];

    pub fn name(self) -> &'static str {
        match self {
            CpMethod::Rossa => "rossa",
            CpMethod::Minres => "minres",
            CpMethod::Rombach => "rombach",
        }
    }
}

impl std::str::FromStr for CpMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CpMethod::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown core-periphery method '{s}'")))
    }
}

impl std::fmt::Display for CpMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorenessVector {
    pub method: CpMethod,
    pub scores: Vec<f64>,
}

impl CorenessVector {
    /// Node indices by descending score, ties broken by index.
    pub fn ranking(&self) -> Vec<usize> {
        descending_order(&self.scores)
    }

    /// Writes `ticker,method,score`.
    pub fn write_csv<W: Write>(&self, labels: &[String], writer: W) -> Result<()> {
        if labels.len() != self.scores.len() {
            return Err(Error::InvalidArgument("labels do not match scores".into()));
        }
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["ticker", "method", "score"])?;
        for (label, s) in labels.iter().zip(&self.scores) {
            w.write_record([label.as_str(), self.method.name(), &s.to_string()])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

pub(crate) fn descending_order(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order
}

/// Block matrix with ones on the core-core and core-periphery blocks (unit
/// diagonal in the core block) and zeros on the periphery-periphery block.
pub fn ideal_cp_matrix(n: usize, k: usize) -> Result<DMatrix<f64>> {
    if k == 0 || k >= n {
        return Err(Error::InvalidArgument(format!("core size {k} must satisfy 1 <= k < n = {n}")));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| if i < k || j < k { 1.0 } else { 0.0 }))
}

/// Default core size, `N / 4` (at least one node).
pub fn default_core_size(n: usize) -> usize {
    (n / 4).max(1)
}

/// `||P A P^T / max|A| - ideal||_F` with nodes ordered by descending coreness.
/// The diagonal is left out of the sum.
pub fn cp_fit_distance(adjacency: &DMatrix<f64>, coreness: &CorenessVector, k: usize) -> Result<f64> {
    let n = adjacency.nrows();
    if !adjacency.is_square() || coreness.scores.len() != n {
        return Err(Error::InvalidArgument("adjacency and coreness sizes differ".into()));
    }
    let ideal = ideal_cp_matrix(n, k)?;
    let scale = adjacency.amax();
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::Degenerate("adjacency has no nonzero entries".into()));
    }
    let order = coreness.ranking();
    let mut sum = 0.0;
    for (r, &i) in order.iter().enumerate() {
        for (c, &j) in order.iter().enumerate() {
            if r != c {
                let diff = adjacency[(i, j)] / scale - ideal[(r, c)];
                sum += diff * diff;
            }
        }
    }
    Ok(sum.sqrt())
}

pub fn cosine_similarity(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!("length mismatch {} vs {}", x.len(), y.len())));
    }
    let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let ny = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    if nx == 0.0 || ny == 0.0 {
        return Err(Error::InvalidArgument("cosine similarity of a zero vector".into()));
    }
    let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    Ok((dot / (nx * ny)).clamp(-1.0, 1.0))
}
