//! Correlation matrices, the Marchenko–Pastur reference spectrum and the
//! split of a correlation matrix into market, sector and random eigenmodes.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market_data::ReturnPanel;

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    pub labels: Vec<String>,
    pub values: DMatrix<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MpVariant {
    /// `(1 ± sqrt(1/Q))^2`
    #[default]
    Standard,
    /// `(1 ± sqrt(Q/2))^2`, an alternative edge formula kept for comparison.
    HalfQ,
}

impl std::str::FromStr for MpVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(MpVariant::Standard),
            "half_q" | "half-q" => Ok(MpVariant::HalfQ),
            other => Err(Error::InvalidArgument(format!("unknown MP variant `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MpBounds {
    pub q: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub variant: MpVariant,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// Column `a` pairs with `eigenvalues[a]`.
    pub eigenvectors: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeDecomposition {
    pub market: DMatrix<f64>,
    pub sector: DMatrix<f64>,
    pub random: DMatrix<f64>,
    pub k_sector: usize,
}

/// Pearson correlation between the rows of the panel. The diagonal is set to
/// exactly one and the matrix is exactly symmetric.
pub fn correlation_matrix(panel: &ReturnPanel) -> Result<CorrelationMatrix> {
    let (n, t) = (panel.n_stocks(), panel.n_days());
    if n < 2 || t < 2 {
        return Err(Error::InvalidArgument(format!("need N >= 2 and T >= 2, got N={n}, T={t}")));
    }
    let mut centered = panel.returns.clone();
    for i in 0..n {
        let mut row = centered.row_mut(i);
        let mean = row.mean();
        let scale = row.amax();
        row.add_scalar_mut(-mean);
        let norm = row.norm();
        // constant series leave only rounding noise after centering
        if scale == 0.0 || norm <= 1e-13 * scale * (t as f64).sqrt() {
            return Err(Error::ZeroVariance { ticker: panel.tickers[i].clone() });
        }
        row /= norm;
    }
    let gram = &centered * centered.transpose();
    let mut values = DMatrix::identity(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let c = gram[(i, j)].clamp(-1.0, 1.0);
            values[(i, j)] = c;
            values[(j, i)] = c;
        }
    }
    Ok(CorrelationMatrix { labels: panel.tickers.clone(), values })
}

pub fn mp_bounds(n: usize, t: usize, variant: MpVariant) -> Result<MpBounds> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need at least two stocks, got {n}")));
    }
    if t < n {
        return Err(Error::InvalidArgument(format!("Q = T/N must be >= 1 (T={t}, N={n})")));
    }
    let q = t as f64 / n as f64;
    let spread = match variant {
        MpVariant::Standard => (1.0 / q).sqrt(),
        MpVariant::HalfQ => (q / 2.0).sqrt(),
    };
    Ok(MpBounds {
        q,
        lambda_min: (1.0 - spread).powi(2),
        lambda_max: (1.0 + spread).powi(2),
        variant,
    })
}

/// Marchenko–Pastur eigenvalue density, zero outside `[lambda_min, lambda_max]`.
pub fn mp_density(lambda: f64, bounds: &MpBounds) -> Result<f64> {
    if lambda < bounds.lambda_min || lambda > bounds.lambda_max {
        return Ok(0.0);
    }
    if lambda <= 0.0 {
        return Err(Error::InvalidArgument(format!("density undefined at lambda = {lambda}")));
    }
    let radicand = (bounds.lambda_max - lambda) * (lambda - bounds.lambda_min);
    Ok(bounds.q * radicand.max(0.0).sqrt() / (2.0 * PI * lambda))
}

/// Symmetric eigendecomposition with eigenvalues sorted descending. Each
/// eigenvector is signed so that its largest-magnitude component (first one
/// on ties) is nonnegative.
pub fn eigendecompose(c: &CorrelationMatrix) -> Result<EigenDecomposition> {
    eigendecompose_matrix(&c.values)
}

pub fn eigendecompose_matrix(m: &DMatrix<f64>) -> Result<EigenDecomposition> {
    if !m.is_square() || m.nrows() == 0 {
        return Err(Error::InvalidArgument("matrix must be square and non-empty".into()));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("matrix has non-finite entries".into()));
    }
    let n = m.nrows();
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, 0)
        .ok_or_else(|| Error::Numeric("symmetric eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let mut eigenvectors = DMatrix::zeros(n, n);
    let mut eigenvalues = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        let mut v: DVector<f64> = eig.eigenvectors.column(src).into_owned();
        // first component within rounding of the largest magnitude
        let amax = v.amax();
        let pivot = v.iter().position(|x| x.abs() >= amax * (1.0 - 1e-10)).unwrap_or(0);
        if v[pivot] < 0.0 {
            v.neg_mut();
        }
        eigenvectors.set_column(dst, &v);
        eigenvalues.push(eig.eigenvalues[src]);
    }
    if eigenvalues.iter().any(|l| !l.is_finite()) {
        return Err(Error::Numeric("non-finite eigenvalue".into()));
    }
    Ok(EigenDecomposition { eigenvalues, eigenvectors })
}

impl EigenDecomposition {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `sum_{a in range} lambda_a u^a (u^a)^T`
    pub fn partial_sum(&self, range: std::ops::Range<usize>) -> DMatrix<f64> {
        let n = self.len();
        let mut out = DMatrix::zeros(n, n);
        for a in range {
            let u = self.eigenvectors.column(a);
            out.ger(self.eigenvalues[a], &u, &u, 1.0);
        }
        out
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.partial_sum(0..self.len())
    }

    /// Writes `index,eigenvalue,above_mp_max`.
    pub fn write_spectrum_csv<W: Write>(&self, bounds: &MpBounds, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["index", "eigenvalue", "above_mp_max"])?;
        for (a, l) in self.eigenvalues.iter().enumerate() {
            w.write_record([a.to_string(), l.to_string(), (*l > bounds.lambda_max).to_string()])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

/// Number of eigenvalues other than the largest lying above `lambda_max`,
/// unless `override_k` pins it.
pub fn select_sector_count(
    eig: &EigenDecomposition,
    bounds: &MpBounds,
    override_k: Option<usize>,
) -> Result<usize> {
    if let Some(k) = override_k {
        if k >= eig.len() {
            return Err(Error::InvalidArgument(format!(
                "sector count override {k} must be below N = {}",
                eig.len()
            )));
        }
        return Ok(k);
    }
    Ok(eig.eigenvalues.iter().skip(1).filter(|&&l| l > bounds.lambda_max).count())
}

pub fn decompose_modes(eig: &EigenDecomposition, k_sector: usize) -> Result<ModeDecomposition> {
    let n = eig.len();
    if n == 0 || k_sector > n - 1 {
        return Err(Error::InvalidArgument(format!("k_sector {k_sector} outside 0..={}", n.saturating_sub(1))));
    }
    Ok(ModeDecomposition {
        market: eig.partial_sum(0..1),
        sector: eig.partial_sum(1..1 + k_sector),
        random: eig.partial_sum(1 + k_sector..n),
        k_sector,
    })
}

impl ModeDecomposition {
    pub fn total(&self) -> DMatrix<f64> {
        &self.market + &self.sector + &self.random
    }
}
