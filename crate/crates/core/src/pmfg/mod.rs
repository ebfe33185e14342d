//! Planar Maximally Filtered Graph.
//!
//! Candidate pairs are visited by similarity, strongest first (ties by
//! `(i, j)`), and an edge is kept when the graph stays planar. Construction
//! stops once `3(N - 2)` edges are placed, which makes the result a maximal
//! planar graph and therefore connected.

pub mod planarity;

use nalgebra::DMatrix;

pub use crate::network::{Edge, WeightTransform, WeightedNetwork};
pub use planarity::{is_planar, test_planarity, Embedding, Planarity};

use crate::error::{Error, Result};

/// Insertion log of a PMFG build.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PmfgTrace {
    /// Edges in the order they were accepted.
    pub accepted: Vec<(usize, usize)>,
    /// Candidates refused because they would break planarity, in visit order,
    /// with the number of accepted edges at the time of refusal.
    pub rejected: Vec<((usize, usize), usize)>,
}

pub fn pmfg(labels: &[String], similarity: &DMatrix<f64>, transform: WeightTransform) -> Result<WeightedNetwork> {
    pmfg_traced(labels, similarity, transform).map(|(net, _)| net)
}

pub fn pmfg_traced(
    labels: &[String],
    similarity: &DMatrix<f64>,
    transform: WeightTransform,
) -> Result<(WeightedNetwork, PmfgTrace)> {
    let n = similarity.nrows();
    if !similarity.is_square() || labels.len() != n {
        return Err(Error::InvalidArgument("similarity must be square and match labels".into()));
    }
    if n < 3 {
        return Err(Error::InvalidArgument(format!("PMFG needs at least 3 nodes, got {n}")));
    }
    let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (similarity[(i, j)], similarity[(j, i)]);
            if !a.is_finite() {
                return Err(Error::Numeric(format!("non-finite similarity at ({i}, {j})")));
            }
            if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                return Err(Error::Validation(format!("similarity not symmetric at ({i}, {j})")));
            }
            pairs.push((a, i, j));
        }
    }
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0).then((x.1, x.2).cmp(&(y.1, y.2))));

    let target = 3 * (n - 2);
    let mut trace = PmfgTrace::default();
    let mut edges = Vec::with_capacity(target);
    for &(s, i, j) in &pairs {
        if trace.accepted.len() == target {
            break;
        }
        trace.accepted.push((i, j));
        // anything with at most 8 edges is planar
        if trace.accepted.len() > 8 && !test_planarity(n, &trace.accepted) {
            trace.accepted.pop();
            trace.rejected.push(((i, j), trace.accepted.len()));
            continue;
        }
        edges.push(Edge { i, j, weight: transform.apply(s), similarity: s });
    }
    let net = WeightedNetwork::new(labels.to_vec(), edges, transform)?;
    Ok((net, trace))
}
