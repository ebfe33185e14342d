//! Persistence-probability profile of a stationary random walk.
//!
//! For a node set `S`, `alpha_S = sum_{i,j in S} a_ij / sum_{i in S} s_i`
//! (ordered pairs in the numerator, strengths in the denominator). The
//! profile starts from the weakest node and greedily adds whichever node
//! keeps `alpha` smallest; the value at which a node joins is its coreness.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{CorenessVector, CpMethod};
use crate::error::{Error, Result};
use crate::network::WeightedNetwork;

const TIE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorePeripheryProfile {
    /// Nodes in the order the greedy expansion absorbed them.
    pub order: Vec<usize>,
    /// `alpha_1 ..= alpha_{n-1}`; the full set always has `alpha_n = 1`.
    pub alphas: Vec<f64>,
    /// `None` for networks with fewer than three nodes.
    pub cp_centralization: Option<Centralization>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Centralization {
    /// Unclamped `1 - 2/(n-2) * sum alpha_k`.
    pub raw: f64,
}

impl Centralization {
    pub fn reported(self) -> f64 {
        self.raw.clamp(0.0, 1.0)
    }

    /// Outside `[0, 1]` by more than rounding. Cannot happen for a greedy profile.
    pub fn is_out_of_range(self) -> bool {
        !(-1e-12..=1.0 + 1e-12).contains(&self.raw)
    }
}

pub fn cp_centralization(alphas: &[f64], n: usize) -> Result<Centralization> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("cp-centralization needs n >= 3, got {n}")));
    }
    if alphas.len() != n - 1 {
        return Err(Error::InvalidArgument(format!("expected {} alphas, got {}", n - 1, alphas.len())));
    }
    if let Some(a) = alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
        return Err(Error::InvalidArgument(format!("alpha {a} outside [0, 1]")));
    }
    let sum: f64 = alphas.iter().sum();
    Ok(Centralization { raw: 1.0 - 2.0 / (n as f64 - 2.0) * sum })
}

pub fn rossa_profile(net: &WeightedNetwork) -> Result<CorePeripheryProfile> {
    let (order, alphas) = greedy_profile(net)?;
    let n = net.n();
    let alphas: Vec<f64> = alphas[..n - 1].to_vec();
    let cp_centralization = if n >= 3 { Some(cp_centralization(&alphas, n)?) } else { None };
    Ok(CorePeripheryProfile { order, alphas, cp_centralization })
}

/// Coreness per node: the alpha at which it joined (the last node gets 1).
pub fn rossa_coreness(net: &WeightedNetwork) -> Result<CorenessVector> {
    let (order, alphas) = greedy_profile(net)?;
    let mut scores = vec![0.0; net.n()];
    for (node, alpha) in order.iter().zip(&alphas) {
        scores[*node] = *alpha;
    }
    Ok(CorenessVector { method: CpMethod::Rossa, scores })
}

/// Returns the absorption order and all `n` alphas.
fn greedy_profile(net: &WeightedNetwork) -> Result<(Vec<usize>, Vec<f64>)> {
    let n = net.n();
    if n < 2 {
        return Err(Error::InvalidArgument("profile needs at least two nodes".into()));
    }
    net.ensure_nonnegative()?;
    if !net.is_connected() {
        return Err(Error::Disconnected);
    }
    let adj = net.neighbors();
    let strength = net.strengths();

    let first = (0..n)
        .min_by(|&a, &b| strength[a].total_cmp(&strength[b]).then(a.cmp(&b)))
        .expect("n >= 2");
    let mut in_set = vec![false; n];
    // weight from each node into the current set
    let mut link = vec![0.0; n];
    let mut internal = 0.0; // ordered-pair sum
    let mut total = 0.0;

    let mut order = Vec::with_capacity(n);
    let mut alphas = Vec::with_capacity(n);
    let add = |v: usize, in_set: &mut Vec<bool>, link: &mut Vec<f64>, internal: &mut f64, total: &mut f64| {
        in_set[v] = true;
        *internal += 2.0 * link[v];
        *total += strength[v];
        for &(w, a) in &adj[v] {
            link[w] += a;
        }
    };
    add(first, &mut in_set, &mut link, &mut internal, &mut total);
    order.push(first);
    alphas.push(0.0);

    while order.len() < n {
        let mut best: Option<(usize, f64)> = None;
        for j in (0..n).filter(|&j| !in_set[j]) {
            let den = total + strength[j];
            let alpha = if den > 0.0 { (internal + 2.0 * link[j]) / den } else { 0.0 };
            best = match best {
                None => Some((j, alpha)),
                Some((b, ba)) => {
                    let better = alpha < ba - TIE_EPS
                        || ((alpha - ba).abs() <= TIE_EPS && strength[j] < strength[b]);
                    if better {
                        Some((j, alpha))
                    } else {
                        Some((b, ba))
                    }
                }
            };
        }
        let (v, alpha) = best.expect("at least one node outside the set");
        add(v, &mut in_set, &mut link, &mut internal, &mut total);
        order.push(v);
        alphas.push(alpha);
    }
    if let Some(last) = alphas.last_mut() {
        *last = 1.0;
    }
    Ok((order, alphas))
}

impl CorePeripheryProfile {
    /// Writes `rank,node,alpha` for all n nodes (the last row has alpha 1).
    pub fn write_csv<W: Write>(&self, labels: &[String], writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["rank", "node", "alpha"])?;
        for (rank, node) in self.order.iter().enumerate() {
            let alpha = self.alphas.get(rank).copied().unwrap_or(1.0);
            let label = labels.get(*node).map(String::as_str).unwrap_or("");
            w.write_record([(rank + 1).to_string(), label.to_string(), alpha.to_string()])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}
