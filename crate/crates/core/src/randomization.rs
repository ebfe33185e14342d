//! Degree-preserving null models and the cp-centralization significance test.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coreperiphery::rossa_profile;
use crate::error::{Error, Result};
use crate::network::{Edge, WeightedNetwork};
use crate::seed::derive_seed;

pub const DEFAULT_SWAP_FACTOR: usize = 10;
pub const DEFAULT_NULL_SAMPLES: usize = 100;
/// Extra draws allowed when a null network comes out disconnected.
pub const MAX_REDRAWS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct Randomized {
    pub network: WeightedNetwork,
    pub accepted_swaps: usize,
    pub attempts: usize,
    /// The attempt budget ran out before the requested number of swaps.
    pub saturated: bool,
}

/// Double-edge swaps `(a,b),(c,d) -> (a,d),(c,b)` or `(a,c),(b,d)`; each new
/// edge keeps the weight of the old edge whose first endpoint it retains.
/// Swaps that would create a self-loop or a repeated edge are rejected.
pub fn degree_preserving_randomize(net: &WeightedNetwork, seed: u64, swap_factor: usize) -> Result<Randomized> {
    let m = net.edge_count();
    if m < 2 {
        return Err(Error::InvalidArgument(format!("need at least two edges to swap, got {m}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: Vec<Edge> = net.edges().to_vec();
    let mut present: HashSet<(usize, usize)> = edges.iter().map(|e| (e.i, e.j)).collect();
    let key = |a: usize, b: usize| (a.min(b), a.max(b));

    let target = swap_factor * m;
    let budget = 100 * m;
    let (mut accepted, mut attempts) = (0, 0);
    while accepted < target && attempts < budget {
        attempts += 1;
        let x = rng.gen_range(0..m);
        let y = rng.gen_range(0..m - 1);
        let y = if y >= x { y + 1 } else { y };
        let (a, b) = (edges[x].i, edges[x].j);
        let (c, d) = if rng.gen_bool(0.5) { (edges[y].i, edges[y].j) } else { (edges[y].j, edges[y].i) };
        // (a, b), (c, d) -> (a, d), (c, b)
        if a == d || c == b {
            continue;
        }
        let (e1, e2) = (key(a, d), key(c, b));
        if present.contains(&e1) || present.contains(&e2) {
            continue;
        }
        present.remove(&key(a, b));
        present.remove(&key(c, d));
        present.insert(e1);
        present.insert(e2);
        edges[x].i = e1.0;
        edges[x].j = e1.1;
        edges[y].i = e2.0;
        edges[y].j = e2.1;
        accepted += 1;
    }
    let network = WeightedNetwork::new(net.labels.clone(), edges, net.transform)?;
    debug_assert_eq!(network.degrees(), net.degrees());
    Ok(Randomized { network, accepted_swaps: accepted, attempts, saturated: accepted < target })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceResult {
    pub observed: f64,
    pub p_value: f64,
    pub null_values: Vec<f64>,
    /// Samples dropped because every redraw was disconnected.
    pub skipped: usize,
    /// Null samples whose swap budget ran out.
    pub saturated: usize,
}

impl SignificanceResult {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Fraction of null values strictly greater than the observed value.
pub fn p_value(observed: f64, null_values: &[f64]) -> Result<f64> {
    if null_values.is_empty() {
        return Err(Error::InvalidArgument("empty null distribution".into()));
    }
    let above = null_values.iter().filter(|&&v| v > observed).count();
    Ok(above as f64 / null_values.len() as f64)
}

/// Sample `k` uses seeds derived from `(derive_seed(seed, k), attempt)`.
pub fn cp_significance(net: &WeightedNetwork, n_rand: usize, seed: u64, swap_factor: usize) -> Result<SignificanceResult> {
    if n_rand == 0 {
        return Err(Error::InvalidArgument("n_rand must be at least 1".into()));
    }
    let observed = observed_centralization(net)?;
    let samples: Vec<Result<Option<(f64, bool)>>> = (0..n_rand as u64)
        .into_par_iter()
        .map(|k| {
            let sample_seed = derive_seed(seed, k);
            for attempt in 0..=MAX_REDRAWS as u64 {
                let r = degree_preserving_randomize(net, derive_seed(sample_seed, attempt), swap_factor)?;
                if !r.network.is_connected() {
                    continue;
                }
                let c = observed_centralization(&r.network)?;
                return Ok(Some((c, r.saturated)));
            }
            Ok(None)
        })
        .collect();

    let mut null_values = Vec::with_capacity(n_rand);
    let (mut skipped, mut saturated) = (0, 0);
    for s in samples {
        match s? {
            Some((c, sat)) => {
                null_values.push(c);
                saturated += usize::from(sat);
            }
            None => skipped += 1,
        }
    }
    if 2 * null_values.len() < n_rand {
        return Err(Error::Degenerate(format!(
            "only {} of {n_rand} null networks were connected",
            null_values.len()
        )));
    }
    let p_value = p_value(observed, &null_values)?;
    Ok(SignificanceResult { observed, p_value, null_values, skipped, saturated })
}

fn observed_centralization(net: &WeightedNetwork) -> Result<f64> {
    rossa_profile(net)?
        .cp_centralization
        .map(|c| c.raw)
        .ok_or_else(|| Error::InvalidArgument("cp-centralization needs at least three nodes".into()))
}
