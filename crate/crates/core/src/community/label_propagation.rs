//! Asynchronous weighted label propagation.
//!
//! Each sweep visits nodes in a fresh seeded order; a node adopts the label
//! with the largest summed edge weight among its neighbours, keeping its own
//! label when that is among the best and otherwise choosing uniformly among
//! the tied winners. Sweeps stop once no node changes. A breadth-first pass
//! then splits any label whose members are not connected to each other.

use std::collections::{BTreeMap, VecDeque};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Partition;
use crate::error::Result;
use crate::network::WeightedNetwork;

const MAX_SWEEPS: usize = 10_000;

pub fn label_propagation(net: &WeightedNetwork, seed: u64) -> Result<Partition> {
    net.ensure_nonnegative()?;
    let n = net.n();
    let adj = net.neighbors();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels: Vec<usize> = (0..n).collect();
    let mut order: Vec<usize> = (0..n).collect();

    for _ in 0..MAX_SWEEPS {
        order.shuffle(&mut rng);
        let mut changed = false;
        for &v in &order {
            let Some(winners) = best_labels(&adj[v], &labels) else { continue };
            if winners.contains(&labels[v]) {
                continue;
            }
            labels[v] = *winners.choose(&mut rng).expect("nonempty winner set");
            changed = true;
        }
        if !changed {
            break;
        }
    }
    Ok(split_disconnected_labels(net, &labels))
}

/// Labels with maximal neighbour weight, ascending; `None` without neighbours.
fn best_labels(neighbors: &[(usize, f64)], labels: &[usize]) -> Option<Vec<usize>> {
    if neighbors.is_empty() {
        return None;
    }
    let mut support: BTreeMap<usize, f64> = BTreeMap::new();
    for &(u, w) in neighbors {
        *support.entry(labels[u]).or_insert(0.0) += w;
    }
    let top = support.values().copied().fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-12 * top.abs().max(1e-300);
    Some(support.into_iter().filter(|&(_, s)| s >= top - tol).map(|(l, _)| l).collect())
}

/// Gives each connected piece of every label group its own label.
pub fn split_disconnected_labels(net: &WeightedNetwork, labels: &[usize]) -> Partition {
    let adj = net.neighbors();
    let n = net.n();
    let mut piece = vec![usize::MAX; n];
    let mut next = 0;
    for s in 0..n {
        if piece[s] != usize::MAX {
            continue;
        }
        piece[s] = next;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &(u, _) in &adj[v] {
                if piece[u] == usize::MAX && labels[u] == labels[s] {
                    piece[u] = next;
                    queue.push_back(u);
                }
            }
        }
        next += 1;
    }
    Partition::from_labels(&piece)
}
