//! Louvain modularity optimisation.
//!
//! Local moves visit nodes in an order reshuffled every sweep and move a node
//! only when the best neighbouring community raises `Q`. Communities are
//! then merged into super-nodes whose self-loops keep the internal weight
//! `W_UU`, and the two phases repeat until a level makes no move.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{modularity_with_resolution, Partition};
use crate::error::{Error, Result};
use crate::network::WeightedNetwork;

/// A move must raise `Q` by more than this to be taken.
const MIN_GAIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Louvain {
    pub partition: Partition,
    /// Modularity accumulated from the accepted moves.
    pub q: f64,
    pub levels: usize,
}

/// One accepted local move.
#[derive(Debug, Clone, PartialEq)]
pub struct LouvainStep {
    pub level: usize,
    pub delta_q: f64,
    /// Node-level partition right after the move.
    pub partition: Partition,
}

pub fn louvain(net: &WeightedNetwork, seed: u64, resolution: f64) -> Result<Louvain> {
    run(net, seed, resolution, None)
}

pub fn louvain_traced(net: &WeightedNetwork, seed: u64, resolution: f64) -> Result<(Louvain, Vec<LouvainStep>)> {
    let mut trace = Vec::new();
    let result = run(net, seed, resolution, Some(&mut trace))?;
    Ok((result, trace))
}

struct Level {
    adj: Vec<Vec<(usize, f64)>>,
    loops: Vec<f64>,
    strength: Vec<f64>,
}

fn run(net: &WeightedNetwork, seed: u64, resolution: f64, mut trace: Option<&mut Vec<LouvainStep>>) -> Result<Louvain> {
    if !(resolution > 0.0 && resolution.is_finite()) {
        return Err(Error::InvalidArgument(format!("resolution must be positive, got {resolution}")));
    }
    let n = net.n();
    // validates weights and rejects an empty edge set
    let mut q = modularity_with_resolution(net, &Partition::singletons(n), resolution)?.q;
    let two_m = 2.0 * net.total_weight();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let adj = net.neighbors();
    let strength = net.strengths();
    let mut level = Level { adj, loops: vec![0.0; n], strength };
    // level node of every original node
    let mut membership: Vec<usize> = (0..n).collect();
    let mut depth = 0;

    loop {
        let size = level.adj.len();
        let mut comm: Vec<usize> = (0..size).collect();
        let mut tot = level.strength.clone();
        let mut w_to = vec![0.0; size];
        let mut touched: Vec<usize> = Vec::new();
        let mut seen = vec![false; size];
        let mut order: Vec<usize> = (0..size).collect();
        let mut moved_any = false;

        loop {
            order.shuffle(&mut rng);
            let mut moved = false;
            for &i in &order {
                let ki = level.strength[i];
                if ki == 0.0 {
                    continue;
                }
                let home = comm[i];
                for &(j, w) in &level.adj[i] {
                    let c = comm[j];
                    if !seen[c] {
                        seen[c] = true;
                        touched.push(c);
                    }
                    w_to[c] += w;
                }
                tot[home] -= ki;
                let gain = |c: usize, w: f64| w - resolution * tot[c] * ki / two_m;
                let stay = gain(home, w_to[home]);
                let mut best = (home, stay);
                touched.sort_unstable();
                for &c in &touched {
                    let g = gain(c, w_to[c]);
                    if g > best.1 {
                        best = (c, g);
                    }
                }
                let delta = (best.1 - stay) / (two_m / 2.0);
                let target = if delta > MIN_GAIN { best.0 } else { home };
                tot[target] += ki;
                for &c in &touched {
                    w_to[c] = 0.0;
                    seen[c] = false;
                }
                touched.clear();
                if target != home {
                    comm[i] = target;
                    q += delta;
                    moved = true;
                    if let Some(t) = trace.as_deref_mut() {
                        let flat: Vec<usize> = membership.iter().map(|&m| comm[m]).collect();
                        t.push(LouvainStep { level: depth, delta_q: delta, partition: Partition::from_labels(&flat) });
                    }
                }
            }
            if !moved {
                break;
            }
            moved_any = true;
        }

        if !moved_any {
            break;
        }
        // renumber communities and collapse them
        let canon = Partition::from_labels(&comm);
        let k = canon.n_communities();
        let group: Vec<usize> = canon.assignment().iter().map(|c| c - 1).collect();
        for m in &mut membership {
            *m = group[*m];
        }
        let mut loops = vec![0.0; k];
        let mut dense: Vec<std::collections::BTreeMap<usize, f64>> = vec![Default::default(); k];
        for i in 0..size {
            let u = group[i];
            loops[u] += level.loops[i];
            for &(j, w) in &level.adj[i] {
                let v = group[j];
                if u == v {
                    loops[u] += w;
                } else {
                    *dense[u].entry(v).or_insert(0.0) += w;
                }
            }
        }
        let adj: Vec<Vec<(usize, f64)>> = dense.into_iter().map(|m| m.into_iter().collect()).collect();
        let strength = (0..k).map(|u| loops[u] + adj[u].iter().map(|e| e.1).sum::<f64>()).collect();
        level = Level { adj, loops, strength };
        depth += 1;
    }

    Ok(Louvain { partition: Partition::from_labels(&membership), q, levels: depth })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::community::modularity;
    use crate::community::tests::two_cliques;

    #[test]
    fn recovers_bridged_cliques() {
        let net = two_cliques(5, true);
        let r = louvain(&net, 1, 1.0).unwrap();
        assert_eq!(r.partition, Partition::from_labels(&[0, 0, 0, 0, 0, 1, 1, 1, 1, 1]));
        assert!((r.q - modularity(&net, &r.partition).unwrap().q).abs() < 1e-10);
    }

    #[test]
    fn single_edge_merges() {
        let net = WeightedNetwork::from_unit_edges(2, &[(0, 1)]).unwrap();
        let r = louvain(&net, 0, 1.0).unwrap();
        assert_eq!(r.partition.n_communities(), 1);
        assert!(r.q.abs() < 1e-15);
    }

    #[test]
    fn deterministic_per_seed() {
        let net = two_cliques(6, true);
        assert_eq!(louvain(&net, 5, 1.0).unwrap(), louvain(&net, 5, 1.0).unwrap());
    }

    #[test]
    fn every_move_raises_recomputed_q() {
        let net = WeightedNetwork::from_weighted_edges(
            8,
            &[(0, 1, 1.0), (1, 2, 2.0), (0, 2, 0.5), (2, 3, 0.1), (3, 4, 1.5), (4, 5, 1.0), (3, 5, 0.7), (5, 6, 0.2), (6, 7, 2.0)],
        )
        .unwrap();
        let (r, steps) = louvain_traced(&net, 3, 1.0).unwrap();
        assert!(!steps.is_empty());
        let mut prev = modularity(&net, &Partition::singletons(8)).unwrap().q;
        for s in &steps {
            let now = modularity(&net, &s.partition).unwrap().q;
            assert!(now > prev, "{now} <= {prev}");
            assert!((now - prev - s.delta_q).abs() < 1e-12);
            prev = now;
        }
        assert!((prev - r.q).abs() < 1e-12);
    }

    #[test]
    fn isolated_nodes_stay_alone() {
        let net = WeightedNetwork::from_unit_edges(4, &[(0, 1)]).unwrap();
        let r = louvain(&net, 2, 1.0).unwrap();
        assert_eq!(r.partition.n_communities(), 3);
    }

    #[test]
    fn rejects_bad_resolution_and_empty_graph() {
        let net = two_cliques(3, true);
        assert!(louvain(&net, 0, 0.0).is_err());
        assert!(louvain(&WeightedNetwork::from_unit_edges(3, &[]).unwrap(), 0, 1.0).is_err());
    }
}
