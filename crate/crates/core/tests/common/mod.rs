//! Reference implementations used as oracles by the integration tests. They
//! share no code with the library beyond its plain data types.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use specnet::network::WeightedNetwork;

pub type WEdge = (usize, usize, f64);

/// `Q = 1/(2m) sum_ij [A_ij - k_i k_j / (2m)] delta(c_i, c_j)` from an edge list.
pub fn modularity_oracle(n: usize, edges: &[WEdge], labels: &[usize]) -> f64 {
    let mut k = vec![0.0; n];
    let mut m = 0.0;
    for &(i, j, w) in edges {
        k[i] += w;
        k[j] += w;
        m += w;
    }
    let mut q = 0.0;
    for &(i, j, w) in edges {
        if labels[i] == labels[j] {
            q += 2.0 * w;
        }
    }
    for i in 0..n {
        for j in 0..n {
            if labels[i] == labels[j] {
                q -= k[i] * k[j] / (2.0 * m);
            }
        }
    }
    q / (2.0 * m)
}

/// Maximum modularity over every partition of `n <= 10` nodes, by walking
/// restricted growth strings.
pub fn best_modularity(n: usize, edges: &[WEdge]) -> (f64, Vec<usize>) {
    assert!(n <= 10, "exhaustive search only for small graphs");
    let mut labels = vec![0usize; n];
    let mut best = (f64::NEG_INFINITY, labels.clone());
    fn walk(pos: usize, max: usize, labels: &mut Vec<usize>, n: usize, edges: &[WEdge], best: &mut (f64, Vec<usize>)) {
        if pos == n {
            let q = modularity_oracle(n, edges, labels);
            if q > best.0 {
                *best = (q, labels.clone());
            }
            return;
        }
        for c in 0..=max + 1 {
            labels[pos] = c;
            walk(pos + 1, max.max(c), labels, n, edges, best);
        }
    }
    if n > 0 {
        labels[0] = 0;
        walk(1, 0, &mut labels, n, edges, &mut best);
    }
    best
}

/// Maximum spanning forest edges, Kruskal with union-find.
pub fn max_spanning_tree(n: usize, weighted: &[WEdge]) -> Vec<(usize, usize)> {
    let mut order: Vec<&WEdge> = weighted.iter().collect();
    order.sort_by(|a, b| b.2.total_cmp(&a.2));
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut tree = Vec::new();
    for &&(i, j, _) in &order {
        let (a, b) = (find(&mut parent, i), find(&mut parent, j));
        if a != b {
            parent[a] = b;
            tree.push((i.min(j), i.max(j)));
        }
    }
    tree
}

/// Erdos-Renyi graph with weights in `[0.1, 1)`; at least one edge.
pub fn random_weighted_graph(n: usize, p: f64, seed: u64) -> Vec<WEdge> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.gen_bool(p) {
                    edges.push((i, j, rng.gen_range(0.1..1.0)));
                }
            }
        }
        if !edges.is_empty() {
            return edges;
        }
    }
}

/// Connected random graph: a random spanning tree plus extra edges.
pub fn random_connected_graph(n: usize, extra: f64, seed: u64) -> WeightedNetwork {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = std::collections::BTreeSet::new();
    for v in 1..n {
        let u = rng.gen_range(0..v);
        edges.insert((u, v));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen_bool(extra) {
                edges.insert((i, j));
            }
        }
    }
    let weighted: Vec<WEdge> = edges.into_iter().map(|(i, j)| (i, j, rng.gen_range(0.1..1.0))).collect();
    WeightedNetwork::from_weighted_edges(n, &weighted).unwrap()
}

pub fn network(n: usize, edges: &[WEdge]) -> WeightedNetwork {
    WeightedNetwork::from_weighted_edges(n, edges).unwrap()
}

pub fn complete_edges(n: usize) -> Vec<WEdge> {
    (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j, 1.0))).collect()
}

/// Two cliques of `size` nodes joined by one unit edge between node 0 and node `size`.
pub fn bridged_cliques(size: usize) -> Vec<WEdge> {
    let mut edges = complete_edges(size);
    edges.extend(complete_edges(size).into_iter().map(|(i, j, w)| (i + size, j + size, w)));
    edges.push((0, size, 1.0));
    edges
}
