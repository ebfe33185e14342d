//! Divisive clustering by repeated removal of the highest-betweenness edge.
//!
//! Betweenness is recomputed after every removal. Ties go to the
//! lexicographically smallest `(i, j)`. Each time a component splits, the
//! new partition is scored with the modularity of the original network and
//! the best cut is returned together with the full split tree.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, VecDeque};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{modularity, Partition};
use crate::error::Result;
use crate::network::WeightedNetwork;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMode {
    /// Every edge has length one.
    #[default]
    Hops,
    /// Edge length `1 / w`; zero-weight edges are unusable.
    InverseWeight,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GirvanNewman {
    pub partition: Partition,
    pub q: f64,
    /// Edges in removal order.
    pub removed: Vec<(usize, usize)>,
    /// Every partition along the removal sequence with its modularity,
    /// starting from the connected components of the input.
    pub cuts: Vec<(Partition, f64)>,
    /// Split tree as nested lists with node labels at the leaves.
    pub dendrogram: Value,
}

/// Unnormalised shortest-path betweenness per edge `(i, j)`, `i < j`.
pub fn edge_betweenness(net: &WeightedNetwork, mode: DistanceMode) -> BTreeMap<(usize, usize), f64> {
    let g = Graph::new(net);
    let alive = vec![true; g.edges.len()];
    let scores = g.betweenness(&alive, mode);
    g.edges.iter().zip(scores).map(|(&(i, j, _), b)| ((i, j), b)).collect()
}

pub fn girvan_newman(net: &WeightedNetwork) -> Result<GirvanNewman> {
    let g = Graph::new(net);
    let n = net.n();
    let mut alive = vec![true; g.edges.len()];

    let start = Partition::from_labels(&g.components(&alive));
    let q0 = modularity(net, &start)?.q;
    let mut cuts = vec![(start.clone(), q0)];
    let mut best = 0;

    let mut tree = Tree::new(&start);
    let mut removed = Vec::with_capacity(g.edges.len());
    for _ in 0..g.edges.len() {
        let scores = g.betweenness(&alive, DistanceMode::Hops);
        let mut pick: Option<usize> = None;
        for e in (0..g.edges.len()).filter(|&e| alive[e]) {
            match pick {
                Some(p) if scores[e] <= scores[p] + 1e-9 * scores[p].abs().max(1.0) => {}
                _ => pick = Some(e),
            }
        }
        let e = pick.expect("an edge is still present");
        alive[e] = false;
        let (i, j, _) = g.edges[e];
        removed.push((i, j));
        if g.reachable(&alive, i, j) {
            continue;
        }
        let comps = g.components(&alive);
        tree.split(&comps, i, j);
        let p = Partition::from_labels(&comps);
        let q = modularity(net, &p)?.q;
        if q > cuts[best].1 + 1e-12 {
            best = cuts.len();
        }
        cuts.push((p, q));
    }
    let dendrogram = tree.to_json(&net.labels);
    let (partition, q) = cuts[best].clone();
    debug_assert_eq!(partition.len(), n);
    Ok(GirvanNewman { partition, q, removed, cuts, dendrogram })
}

struct Graph {
    n: usize,
    /// `(i, j, weight)` sorted by `(i, j)`.
    edges: Vec<(usize, usize, f64)>,
    /// `(neighbour, edge id)`.
    adj: Vec<Vec<(usize, usize)>>,
}

impl Graph {
    fn new(net: &WeightedNetwork) -> Self {
        let mut edges: Vec<_> = net.edges().iter().map(|e| (e.i, e.j, e.weight)).collect();
        edges.sort_by_key(|&(i, j, _)| (i, j));
        let mut adj = vec![Vec::new(); net.n()];
        for (id, &(i, j, _)) in edges.iter().enumerate() {
            adj[i].push((j, id));
            adj[j].push((i, id));
        }
        Graph { n: net.n(), edges, adj }
    }

    fn components(&self, alive: &[bool]) -> Vec<usize> {
        let mut comp = vec![usize::MAX; self.n];
        let mut next = 0;
        for s in 0..self.n {
            if comp[s] != usize::MAX {
                continue;
            }
            comp[s] = next;
            let mut queue = VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                for &(w, e) in &self.adj[v] {
                    if alive[e] && comp[w] == usize::MAX {
                        comp[w] = next;
                        queue.push_back(w);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    fn reachable(&self, alive: &[bool], from: usize, to: usize) -> bool {
        let mut seen = vec![false; self.n];
        seen[from] = true;
        let mut queue = VecDeque::from([from]);
        while let Some(v) = queue.pop_front() {
            if v == to {
                return true;
            }
            for &(w, e) in &self.adj[v] {
                if alive[e] && !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        false
    }

    /// Brandes accumulation over all sources, halved for undirected pairs.
    fn betweenness(&self, alive: &[bool], mode: DistanceMode) -> Vec<f64> {
        let n = self.n;
        let mut eb = vec![0.0; self.edges.len()];
        let mut sigma = vec![0.0; n];
        let mut delta = vec![0.0; n];
        let mut preds: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for s in 0..n {
            for v in 0..n {
                sigma[v] = 0.0;
                delta[v] = 0.0;
                preds[v].clear();
            }
            let stack = match mode {
                DistanceMode::Hops => self.bfs(s, alive, &mut sigma, &mut preds),
                DistanceMode::InverseWeight => self.dijkstra(s, alive, &mut sigma, &mut preds),
            };
            for &w in stack.iter().rev() {
                for &(v, e) in &preds[w] {
                    let c = sigma[v] / sigma[w] * (1.0 + delta[w]);
                    eb[e] += c;
                    delta[v] += c;
                }
            }
        }
        for b in &mut eb {
            *b /= 2.0;
        }
        eb
    }

    fn bfs(&self, s: usize, alive: &[bool], sigma: &mut [f64], preds: &mut [Vec<(usize, usize)>]) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n];
        dist[s] = 0;
        sigma[s] = 1.0;
        let mut order = Vec::new();
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &(w, e) in &self.adj[v] {
                if !alive[e] {
                    continue;
                }
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    preds[w].push((v, e));
                }
            }
        }
        order
    }

    fn dijkstra(&self, s: usize, alive: &[bool], sigma: &mut [f64], preds: &mut [Vec<(usize, usize)>]) -> Vec<usize> {
        let same = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
        let mut dist = vec![f64::INFINITY; self.n];
        let mut done = vec![false; self.n];
        dist[s] = 0.0;
        sigma[s] = 1.0;
        let mut order = Vec::new();
        let mut heap = BinaryHeap::from([Entry(0.0, s)]);
        while let Some(Entry(d, v)) = heap.pop() {
            if done[v] || d > dist[v] {
                continue;
            }
            done[v] = true;
            order.push(v);
            for &(w, e) in &self.adj[v] {
                let weight = self.edges[e].2;
                if !alive[e] || weight <= 0.0 || done[w] {
                    continue;
                }
                let nd = d + 1.0 / weight;
                if dist[w].is_finite() && same(nd, dist[w]) {
                    sigma[w] += sigma[v];
                    preds[w].push((v, e));
                } else if nd < dist[w] {
                    dist[w] = nd;
                    sigma[w] = sigma[v];
                    preds[w].clear();
                    preds[w].push((v, e));
                    heap.push(Entry(nd, w));
                }
            }
        }
        order
    }
}

/// Min-heap entry on distance.
struct Entry(f64, usize);

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

struct Tree {
    members: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    roots: Vec<usize>,
    /// Current leaf cluster of each node.
    leaf: Vec<usize>,
}

impl Tree {
    fn new(start: &Partition) -> Self {
        let members = start.communities();
        let k = members.len();
        let leaf = start.assignment().iter().map(|c| c - 1).collect();
        Tree { members, children: vec![Vec::new(); k], roots: (0..k).collect(), leaf }
    }

    /// The cluster holding `i` and `j` has just fallen apart into the
    /// components of `i` and `j`.
    fn split(&mut self, comps: &[usize], i: usize, j: usize) {
        let parent = self.leaf[i];
        let mut ids = [0; 2];
        for (slot, anchor) in [i, j].into_iter().enumerate() {
            let part: Vec<usize> = self.members[parent].iter().copied().filter(|&v| comps[v] == comps[anchor]).collect();
            let id = self.members.len();
            for &v in &part {
                self.leaf[v] = id;
            }
            self.members.push(part);
            self.children.push(Vec::new());
            ids[slot] = id;
        }
        self.children[parent] = ids.to_vec();
    }

    fn to_json(&self, labels: &[String]) -> Value {
        let roots: Vec<Value> = self.roots.iter().map(|&r| self.node_json(r, labels)).collect();
        if roots.len() == 1 {
            roots.into_iter().next().expect("one root")
        } else {
            Value::Array(roots)
        }
    }

    fn node_json(&self, id: usize, labels: &[String]) -> Value {
        if self.children[id].is_empty() {
            let leaves: Vec<Value> = self.members[id].iter().map(|&v| Value::String(labels[v].clone())).collect();
            return if leaves.len() == 1 { leaves.into_iter().next().expect("one leaf") } else { Value::Array(leaves) };
        }
        Value::Array(self.children[id].iter().map(|&c| self.node_json(c, labels)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn barbell() -> WeightedNetwork {
        let mut edges = Vec::new();
        for base in [0, 4] {
            for i in 0..4 {
                for j in (i + 1)..4 {
                    edges.push((base + i, base + j));
                }
            }
        }
        edges.push((3, 4));
        WeightedNetwork::from_unit_edges(8, &edges).unwrap()
    }

    #[test]
    fn betweenness_fixtures() {
        let path = WeightedNetwork::from_unit_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let b = edge_betweenness(&path, DistanceMode::Hops);
        assert_eq!(b[&(0, 1)], 2.0);
        assert_eq!(b[&(1, 2)], 2.0);
        let star = WeightedNetwork::from_unit_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        assert!(edge_betweenness(&star, DistanceMode::Hops).values().all(|&v| v == 3.0));
        let pair = WeightedNetwork::from_unit_edges(4, &[(0, 1), (2, 3)]).unwrap();
        assert!(edge_betweenness(&pair, DistanceMode::Hops).values().all(|&v| v == 1.0));
    }

    #[test]
    fn inverse_weight_prefers_strong_edges() {
        // 0-2 direct is length 1, 0-1-2 is length 0.5 + 0.5
        let net = WeightedNetwork::from_weighted_edges(3, &[(0, 1, 2.0), (1, 2, 2.0), (0, 2, 0.5)]).unwrap();
        let hops = edge_betweenness(&net, DistanceMode::Hops);
        assert_eq!(hops[&(0, 2)], 1.0);
        let inv = edge_betweenness(&net, DistanceMode::InverseWeight);
        assert_eq!(inv[&(0, 2)], 0.0);
        assert_eq!(inv[&(0, 1)], 2.0);
    }

    #[test]
    fn barbell_bridge_goes_first() {
        let gn = girvan_newman(&barbell()).unwrap();
        assert_eq!(gn.removed[0], (3, 4));
        assert_eq!(gn.partition, Partition::from_labels(&[0, 0, 0, 0, 1, 1, 1, 1]));
    }

    #[test]
    fn cycle_ties_break_lexicographically() {
        let c4 = WeightedNetwork::from_unit_edges(4, &[(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        let gn = girvan_newman(&c4).unwrap();
        assert_eq!(gn.removed[0], (0, 1));
    }

    #[test]
    fn two_triangles() {
        let net = WeightedNetwork::from_unit_edges(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap();
        let gn = girvan_newman(&net).unwrap();
        assert!((gn.q - 0.5).abs() < 1e-15);
        assert_eq!(gn.partition, Partition::from_labels(&[0, 0, 0, 1, 1, 1]));
        assert_eq!(gn.cuts.len(), 5);
    }

    #[test]
    fn dendrogram_nests_splits() {
        let net = WeightedNetwork::from_unit_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let gn = girvan_newman(&net).unwrap();
        // middle edge first, then the two outer ones
        assert_eq!(gn.removed[0], (1, 2));
        assert_eq!(gn.dendrogram, serde_json::json!([["0", "1"], ["2", "3"]]));
    }
}
