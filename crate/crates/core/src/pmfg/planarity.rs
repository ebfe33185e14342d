//! Left-Right planarity test (Brandes' formulation of de Fraysseix and
//! Rosenstiehl's criterion), O(n + m) per call.
//!
//! A planar answer carries a combinatorial embedding (a rotation system);
//! a non-planar answer can carry an edge-minimal non-planar subgraph, which
//! is a subdivision of K5 or K3,3.

use std::collections::HashMap;

type EdgeId = usize;

const NONE: usize = usize::MAX;

/// Clockwise neighbour order around every node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Embedding {
    pub rotation: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Planarity {
    Planar(Embedding),
    /// Edges of a Kuratowski subdivision.
    NonPlanar(Vec<(usize, usize)>),
}

impl Planarity {
    pub fn is_planar(&self) -> bool {
        matches!(self, Planarity::Planar(_))
    }
}

/// Full test with a witness either way.
pub fn is_planar(n: usize, edges: &[(usize, usize)]) -> Planarity {
    match LrState::new(n, edges).run(true) {
        Some(embedding) => Planarity::Planar(embedding.expect("embedding requested")),
        None => Planarity::NonPlanar(kuratowski_subgraph(n, edges)),
    }
}

/// Yes/no answer only; this is the hot path for PMFG construction.
pub fn test_planarity(n: usize, edges: &[(usize, usize)]) -> bool {
    LrState::new(n, edges).run(false).is_some()
}

/// Deletes every edge whose removal keeps the graph non-planar. What is left
/// is minimal non-planar, hence a Kuratowski subdivision. O(m) planarity tests.
fn kuratowski_subgraph(n: usize, edges: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let mut kept: Vec<(usize, usize)> = edges.to_vec();
    let mut idx = 0;
    while idx < kept.len() {
        let mut trial = kept.clone();
        trial.remove(idx);
        if test_planarity(n, &trial) {
            idx += 1;
        } else {
            kept = trial;
        }
    }
    kept
}

#[derive(Debug, Clone, Copy, Default)]
struct Interval {
    low: Option<EdgeId>,
    high: Option<EdgeId>,
}

impl Interval {
    fn is_empty(&self) -> bool {
        self.low.is_none() && self.high.is_none()
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct ConflictPair {
    left: Interval,
    right: Interval,
}

impl ConflictPair {
    fn swap(&mut self) {
        std::mem::swap(&mut self.left, &mut self.right);
    }
}

struct LrState {
    n: usize,
    /// (neighbour, undirected edge id)
    adj: Vec<Vec<(usize, EdgeId)>>,
    m: usize,
    height: Vec<usize>,
    parent_edge: Vec<Option<EdgeId>>,
    roots: Vec<usize>,
    oriented: Vec<bool>,
    src: Vec<usize>,
    dst: Vec<usize>,
    out: Vec<Vec<EdgeId>>,
    lowpt: Vec<usize>,
    lowpt2: Vec<usize>,
    nesting_depth: Vec<i64>,
    ordered: Vec<Vec<EdgeId>>,
    reference: Vec<Option<EdgeId>>,
    side: Vec<i64>,
    stack: Vec<ConflictPair>,
    stack_bottom: Vec<usize>,
    lowpt_edge: Vec<Option<EdgeId>>,
}

impl LrState {
    fn new(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut adj = vec![Vec::new(); n];
        let mut m = 0;
        for &(u, v) in edges {
            if u == v {
                continue;
            }
            adj[u].push((v, m));
            adj[v].push((u, m));
            m += 1;
        }
        Self {
            n,
            adj,
            m,
            height: vec![NONE; n],
            parent_edge: vec![None; n],
            roots: Vec::new(),
            oriented: vec![false; m],
            src: vec![NONE; m],
            dst: vec![NONE; m],
            out: vec![Vec::new(); n],
            lowpt: vec![0; m],
            lowpt2: vec![0; m],
            nesting_depth: vec![0; m],
            ordered: vec![Vec::new(); n],
            reference: vec![None; m],
            side: vec![1; m],
            stack: Vec::new(),
            stack_bottom: vec![0; m],
            lowpt_edge: vec![None; m],
        }
    }

    /// `None` when non-planar; `Some(None)` when planar and no embedding was asked for.
    fn run(mut self, embed: bool) -> Option<Option<Embedding>> {
        if self.n > 2 && self.m > 3 * self.n - 6 {
            return None;
        }
        for v in 0..self.n {
            if self.height[v] == NONE {
                self.height[v] = 0;
                self.roots.push(v);
                self.orient(v);
            }
        }
        for v in 0..self.n {
            let mut out = self.out[v].clone();
            out.sort_by_key(|&e| self.nesting_depth[e]);
            self.ordered[v] = out;
        }
        for r in self.roots.clone() {
            if !self.test(r) {
                return None;
            }
        }
        if !embed {
            return Some(None);
        }
        Some(Some(self.embed()))
    }

    fn orient(&mut self, v: usize) {
        let e = self.parent_edge[v];
        for k in 0..self.adj[v].len() {
            let (w, vw) = self.adj[v][k];
            if self.oriented[vw] {
                continue;
            }
            self.oriented[vw] = true;
            self.src[vw] = v;
            self.dst[vw] = w;
            self.out[v].push(vw);
            self.lowpt[vw] = self.height[v];
            self.lowpt2[vw] = self.height[v];
            if self.height[w] == NONE {
                // tree edge
                self.parent_edge[w] = Some(vw);
                self.height[w] = self.height[v] + 1;
                self.orient(w);
            } else {
                // back edge
                self.lowpt[vw] = self.height[w];
            }
            self.nesting_depth[vw] = 2 * self.lowpt[vw] as i64;
            if self.lowpt2[vw] < self.height[v] {
                // chordal
                self.nesting_depth[vw] += 1;
            }
            if let Some(e) = e {
                if self.lowpt[vw] < self.lowpt[e] {
                    self.lowpt2[e] = self.lowpt[e].min(self.lowpt2[vw]);
                    self.lowpt[e] = self.lowpt[vw];
                } else if self.lowpt[vw] > self.lowpt[e] {
                    self.lowpt2[e] = self.lowpt2[e].min(self.lowpt[vw]);
                } else {
                    self.lowpt2[e] = self.lowpt2[e].min(self.lowpt2[vw]);
                }
            }
        }
    }

    fn conflicting(&self, iv: &Interval, b: EdgeId) -> bool {
        match iv.high {
            Some(h) if !iv.is_empty() => self.lowpt[h] > self.lowpt[b],
            _ => false,
        }
    }

    fn lowest(&self, p: &ConflictPair) -> usize {
        match (p.left.low, p.right.low) {
            (None, Some(r)) => self.lowpt[r],
            (Some(l), None) => self.lowpt[l],
            (Some(l), Some(r)) => self.lowpt[l].min(self.lowpt[r]),
            (None, None) => unreachable!("empty conflict pair on stack"),
        }
    }

    fn test(&mut self, v: usize) -> bool {
        let e = self.parent_edge[v];
        for k in 0..self.ordered[v].len() {
            let ei = self.ordered[v][k];
            let w = self.dst[ei];
            self.stack_bottom[ei] = self.stack.len();
            if self.parent_edge[w] == Some(ei) {
                if !self.test(w) {
                    return false;
                }
            } else {
                self.lowpt_edge[ei] = Some(ei);
                self.stack.push(ConflictPair {
                    left: Interval::default(),
                    right: Interval { low: Some(ei), high: Some(ei) },
                });
            }
            if self.lowpt[ei] < self.height[v] {
                let e = e.expect("return edge below the root");
                if k == 0 {
                    self.lowpt_edge[e] = self.lowpt_edge[ei];
                } else if !self.add_constraints(ei, e) {
                    return false;
                }
            }
        }
        if let Some(e) = e {
            self.remove_back_edges(e);
        }
        true
    }

    fn add_constraints(&mut self, ei: EdgeId, e: EdgeId) -> bool {
        let mut p = ConflictPair::default();
        // merge return edges of ei into p.right
        loop {
            let mut q = self.stack.pop().expect("conflict stack underflow");
            if !q.left.is_empty() {
                q.swap();
            }
            if !q.left.is_empty() {
                return false;
            }
            let q_low = q.right.low.expect("non-empty interval");
            if self.lowpt[q_low] > self.lowpt[e] {
                if p.right.is_empty() {
                    p.right = q.right;
                } else if let Some(pl) = p.right.low {
                    self.reference[pl] = q.right.high;
                }
                p.right.low = q.right.low;
            } else {
                self.reference[q_low] = self.lowpt_edge[e];
            }
            if self.stack.len() == self.stack_bottom[ei] {
                break;
            }
        }
        // merge conflicting return edges of earlier siblings into p.left
        while let Some(top) = self.stack.last() {
            if !(self.conflicting(&top.left, ei) || self.conflicting(&top.right, ei)) {
                break;
            }
            let mut q = self.stack.pop().expect("checked non-empty");
            if self.conflicting(&q.right, ei) {
                q.swap();
            }
            if self.conflicting(&q.right, ei) {
                return false;
            }
            if let Some(pl) = p.right.low {
                self.reference[pl] = q.right.high;
            }
            if q.right.low.is_some() {
                p.right.low = q.right.low;
            }
            if p.left.is_empty() {
                p.left = q.left;
            } else if let Some(pl) = p.left.low {
                self.reference[pl] = q.left.high;
            }
            p.left.low = q.left.low;
        }
        if !(p.left.is_empty() && p.right.is_empty()) {
            self.stack.push(p);
        }
        true
    }

    fn remove_back_edges(&mut self, e: EdgeId) {
        let u = self.src[e];
        // drop entire conflict pairs returning to u
        while let Some(top) = self.stack.last() {
            if self.lowest(top) != self.height[u] {
                break;
            }
            let p = self.stack.pop().expect("checked non-empty");
            if let Some(l) = p.left.low {
                self.side[l] = -1;
            }
        }
        if let Some(mut p) = self.stack.pop() {
            // trim left interval
            while let Some(h) = p.left.high {
                if self.dst[h] != u {
                    break;
                }
                p.left.high = self.reference[h];
            }
            if p.left.high.is_none() {
                if let Some(l) = p.left.low.take() {
                    self.reference[l] = p.right.low;
                    self.side[l] = -1;
                }
            }
            // trim right interval
            while let Some(h) = p.right.high {
                if self.dst[h] != u {
                    break;
                }
                p.right.high = self.reference[h];
            }
            if p.right.high.is_none() {
                if let Some(r) = p.right.low.take() {
                    self.reference[r] = p.left.low;
                    self.side[r] = -1;
                }
            }
            if !(p.left.is_empty() && p.right.is_empty()) {
                self.stack.push(p);
            }
        }
        // side of e is the side of a highest return edge
        if self.lowpt[e] < self.height[u] {
            let top = self.stack.last().expect("return edge implies a pending pair");
            let (hl, hr) = (top.left.high, top.right.high);
            self.reference[e] = match (hl, hr) {
                (Some(l), None) => Some(l),
                (Some(l), Some(r)) if self.lowpt[l] > self.lowpt[r] => Some(l),
                _ => hr,
            };
        }
    }

    fn sign(&mut self, e: EdgeId) -> i64 {
        let mut chain = vec![e];
        while let Some(r) = self.reference[*chain.last().expect("non-empty")] {
            chain.push(r);
        }
        for k in (0..chain.len() - 1).rev() {
            let (a, b) = (chain[k], chain[k + 1]);
            self.side[a] *= self.side[b];
            self.reference[a] = None;
        }
        self.side[e]
    }

    fn embed(&mut self) -> Embedding {
        for e in 0..self.m {
            let s = self.sign(e);
            self.nesting_depth[e] *= s;
        }
        let mut emb = HalfEdges::new(self.n);
        for v in 0..self.n {
            let mut out = self.out[v].clone();
            out.sort_by_key(|&e| self.nesting_depth[e]);
            let mut previous = None;
            for &e in &out {
                let w = self.dst[e];
                emb.add_cw(v, w, previous);
                previous = Some(w);
            }
            self.ordered[v] = out;
        }
        let mut left_ref = vec![NONE; self.n];
        let mut right_ref = vec![NONE; self.n];
        for r in self.roots.clone() {
            self.embed_dfs(r, &mut emb, &mut left_ref, &mut right_ref);
        }
        emb.into_embedding()
    }

    fn embed_dfs(&self, v: usize, emb: &mut HalfEdges, left_ref: &mut [usize], right_ref: &mut [usize]) {
        for &ei in &self.ordered[v] {
            let w = self.dst[ei];
            if self.parent_edge[w] == Some(ei) {
                emb.add_first(w, v);
                left_ref[v] = w;
                right_ref[v] = w;
                self.embed_dfs(w, emb, left_ref, right_ref);
            } else if self.side[ei] == 1 {
                emb.add_cw(w, v, Some(right_ref[w]));
            } else {
                emb.add_ccw(w, v, Some(left_ref[w]));
                left_ref[w] = v;
            }
        }
    }
}

/// Circular doubly linked neighbour lists.
struct HalfEdges {
    links: HashMap<(usize, usize), (usize, usize)>,
    first: Vec<Option<usize>>,
}

impl HalfEdges {
    fn new(n: usize) -> Self {
        Self { links: HashMap::new(), first: vec![None; n] }
    }

    fn cw(&self, v: usize, w: usize) -> usize {
        self.links[&(v, w)].0
    }

    fn ccw(&self, v: usize, w: usize) -> usize {
        self.links[&(v, w)].1
    }

    fn add_cw(&mut self, start: usize, end: usize, reference: Option<usize>) {
        match reference {
            None => {
                self.links.insert((start, end), (end, end));
                self.first[start] = Some(end);
            }
            Some(r) => {
                let cw_ref = self.cw(start, r);
                self.links.get_mut(&(start, r)).expect("reference half-edge").0 = end;
                self.links.insert((start, end), (cw_ref, r));
                self.links.get_mut(&(start, cw_ref)).expect("neighbour half-edge").1 = end;
            }
        }
    }

    fn add_ccw(&mut self, start: usize, end: usize, reference: Option<usize>) {
        match reference {
            None => self.add_cw(start, end, None),
            Some(r) => {
                let ccw_ref = self.ccw(start, r);
                self.add_cw(start, end, Some(ccw_ref));
                if self.first[start] == Some(r) {
                    self.first[start] = Some(end);
                }
            }
        }
    }

    fn add_first(&mut self, start: usize, end: usize) {
        let reference = self.first[start];
        self.add_ccw(start, end, reference);
    }

    fn into_embedding(self) -> Embedding {
        let rotation = self
            .first
            .iter()
            .enumerate()
            .map(|(v, first)| {
                let mut order = Vec::new();
                if let Some(f) = *first {
                    let mut w = f;
                    loop {
                        order.push(w);
                        w = self.cw(v, w);
                        if w == f {
                            break;
                        }
                    }
                }
                order
            })
            .collect();
        Embedding { rotation }
    }
}

impl Embedding {
    /// Checks the rotation system against the edge list and Euler's formula
    /// `V - E + F = 2` on every connected component, tracing faces directly.
    /// This does not rely on the planarity test that produced it.
    pub fn verify(&self, n: usize, edges: &[(usize, usize)]) -> bool {
        if self.rotation.len() != n {
            return false;
        }
        let mut expected: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(u, v) in edges {
            expected[u].push(v);
            expected[v].push(u);
        }
        for (a, rot) in expected.iter_mut().zip(&self.rotation) {
            let mut b = rot.clone();
            a.sort_unstable();
            b.sort_unstable();
            if *a != b {
                return false;
            }
        }
        // position of w in rotation[v]
        let pos: HashMap<(usize, usize), usize> = self
            .rotation
            .iter()
            .enumerate()
            .flat_map(|(v, rot)| rot.iter().enumerate().map(move |(k, &w)| ((v, w), k)))
            .collect();
        let comp = components(n, edges);
        let n_comp = comp.iter().copied().max().map_or(0, |c| c + 1);
        let mut v_count = vec![0i64; n_comp];
        let mut e_count = vec![0i64; n_comp];
        let mut f_count = vec![0i64; n_comp];
        for v in 0..n {
            v_count[comp[v]] += 1;
            if self.rotation[v].is_empty() {
                f_count[comp[v]] += 1;
            }
        }
        for &(u, _) in edges {
            e_count[comp[u]] += 1;
        }
        let mut visited: HashMap<(usize, usize), bool> = HashMap::new();
        for v in 0..n {
            for &w in &self.rotation[v] {
                if visited.contains_key(&(v, w)) {
                    continue;
                }
                f_count[comp[v]] += 1;
                let (mut a, mut b) = (v, w);
                while visited.insert((a, b), true).is_none() {
                    let rot = &self.rotation[b];
                    let k = pos[&(b, a)];
                    let next = rot[(k + 1) % rot.len()];
                    a = b;
                    b = next;
                }
            }
        }
        (0..n_comp).all(|c| v_count[c] - e_count[c] + f_count[c] == 2)
    }
}

fn components(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        let mut y = x;
        while parent[y] != r {
            let next = parent[y];
            parent[y] = r;
            y = next;
        }
        r
    }
    for &(u, v) in edges {
        let (a, b) = (find(&mut parent, u), find(&mut parent, v));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut ids = HashMap::new();
    (0..n)
        .map(|v| {
            let r = find(&mut parent, v);
            let next = ids.len();
            *ids.entry(r).or_insert(next)
        })
        .collect()
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    pub(crate) fn complete(n: usize) -> Vec<(usize, usize)> {
        (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect()
    }

    pub(crate) fn k33() -> Vec<(usize, usize)> {
        (0..3).flat_map(|i| (3..6).map(move |j| (i, j))).collect()
    }

    /// Smooths degree-2 vertices and checks the result is K5 or K3,3.
    pub(crate) fn is_kuratowski_subdivision(edges: &[(usize, usize)]) -> bool {
        let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
        for &(u, v) in edges {
            adj.entry(u).or_default().push(v);
            adj.entry(v).or_default().push(u);
        }
        let branch: Vec<usize> = adj.iter().filter(|(_, nb)| nb.len() > 2).map(|(&v, _)| v).collect();
        if adj.values().any(|nb| nb.len() < 2) {
            return false;
        }
        // walk each path between branch vertices
        let mut reduced: Vec<(usize, usize)> = Vec::new();
        for &b in &branch {
            for &start in &adj[&b] {
                let (mut prev, mut cur) = (b, start);
                while adj[&cur].len() == 2 {
                    let next = if adj[&cur][0] == prev { adj[&cur][1] } else { adj[&cur][0] };
                    prev = cur;
                    cur = next;
                }
                if b < cur {
                    reduced.push((b, cur));
                }
            }
        }
        reduced.sort_unstable();
        let before = reduced.len();
        reduced.dedup();
        if reduced.len() != before || reduced.iter().any(|(a, b)| a == b) {
            return false;
        }
        let degree = |v: usize| reduced.iter().filter(|(a, b)| *a == v || *b == v).count();
        match branch.len() {
            5 => reduced.len() == 10 && branch.iter().all(|&v| degree(v) == 4),
            6 => {
                if reduced.len() != 9 || !branch.iter().all(|&v| degree(v) == 3) {
                    return false;
                }
                // bipartite 3 + 3
                let mut color: HashMap<usize, u8> = HashMap::new();
                color.insert(branch[0], 0);
                let mut changed = true;
                while changed {
                    changed = false;
                    for &(a, b) in &reduced {
                        match (color.get(&a).copied(), color.get(&b).copied()) {
                            (Some(x), None) => {
                                color.insert(b, 1 - x);
                                changed = true;
                            }
                            (None, Some(x)) => {
                                color.insert(a, 1 - x);
                                changed = true;
                            }
                            (Some(x), Some(y)) if x == y => return false,
                            _ => {}
                        }
                    }
                }
                color.values().filter(|&&c| c == 0).count() == 3 && color.len() == 6
            }
            _ => false,
        }
    }

    fn check(n: usize, edges: &[(usize, usize)]) -> bool {
        match is_planar(n, edges) {
            Planarity::Planar(emb) => {
                assert!(emb.verify(n, edges), "embedding fails Euler check");
                true
            }
            Planarity::NonPlanar(w) => {
                assert!(is_kuratowski_subdivision(&w), "bad witness {w:?}");
                assert!(w.iter().all(|e| edges.contains(e)));
                false
            }
        }
    }

    #[test]
    fn classic_graphs() {
        assert!(check(4, &complete(4)));
        assert!(!check(5, &complete(5)));
        assert!(!check(6, &k33()));
        let mut k5_minus = complete(5);
        k5_minus.pop();
        assert!(check(5, &k5_minus));
        assert!(check(0, &[]));
        assert!(check(3, &[]));
    }

    #[test]
    fn petersen_is_not_planar() {
        let mut edges = Vec::new();
        for i in 0..5 {
            edges.push((i, (i + 1) % 5));
            edges.push((i, i + 5));
            edges.push((i + 5, (i + 2) % 5 + 5));
        }
        assert!(!check(10, &edges));
    }

    #[test]
    fn subdivided_k33_is_detected() {
        // each K3,3 edge split by a fresh middle vertex
        let mut edges = Vec::new();
        for (k, (a, b)) in k33().into_iter().enumerate() {
            let mid = 6 + k;
            edges.push((a, mid));
            edges.push((mid, b));
        }
        assert!(!check(15, &edges));
    }

    #[test]
    fn grid_and_wheel_are_planar() {
        let side = 7;
        let mut edges = Vec::new();
        for r in 0..side {
            for c in 0..side {
                let v = r * side + c;
                if c + 1 < side {
                    edges.push((v, v + 1));
                }
                if r + 1 < side {
                    edges.push((v, v + side));
                }
                if r + 1 < side && c + 1 < side {
                    edges.push((v, v + side + 1));
                }
            }
        }
        assert!(check(side * side, &edges));
        let mut wheel: Vec<(usize, usize)> = (1..=12).map(|i| (0, i)).collect();
        wheel.extend((1..=12).map(|i| (i, i % 12 + 1)));
        assert!(check(13, &wheel));
    }

    #[test]
    fn maximal_planar_plus_one_edge() {
        // stacked triangulation: each new vertex joins a triangle's corners
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let mut edges = vec![(0, 1), (0, 2), (1, 2)];
        let mut faces = vec![(0, 1, 2)];
        for v in 3..25 {
            let f = faces.swap_remove(rng.gen_range(0..faces.len()));
            edges.extend([(f.0, v), (f.1, v), (f.2, v)]);
            faces.extend([(f.0, f.1, v), (f.1, f.2, v), (f.0, f.2, v)]);
        }
        assert_eq!(edges.len(), 3 * 25 - 6);
        assert!(check(25, &edges));
        let set: std::collections::HashSet<_> = edges.iter().copied().collect();
        let extra = complete(25).into_iter().find(|e| !set.contains(e)).unwrap();
        edges.push(extra);
        assert!(!check(25, &edges));
    }

    #[test]
    fn random_graphs_agree_with_certificates() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let mut planar_seen = 0;
        for _ in 0..300 {
            let n = rng.gen_range(5..12);
            let p = rng.gen_range(0.15..0.6);
            let edges: Vec<_> = complete(n).into_iter().filter(|_| rng.gen_bool(p)).collect();
            if check(n, &edges) {
                planar_seen += 1;
            }
            assert_eq!(test_planarity(n, &edges), is_planar(n, &edges).is_planar());
        }
        assert!(planar_seen > 30 && planar_seen < 290);
    }
}
