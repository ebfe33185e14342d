//! Undirected weighted networks as produced by the filtering step.

use std::collections::{HashMap, HashSet, VecDeque};
use std::io::{Read, Write};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const NETWORK_SCHEMA_VERSION: u32 = 1;

/// How a raw (possibly negative) similarity becomes an edge weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightTransform {
    Signed,
    /// `|s|`; what the structure detectors expect.
    #[default]
    Absolute,
    /// `(1 + s) / 2`, mapping correlations from `[-1, 1]` onto `[0, 1]`.
    Shifted,
}

impl WeightTransform {
    pub fn apply(self, s: f64) -> f64 {
        match self {
            WeightTransform::Signed => s,
            WeightTransform::Absolute => s.abs(),
            WeightTransform::Shifted => (1.0 + s) / 2.0,
        }
    }
}

impl std::str::FromStr for WeightTransform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "signed" => Ok(WeightTransform::Signed),
            "absolute" | "abs" => Ok(WeightTransform::Absolute),
            "shifted" => Ok(WeightTransform::Shifted),
            other => Err(Error::InvalidArgument(format!("unknown weight transform '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub weight: f64,
    /// Raw similarity the weight was derived from.
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedNetwork {
    pub labels: Vec<String>,
    edges: Vec<Edge>,
    pub transform: WeightTransform,
}

impl WeightedNetwork {
    /// Builds a simple graph; endpoints are normalised to `i < j`.
    pub fn new(labels: Vec<String>, edges: Vec<Edge>, transform: WeightTransform) -> Result<Self> {
        let n = labels.len();
        let mut seen = HashSet::with_capacity(edges.len());
        let mut normalised = Vec::with_capacity(edges.len());
        for e in edges {
            let (i, j) = (e.i.min(e.j), e.i.max(e.j));
            if i == j {
                return Err(Error::Validation(format!("self-loop on node {i}")));
            }
            if j >= n {
                return Err(Error::Validation(format!("edge ({i}, {j}) references node outside 0..{n}")));
            }
            if !e.weight.is_finite() {
                return Err(Error::Validation(format!("non-finite weight on ({i}, {j})")));
            }
            if !seen.insert((i, j)) {
                return Err(Error::Validation(format!("duplicate edge ({i}, {j})")));
            }
            normalised.push(Edge { i, j, ..e });
        }
        Ok(Self { labels, edges: normalised, transform })
    }

    /// Unlabelled network with weights taken as given.
    pub fn from_weighted_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let labels = (0..n).map(|i| i.to_string()).collect();
        let edges = edges.iter().map(|&(i, j, w)| Edge { i, j, weight: w, similarity: w }).collect();
        Self::new(labels, edges, WeightTransform::Signed)
    }

    pub fn from_unit_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let weighted: Vec<_> = edges.iter().map(|&(i, j)| (i, j, 1.0)).collect();
        Self::from_weighted_edges(n, &weighted)
    }

    /// Every nonzero off-diagonal entry of a symmetric matrix becomes an edge.
    pub fn from_adjacency(labels: Vec<String>, a: &DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        if !a.is_square() || labels.len() != n {
            return Err(Error::InvalidArgument("adjacency must be square and match labels".into()));
        }
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if a[(i, j)] != a[(j, i)] {
                    return Err(Error::Validation(format!("adjacency not symmetric at ({i}, {j})")));
                }
                if a[(i, j)] != 0.0 {
                    edges.push(Edge { i, j, weight: a[(i, j)], similarity: a[(i, j)] });
                }
            }
        }
        Self::new(labels, edges, WeightTransform::Signed)
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge_pairs(&self) -> Vec<(usize, usize)> {
        self.edges.iter().map(|e| (e.i, e.j)).collect()
    }

    pub fn edge_set(&self) -> HashSet<(usize, usize)> {
        self.edges.iter().map(|e| (e.i, e.j)).collect()
    }

    /// Same topology with weights recomputed from the stored similarities.
    pub fn with_transform(&self, transform: WeightTransform) -> Self {
        let edges = self
            .edges
            .iter()
            .map(|e| Edge { weight: transform.apply(e.similarity), ..*e })
            .collect();
        Self { labels: self.labels.clone(), edges, transform }
    }

    pub fn adjacency(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n(), self.n());
        for e in &self.edges {
            a[(e.i, e.j)] = e.weight;
            a[(e.j, e.i)] = e.weight;
        }
        a
    }

    pub fn neighbors(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.n()];
        for e in &self.edges {
            adj[e.i].push((e.j, e.weight));
            adj[e.j].push((e.i, e.weight));
        }
        for list in &mut adj {
            list.sort_by_key(|&(v, _)| v);
        }
        adj
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n()];
        for e in &self.edges {
            d[e.i] += 1;
            d[e.j] += 1;
        }
        d
    }

    pub fn strengths(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.n()];
        for e in &self.edges {
            s[e.i] += e.weight;
            s[e.j] += e.weight;
        }
        s
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    pub fn ensure_nonnegative(&self) -> Result<()> {
        match self.edges.iter().find(|e| e.weight < 0.0) {
            Some(e) => Err(Error::NegativeWeight { i: e.i, j: e.j, weight: e.weight }),
            None => Ok(()),
        }
    }

    /// Component id per node, numbered by smallest member.
    pub fn components(&self) -> Vec<usize> {
        let adj = self.neighbors();
        let mut comp = vec![usize::MAX; self.n()];
        let mut next = 0;
        for s in 0..self.n() {
            if comp[s] != usize::MAX {
                continue;
            }
            comp[s] = next;
            let mut queue = VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                for &(w, _) in &adj[v] {
                    if comp[w] == usize::MAX {
                        comp[w] = next;
                        queue.push_back(w);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    pub fn is_connected(&self) -> bool {
        self.n() > 0 && self.components().iter().all(|&c| c == 0)
    }

    /// `source,target,weight` with node labels.
    pub fn write_edge_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["source", "target", "weight"])?;
        for e in &self.edges {
            w.write_record([&self.labels[e.i], &self.labels[e.j], &e.weight.to_string()])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    /// Reads an externally built edge list. Nodes are the given labels; when
    /// `labels` is `None` they are collected from the file in sorted order.
    pub fn read_edge_csv<R: Read>(reader: R, labels: Option<Vec<String>>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut rows = Vec::new();
        for (idx, rec) in rdr.records().enumerate() {
            let row = idx + 2;
            let rec = rec.map_err(|e| Error::Parse { row, message: e.to_string() })?;
            if rec.len() < 3 {
                return Err(Error::Parse { row, message: "expected source,target,weight".into() });
            }
            let w: f64 = rec[2]
                .parse()
                .map_err(|_| Error::Parse { row, message: format!("bad weight `{}`", &rec[2]) })?;
            rows.push((rec[0].to_string(), rec[1].to_string(), w));
        }
        let labels = labels.unwrap_or_else(|| {
            let mut all: Vec<String> = rows.iter().flat_map(|(a, b, _)| [a.clone(), b.clone()]).collect();
            all.sort();
            all.dedup();
            all
        });
        let index: HashMap<&str, usize> = labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
        let mut edges = Vec::with_capacity(rows.len());
        for (a, b, w) in &rows {
            let lookup = |l: &str| {
                index.get(l).copied().ok_or_else(|| Error::Validation(format!("unknown node `{l}`")))
            };
            edges.push(Edge { i: lookup(a)?, j: lookup(b)?, weight: *w, similarity: *w });
        }
        Self::new(labels, edges, WeightTransform::Signed)
    }

    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Envelope<'a> {
            schema_version: u32,
            #[serde(flatten)]
            network: &'a WeightedNetwork,
        }
        Ok(serde_json::to_string(&Envelope { schema_version: NETWORK_SCHEMA_VERSION, network: self })?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Envelope {
            schema_version: u32,
            labels: Vec<String>,
            edges: Vec<Edge>,
            transform: WeightTransform,
        }
        let env: Envelope = serde_json::from_str(s)?;
        if env.schema_version != NETWORK_SCHEMA_VERSION {
            return Err(Error::Validation(format!("unsupported schema_version {}", env.schema_version)));
        }
        Self::new(env.labels, env.edges, env.transform)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_simple_graphs() {
        assert!(WeightedNetwork::from_unit_edges(3, &[(0, 0)]).is_err());
        assert!(WeightedNetwork::from_unit_edges(3, &[(0, 1), (1, 0)]).is_err());
        assert!(WeightedNetwork::from_unit_edges(3, &[(0, 3)]).is_err());
    }

    #[test]
    fn normalises_and_measures() {
        let net = WeightedNetwork::from_weighted_edges(4, &[(1, 0, 2.0), (2, 1, 0.5)]).unwrap();
        assert_eq!(net.edge_pairs(), vec![(0, 1), (1, 2)]);
        assert_eq!(net.strengths(), vec![2.0, 2.5, 0.5, 0.0]);
        assert_eq!(net.degrees(), vec![1, 2, 1, 0]);
        assert_eq!(net.components(), vec![0, 0, 0, 1]);
        assert!(!net.is_connected());
    }

    #[test]
    fn transforms() {
        let net = WeightedNetwork::from_weighted_edges(3, &[(0, 1, -0.4), (1, 2, 0.6)]).unwrap();
        assert!(net.ensure_nonnegative().is_err());
        let abs = net.with_transform(WeightTransform::Absolute);
        assert_eq!(abs.edges()[0].weight, 0.4);
        assert_eq!(abs.edges()[0].similarity, -0.4);
        let shifted = net.with_transform(WeightTransform::Shifted);
        assert!((shifted.edges()[0].weight - 0.3).abs() < 1e-15);
    }

    #[test]
    fn edge_list_and_json_round_trip() {
        let mut net = WeightedNetwork::from_weighted_edges(3, &[(0, 1, 0.25), (1, 2, 1.5)]).unwrap();
        net.labels = vec!["AAA".into(), "BBB".into(), "CCC".into()];
        let mut buf = Vec::new();
        net.write_edge_csv(&mut buf).unwrap();
        let back = WeightedNetwork::read_edge_csv(buf.as_slice(), Some(net.labels.clone())).unwrap();
        assert_eq!(back, net);
        let inferred = WeightedNetwork::read_edge_csv(buf.as_slice(), None).unwrap();
        assert_eq!(inferred.labels, net.labels);
        assert_eq!(WeightedNetwork::from_json(&net.to_json().unwrap()).unwrap(), net);
    }
}
