//! Community detection and partition comparison.

pub mod girvan_newman;
pub mod label_propagation;
pub mod louvain;

use std::collections::HashMap;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::WeightedNetwork;

pub use girvan_newman::{edge_betweenness, girvan_newman, DistanceMode, GirvanNewman};
pub use label_propagation::{label_propagation, split_disconnected_labels};
pub use louvain::{louvain, louvain_traced, Louvain, LouvainStep};

/// Node-to-community assignment with labels `1..=n_c` numbered by first
/// appearance.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Partition {
    assignment: Vec<usize>,
    n_communities: usize,
}

impl Partition {
    /// Canonicalises arbitrary labels.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut map = HashMap::new();
        let assignment: Vec<usize> = labels
            .iter()
            .map(|l| {
                let next = map.len() + 1;
                *map.entry(*l).or_insert(next)
            })
            .collect();
        Partition { n_communities: map.len(), assignment }
    }

    pub fn from_groups(n: usize, groups: &[Vec<usize>]) -> Result<Self> {
        let mut labels = vec![usize::MAX; n];
        for (g, members) in groups.iter().enumerate() {
            for &v in members {
                if v >= n || labels[v] != usize::MAX {
                    return Err(Error::InvalidArgument(format!("node {v} missing from range or listed twice")));
                }
                labels[v] = g;
            }
        }
        if let Some(v) = labels.iter().position(|&l| l == usize::MAX) {
            return Err(Error::InvalidArgument(format!("node {v} has no community")));
        }
        Ok(Self::from_labels(&labels))
    }

    pub fn singletons(n: usize) -> Self {
        Self::from_labels(&(0..n).collect::<Vec<_>>())
    }

    pub fn whole(n: usize) -> Self {
        Self::from_labels(&vec![0; n])
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn n_communities(&self) -> usize {
        self.n_communities
    }

    /// Members of each community, ordered by label.
    pub fn communities(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.n_communities];
        for (v, &c) in self.assignment.iter().enumerate() {
            groups[c - 1].push(v);
        }
        groups
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModularityScore {
    pub q: f64,
    /// False when every edge has unit weight.
    pub weighted: bool,
}

pub fn modularity(net: &WeightedNetwork, p: &Partition) -> Result<ModularityScore> {
    modularity_with_resolution(net, p, 1.0)
}

/// `Q = sum_c [ in_c / 2M - gamma (tot_c / 2M)^2 ]`.
pub fn modularity_with_resolution(net: &WeightedNetwork, p: &Partition, resolution: f64) -> Result<ModularityScore> {
    if p.len() != net.n() {
        return Err(Error::InvalidArgument(format!("partition covers {} nodes, network has {}", p.len(), net.n())));
    }
    net.ensure_nonnegative()?;
    let two_m = 2.0 * net.total_weight();
    if net.edge_count() == 0 || two_m <= 0.0 {
        return Err(Error::Degenerate("modularity of a network without edge weight".into()));
    }
    let k = p.n_communities();
    let mut internal = vec![0.0; k];
    let mut total = vec![0.0; k];
    let a = p.assignment();
    for e in net.edges() {
        if a[e.i] == a[e.j] {
            internal[a[e.i] - 1] += 2.0 * e.weight;
        }
        total[a[e.i] - 1] += e.weight;
        total[a[e.j] - 1] += e.weight;
    }
    let q = internal
        .iter()
        .zip(&total)
        .map(|(i, t)| i / two_m - resolution * (t / two_m).powi(2))
        .sum();
    let weighted = net.edges().iter().any(|e| e.weight != 1.0);
    Ok(ModularityScore { q, weighted })
}

/// `2 I(p1; p2) / (H(p1) + H(p2))` with natural logarithms.
pub fn nmi(p1: &Partition, p2: &Partition) -> Result<f64> {
    if p1.len() != p2.len() {
        return Err(Error::InvalidArgument(format!("partitions cover {} and {} nodes", p1.len(), p2.len())));
    }
    let n = p1.len();
    if n == 0 {
        return Err(Error::InvalidArgument("empty partitions".into()));
    }
    let nf = n as f64;
    let mut joint: HashMap<(usize, usize), usize> = HashMap::new();
    let mut c1 = vec![0usize; p1.n_communities()];
    let mut c2 = vec![0usize; p2.n_communities()];
    for (&a, &b) in p1.assignment().iter().zip(p2.assignment()) {
        *joint.entry((a, b)).or_default() += 1;
        c1[a - 1] += 1;
        c2[b - 1] += 1;
    }
    let entropy = |counts: &[usize]| -> f64 {
        counts.iter().filter(|&&c| c > 0).map(|&c| c as f64 / nf).map(|p| -p * p.ln()).sum()
    };
    let (h1, h2) = (entropy(&c1), entropy(&c2));
    if h1 == 0.0 && h2 == 0.0 {
        return Ok(1.0);
    }
    if h1 == 0.0 || h2 == 0.0 {
        return Ok(0.0);
    }
    // sorted so the floating-point sum does not depend on hash order
    let mut cells: Vec<_> = joint.into_iter().collect();
    cells.sort_unstable();
    let mi: f64 = cells
        .iter()
        .map(|&((a, b), c)| {
            let pab = c as f64 / nf;
            pab * (pab * nf * nf / (c1[a - 1] as f64 * c2[b - 1] as f64)).ln()
        })
        .sum();
    Ok((2.0 * mi / (h1 + h2)).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Detector {
    Louvain,
    Lpa,
    Gn,
}

impl Detector {
    pub const ALL: [Detector; 3] = [Detector::Louvain, Detector::Lpa, Detector::Gn];

    pub fn name(self) -> &'static str {
        match self {
            Detector::Louvain => "louvain",
            Detector::Lpa => "lpa",
            Detector::Gn => "gn",
        }
    }

    /// Runs the detector and scores the result with standard modularity.
    pub fn detect(self, net: &WeightedNetwork, seed: u64) -> Result<(Partition, f64)> {
        let partition = match self {
            Detector::Louvain => louvain(net, seed, 1.0)?.partition,
            Detector::Lpa => label_propagation(net, seed)?,
            Detector::Gn => girvan_newman(net)?.partition,
        };
        let q = modularity(net, &partition)?.q;
        Ok((partition, q))
    }
}

impl std::fmt::Display for Detector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Detector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "louvain" => Ok(Detector::Louvain),
            "lpa" | "label_propagation" => Ok(Detector::Lpa),
            "gn" | "girvan_newman" => Ok(Detector::Gn),
            other => Err(Error::InvalidArgument(format!("unknown detector '{other}'"))),
        }
    }
}

/// One row of a partition export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionRecord {
    pub ticker: String,
    pub community_id: usize,
    pub method: String,
    pub window_id: Option<usize>,
}

pub fn partition_records(labels: &[String], p: &Partition, method: &str, window_id: Option<usize>) -> Vec<PartitionRecord> {
    labels
        .iter()
        .zip(p.assignment())
        .map(|(t, &c)| PartitionRecord { ticker: t.clone(), community_id: c, method: method.to_string(), window_id })
        .collect()
}

/// Writes `ticker,community_id,method,window_id`.
pub fn write_partition_csv<W: Write>(records: &[PartitionRecord], writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    w.write_record(["ticker", "community_id", "method", "window_id"])?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn two_cliques(size: usize, bridge: bool) -> WeightedNetwork {
        let mut edges = Vec::new();
        for base in [0, size] {
            for i in 0..size {
                for j in (i + 1)..size {
                    edges.push((base + i, base + j));
                }
            }
        }
        if bridge {
            edges.push((size - 1, size));
        }
        WeightedNetwork::from_unit_edges(2 * size, &edges).unwrap()
    }

    #[test]
    fn canonical_labels() {
        let p = Partition::from_labels(&[7, 7, 3, 9, 3]);
        assert_eq!(p.assignment(), &[1, 1, 2, 3, 2]);
        assert_eq!(p.n_communities(), 3);
        assert_eq!(p.communities(), vec![vec![0, 1], vec![2, 4], vec![3]]);
        assert!(Partition::from_groups(3, &[vec![0], vec![0, 1, 2]]).is_err());
        assert!(Partition::from_groups(3, &[vec![0, 1]]).is_err());
    }

    #[test]
    fn modularity_fixtures() {
        let net = two_cliques(5, false);
        assert!(modularity(&net, &Partition::whole(10)).unwrap().q.abs() < 1e-15);
        let split = Partition::from_labels(&[0, 0, 0, 0, 0, 1, 1, 1, 1, 1]);
        let s = modularity(&net, &split).unwrap();
        assert!((s.q - 0.5).abs() < 1e-15);
        assert!(!s.weighted);
        let edge = WeightedNetwork::from_unit_edges(2, &[(0, 1)]).unwrap();
        assert!((modularity(&edge, &Partition::singletons(2)).unwrap().q + 0.5).abs() < 1e-15);
        let empty = WeightedNetwork::from_unit_edges(3, &[]).unwrap();
        assert!(modularity(&empty, &Partition::whole(3)).is_err());
    }

    #[test]
    fn weighted_modularity_matches_matrix_form() {
        let net = WeightedNetwork::from_weighted_edges(4, &[(0, 1, 2.0), (1, 2, 0.5), (2, 3, 3.0), (0, 3, 0.25)]).unwrap();
        let p = Partition::from_labels(&[0, 0, 1, 1]);
        let a = net.adjacency();
        let s = net.strengths();
        let two_m: f64 = s.iter().sum();
        let mut q = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                if p.assignment()[i] == p.assignment()[j] {
                    q += a[(i, j)] - s[i] * s[j] / two_m;
                }
            }
        }
        q /= two_m;
        let got = modularity(&net, &p).unwrap();
        assert!((got.q - q).abs() < 1e-15);
        assert!(got.weighted);
    }

    #[test]
    fn nmi_fixtures() {
        let a = Partition::from_labels(&[0, 0, 1, 1]);
        let crossed = Partition::from_labels(&[0, 1, 0, 1]);
        let refined = Partition::from_labels(&[0, 0, 1, 2]);
        assert_eq!(nmi(&a, &a).unwrap(), 1.0);
        assert!(nmi(&a, &crossed).unwrap().abs() < 1e-15);
        // I = ln 2, H = ln 2 and 1.5 ln 2
        assert!((nmi(&a, &refined).unwrap() - 0.8).abs() < 1e-12);
        assert_eq!(nmi(&Partition::whole(4), &Partition::whole(4)).unwrap(), 1.0);
        assert_eq!(nmi(&Partition::whole(4), &a).unwrap(), 0.0);
        assert!(nmi(&a, &Partition::whole(3)).is_err());
    }

    #[test]
    fn partition_csv_layout() {
        let labels: Vec<String> = ["A", "B"].iter().map(|s| s.to_string()).collect();
        let mut out = Vec::new();
        let recs = partition_records(&labels, &Partition::singletons(2), "louvain", Some(3));
        write_partition_csv(&recs, &mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "ticker,community_id,method,window_id\nA,1,louvain,3\nB,2,louvain,3\n"
        );
    }

    #[test]
    fn detector_names_round_trip() {
        for d in Detector::ALL {
            assert_eq!(d.name().parse::<Detector>().unwrap(), d);
        }
        assert!("infomap".parse::<Detector>().is_err());
    }

    proptest! {
        #[test]
        fn nmi_symmetric_and_permutation_invariant(
            a in proptest::collection::vec(0usize..4, 12),
            b in proptest::collection::vec(0usize..4, 12),
            shift in 1usize..10,
        ) {
            let (pa, pb) = (Partition::from_labels(&a), Partition::from_labels(&b));
            let v = nmi(&pa, &pb).unwrap();
            prop_assert!((0.0..=1.0).contains(&v));
            prop_assert!((v - nmi(&pb, &pa).unwrap()).abs() < 1e-12);
            let relabelled: Vec<usize> = a.iter().map(|l| (l + shift) * 7).collect();
            prop_assert!((v - nmi(&Partition::from_labels(&relabelled), &pb).unwrap()).abs() < 1e-12);
        }
    }
}
