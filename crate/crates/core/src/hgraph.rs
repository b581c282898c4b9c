//! Hypergraph storage and incidence index.
//!
//! Both structures use a compressed two-level layout: a flat data array plus
//! per-segment offsets. Edge segments store all source pins first, then
//! destination pins; incidence segments store inbound edge ids first, then
//! outbound. Secondary count arrays (`src_counts`, `in_counts`) split each
//! segment into its two halves.

use rayon::prelude::*;

use crate::{Error, Result};

pub type NodeId = usize;
pub type EdgeId = usize;

/// A weighted directed hypergraph.
///
/// Pins of edge `e` live in `pin_data[pin_offsets[e]..pin_offsets[e + 1]]`,
/// with the first `src_counts[e]` entries being the edge's sources and the
/// rest its destinations. `node_sizes` is 1 everywhere on an input graph and
/// carries cluster cardinalities on coarse graphs.
#[derive(Debug, Clone)]
pub struct Hypergraph {
    num_nodes: usize,
    pin_offsets: Vec<usize>,
    pin_data: Vec<NodeId>,
    src_counts: Vec<usize>,
    edge_weights: Vec<f64>,
    node_sizes: Vec<usize>,
}

impl Hypergraph {
    /// Builds a hypergraph from per-edge `(sources, destinations, weight)`
    /// triples, with every node having size 1.
    pub fn from_edges(
        num_nodes: usize,
        edges: &[(Vec<NodeId>, Vec<NodeId>, f64)],
    ) -> Result<Self> {
        let mut pin_offsets = Vec::with_capacity(edges.len() + 1);
        let mut pin_data = Vec::new();
        let mut src_counts = Vec::with_capacity(edges.len());
        let mut edge_weights = Vec::with_capacity(edges.len());
        pin_offsets.push(0);
        for (srcs, dsts, w) in edges {
            pin_data.extend_from_slice(srcs);
            pin_data.extend_from_slice(dsts);
            pin_offsets.push(pin_data.len());
            src_counts.push(srcs.len());
            edge_weights.push(*w);
        }
        Self::from_parts(
            num_nodes,
            pin_offsets,
            pin_data,
            src_counts,
            edge_weights,
            vec![1; num_nodes],
        )
    }

    /// Assembles a hypergraph from raw compressed arrays, validating all
    /// invariants.
    pub fn from_parts(
        num_nodes: usize,
        pin_offsets: Vec<usize>,
        pin_data: Vec<NodeId>,
        src_counts: Vec<usize>,
        edge_weights: Vec<f64>,
        node_sizes: Vec<usize>,
    ) -> Result<Self> {
        let hg = Self {
            num_nodes,
            pin_offsets,
            pin_data,
            src_counts,
            edge_weights,
            node_sizes,
        };
        hg.validate()?;
        Ok(hg)
    }

    /// Checks every structural invariant, rejecting malformed input.
    pub fn validate(&self) -> Result<()> {
        let ne = self.num_edges();
        if self.pin_offsets.len() != ne + 1
            || self.src_counts.len() != ne
            || self.pin_offsets.first() != Some(&0)
            || self.pin_offsets.last() != Some(&self.pin_data.len())
        {
            return Err(Error::InvalidHypergraph("inconsistent array lengths".into()));
        }
        if self.node_sizes.len() != self.num_nodes {
            return Err(Error::InvalidHypergraph("node_sizes length mismatch".into()));
        }
        if let Some(n) = self.node_sizes.iter().position(|&s| s == 0) {
            return Err(Error::InvalidHypergraph(format!("node {n} has size 0")));
        }
        for e in 0..ne {
            if self.pin_offsets[e] > self.pin_offsets[e + 1] {
                return Err(Error::InvalidHypergraph("pin_offsets not nondecreasing".into()));
            }
            let pins = self.edge_pins(e);
            if self.src_counts[e] > pins.len() {
                return Err(Error::InvalidHypergraph(format!(
                    "edge {e}: src count exceeds pin count"
                )));
            }
            if !(self.edge_weights[e] > 0.0) {
                return Err(Error::InvalidHypergraph(format!(
                    "edge {e}: weight must be positive"
                )));
            }
            let mut seen = pins.to_vec();
            seen.sort_unstable();
            if seen.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidHypergraph(format!("edge {e}: duplicate pin")));
            }
            if let Some(&p) = seen.last() {
                if p >= self.num_nodes {
                    return Err(Error::InvalidHypergraph(format!(
                        "edge {e}: pin {p} out of range"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.edge_weights.len()
    }

    pub fn num_pins(&self) -> usize {
        self.pin_data.len()
    }

    /// All pins of edge `e`, sources first.
    pub fn edge_pins(&self, e: EdgeId) -> &[NodeId] {
        &self.pin_data[self.pin_offsets[e]..self.pin_offsets[e + 1]]
    }

    pub fn edge_src(&self, e: EdgeId) -> &[NodeId] {
        &self.edge_pins(e)[..self.src_counts[e]]
    }

    pub fn edge_dst(&self, e: EdgeId) -> &[NodeId] {
        &self.edge_pins(e)[self.src_counts[e]..]
    }

    pub fn src_count(&self, e: EdgeId) -> usize {
        self.src_counts[e]
    }

    pub fn edge_weight(&self, e: EdgeId) -> f64 {
        self.edge_weights[e]
    }

    pub fn node_size(&self, n: NodeId) -> usize {
        self.node_sizes[n]
    }

    pub fn node_sizes(&self) -> &[usize] {
        &self.node_sizes
    }

    pub fn mean_edge_weight(&self) -> f64 {
        if self.num_edges() == 0 {
            return 0.0;
        }
        self.edge_weights.iter().sum::<f64>() / self.num_edges() as f64
    }
}

/// Per-node incident edge lists, inbound first.
#[derive(Debug, Clone)]
pub struct IncidenceIndex {
    inc_offsets: Vec<usize>,
    inc_data: Vec<EdgeId>,
    in_counts: Vec<usize>,
}

impl IncidenceIndex {
    /// All edges incident to `n`, inbound ids first.
    pub fn incident(&self, n: NodeId) -> &[EdgeId] {
        &self.inc_data[self.inc_offsets[n]..self.inc_offsets[n + 1]]
    }

    /// Edges having `n` as a destination pin.
    pub fn inbound(&self, n: NodeId) -> &[EdgeId] {
        &self.incident(n)[..self.in_counts[n]]
    }

    /// Edges having `n` as a source pin.
    pub fn outbound(&self, n: NodeId) -> &[EdgeId] {
        &self.incident(n)[self.in_counts[n]..]
    }

    pub fn in_count(&self, n: NodeId) -> usize {
        self.in_counts[n]
    }

    pub fn num_nodes(&self) -> usize {
        self.in_counts.len()
    }
}

/// Builds the incidence index of a hypergraph. Edge ids appear in ascending
/// order within each inbound and outbound sublist.
pub fn build_incidence(hg: &Hypergraph) -> IncidenceIndex {
    let n = hg.num_nodes();
    // Size pass: count inbound and total incidences per node.
    let mut in_counts = vec![0usize; n];
    let mut totals = vec![0usize; n];
    for e in 0..hg.num_edges() {
        for &m in hg.edge_src(e) {
            totals[m] += 1;
        }
        for &m in hg.edge_dst(e) {
            totals[m] += 1;
            in_counts[m] += 1;
        }
    }
    let mut inc_offsets = Vec::with_capacity(n + 1);
    inc_offsets.push(0);
    let mut acc = 0;
    for &t in &totals {
        acc += t;
        inc_offsets.push(acc);
    }
    // Fill pass: iterating edges in ascending id order keeps sublists sorted.
    let mut inc_data = vec![0 as EdgeId; acc];
    let mut in_next: Vec<usize> = inc_offsets[..n].to_vec();
    let mut out_next: Vec<usize> = (0..n).map(|v| inc_offsets[v] + in_counts[v]).collect();
    for e in 0..hg.num_edges() {
        for &m in hg.edge_dst(e) {
            inc_data[in_next[m]] = e;
            in_next[m] += 1;
        }
        for &m in hg.edge_src(e) {
            inc_data[out_next[m]] = e;
            out_next[m] += 1;
        }
    }
    IncidenceIndex {
        inc_offsets,
        inc_data,
        in_counts,
    }
}

/// Hard limits on partitions: maximum size and maximum distinct inbound
/// edges. `None` means unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Constraints {
    pub max_part_size: Option<usize>,
    pub max_inbound: Option<usize>,
}

impl Constraints {
    pub fn new(max_part_size: Option<usize>, max_inbound: Option<usize>) -> Self {
        Self {
            max_part_size,
            max_inbound,
        }
    }

    pub fn unbounded() -> Self {
        Self {
            max_part_size: None,
            max_inbound: None,
        }
    }

    pub fn size_ok(&self, size: usize) -> bool {
        self.max_part_size.map_or(true, |limit| size <= limit)
    }

    pub fn inbound_ok(&self, count: usize) -> bool {
        self.max_inbound.map_or(true, |limit| count <= limit)
    }
}

/// The four-node example used throughout the test suite:
/// e0: src{0} dst{1,2} w=1; e1: src{1} dst{2} w=2; e2: src{2} dst{3} w=1.
#[cfg(test)]
pub(crate) fn example_graph() -> Hypergraph {
    Hypergraph::from_edges(
        4,
        &[
            (vec![0], vec![1, 2], 1.0),
            (vec![1], vec![2], 2.0),
            (vec![2], vec![3], 1.0),
        ],
    )
    .unwrap()
}

/// Parallel helper used by graph builders: maps each index through `f` and
/// returns results in index order, so output is thread-count independent.
pub(crate) fn par_map_indexed<T: Send, F: Fn(usize) -> T + Sync + Send>(len: usize, f: F) -> Vec<T> {
    (0..len).into_par_iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn incidence_on_example() {
        let hg = example_graph();
        let inc = build_incidence(&hg);
        assert_eq!(inc.inbound(2), &[0, 1]);
        assert_eq!(inc.outbound(2), &[2]);
        assert_eq!(inc.inbound(0), &[] as &[EdgeId]);
        assert_eq!(inc.outbound(0), &[0]);
        assert_eq!(inc.incident(3), &[2]);
    }

    #[test]
    fn incidence_no_edges() {
        let hg = Hypergraph::from_edges(3, &[]).unwrap();
        let inc = build_incidence(&hg);
        for n in 0..3 {
            assert!(inc.incident(n).is_empty());
        }
    }

    #[test]
    fn incidence_single_edge() {
        let hg = Hypergraph::from_edges(2, &[(vec![0], vec![1], 1.0)]).unwrap();
        let inc = build_incidence(&hg);
        assert_eq!(inc.inbound(1), &[0]);
        assert_eq!(inc.outbound(0), &[0]);
        assert!(inc.inbound(0).is_empty());
        assert!(inc.outbound(1).is_empty());
    }

    #[test]
    fn incidence_total_matches_pins() {
        let hg = example_graph();
        let inc = build_incidence(&hg);
        let total: usize = (0..hg.num_nodes()).map(|n| inc.incident(n).len()).sum();
        assert_eq!(total, hg.num_pins());
    }

    #[test]
    fn rejects_duplicate_pin() {
        let res = Hypergraph::from_edges(3, &[(vec![0], vec![0, 1], 1.0)]);
        assert!(matches!(res, Err(Error::InvalidHypergraph(_))));
    }

    #[test]
    fn rejects_nonpositive_weight() {
        assert!(Hypergraph::from_edges(2, &[(vec![0], vec![1], 0.0)]).is_err());
        assert!(Hypergraph::from_edges(2, &[(vec![0], vec![1], -1.0)]).is_err());
    }

    #[test]
    fn rejects_pin_out_of_range() {
        assert!(Hypergraph::from_edges(2, &[(vec![0], vec![5], 1.0)]).is_err());
    }
}
