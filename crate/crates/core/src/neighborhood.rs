//! Materialized per-node neighbor sets with sticky purge flags.
//!
//! Neighbor segments are deduplicated and kept sorted so candidate scoring
//! can binary-search them. A purge flag marks a neighbor proven permanently
//! invalid as a pairing target; validity failures are monotone under
//! clustering, so flags are never cleared.

use crate::hgraph::{par_map_indexed, Hypergraph, IncidenceIndex, NodeId};

#[derive(Debug, Clone)]
pub struct NeighborSets {
    offsets: Vec<usize>,
    data: Vec<NodeId>,
    purged: Vec<bool>,
}

impl NeighborSets {
    pub(crate) fn from_segments(segments: Vec<Vec<NodeId>>) -> Self {
        let mut offsets = Vec::with_capacity(segments.len() + 1);
        offsets.push(0);
        let mut acc = 0;
        for seg in &segments {
            acc += seg.len();
            offsets.push(acc);
        }
        let mut data = Vec::with_capacity(acc);
        for seg in segments {
            data.extend(seg);
        }
        let purged = vec![false; data.len()];
        Self {
            offsets,
            data,
            purged,
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.offsets.len() - 1
    }

    /// All neighbors of `n`, including purged entries.
    pub fn neighbors(&self, n: NodeId) -> &[NodeId] {
        &self.data[self.offsets[n]..self.offsets[n + 1]]
    }

    /// Neighbors of `n` still usable as pairing targets.
    pub fn unpurged(&self, n: NodeId) -> Vec<NodeId> {
        let base = self.offsets[n];
        self.neighbors(n)
            .iter()
            .enumerate()
            .filter(|&(i, _)| !self.purged[base + i])
            .map(|(_, &m)| m)
            .collect()
    }

    pub fn is_purged(&self, n: NodeId, m: NodeId) -> bool {
        let base = self.offsets[n];
        match self.neighbors(n).binary_search(&m) {
            Ok(i) => self.purged[base + i],
            Err(_) => false,
        }
    }

    /// Purge entry flags for node `n`, parallel to [`NeighborSets::neighbors`].
    pub(crate) fn flags(&self, n: NodeId) -> &[bool] {
        &self.purged[self.offsets[n]..self.offsets[n + 1]]
    }

    fn flag_one(&mut self, n: NodeId, m: NodeId) {
        let base = self.offsets[n];
        if let Ok(i) = self.data[self.offsets[n]..self.offsets[n + 1]].binary_search(&m) {
            self.purged[base + i] = true;
        }
    }

    /// Flags each pair in both directions. Unknown pairs are ignored and
    /// repeated flagging is a no-op, so any interleaving yields the same
    /// final state.
    pub fn flag_purged(&mut self, pairs: &[(NodeId, NodeId)]) {
        for &(n, m) in pairs {
            self.flag_one(n, m);
            self.flag_one(m, n);
        }
    }
}

/// Builds exact deduplicated neighbor sets: the union of pins over each
/// node's incident edges, minus the node itself, sorted ascending.
pub fn materialize_neighbors(hg: &Hypergraph, inc: &IncidenceIndex) -> NeighborSets {
    let segments = par_map_indexed(hg.num_nodes(), |n| {
        let cap: usize = inc
            .incident(n)
            .iter()
            .map(|&e| hg.edge_pins(e).len().saturating_sub(1))
            .sum();
        let mut buf: Vec<NodeId> = Vec::with_capacity(cap);
        for &e in inc.incident(n) {
            buf.extend(hg.edge_pins(e).iter().copied().filter(|&m| m != n));
        }
        buf.sort_unstable();
        buf.dedup();
        buf
    });
    NeighborSets::from_segments(segments)
}

/// Flags each pair in both directions on `ns`.
pub fn flag_purged(ns: &mut NeighborSets, pairs: &[(NodeId, NodeId)]) {
    ns.flag_purged(pairs);
}
