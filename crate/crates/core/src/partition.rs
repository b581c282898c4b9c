//! Partitionings, the sparse pins-per-partition matrix, and all objective
//! and constraint metrics.
//!
//! Metric sums collect per-edge contributions in edge-id order and reduce
//! them sequentially, so results are bit-identical regardless of thread
//! count.

use serde::Serialize;

use crate::hgraph::{par_map_indexed, Constraints, EdgeId, Hypergraph, NodeId};

pub type PartId = usize;

/// Node-to-partition assignment with per-partition size and distinct
/// inbound-edge ledgers.
#[derive(Debug, Clone)]
pub struct Partitioning {
    assignment: Vec<PartId>,
    part_sizes: Vec<usize>,
    part_inbound_counts: Vec<usize>,
}

impl Partitioning {
    /// Builds a partitioning from an assignment, recomputing both ledgers
    /// from scratch. The partition count is `max id + 1`.
    pub fn from_assignment(hg: &Hypergraph, assignment: Vec<PartId>) -> Self {
        let parts = assignment.iter().max().map_or(0, |&p| p + 1);
        Self::from_assignment_with_parts(hg, assignment, parts)
    }

    /// Same as [`Partitioning::from_assignment`] but with an explicit
    /// partition count (trailing partitions may be empty).
    pub fn from_assignment_with_parts(
        hg: &Hypergraph,
        assignment: Vec<PartId>,
        num_parts: usize,
    ) -> Self {
        assert_eq!(assignment.len(), hg.num_nodes());
        let mut part_sizes = vec![0usize; num_parts];
        for (n, &p) in assignment.iter().enumerate() {
            part_sizes[p] += hg.node_size(n);
        }
        let mut part_inbound_counts = vec![0usize; num_parts];
        let mut scratch: Vec<PartId> = Vec::new();
        for e in 0..hg.num_edges() {
            scratch.clear();
            scratch.extend(hg.edge_dst(e).iter().map(|&n| assignment[n]));
            scratch.sort_unstable();
            scratch.dedup();
            for &p in &scratch {
                part_inbound_counts[p] += 1;
            }
        }
        Self {
            assignment,
            part_sizes,
            part_inbound_counts,
        }
    }

    pub fn assignment(&self) -> &[PartId] {
        &self.assignment
    }

    pub fn part(&self, n: NodeId) -> PartId {
        self.assignment[n]
    }

    pub fn num_parts(&self) -> usize {
        self.part_sizes.len()
    }

    pub fn part_sizes(&self) -> &[usize] {
        &self.part_sizes
    }

    pub fn part_inbound_counts(&self) -> &[usize] {
        &self.part_inbound_counts
    }

    pub fn nonempty_parts(&self) -> usize {
        self.part_sizes.iter().filter(|&&s| s > 0).count()
    }

    /// Reassigns a node and patches the size ledger. The inbound ledger is
    /// maintained by the caller alongside the pins-in matrix.
    pub(crate) fn reassign(&mut self, hg: &Hypergraph, n: NodeId, to: PartId) {
        let from = self.assignment[n];
        self.assignment[n] = to;
        self.part_sizes[from] -= hg.node_size(n);
        self.part_sizes[to] += hg.node_size(n);
    }

    pub(crate) fn inbound_delta(&mut self, p: PartId, delta: isize) {
        let c = &mut self.part_inbound_counts[p];
        *c = c.checked_add_signed(delta).expect("inbound ledger underflow");
    }
}

/// Pins-per-partition counts, stored per edge as a sparse list of
/// `(partition, count)` pairs sorted by partition id.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PinsMode {
    /// Counts every pin of the edge.
    All,
    /// Counts only destination pins.
    Inbound,
}

#[derive(Debug, Clone)]
pub struct PinsMatrix {
    mode: PinsMode,
    rows: Vec<Vec<(PartId, u32)>>,
}

impl PinsMatrix {
    pub fn mode(&self) -> PinsMode {
        self.mode
    }

    pub fn row(&self, e: EdgeId) -> &[(PartId, u32)] {
        &self.rows[e]
    }

    pub fn count(&self, e: EdgeId, p: PartId) -> u32 {
        match self.rows[e].binary_search_by_key(&p, |&(q, _)| q) {
            Ok(i) => self.rows[e][i].1,
            Err(_) => 0,
        }
    }

    /// Adds `delta` to the `(e, p)` cell, inserting or removing the sparse
    /// entry as the count crosses zero. Returns the previous count.
    pub(crate) fn adjust(&mut self, e: EdgeId, p: PartId, delta: i32) -> u32 {
        let row = &mut self.rows[e];
        match row.binary_search_by_key(&p, |&(q, _)| q) {
            Ok(i) => {
                let before = row[i].1;
                let after = before as i64 + delta as i64;
                assert!(after >= 0, "pins count underflow");
                if after == 0 {
                    row.remove(i);
                } else {
                    row[i].1 = after as u32;
                }
                before
            }
            Err(i) => {
                assert!(delta >= 0, "pins count underflow");
                if delta > 0 {
                    row.insert(i, (p, delta as u32));
                }
                0
            }
        }
    }
}

/// Builds the pins matrix for the given partitioning. In `Inbound` mode only
/// destination pins are counted.
pub fn build_pins_matrix(hg: &Hypergraph, part: &Partitioning, mode: PinsMode) -> PinsMatrix {
    let assignment = part.assignment();
    let rows = par_map_indexed(hg.num_edges(), |e| {
        let pins = match mode {
            PinsMode::All => hg.edge_pins(e),
            PinsMode::Inbound => hg.edge_dst(e),
        };
        let mut parts: Vec<PartId> = pins.iter().map(|&n| assignment[n]).collect();
        parts.sort_unstable();
        let mut row: Vec<(PartId, u32)> = Vec::new();
        for p in parts {
            match row.last_mut() {
                Some(last) if last.0 == p => last.1 += 1,
                _ => row.push((p, 1)),
            }
        }
        row
    });
    PinsMatrix { mode, rows }
}

fn edge_span(hg: &Hypergraph, assignment: &[PartId], e: EdgeId) -> usize {
    let pins = hg.edge_pins(e);
    // Insertion into a stack buffer of distinct ids; typical edges are small.
    if pins.len() <= 32 {
        let mut seen = [0 as PartId; 32];
        let mut count = 0;
        'pins: for &n in pins {
            let p = assignment[n];
            for &q in &seen[..count] {
                if q == p {
                    continue 'pins;
                }
            }
            seen[count] = p;
            count += 1;
        }
        count
    } else {
        let mut parts: Vec<PartId> = pins.iter().map(|&n| assignment[n]).collect();
        parts.sort_unstable();
        parts.dedup();
        parts.len()
    }
}

/// Connectivity: each edge pays its weight once per partition beyond the
/// first it touches.
pub fn connectivity(hg: &Hypergraph, assignment: &[PartId]) -> f64 {
    let contribs = par_map_indexed(hg.num_edges(), |e| {
        hg.edge_weight(e) * (edge_span(hg, assignment, e) as f64 - 1.0)
    });
    contribs.iter().sum()
}

/// Cut-net: total weight of edges spanning more than one partition.
pub fn cut_net(hg: &Hypergraph, assignment: &[PartId]) -> f64 {
    let contribs = par_map_indexed(hg.num_edges(), |e| {
        if edge_span(hg, assignment, e) > 1 {
            hg.edge_weight(e)
        } else {
            0.0
        }
    });
    contribs.iter().sum()
}

/// Clustering score: weight recovered by edges whose pins collapse together
/// under the cluster map `gamma`.
pub fn coarsening_score(hg: &Hypergraph, gamma: &[NodeId]) -> f64 {
    let contribs = par_map_indexed(hg.num_edges(), |e| {
        hg.edge_weight(e) * (hg.edge_pins(e).len() - edge_span(hg, gamma, e)) as f64
    });
    contribs.iter().sum()
}

/// A single constraint violation found by [`validate_partitioning`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Violation {
    Size {
        part: PartId,
        measured: usize,
        limit: usize,
    },
    Inbound {
        part: PartId,
        measured: usize,
        limit: usize,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every partition against both constraints, computing sizes and
/// distinct inbound counts from scratch so the report is independent of any
/// incrementally maintained ledger.
pub fn validate_partitioning(
    hg: &Hypergraph,
    assignment: &[PartId],
    cons: &Constraints,
) -> ValidationReport {
    let num_parts = assignment.iter().max().map_or(0, |&p| p + 1);
    let mut sizes = vec![0usize; num_parts];
    for (n, &p) in assignment.iter().enumerate() {
        sizes[p] += hg.node_size(n);
    }
    let mut inbound = vec![0usize; num_parts];
    let mut scratch: Vec<PartId> = Vec::new();
    for e in 0..hg.num_edges() {
        scratch.clear();
        scratch.extend(hg.edge_dst(e).iter().map(|&n| assignment[n]));
        scratch.sort_unstable();
        scratch.dedup();
        for &p in &scratch {
            inbound[p] += 1;
        }
    }
    let mut violations = Vec::new();
    for p in 0..num_parts {
        if let Some(limit) = cons.max_part_size {
            if sizes[p] > limit {
                violations.push(Violation::Size {
                    part: p,
                    measured: sizes[p],
                    limit,
                });
            }
        }
        if let Some(limit) = cons.max_inbound {
            if inbound[p] > limit {
                violations.push(Violation::Inbound {
                    part: p,
                    measured: inbound[p],
                    limit,
                });
            }
        }
    }
    ValidationReport { violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hgraph::example_graph;
    use proptest::prelude::*;

    fn two_way() -> Vec<PartId> {
        vec![0, 0, 1, 1]
    }

    #[test]
    fn connectivity_on_example() {
        let hg = example_graph();
        assert_eq!(connectivity(&hg, &two_way()), 3.0);
        assert_eq!(connectivity(&hg, &[0, 0, 0, 0]), 0.0);
        assert_eq!(connectivity(&hg, &[0, 1, 2, 3]), 5.0);
    }

    #[test]
    fn cut_net_on_example() {
        let hg = example_graph();
        assert_eq!(cut_net(&hg, &two_way()), 3.0);
        assert_eq!(cut_net(&hg, &[0, 0, 0, 0]), 0.0);
    }

    #[test]
    fn coarsening_score_on_example() {
        let hg = example_graph();
        assert_eq!(coarsening_score(&hg, &two_way()), 2.0);
        assert_eq!(coarsening_score(&hg, &[0, 1, 2, 3]), 0.0);
        // Duality: score + connectivity is the constant total slack.
        assert_eq!(
            coarsening_score(&hg, &two_way()) + connectivity(&hg, &two_way()),
            5.0
        );
    }

    #[test]
    fn pins_matrix_on_example() {
        let hg = example_graph();
        let part = Partitioning::from_assignment(&hg, two_way());
        let all = build_pins_matrix(&hg, &part, PinsMode::All);
        assert_eq!(all.count(0, 0), 2);
        assert_eq!(all.count(0, 1), 1);
        let inb = build_pins_matrix(&hg, &part, PinsMode::Inbound);
        assert_eq!(inb.count(0, 0), 1);
        assert_eq!(inb.count(0, 1), 1);
        // An untouched partition id has zero counts everywhere.
        let wide = Partitioning::from_assignment_with_parts(&hg, two_way(), 3);
        let m = build_pins_matrix(&hg, &wide, PinsMode::All);
        for e in 0..hg.num_edges() {
            assert_eq!(m.count(e, 2), 0);
        }
    }

    #[test]
    fn validate_on_example() {
        let hg = example_graph();
        let cons = Constraints::new(Some(2), Some(2));
        let report = validate_partitioning(&hg, &two_way(), &cons);
        // p1 holds nodes {2,3}: inbound {e0,e1,e2} exceeds the limit of 2.
        assert_eq!(
            report.violations,
            vec![Violation::Inbound {
                part: 1,
                measured: 3,
                limit: 2
            }]
        );
        let relaxed = Constraints::new(Some(2), Some(3));
        assert!(validate_partitioning(&hg, &two_way(), &relaxed).is_valid());
        assert!(validate_partitioning(&hg, &two_way(), &Constraints::unbounded()).is_valid());
        let tight = Constraints::new(Some(1), None);
        assert_eq!(
            validate_partitioning(&hg, &two_way(), &tight)
                .violations
                .len(),
            2
        );
    }

    #[test]
    fn ledgers_match_scratch_recomputation() {
        let hg = example_graph();
        let part = Partitioning::from_assignment(&hg, two_way());
        assert_eq!(part.part_sizes(), &[2, 2]);
        assert_eq!(part.part_inbound_counts(), &[1, 3]);
    }

    prop_compose! {
        fn arb_hypergraph()(num_nodes in 2usize..12, num_edges in 1usize..16)(
            num_nodes in Just(num_nodes),
            edges in prop::collection::vec(
                (prop::collection::btree_set(0..num_nodes, 1..=num_nodes.min(5)), 0usize..4, 1u32..16),
                num_edges,
            ),
        ) -> Hypergraph {
            let triples: Vec<(Vec<usize>, Vec<usize>, f64)> = edges
                .into_iter()
                .map(|(pins, srcs, w)| {
                    let pins: Vec<usize> = pins.into_iter().collect();
                    let k = srcs.min(pins.len() - 1);
                    (pins[..k].to_vec(), pins[k..].to_vec(), w as f64 / 8.0)
                })
                .collect();
            Hypergraph::from_edges(num_nodes, &triples).unwrap()
        }
    }

    proptest! {
        #[test]
        fn pins_matrix_row_sums(hg in arb_hypergraph(), seed in 0u64..1000) {
            let assignment: Vec<PartId> = (0..hg.num_nodes())
                .map(|n| (n as u64 ^ seed) as usize % 3)
                .collect();
            let part = Partitioning::from_assignment_with_parts(&hg, assignment, 3);
            let all = build_pins_matrix(&hg, &part, PinsMode::All);
            let inb = build_pins_matrix(&hg, &part, PinsMode::Inbound);
            for e in 0..hg.num_edges() {
                let total: u32 = all.row(e).iter().map(|&(_, c)| c).sum();
                prop_assert_eq!(total as usize, hg.edge_pins(e).len());
                let dst: u32 = inb.row(e).iter().map(|&(_, c)| c).sum();
                prop_assert_eq!(dst as usize, hg.edge_dst(e).len());
            }
        }

        #[test]
        fn duality_and_renumbering(hg in arb_hypergraph(), seed in 0u64..1000) {
            let assignment: Vec<PartId> = (0..hg.num_nodes())
                .map(|n| (n as u64 ^ seed) as usize % 4)
                .collect();
            // Dyadic weights make the identity exact in floating point.
            let slack: f64 = (0..hg.num_edges())
                .map(|e| hg.edge_weight(e) * (hg.edge_pins(e).len() as f64 - 1.0))
                .sum();
            prop_assert_eq!(
                coarsening_score(&hg, &assignment) + connectivity(&hg, &assignment),
                slack
            );
            prop_assert!(cut_net(&hg, &assignment) <= connectivity(&hg, &assignment));
            // Metrics are invariant under renumbering of partition ids.
            let renumbered: Vec<PartId> = assignment.iter().map(|&p| 7 - p).collect();
            prop_assert_eq!(connectivity(&hg, &assignment), connectivity(&hg, &renumbered));
            prop_assert_eq!(cut_net(&hg, &assignment), cut_net(&hg, &renumbered));
        }
    }
}
