//! Brute-force reference implementations used by tests, the acceptance
//! suite, and the `baseline` CLI subcommand.
//!
//! These deliberately avoid the main modules' code paths: spans are counted
//! with hash sets, inbound sets are tracked as explicit edge-id sets, and
//! everything is recomputed from scratch at each step.

use std::collections::HashSet;

use crate::hgraph::{Constraints, Hypergraph, NodeId};
use crate::partition::PartId;
use crate::{Error, Result};

/// Exhaustive maximum-weight matching over a proposal round, for forests of
/// at most 20 nodes. Returns the best total and one optimal matching.
pub fn brute_matching(
    target: &[Option<NodeId>],
    score: &[f64],
) -> Result<(f64, Vec<Option<NodeId>>)> {
    if target.len() > 20 {
        return Err(Error::OracleLimit(format!(
            "brute_matching handles at most 20 nodes, got {}",
            target.len()
        )));
    }
    // Distinct undirected proposal edges with their scores.
    let mut edges: Vec<(NodeId, NodeId, f64)> = Vec::new();
    for (v, &t) in target.iter().enumerate() {
        if let Some(t) = t {
            if target[t] == Some(v) && t < v {
                continue; // mutual pair already recorded from the lower id
            }
            edges.push((v.min(t), v.max(t), score[v]));
        }
    }
    let mut best_total = 0.0f64;
    let mut best_used: Vec<(NodeId, NodeId)> = Vec::new();
    let mut used: Vec<(NodeId, NodeId)> = Vec::new();
    fn search(
        edges: &[(NodeId, NodeId, f64)],
        idx: usize,
        taken: &mut Vec<bool>,
        total: f64,
        used: &mut Vec<(NodeId, NodeId)>,
        best_total: &mut f64,
        best_used: &mut Vec<(NodeId, NodeId)>,
    ) {
        if idx == edges.len() {
            if total > *best_total {
                *best_total = total;
                *best_used = used.clone();
            }
            return;
        }
        let (a, b, w) = edges[idx];
        if !taken[a] && !taken[b] {
            taken[a] = true;
            taken[b] = true;
            used.push((a, b));
            search(edges, idx + 1, taken, total + w, used, best_total, best_used);
            used.pop();
            taken[a] = false;
            taken[b] = false;
        }
        search(edges, idx + 1, taken, total, used, best_total, best_used);
    }
    let mut taken = vec![false; target.len()];
    search(
        &edges,
        0,
        &mut taken,
        0.0,
        &mut used,
        &mut best_total,
        &mut best_used,
    );
    let mut matched = vec![None; target.len()];
    for (a, b) in best_used {
        matched[a] = Some(b);
        matched[b] = Some(a);
    }
    Ok((best_total, matched))
}

/// State after each step of a sequential move replay.
#[derive(Debug, Clone, PartialEq)]
pub struct SeqSnapshot {
    pub connectivity: f64,
    pub part_sizes: Vec<usize>,
    pub inbound_counts: Vec<usize>,
    pub violations: usize,
}

fn scratch_connectivity(hg: &Hypergraph, assignment: &[PartId]) -> f64 {
    let mut total = 0.0;
    for e in 0..hg.num_edges() {
        let parts: HashSet<PartId> = hg.edge_pins(e).iter().map(|&n| assignment[n]).collect();
        total += hg.edge_weight(e) * (parts.len() as f64 - 1.0);
    }
    total
}

fn scratch_state(
    hg: &Hypergraph,
    assignment: &[PartId],
    num_parts: usize,
    cons: &Constraints,
) -> SeqSnapshot {
    let mut part_sizes = vec![0usize; num_parts];
    for (n, &p) in assignment.iter().enumerate() {
        part_sizes[p] += hg.node_size(n);
    }
    let mut inbound_sets: Vec<HashSet<usize>> = vec![HashSet::new(); num_parts];
    for e in 0..hg.num_edges() {
        for &n in hg.edge_dst(e) {
            inbound_sets[assignment[n]].insert(e);
        }
    }
    let inbound_counts: Vec<usize> = inbound_sets.iter().map(|s| s.len()).collect();
    let mut violations = 0;
    for p in 0..num_parts {
        if !cons.size_ok(part_sizes[p]) {
            violations += 1;
        }
        if !cons.inbound_ok(inbound_counts[p]) {
            violations += 1;
        }
    }
    SeqSnapshot {
        connectivity: scratch_connectivity(hg, assignment),
        part_sizes,
        inbound_counts,
        violations,
    }
}

/// Applies `(node, destination)` moves one at a time, recomputing the full
/// state from scratch after each. Snapshot 0 is the initial state; snapshot
/// `i + 1` follows move `i`. Capped at 1000 moves.
pub fn simulate_sequence(
    hg: &Hypergraph,
    assignment: &[PartId],
    num_parts: usize,
    moves: &[(NodeId, PartId)],
    cons: &Constraints,
) -> Result<Vec<SeqSnapshot>> {
    if moves.len() > 1000 {
        return Err(Error::OracleLimit(format!(
            "simulate_sequence handles at most 1000 moves, got {}",
            moves.len()
        )));
    }
    let mut assignment = assignment.to_vec();
    let mut out = Vec::with_capacity(moves.len() + 1);
    out.push(scratch_state(hg, &assignment, num_parts, cons));
    for &(n, to) in moves {
        assignment[n] = to;
        out.push(scratch_state(hg, &assignment, num_parts, cons));
    }
    Ok(out)
}

/// One-pass baseline: a single sweep over nodes in id order, filling the
/// current partition until a constraint would break, then opening the next.
/// Inbound budgets are tracked with explicit edge-id set unions.
pub fn one_pass(hg: &Hypergraph, cons: &Constraints) -> Result<Vec<PartId>> {
    // Independent inbound lists, built directly from edge destinations.
    let mut inbound: Vec<Vec<usize>> = vec![Vec::new(); hg.num_nodes()];
    for e in 0..hg.num_edges() {
        for &n in hg.edge_dst(e) {
            inbound[n].push(e);
        }
    }
    let mut assignment = vec![0 as PartId; hg.num_nodes()];
    let mut cur_part = 0 as PartId;
    let mut cur_size = 0usize;
    let mut cur_inbound: HashSet<usize> = HashSet::new();
    for n in 0..hg.num_nodes() {
        let size = hg.node_size(n);
        if !cons.size_ok(size) || !cons.inbound_ok(inbound[n].len()) {
            return Err(Error::Infeasible {
                node: n,
                reason: "node alone exceeds a partition limit".into(),
            });
        }
        let merged: HashSet<usize> = cur_inbound
            .union(&inbound[n].iter().copied().collect())
            .copied()
            .collect();
        let fits = cur_size > 0
            && cons.size_ok(cur_size + size)
            && cons.inbound_ok(merged.len());
        if cur_size == 0 || fits {
            assignment[n] = cur_part;
            cur_size += size;
            cur_inbound = merged;
        } else {
            cur_part += 1;
            assignment[n] = cur_part;
            cur_size = size;
            cur_inbound = inbound[n].iter().copied().collect();
        }
    }
    Ok(assignment)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hgraph::example_graph;
    use crate::partition::{connectivity, validate_partitioning};

    #[test]
    fn brute_matching_basics() {
        let (total, _) = brute_matching(&[], &[]).unwrap();
        assert_eq!(total, 0.0);
        let (total, matched) =
            brute_matching(&[Some(1), Some(0)], &[3.0, 3.0]).unwrap();
        assert_eq!(total, 3.0);
        assert_eq!(matched[0], Some(1));
        let big = vec![None; 21];
        assert!(brute_matching(&big, &vec![0.0; 21]).is_err());
    }

    #[test]
    fn one_pass_on_example() {
        let hg = example_graph();
        let cons = Constraints::new(Some(2), Some(3));
        let parts = one_pass(&hg, &cons).unwrap();
        assert_eq!(parts, vec![0, 0, 1, 1]);
        assert!(validate_partitioning(&hg, &parts, &cons).is_valid());
        // Loose limits put everything together.
        let all = one_pass(&hg, &Constraints::new(Some(4), None)).unwrap();
        assert_eq!(all, vec![0, 0, 0, 0]);
        // A unit size limit isolates every node.
        let solo = one_pass(&hg, &Constraints::new(Some(1), None)).unwrap();
        assert_eq!(solo, vec![0, 1, 2, 3]);
    }

    #[test]
    fn one_pass_rejects_infeasible() {
        let hg = example_graph();
        // Node 2 alone has two inbound edges.
        let res = one_pass(&hg, &Constraints::new(None, Some(1)));
        assert!(matches!(res, Err(Error::Infeasible { node: 2, .. })));
    }

    #[test]
    fn simulate_matches_direct_metrics() {
        let hg = example_graph();
        let cons = Constraints::new(Some(3), Some(3));
        let snaps =
            simulate_sequence(&hg, &[0, 0, 1, 1], 2, &[(2, 0), (3, 0)], &cons).unwrap();
        assert_eq!(snaps.len(), 3);
        assert_eq!(snaps[0].connectivity, connectivity(&hg, &[0, 0, 1, 1]));
        assert_eq!(snaps[1].connectivity, connectivity(&hg, &[0, 0, 0, 1]));
        assert_eq!(snaps[2].connectivity, connectivity(&hg, &[0, 0, 0, 0]));
        assert_eq!(snaps[1].part_sizes, vec![3, 1]);
        assert_eq!(snaps[2].violations, 1); // p0 now has 4 > 3 nodes
    }
}
