//! Construction of the next coarsening level from a match map.

use crate::hgraph::{build_incidence, par_map_indexed, Hypergraph, IncidenceIndex, NodeId};
use crate::neighborhood::NeighborSets;

/// Fine-to-coarse node map for one level. Clusters hold one or two fine
/// nodes; coarse ids are assigned by ascending lowest member id.
#[derive(Debug, Clone)]
pub struct LevelMap {
    pub gamma: Vec<NodeId>,
    pub cluster_members: Vec<(NodeId, Option<NodeId>)>,
    pub level: usize,
}

impl LevelMap {
    pub fn num_coarse_nodes(&self) -> usize {
        self.cluster_members.len()
    }
}

/// Builds the cluster map from a symmetric match map: matched pairs share a
/// coarse node, unmatched nodes keep their own.
pub fn build_gamma(matched: &[Option<NodeId>], level: usize) -> LevelMap {
    let n = matched.len();
    let mut gamma = vec![usize::MAX; n];
    let mut cluster_members = Vec::new();
    for v in 0..n {
        match matched[v] {
            Some(m) if m < v => continue, // recorded from the lower id
            Some(m) => {
                debug_assert_eq!(matched[m], Some(v));
                let id = cluster_members.len();
                cluster_members.push((v, Some(m)));
                gamma[v] = id;
                gamma[m] = id;
            }
            None => {
                let id = cluster_members.len();
                cluster_members.push((v, None));
                gamma[v] = id;
            }
        }
    }
    LevelMap {
        gamma,
        cluster_members,
        level,
    }
}

/// Builds the coarse hypergraph and its incidence index.
///
/// Each fine edge maps its pins through the cluster map and deduplicates
/// them; a coarse pin appearing as both source and destination is kept only
/// as destination. Edges keeping at least one destination pin are retained
/// (a lone destination pin still occupies inbound budget); edges left with
/// no destinations and at most one source pin carry no weight against the
/// objective or the constraints and are dropped. Coarse pin segments are
/// sorted, and coarse node sizes accumulate their members' sizes.
pub fn coarsen_hypergraph(hg: &Hypergraph, lm: &LevelMap) -> (Hypergraph, IncidenceIndex) {
    let gamma = &lm.gamma;
    let coarse_edges: Vec<Option<(Vec<NodeId>, Vec<NodeId>, f64)>> =
        par_map_indexed(hg.num_edges(), |e| {
            let mut dst: Vec<NodeId> = hg.edge_dst(e).iter().map(|&n| gamma[n]).collect();
            dst.sort_unstable();
            dst.dedup();
            let mut src: Vec<NodeId> = hg.edge_src(e).iter().map(|&n| gamma[n]).collect();
            src.sort_unstable();
            src.dedup();
            src.retain(|p| dst.binary_search(p).is_err());
            if dst.is_empty() && src.len() <= 1 {
                None
            } else {
                Some((src, dst, hg.edge_weight(e)))
            }
        });

    let num_coarse = lm.num_coarse_nodes();
    let mut node_sizes = vec![0usize; num_coarse];
    for (c, &(a, b)) in lm.cluster_members.iter().enumerate() {
        node_sizes[c] = hg.node_size(a) + b.map_or(0, |b| hg.node_size(b));
    }

    let mut pin_offsets = Vec::new();
    let mut pin_data = Vec::new();
    let mut src_counts = Vec::new();
    let mut edge_weights = Vec::new();
    pin_offsets.push(0);
    for entry in coarse_edges.into_iter().flatten() {
        let (src, dst, w) = entry;
        src_counts.push(src.len());
        pin_data.extend(src);
        pin_data.extend(dst);
        pin_offsets.push(pin_data.len());
        edge_weights.push(w);
    }
    let coarse = Hypergraph::from_parts(
        num_coarse,
        pin_offsets,
        pin_data,
        src_counts,
        edge_weights,
        node_sizes,
    )
    .expect("coarse hypergraph construction preserves invariants");
    let inc = build_incidence(&coarse);
    (coarse, inc)
}

/// Builds coarse neighbor sets by merging members' fine sets through the
/// cluster map. A coarse entry purged on every merged fine occurrence is
/// filtered out entirely; surviving entries start unflagged.
pub fn coarsen_neighbors(ns: &NeighborSets, lm: &LevelMap) -> NeighborSets {
    let gamma = &lm.gamma;
    let segments = par_map_indexed(lm.num_coarse_nodes(), |c| {
        let (a, b) = lm.cluster_members[c];
        let mut items: Vec<(NodeId, bool)> = Vec::new();
        let mut extend = |n: NodeId| {
            for (i, &m) in ns.neighbors(n).iter().enumerate() {
                let cm = gamma[m];
                if cm != c {
                    items.push((cm, ns.flags(n)[i]));
                }
            }
        };
        extend(a);
        if let Some(b) = b {
            extend(b);
        }
        items.sort_unstable();
        let mut out = Vec::new();
        let mut i = 0;
        while i < items.len() {
            let id = items[i].0;
            let mut any_clear = false;
            while i < items.len() && items[i].0 == id {
                any_clear |= !items[i].1;
                i += 1;
            }
            if any_clear {
                out.push(id);
            }
        }
        out
    });
    NeighborSets::from_segments(segments)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hgraph::{build_incidence, example_graph};
    use crate::neighborhood::materialize_neighbors;
    use crate::partition::{connectivity, coarsening_score, cut_net};

    #[test]
    fn gamma_from_match() {
        let lm = build_gamma(&[Some(2), None, Some(0), None], 1);
        assert_eq!(lm.gamma, vec![0, 1, 0, 2]);
        assert_eq!(
            lm.cluster_members,
            vec![(0, Some(2)), (1, None), (3, None)]
        );
    }

    #[test]
    fn gamma_empty_match_is_identity_shaped() {
        let lm = build_gamma(&[None, None, None], 0);
        assert_eq!(lm.gamma, vec![0, 1, 2]);
        assert_eq!(lm.num_coarse_nodes(), 3);
    }

    #[test]
    fn gamma_perfect_matching_halves() {
        let lm = build_gamma(&[Some(1), Some(0), Some(3), Some(2)], 0);
        assert_eq!(lm.num_coarse_nodes(), 2);
    }

    /// Clusters {0}, {1,2}, {3} on the example graph.
    fn example_map() -> LevelMap {
        build_gamma(&[None, Some(2), Some(1), None], 1)
    }

    #[test]
    fn coarsen_example_collapses_internal_edge() {
        let hg = example_graph();
        let lm = example_map();
        assert_eq!(lm.gamma, vec![0, 1, 1, 2]);
        let (chg, cinc) = coarsen_hypergraph(&hg, &lm);
        assert_eq!(chg.num_nodes(), 3);
        assert_eq!(chg.num_edges(), 3);
        // e1 collapsed inside cluster 1: kept as a single destination pin.
        assert_eq!(chg.edge_src(1), &[] as &[usize]);
        assert_eq!(chg.edge_dst(1), &[1]);
        // The cluster counts e0 and e1 as distinct inbound edges.
        assert_eq!(cinc.inbound(1), &[0, 1]);
        assert_eq!(chg.node_size(1), 2);
        assert_eq!(chg.node_sizes(), &[1, 2, 1]);
    }

    #[test]
    fn identity_map_is_isomorphic() {
        let hg = example_graph();
        let lm = build_gamma(&[None; 4], 0);
        let (chg, _) = coarsen_hypergraph(&hg, &lm);
        assert_eq!(chg.num_nodes(), hg.num_nodes());
        assert_eq!(chg.num_edges(), hg.num_edges());
        for e in 0..hg.num_edges() {
            let mut src = hg.edge_src(e).to_vec();
            src.sort_unstable();
            assert_eq!(chg.edge_src(e), src.as_slice());
        }
    }

    #[test]
    fn parallel_edges_stay_distinct() {
        let hg = crate::hgraph::Hypergraph::from_edges(
            4,
            &[
                (vec![0], vec![2], 1.0),
                (vec![1], vec![3], 1.0),
            ],
        )
        .unwrap();
        // Clusters {0,1} and {2,3}: both edges coarsen to identical pin sets.
        let lm = build_gamma(&[Some(1), Some(0), Some(3), Some(2)], 1);
        let (chg, cinc) = coarsen_hypergraph(&hg, &lm);
        assert_eq!(chg.num_edges(), 2);
        assert_eq!(cinc.in_count(1), 2);
    }

    #[test]
    fn metrics_preserved_under_projection() {
        let hg = example_graph();
        let lm = example_map();
        let (chg, _) = coarsen_hypergraph(&hg, &lm);
        for coarse_assign in [[0, 1, 2], [0, 0, 1], [1, 0, 0], [0, 0, 0]] {
            let fine: Vec<usize> = lm.gamma.iter().map(|&c| coarse_assign[c]).collect();
            assert_eq!(
                connectivity(&chg, &coarse_assign),
                connectivity(&hg, &fine)
            );
            assert_eq!(cut_net(&chg, &coarse_assign), cut_net(&hg, &fine));
        }
    }

    #[test]
    fn size_conservation() {
        let hg = example_graph();
        let lm = example_map();
        let (chg, _) = coarsen_hypergraph(&hg, &lm);
        assert_eq!(
            chg.node_sizes().iter().sum::<usize>(),
            hg.node_sizes().iter().sum::<usize>()
        );
    }

    #[test]
    fn coarse_score_matches_fine_clustering() {
        // Cluster {1,2} recovers e1's weight plus one pin collapse in e0.
        let hg = example_graph();
        let lm = example_map();
        assert_eq!(coarsening_score(&hg, &lm.gamma), 3.0);
    }

    #[test]
    fn incidence_sizing_matches_recomputation() {
        // Counting coarse pin occurrences equals the incidence list sizes
        // recomputed from the coarse edges by explicit set scans.
        let hg = example_graph();
        let lm = example_map();
        let (chg, cinc) = coarsen_hypergraph(&hg, &lm);
        for n in 0..chg.num_nodes() {
            let mut incident: Vec<usize> = (0..chg.num_edges())
                .filter(|&e| chg.edge_pins(e).contains(&n))
                .collect();
            incident.sort_unstable();
            let mut got = cinc.incident(n).to_vec();
            got.sort_unstable();
            assert_eq!(got, incident);
            let inbound = (0..chg.num_edges())
                .filter(|&e| chg.edge_dst(e).contains(&n))
                .count();
            assert_eq!(cinc.in_count(n), inbound);
        }
    }

    #[test]
    fn coarse_neighbors_on_example() {
        let hg = example_graph();
        let inc = build_incidence(&hg);
        let ns = materialize_neighbors(&hg, &inc);
        let lm = example_map();
        let cns = coarsen_neighbors(&ns, &lm);
        assert_eq!(cns.neighbors(1), &[0, 2]);
        assert_eq!(cns.neighbors(0), &[1]);
        assert_eq!(cns.neighbors(2), &[1]);
    }

    #[test]
    fn singleton_clusters_keep_neighbors() {
        let hg = example_graph();
        let inc = build_incidence(&hg);
        let ns = materialize_neighbors(&hg, &inc);
        let lm = build_gamma(&[None; 4], 0);
        let cns = coarsen_neighbors(&ns, &lm);
        for n in 0..4 {
            assert_eq!(cns.neighbors(n), ns.neighbors(n));
        }
    }

    #[test]
    fn fully_flagged_entries_vanish() {
        let hg = example_graph();
        let inc = build_incidence(&hg);
        let mut ns = materialize_neighbors(&hg, &inc);
        // Node 3 is a neighbor of both members of cluster {1,2}? Only of 2,
        // so flagging (2,3) covers every occurrence.
        ns.flag_purged(&[(2, 3)]);
        let lm = example_map();
        let cns = coarsen_neighbors(&ns, &lm);
        assert_eq!(cns.neighbors(1), &[0]);
        // Flagging only one of two occurrences keeps the entry.
        let mut ns2 = materialize_neighbors(&hg, &inc);
        ns2.flag_purged(&[(1, 0)]); // 0 is also a neighbor of 2
        let cns2 = coarsen_neighbors(&ns2, &lm);
        assert_eq!(cns2.neighbors(1), &[0, 2]);
    }
}
