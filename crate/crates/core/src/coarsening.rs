//! Candidate pair proposal for coarsening.
//!
//! Each node scores its neighbors with a histogram over incident edges
//! (weight normalized by edge size, plus symmetric deterministic noise) and
//! keeps its top-ranked valid targets. Validity against the inbound-edge
//! limit is checked with an intersection counter tracked inline in the
//! histogram: `|in(n) ∪ in(m)| = |in(n)| + |in(m)| - inter(n, m)`.

use rayon::prelude::*;

use crate::hgraph::{Constraints, Hypergraph, IncidenceIndex, NodeId};
use crate::neighborhood::NeighborSets;

/// Knobs for candidate proposal.
#[derive(Debug, Clone)]
pub struct CoarseningParams {
    /// Candidates kept per node (proposal rounds).
    pub pi: usize,
    /// Noise cap as a fraction of mean edge weight; 0 disables noise.
    pub noise_cap_frac: f64,
    /// Seed for the pair-symmetric noise.
    pub seed: u64,
    /// Neighbors scored per histogram batch.
    pub batch_size: usize,
}

impl Default for CoarseningParams {
    fn default() -> Self {
        Self {
            pi: 4,
            noise_cap_frac: 0.1,
            seed: 0,
            batch_size: 1024,
        }
    }
}

/// One proposal round: per-node best target of that rank and its score.
#[derive(Debug, Clone)]
pub struct ProposalRound {
    pub target: Vec<Option<NodeId>>,
    pub score: Vec<f64>,
}

/// All proposal rounds plus the noise seed they were built with.
#[derive(Debug, Clone)]
pub struct ProposalGraph {
    pub rounds: Vec<ProposalRound>,
    pub seed: u64,
}

/// One scored neighbor: accumulated edge weight and the size of the inbound
/// set intersection.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramEntry {
    pub neighbor: NodeId,
    pub weight: f64,
    pub inter: usize,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Stateless pair-symmetric noise in `[0, cap)`, keyed by the seed and the
/// unordered node pair.
pub(crate) fn pair_noise(seed: u64, a: NodeId, b: NodeId, cap: f64) -> f64 {
    if cap <= 0.0 {
        return 0.0;
    }
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    let h = splitmix(splitmix(splitmix(seed) ^ lo as u64) ^ hi as u64);
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64) * cap
}

/// Builds the score histogram of node `n` over a batch of its neighbors.
///
/// `batch` must be a sorted subset of `n`'s unpurged neighbors. Each entry
/// accumulates `weight(e)/|e|` over incident edges containing the neighbor,
/// plus noise, and counts inbound edges of `n` that also reach the neighbor
/// as a destination.
pub fn build_histogram(
    hg: &Hypergraph,
    inc: &IncidenceIndex,
    n: NodeId,
    batch: &[NodeId],
    noise_cap: f64,
    seed: u64,
) -> Vec<HistogramEntry> {
    let mut weight = vec![0.0f64; batch.len()];
    let mut inter = vec![0usize; batch.len()];
    // Merge the inbound and outbound sublists into ascending edge-id order:
    // both endpoints of a pair then accumulate identical weights in the same
    // order, keeping the histogram bit-exactly symmetric.
    let inbound = inc.inbound(n);
    let outbound = inc.outbound(n);
    let (mut i, mut j) = (0, 0);
    while i < inbound.len() || j < outbound.len() {
        let take_inbound =
            j >= outbound.len() || (i < inbound.len() && inbound[i] < outbound[j]);
        let (e, from_inbound) = if take_inbound {
            i += 1;
            (inbound[i - 1], true)
        } else {
            j += 1;
            (outbound[j - 1], false)
        };
        let pins = hg.edge_pins(e);
        let w_norm = hg.edge_weight(e) / pins.len() as f64;
        let src_count = hg.src_count(e);
        for (pin_pos, &m) in pins.iter().enumerate() {
            if m == n {
                continue;
            }
            if let Ok(idx) = batch.binary_search(&m) {
                weight[idx] += w_norm;
                if from_inbound && pin_pos >= src_count {
                    inter[idx] += 1;
                }
            }
        }
    }
    batch
        .iter()
        .enumerate()
        .map(|(i, &m)| HistogramEntry {
            neighbor: m,
            weight: weight[i] + pair_noise(seed, n, m, noise_cap),
            inter: inter[i],
        })
        .collect()
}

/// Proposes up to `pi` valid pairing candidates per node, ordered by
/// descending score with higher id winning ties.
///
/// Returns the proposal rounds together with every `(node, neighbor)` pair
/// that failed a constraint check; such failures are monotone under
/// clustering and should be purged via [`NeighborSets::flag_purged`].
pub fn propose_candidates(
    hg: &Hypergraph,
    inc: &IncidenceIndex,
    ns: &NeighborSets,
    cons: &Constraints,
    params: &CoarseningParams,
) -> (ProposalGraph, Vec<(NodeId, NodeId)>) {
    assert!(params.pi >= 1);
    let noise_cap = params.noise_cap_frac * hg.mean_edge_weight();
    let n_nodes = hg.num_nodes();
    let per_node: Vec<(Vec<(f64, NodeId)>, Vec<(NodeId, NodeId)>)> = (0..n_nodes)
        .into_par_iter()
        .map(|n| {
            let candidates = ns.unpurged(n);
            let mut valid: Vec<(f64, NodeId)> = Vec::new();
            let mut invalid: Vec<(NodeId, NodeId)> = Vec::new();
            for batch in candidates.chunks(params.batch_size.max(1)) {
                for entry in build_histogram(hg, inc, n, batch, noise_cap, params.seed) {
                    let m = entry.neighbor;
                    let union = inc.in_count(n) + inc.in_count(m) - entry.inter;
                    if cons.size_ok(hg.node_size(n) + hg.node_size(m)) && cons.inbound_ok(union) {
                        valid.push((entry.weight, m));
                    } else {
                        invalid.push((n, m));
                    }
                }
            }
            valid.sort_unstable_by(|a, b| {
                b.0.partial_cmp(&a.0).unwrap().then_with(|| b.1.cmp(&a.1))
            });
            valid.truncate(params.pi);
            (valid, invalid)
        })
        .collect();

    let mut rounds: Vec<ProposalRound> = (0..params.pi)
        .map(|_| ProposalRound {
            target: vec![None; n_nodes],
            score: vec![0.0; n_nodes],
        })
        .collect();
    let mut purge_pairs = Vec::new();
    for (n, (valid, invalid)) in per_node.into_iter().enumerate() {
        for (i, (score, m)) in valid.into_iter().enumerate() {
            rounds[i].target[n] = Some(m);
            rounds[i].score[n] = score;
        }
        purge_pairs.extend(invalid);
    }
    (
        ProposalGraph {
            rounds,
            seed: params.seed,
        },
        purge_pairs,
    )
}

/// Best-effort pairing of nodes that found no candidates.
///
/// Nodes are sorted by descending size (ties by ascending id); each in turn
/// claims the first still-free listed node that fits the size limit and the
/// inbound limit, the latter overestimated by the sum of inbound set sizes.
pub fn leftover_pairing(
    hg: &Hypergraph,
    inc: &IncidenceIndex,
    cons: &Constraints,
    unpaired: &[NodeId],
) -> Vec<(NodeId, NodeId)> {
    let mut order: Vec<NodeId> = unpaired.to_vec();
    order.sort_unstable_by(|&a, &b| {
        hg.node_size(b)
            .cmp(&hg.node_size(a))
            .then_with(|| a.cmp(&b))
    });
    let mut claimed = vec![false; order.len()];
    let mut pairs = Vec::new();
    for i in 0..order.len() {
        if claimed[i] {
            continue;
        }
        let n = order[i];
        for j in 0..order.len() {
            if i == j || claimed[j] {
                continue;
            }
            let m = order[j];
            if cons.size_ok(hg.node_size(n) + hg.node_size(m))
                && cons.inbound_ok(inc.in_count(n) + inc.in_count(m))
            {
                claimed[i] = true;
                claimed[j] = true;
                pairs.push((n, m));
                break;
            }
        }
    }
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hgraph::{build_incidence, example_graph, Hypergraph};
    use crate::neighborhood::materialize_neighbors;
    use proptest::prelude::*;

    fn hist_for(hg: &Hypergraph, n: NodeId) -> Vec<HistogramEntry> {
        let inc = build_incidence(hg);
        let ns = materialize_neighbors(hg, &inc);
        let batch = ns.unpurged(n);
        build_histogram(hg, &inc, n, &batch, 0.0, 0)
    }

    #[test]
    fn histogram_on_example() {
        let hg = example_graph();
        let entries = hist_for(&hg, 2);
        let get = |m: NodeId| entries.iter().find(|e| e.neighbor == m).unwrap();
        assert_eq!(get(1).weight, 1.0 / 3.0 + 1.0);
        assert_eq!(get(0).weight, 1.0 / 3.0);
        assert_eq!(get(3).weight, 0.5);
        assert_eq!(get(1).inter, 1);
        assert_eq!(get(0).inter, 0);
        assert_eq!(get(3).inter, 0);
    }

    #[test]
    fn histogram_single_edge() {
        let hg = Hypergraph::from_edges(2, &[(vec![0], vec![1], 3.0)]).unwrap();
        let entries = hist_for(&hg, 0);
        assert_eq!(entries.len(), 1);
        assert_eq!(entries[0].weight, 1.5);
    }

    #[test]
    fn noise_is_pair_symmetric() {
        let hg = example_graph();
        let inc = build_incidence(&hg);
        let a = build_histogram(&hg, &inc, 2, &[1], 0.5, 42);
        let b = build_histogram(&hg, &inc, 1, &[2], 0.5, 42);
        assert_eq!(a[0].weight, b[0].weight);
        assert!(pair_noise(42, 1, 2, 0.5) < 0.5);
        assert_eq!(pair_noise(42, 1, 2, 0.5), pair_noise(42, 2, 1, 0.5));
    }

    fn propose_on_example(cons: Constraints, pi: usize) -> (ProposalGraph, Vec<(NodeId, NodeId)>) {
        let hg = example_graph();
        let inc = build_incidence(&hg);
        let ns = materialize_neighbors(&hg, &inc);
        let params = CoarseningParams {
            pi,
            noise_cap_frac: 0.0,
            ..Default::default()
        };
        propose_candidates(&hg, &inc, &ns, &cons, &params)
    }

    #[test]
    fn candidates_on_example() {
        let (pg, _) = propose_on_example(Constraints::new(Some(2), Some(2)), 1);
        assert_eq!(pg.rounds[0].target[2], Some(1));
        assert_eq!(pg.rounds[0].score[2], 1.0 / 3.0 + 1.0);
    }

    #[test]
    fn tight_inbound_limit_leaves_no_candidate() {
        let (pg, purged) = propose_on_example(Constraints::new(Some(2), Some(1)), 4);
        for round in &pg.rounds {
            assert_eq!(round.target[2], None);
        }
        // All three neighbors of node 2 fail the union check and are reported.
        let mut failed: Vec<NodeId> = purged
            .iter()
            .filter(|&&(n, _)| n == 2)
            .map(|&(_, m)| m)
            .collect();
        failed.sort_unstable();
        assert_eq!(failed, vec![0, 1, 3]);
    }

    #[test]
    fn score_ties_go_to_higher_id() {
        // Nodes 1 and 2 connect to node 0 through identical edges.
        let hg = Hypergraph::from_edges(
            3,
            &[(vec![], vec![0, 1], 1.0), (vec![], vec![0, 2], 1.0)],
        )
        .unwrap();
        let inc = build_incidence(&hg);
        let ns = materialize_neighbors(&hg, &inc);
        let params = CoarseningParams {
            pi: 1,
            noise_cap_frac: 0.0,
            ..Default::default()
        };
        let (pg, _) = propose_candidates(&hg, &inc, &ns, &Constraints::unbounded(), &params);
        assert_eq!(pg.rounds[0].target[0], Some(2));
    }

    #[test]
    fn proposal_invariants_round_one() {
        let (pg, _) = propose_on_example(Constraints::new(Some(2), Some(3)), 1);
        let round = &pg.rounds[0];
        for n in 0..round.target.len() {
            if let Some(t) = round.target[n] {
                assert_ne!(t, n);
                // Score never decreases along a target edge.
                if round.target[t].is_some() {
                    assert!(round.score[t] >= round.score[n]);
                }
            }
        }
        // All cycles have length exactly two (checked by the root finder).
        assert!(crate::matching::find_roots(&round.target).is_ok());
    }

    #[test]
    fn leftover_pairs_by_size() {
        // Three isolated nodes of sizes 3, 2, 1.
        let hg = Hypergraph::from_parts(3, vec![0], vec![], vec![], vec![], vec![3, 2, 1]).unwrap();
        let inc = build_incidence(&hg);
        let cons = Constraints::new(Some(4), None);
        let pairs = leftover_pairing(&hg, &inc, &cons, &[0, 1, 2]);
        assert_eq!(pairs, vec![(0, 2)]);
    }

    #[test]
    fn leftover_respects_limits() {
        let hg = Hypergraph::from_edges(2, &[]).unwrap();
        let inc = build_incidence(&hg);
        let roomy = Constraints::new(Some(2), Some(0));
        assert_eq!(leftover_pairing(&hg, &inc, &roomy, &[0, 1]), vec![(0, 1)]);
        let tight = Constraints::new(Some(1), None);
        assert!(leftover_pairing(&hg, &inc, &tight, &[0, 1]).is_empty());
    }

    proptest! {
        /// The inline intersection counter agrees with an explicit set
        /// intersection, and batching does not change the candidates.
        #[test]
        fn intersection_counter_and_batch_independence(
            edges in prop::collection::vec(
                (prop::collection::btree_set(0usize..8, 2..5), 0usize..3, 1u32..8),
                1..12,
            ),
            batch in 1usize..6,
        ) {
            let triples: Vec<(Vec<usize>, Vec<usize>, f64)> = edges
                .into_iter()
                .map(|(pins, srcs, w)| {
                    let pins: Vec<usize> = pins.into_iter().collect();
                    let k = srcs.min(pins.len() - 1);
                    (pins[..k].to_vec(), pins[k..].to_vec(), w as f64)
                })
                .collect();
            let hg = Hypergraph::from_edges(8, &triples).unwrap();
            let inc = build_incidence(&hg);
            let ns = materialize_neighbors(&hg, &inc);
            for n in 0..hg.num_nodes() {
                let all = ns.unpurged(n);
                for entry in build_histogram(&hg, &inc, n, &all, 0.0, 0) {
                    let m = entry.neighbor;
                    let in_n: std::collections::BTreeSet<_> = inc.inbound(n).iter().collect();
                    let in_m: std::collections::BTreeSet<_> = inc.inbound(m).iter().collect();
                    let union = in_n.union(&in_m).count();
                    prop_assert_eq!(
                        inc.in_count(n) + inc.in_count(m) - entry.inter,
                        union
                    );
                    // Histogram symmetry.
                    let back = build_histogram(&hg, &inc, m, &[n], 0.0, 0);
                    prop_assert_eq!(back[0].weight, entry.weight);
                }
            }
            let cons = Constraints::new(Some(4), Some(6));
            let base = CoarseningParams { pi: 2, noise_cap_frac: 0.1, seed: 7, batch_size: 1024 };
            let small = CoarseningParams { batch_size: batch, ..base.clone() };
            let (a, pa) = propose_candidates(&hg, &inc, &ns, &cons, &base);
            let (b, pb) = propose_candidates(&hg, &inc, &ns, &cons, &small);
            for (ra, rb) in a.rounds.iter().zip(&b.rounds) {
                prop_assert_eq!(&ra.target, &rb.target);
                prop_assert_eq!(&ra.score, &rb.score);
            }
            prop_assert_eq!(pa, pb);
        }
    }
}
