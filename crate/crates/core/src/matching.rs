//! Exact maximum-weight matching over a proposal round.
//!
//! Each round's target map is a functional graph whose cycles all have
//! length two, so every component is an in-forest hanging off a mutual root
//! pair (or off a terminal node once earlier rounds removed its target). Two
//! subtree values per node suffice for an exact dynamic program:
//!
//!   ss1(n) = best matching score of n's subtree with n matched to its target
//!   ss0(n) = best matching score of n's subtree with n not matched upward
//!
//! ss1 accumulates child ss0 values plus the node's own edge score; ss0 lets
//! the node instead match its best child when that child's ss1 - ss0 gain is
//! positive. Root pairs evaluate their shared edge once against the two
//! independent ss0 totals; the rest of the matching is settled top-down.

use crate::coarsening::ProposalGraph;
use crate::hgraph::NodeId;
use crate::{Error, Result};

/// Dynamic-program state and the resulting matching.
#[derive(Debug, Clone)]
pub struct MatchState {
    pub ss0: Vec<f64>,
    pub ss1: Vec<f64>,
    /// Per node, the child with the highest `ss1 - ss0` gain (gain, id);
    /// ties resolved toward the higher child id.
    pub best_child: Vec<Option<(f64, NodeId)>>,
    pub matched: Vec<Option<NodeId>>,
}

/// Finds the mutual root pairs of a round's target map, verifying on the way
/// that every cycle has length exactly two.
pub fn find_roots(target: &[Option<NodeId>]) -> Result<Vec<NodeId>> {
    let n = target.len();
    for (v, &t) in target.iter().enumerate() {
        if t == Some(v) {
            return Err(Error::Structure(format!("node {v} targets itself")));
        }
    }
    let mut state = vec![0u8; n]; // 0 unvisited, 1 on current path, 2 done
    let mut roots = Vec::new();
    let mut path = Vec::new();
    for s in 0..n {
        if state[s] != 0 {
            continue;
        }
        path.clear();
        let mut cur = s;
        loop {
            match state[cur] {
                1 => {
                    // Walked into the current path: `cur` lies on a new cycle.
                    let t = target[cur].unwrap();
                    if target[t] != Some(cur) {
                        return Err(Error::Structure(format!(
                            "cycle through node {cur} has length > 2"
                        )));
                    }
                    break;
                }
                2 => break,
                _ => {
                    state[cur] = 1;
                    path.push(cur);
                    match target[cur] {
                        Some(t) => cur = t,
                        None => break,
                    }
                }
            }
        }
        for &v in &path {
            state[v] = 2;
        }
    }
    for (v, &t) in target.iter().enumerate() {
        if let Some(t) = t {
            if target[t] == Some(v) {
                roots.push(v);
            }
        }
    }
    Ok(roots)
}

/// Solves the maximum-weight matching of one proposal round.
///
/// Nodes removed by earlier rounds must already have their target entries
/// cleared, with no remaining target pointing at them; such terminal nodes
/// act as arborescence roots that can only match downward.
pub fn solve_matching(target: &[Option<NodeId>], score: &[f64]) -> Result<MatchState> {
    let n = target.len();
    let roots = find_roots(target)?;
    let mut is_root = vec![false; n];
    for &r in &roots {
        is_root[r] = true;
    }

    let mut child_sum = vec![0.0f64; n];
    let mut best_child: Vec<Option<(f64, NodeId)>> = vec![None; n];
    let mut pending = vec![0usize; n];
    for (v, &t) in target.iter().enumerate() {
        if let Some(t) = t {
            if !is_root[v] {
                pending[t] += 1;
            }
        }
    }

    let mut ss0 = vec![0.0f64; n];
    let mut ss1 = vec![f64::NEG_INFINITY; n];
    let mut queue: Vec<NodeId> = (0..n)
        .filter(|&v| pending[v] == 0 && !is_root[v])
        .collect();
    let mut finished = vec![false; n];
    let mut head = 0;
    while head < queue.len() {
        let v = queue[head];
        head += 1;
        ss0[v] = child_sum[v] + best_child[v].map_or(0.0, |(g, _)| g.max(0.0));
        if let Some(t) = target[v] {
            ss1[v] = score[v] + child_sum[v];
            let gain = ss1[v] - ss0[v];
            // Claims combine as a lexicographic max on (gain, child id).
            if best_child[t].map_or(true, |(g, c)| (gain, v) > (g, c)) {
                best_child[t] = Some((gain, v));
            }
            child_sum[t] += ss0[v];
            pending[t] -= 1;
            if pending[t] == 0 && !is_root[t] {
                queue.push(t);
            }
        }
        finished[v] = true;
    }
    // Root pairs: settle values and the pair decision on the lower-id root.
    let mut matched: Vec<Option<NodeId>> = vec![None; n];
    for &r in &roots {
        let partner = target[r].unwrap();
        if r > partner {
            continue;
        }
        debug_assert!(pending[r] == 0 && pending[partner] == 0);
        for v in [r, partner] {
            ss0[v] = child_sum[v] + best_child[v].map_or(0.0, |(g, _)| g.max(0.0));
        }
        let pair_ss1 = score[r] + child_sum[r] + child_sum[partner];
        ss1[r] = pair_ss1;
        ss1[partner] = pair_ss1;
        if pair_ss1 > ss0[r] + ss0[partner] {
            matched[r] = Some(partner);
            matched[partner] = Some(r);
        } else {
            for v in [r, partner] {
                if let Some((gain, c)) = best_child[v] {
                    if gain > 0.0 {
                        matched[v] = Some(c);
                        matched[c] = Some(v);
                    }
                }
            }
        }
    }
    // Top-down sweep from roots and terminals: a node not claimed by its
    // parent falls back to its best child when that gain is positive.
    let mut children: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    for (v, &t) in target.iter().enumerate() {
        if let Some(t) = t {
            if !is_root[v] {
                children[t].push(v);
            }
        }
    }
    let mut stack: Vec<NodeId> = Vec::new();
    for v in 0..n {
        if is_root[v] || target[v].is_none() {
            stack.push(v);
        }
    }
    while let Some(v) = stack.pop() {
        if matched[v].is_none() && !is_root[v] {
            if let Some((gain, c)) = best_child[v] {
                if gain > 0.0 {
                    matched[v] = Some(c);
                    matched[c] = Some(v);
                }
            }
        }
        for &c in &children[v] {
            stack.push(c);
        }
    }
    Ok(MatchState {
        ss0,
        ss1,
        best_child,
        matched,
    })
}

/// Runs the matching over all proposal rounds. Round `i` only sees nodes
/// still unmatched after rounds `< i`: matched nodes lose their own targets
/// and any target pointing at them reverts to undefined.
pub fn run_rounds(pg: &ProposalGraph) -> Result<Vec<Option<NodeId>>> {
    let n = pg.rounds.first().map_or(0, |r| r.target.len());
    let mut matched: Vec<Option<NodeId>> = vec![None; n];
    for round in &pg.rounds {
        let mut target = round.target.clone();
        for v in 0..n {
            if matched[v].is_some() {
                target[v] = None;
            } else if let Some(t) = target[v] {
                if matched[t].is_some() {
                    target[v] = None;
                }
            }
        }
        let state = solve_matching(&target, &round.score)?;
        for v in 0..n {
            if let Some(m) = state.matched[v] {
                matched[v] = Some(m);
            }
        }
    }
    Ok(matched)
}

/// Total score of a matching over a round's proposal edges.
pub fn matching_total(
    target: &[Option<NodeId>],
    score: &[f64],
    matched: &[Option<NodeId>],
) -> f64 {
    let mut total = 0.0;
    for (v, &m) in matched.iter().enumerate() {
        if let Some(m) = m {
            if v < m {
                total += if target[v] == Some(m) { score[v] } else { score[m] };
            }
        }
    }
    total
}
