//! Move-based local refinement.
//!
//! Each pass proposes one move per node against the pins matrix, chains
//! moves source-to-destination into swaps and cyclic exchanges, re-evaluates
//! gains in sequence order, derives sparse size and inbound-pin events, and
//! applies the best prefix that lands on a constraint-valid state.

use std::collections::HashMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::hgraph::{Constraints, EdgeId, Hypergraph, IncidenceIndex, NodeId};
use crate::partition::{build_pins_matrix, connectivity, PartId, Partitioning, PinsMatrix, PinsMode};

/// A proposed node move. `gain` is the connectivity drop if the move were
/// applied alone; `gain_in_seq` assumes all earlier sequence moves applied.
#[derive(Debug, Clone)]
pub struct Move {
    pub node: NodeId,
    pub from: PartId,
    pub to: PartId,
    pub gain: f64,
    pub gain_in_seq: f64,
}

/// Moves in sequence order, with chain boundaries and cumulative in-sequence
/// gains per position.
#[derive(Debug, Clone, Default)]
pub struct MoveSequence {
    pub moves: Vec<Move>,
    pub chain_starts: Vec<usize>,
    pub cumulative: Vec<f64>,
}

impl MoveSequence {
    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }
}

/// Refinement knobs.
#[derive(Debug, Clone)]
pub struct RefineParams {
    /// Refinement passes per level; the first half propose without the size
    /// bound, the second half enforce it.
    pub theta: usize,
    /// Chain grade penalty on node size difference.
    pub alpha: f64,
    /// Chain grade penalty on inbound-degree difference.
    pub beta: f64,
    /// Successor candidates examined per chain tail.
    pub window: usize,
    /// Chain-growing rounds.
    pub chain_rounds: usize,
}

impl Default for RefineParams {
    fn default() -> Self {
        Self {
            theta: 16,
            alpha: 1e-6,
            beta: 1e-7,
            window: 256,
            chain_rounds: 16,
        }
    }
}

/// Proposes the best move per node.
///
/// `saving` collects weights of incident edges the node is the last pin of
/// in its partition; `loss` against a destination collects weights of
/// incident edges with no pins there. Candidate destinations are the
/// partitions adjacent through incident edges (any other destination has
/// nonpositive gain). Moves with nonpositive gain are still emitted so
/// chains can realize net-positive exchanges. With `enforce_size`,
/// destinations the node would overfill are skipped.
pub fn propose_moves(
    hg: &Hypergraph,
    inc: &IncidenceIndex,
    part: &Partitioning,
    pins_all: &PinsMatrix,
    cons: &Constraints,
    enforce_size: bool,
) -> Vec<Move> {
    let proposals: Vec<Option<Move>> = (0..hg.num_nodes())
        .into_par_iter()
        .map_init(Vec::new, |touched: &mut Vec<(PartId, f64)>, v| {
            let incident = inc.incident(v);
            if incident.is_empty() {
                return None;
            }
            let ps = part.part(v);
            let mut saving = 0.0f64;
            let mut total_w = 0.0f64;
            touched.clear();
            for &e in incident {
                let w = hg.edge_weight(e);
                total_w += w;
                let mut own = 0u32;
                for &(p, c) in pins_all.row(e) {
                    if p == ps {
                        own = c;
                    } else {
                        touched.push((p, w));
                    }
                }
                if own == 1 {
                    saving += w;
                }
            }
            if touched.is_empty() {
                return None;
            }
            touched.sort_by_key(|&(p, _)| p);
            let mut best: Option<(f64, PartId)> = None;
            let mut i = 0;
            while i < touched.len() {
                let p = touched[i].0;
                let mut present = 0.0f64;
                while i < touched.len() && touched[i].0 == p {
                    present += touched[i].1;
                    i += 1;
                }
                if enforce_size && !cons.size_ok(hg.node_size(v) + part.part_sizes()[p]) {
                    continue;
                }
                let gain = saving - (total_w - present);
                if best.map_or(true, |b| (gain, p) > b) {
                    best = Some((gain, p));
                }
            }
            best.map(|(gain, to)| Move {
                node: v,
                from: ps,
                to,
                gain,
                gain_in_seq: gain,
            })
        })
        .collect();
    proposals.into_iter().flatten().collect()
}

/// Chains moves source-to-destination and concatenates the chains into a
/// total order.
///
/// Moves are sorted by `(source partition, gain descending)`; over several
/// rounds each chain tail scans a window of still-free successor candidates
/// departing from its destination and claims the one with the best
/// compatibility grade. Conflicting claims resolve by the lexicographic max
/// of `(grade, moved node id)`. The resulting paths and cycles are ranked by
/// total in-isolation gain.
pub fn build_chains(
    mut moves: Vec<Move>,
    hg: &Hypergraph,
    inc: &IncidenceIndex,
    params: &RefineParams,
) -> MoveSequence {
    // (from, gain, node) is a total order: node ids are unique.
    moves.sort_unstable_by(|a, b| {
        a.from
            .cmp(&b.from)
            .then_with(|| b.gain.partial_cmp(&a.gain).unwrap())
            .then_with(|| b.node.cmp(&a.node))
    });
    let m = moves.len();
    // Per departure partition: the still-unclaimed candidate indices, kept
    // in segment order (gain descending) and compacted between rounds.
    let mut seg_of: HashMap<PartId, usize> = HashMap::new();
    let mut free: Vec<Vec<usize>> = Vec::new();
    let mut i = 0;
    while i < m {
        let p = moves[i].from;
        let start = i;
        while i < m && moves[i].from == p {
            i += 1;
        }
        seg_of.insert(p, free.len());
        free.push((start..i).collect());
    }

    let mut succ: Vec<Option<usize>> = vec![None; m];
    let mut pred: Vec<Option<usize>> = vec![None; m];
    // Best claimant per candidate, indexed by move; cleared between rounds.
    let mut winner: Vec<Option<(f64, NodeId, usize)>> = vec![None; m];
    // Per-move grade attributes, hoisted out of the round loop.
    let attrs: Vec<(f64, f64)> = moves
        .iter()
        .map(|mv| (hg.node_size(mv.node) as f64, inc.in_count(mv.node) as f64))
        .collect();
    // Active tails: moves without a successor that may still find one.
    // Claims only remove candidates, so a tail that finds none is done for
    // good.
    let mut active: Vec<usize> = (0..m).collect();
    for _ in 0..params.chain_rounds {
        if active.is_empty() {
            break;
        }
        let claims: Vec<Option<(usize, f64)>> = active
            .par_iter()
            .map(|&t| {
                let candidates = &free[*seg_of.get(&moves[t].to)?];
                let (t_size, t_in) = attrs[t];
                let mut best: Option<(f64, usize)> = None;
                for &j in candidates.iter().take(params.window) {
                    let cand = &moves[j];
                    // Gains descend along the segment and penalties only
                    // lower a grade, so nothing past this point can win.
                    if let Some((bg, _)) = best {
                        if bg > cand.gain {
                            break;
                        }
                    }
                    let (c_size, c_in) = attrs[j];
                    let grade = cand.gain
                        - params.alpha * (t_size - c_size).abs()
                        - params.beta * (t_in - c_in).abs();
                    if best.map_or(true, |(bg, bj): (f64, usize)| {
                        (grade, cand.node) > (bg, moves[bj].node)
                    }) {
                        best = Some((grade, j));
                    }
                }
                best.map(|(g, j)| (j, g))
            })
            .collect();
        // Resolve conflicting claims by (grade, claimant node id).
        let mut progressed = false;
        for (&t, claim) in active.iter().zip(&claims) {
            if let Some((j, grade)) = *claim {
                let key = (grade, moves[t].node, t);
                if winner[j].map_or(true, |(g, n, _)| (key.0, key.1) > (g, n)) {
                    winner[j] = Some(key);
                    progressed = true;
                }
            }
        }
        if !progressed {
            break;
        }
        // Each claimed slot is cleared by exactly its winning claimant.
        let mut touched_segs: Vec<usize> = Vec::new();
        for (&t, claim) in active.iter().zip(&claims) {
            if let Some((j, _)) = *claim {
                if let Some((_, _, w)) = winner[j] {
                    if w == t {
                        succ[t] = Some(j);
                        pred[j] = Some(t);
                        winner[j] = None;
                        touched_segs.push(seg_of[&moves[j].from]);
                    }
                }
            }
        }
        touched_segs.sort_unstable();
        touched_segs.dedup();
        for &s in &touched_segs {
            free[s].retain(|&j| pred[j].is_none());
        }
        active = active
            .iter()
            .zip(&claims)
            .filter(|&(&t, claim)| claim.is_some() && succ[t].is_none())
            .map(|(&t, _)| t)
            .collect();
    }

    // Extract paths from their heads, then remaining cycles; a cycle leads
    // with its best (gain, node id) move.
    let mut visited = vec![false; m];
    let mut chains: Vec<(f64, usize, usize)> = Vec::new(); // (total, lead, len)
    for start in 0..m {
        if pred[start].is_some() {
            continue;
        }
        let mut total = 0.0;
        let mut len = 0;
        let mut cur = Some(start);
        while let Some(c) = cur {
            visited[c] = true;
            total += moves[c].gain;
            len += 1;
            cur = succ[c];
        }
        chains.push((total, start, len));
    }
    for start in 0..m {
        if visited[start] {
            continue;
        }
        let mut total = 0.0;
        let mut len = 0;
        let mut lead = start;
        let mut c = start;
        loop {
            visited[c] = true;
            total += moves[c].gain;
            len += 1;
            if (moves[c].gain, moves[c].node) > (moves[lead].gain, moves[lead].node) {
                lead = c;
            }
            c = succ[c].expect("cycle moves always have successors");
            if c == start {
                break;
            }
        }
        chains.push((total, lead, len));
    }
    chains.sort_unstable_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap()
            .then_with(|| moves[b.1].node.cmp(&moves[a.1].node))
    });

    let mut seq = MoveSequence::default();
    seq.moves.reserve(m);
    for &(_, lead, len) in &chains {
        seq.chain_starts.push(seq.moves.len());
        let mut c = lead;
        for _ in 0..len {
            seq.moves.push(moves[c].clone());
            c = succ[c].unwrap_or(usize::MAX);
        }
    }
    seq
}

/// Recomputes each move's gain as if all earlier sequence moves were
/// applied.
///
/// For every incident edge, the counts of earlier-moving pins leaving or
/// entering the move's two partitions correct the isolated gain in four
/// independent ways: a saving claimed on a now-repopulated source is
/// dropped, a saving appears when the node has become the last pin in its
/// source, a loss is waived when an earlier pin already entered the
/// destination, and a cut is re-paid when entering a partition the edge has
/// meanwhile fully left. Cumulative prefix gains equal the exact
/// connectivity delta of applying the prefix.
pub fn in_sequence_gains(
    hg: &Hypergraph,
    inc: &IncidenceIndex,
    pins_all: &PinsMatrix,
    seq: &mut MoveSequence,
) {
    // Compact per-node move records keep the random lookups cache-friendly;
    // `pos = u32::MAX` marks nodes without a move.
    #[derive(Clone, Copy)]
    struct Rec {
        pos: u32,
        from: u32,
        to: u32,
    }
    let mut info: Vec<Rec> = vec![
        Rec {
            pos: u32::MAX,
            from: 0,
            to: 0
        };
        hg.num_nodes()
    ];
    for (i, mv) in seq.moves.iter().enumerate() {
        info[mv.node] = Rec {
            pos: i as u32,
            from: mv.from as u32,
            to: mv.to as u32,
        };
    }
    let gains: Vec<f64> = seq
        .moves
        .par_iter()
        .enumerate()
        .map(|(i, mv)| {
            let (v, ps, pd) = (mv.node, mv.from as u32, mv.to as u32);
            let mut gain = mv.gain;
            for &e in inc.incident(v) {
                let w = hg.edge_weight(e);
                let dst_cnt = pins_all.count(e, pd as PartId) as i64;
                let src_cnt = pins_all.count(e, ps as PartId) as i64;
                let (mut leave_pd, mut enter_pd, mut leave_ps, mut enter_ps) = (0i64, 0, 0, 0);
                for &pin in hg.edge_pins(e) {
                    if pin == v {
                        continue;
                    }
                    let rec = info[pin];
                    if (rec.pos as usize) < i {
                        if rec.from == pd {
                            leave_pd += 1;
                        }
                        if rec.to == pd {
                            enter_pd += 1;
                        }
                        if rec.from == ps {
                            leave_ps += 1;
                        }
                        if rec.to == ps {
                            enter_ps += 1;
                        }
                    }
                }
                if src_cnt == 1 && enter_ps > 0 {
                    gain -= w;
                }
                if src_cnt > 1 && leave_ps - enter_ps == src_cnt - 1 {
                    gain += w;
                }
                if dst_cnt == 0 && enter_pd > 0 {
                    gain += w;
                }
                if dst_cnt > 0 && leave_pd - enter_pd == dst_cnt {
                    gain -= w;
                }
            }
            gain
        })
        .collect();
    let mut acc = 0.0;
    seq.cumulative.clear();
    for (mv, g) in seq.moves.iter_mut().zip(gains) {
        mv.gain_in_seq = g;
        acc += g;
        seq.cumulative.push(acc);
    }
}

/// A partition-size change caused by one move. Ids are stored as `u32` to
/// keep event streams compact.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SizeEvent {
    pub part: u32,
    pub pos: u32,
    pub delta: i64,
}

/// An inbound pin-count change of one edge in one partition.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PinEvent {
    pub part: u32,
    pub edge: u32,
    pub pos: u32,
    pub delta: i32,
}

/// Sparse constraint events for a move sequence,
/// sorted by `(part, pos)` and `(part, edge, pos)` respectively.
#[derive(Debug, Clone, Default)]
pub struct EventStream {
    pub size_events: Vec<SizeEvent>,
    pub pin_events: Vec<PinEvent>,
}

/// Emits the event multiset of a sequence: two size events per move and two
/// inbound pin events per inbound edge of the moved node.
pub fn generate_events(hg: &Hypergraph, inc: &IncidenceIndex, seq: &MoveSequence) -> EventStream {
    let mut ev = EventStream::default();
    let pin_count: usize = seq
        .moves
        .iter()
        .map(|mv| 2 * inc.in_count(mv.node))
        .sum();
    ev.size_events.reserve_exact(2 * seq.len());
    ev.pin_events.reserve_exact(pin_count);
    for (pos, mv) in seq.moves.iter().enumerate() {
        let size = hg.node_size(mv.node) as i64;
        let pos = pos as u32;
        ev.size_events.push(SizeEvent {
            part: mv.from as u32,
            pos,
            delta: -size,
        });
        ev.size_events.push(SizeEvent {
            part: mv.to as u32,
            pos,
            delta: size,
        });
        for &e in inc.inbound(mv.node) {
            ev.pin_events.push(PinEvent {
                part: mv.from as u32,
                edge: e as u32,
                pos,
                delta: -1,
            });
            ev.pin_events.push(PinEvent {
                part: mv.to as u32,
                edge: e as u32,
                pos,
                delta: 1,
            });
        }
    }
    // Events were emitted in ascending position order, so stable counting
    // sorts by edge then by part yield the canonical (part, pos) and
    // (part, edge, pos) orders.
    let num_parts = seq
        .moves
        .iter()
        .map(|m| m.from.max(m.to) + 1)
        .max()
        .unwrap_or(0);
    counting_sort(&mut ev.size_events, num_parts, |e| e.part as usize);
    counting_sort(&mut ev.pin_events, hg.num_edges(), |e| e.edge as usize);
    counting_sort(&mut ev.pin_events, num_parts, |e| e.part as usize);
    ev
}

/// Stable counting sort by a bounded key, in place via one scatter pass.
fn counting_sort<T: Copy + Default, K: Fn(&T) -> usize>(
    items: &mut Vec<T>,
    range: usize,
    key: K,
) {
    let mut counts = vec![0usize; range + 1];
    for item in items.iter() {
        counts[key(item) + 1] += 1;
    }
    for i in 1..counts.len() {
        counts[i] += counts[i - 1];
    }
    let mut out = vec![T::default(); items.len()];
    for item in items.iter() {
        let k = key(item);
        out[counts[k]] = *item;
        counts[k] += 1;
    }
    *items = out;
}

/// Per-position constraint standing of a sequence.
#[derive(Debug, Clone)]
pub struct SequenceValidation {
    /// Active (partition, constraint) violations after each move.
    pub violation_counts: Vec<usize>,
    /// Positions that are legal landing points.
    pub legal: Vec<bool>,
    /// `(part, pos, size)` after each size event, in event order.
    pub size_trace: Vec<(PartId, usize, usize)>,
    /// `(part, pos, distinct inbound)` at each change, in event order.
    pub inbound_trace: Vec<(PartId, usize, usize)>,
}

/// Walks the event streams with segmented prefix sums to produce per-move
/// partition sizes, distinct-inbound counts (from zero crossings of the
/// seeded pin counts), and the running violation count. A position is a
/// legal landing point iff no violation is active after it.
pub fn validate_sequence(
    ev: &EventStream,
    part: &Partitioning,
    pins_in: &PinsMatrix,
    cons: &Constraints,
    seq_len: usize,
) -> SequenceValidation {
    assert_eq!(pins_in.mode(), PinsMode::Inbound);
    let mut flips = vec![0i64; seq_len];
    let mut initial = 0i64;
    for p in 0..part.num_parts() {
        if !cons.size_ok(part.part_sizes()[p]) {
            initial += 1;
        }
        if !cons.inbound_ok(part.part_inbound_counts()[p]) {
            initial += 1;
        }
    }

    let mut size_trace = Vec::with_capacity(ev.size_events.len());
    let mut i = 0;
    while i < ev.size_events.len() {
        let p = ev.size_events[i].part;
        let mut cur = part.part_sizes()[p as usize] as i64;
        let mut ok = cons.size_ok(cur as usize);
        while i < ev.size_events.len() && ev.size_events[i].part == p {
            cur += ev.size_events[i].delta;
            debug_assert!(cur >= 0);
            let now = cons.size_ok(cur as usize);
            if ok && !now {
                flips[ev.size_events[i].pos as usize] += 1;
            } else if !ok && now {
                flips[ev.size_events[i].pos as usize] -= 1;
            }
            ok = now;
            size_trace.push((p as PartId, ev.size_events[i].pos as usize, cur as usize));
            i += 1;
        }
    }

    // Zero crossings of per-(part, edge) inbound pin counts become distinct
    // inbound-count deltas. Walking the (part, edge, pos)-sorted stream
    // yields them grouped by part already; one stable counting sort by
    // position restores (part, pos) order.
    #[derive(Clone, Copy, Default)]
    struct Derived {
        part: u32,
        pos: u32,
        delta: i8,
    }
    let mut derived: Vec<Derived> = Vec::new();
    let mut i = 0;
    while i < ev.pin_events.len() {
        let (p, e) = (ev.pin_events[i].part, ev.pin_events[i].edge);
        let mut cur = pins_in.count(e as EdgeId, p as PartId) as i64;
        while i < ev.pin_events.len()
            && ev.pin_events[i].part == p
            && ev.pin_events[i].edge == e
        {
            let before = cur;
            cur += ev.pin_events[i].delta as i64;
            debug_assert!(cur >= 0);
            if before == 1 && cur == 0 {
                derived.push(Derived { part: p, pos: ev.pin_events[i].pos, delta: -1 });
            } else if before == 0 && cur == 1 {
                derived.push(Derived { part: p, pos: ev.pin_events[i].pos, delta: 1 });
            }
            i += 1;
        }
    }
    counting_sort(&mut derived, seq_len, |d| d.pos as usize);
    counting_sort(&mut derived, part.num_parts(), |d| d.part as usize);
    let mut inbound_trace = Vec::new();
    let mut i = 0;
    while i < derived.len() {
        let p = derived[i].part;
        let mut cur = part.part_inbound_counts()[p as usize] as i64;
        let mut ok = cons.inbound_ok(cur as usize);
        while i < derived.len() && derived[i].part == p {
            // All deltas of one position apply before judging validity.
            let pos = derived[i].pos;
            while i < derived.len() && derived[i].part == p && derived[i].pos == pos {
                cur += derived[i].delta as i64;
                i += 1;
            }
            debug_assert!(cur >= 0);
            let now = cons.inbound_ok(cur as usize);
            if ok && !now {
                flips[pos as usize] += 1;
            } else if !ok && now {
                flips[pos as usize] -= 1;
            }
            ok = now;
            inbound_trace.push((p as PartId, pos as usize, cur as usize));
        }
    }

    let mut violation_counts = Vec::with_capacity(seq_len);
    let mut legal = Vec::with_capacity(seq_len);
    let mut running = initial;
    for k in 0..seq_len {
        running += flips[k];
        debug_assert!(running >= 0);
        violation_counts.push(running as usize);
        legal.push(running == 0);
    }
    SequenceValidation {
        violation_counts,
        legal,
        size_trace,
        inbound_trace,
    }
}

/// Applies the moves up to the legal landing position of maximum cumulative
/// gain (ties broken toward the shortest prefix), updating the assignment,
/// both ledgers, and both pins matrices in place. Applies nothing when no
/// legal position has positive gain. Returns the number of moves applied.
pub fn apply_best_prefix(
    hg: &Hypergraph,
    inc: &IncidenceIndex,
    seq: &MoveSequence,
    val: &SequenceValidation,
    part: &mut Partitioning,
    pins_all: &mut PinsMatrix,
    pins_in: &mut PinsMatrix,
) -> usize {
    let mut best: Option<(f64, usize)> = None;
    for k in 0..seq.len() {
        if val.legal[k] && best.map_or(true, |(bc, _)| seq.cumulative[k] > bc) {
            best = Some((seq.cumulative[k], k));
        }
    }
    let Some((gain, k)) = best else { return 0 };
    if gain <= 0.0 {
        return 0;
    }
    for mv in &seq.moves[..=k] {
        part.reassign(hg, mv.node, mv.to);
        for &e in inc.incident(mv.node) {
            pins_all.adjust(e, mv.from, -1);
            pins_all.adjust(e, mv.to, 1);
        }
        for &e in inc.inbound(mv.node) {
            let before_from = pins_in.adjust(e, mv.from, -1);
            if before_from == 1 {
                part.inbound_delta(mv.from, -1);
            }
            let before_to = pins_in.adjust(e, mv.to, 1);
            if before_to == 0 {
                part.inbound_delta(mv.to, 1);
            }
        }
    }
    #[cfg(debug_assertions)]
    verify_touched_rows(hg, inc, part, pins_all, pins_in, &seq.moves[..=k]);
    k + 1
}

/// Recomputes the pins rows of every edge touched by the applied prefix from
/// the assignment and compares them with the incrementally maintained ones.
#[cfg(debug_assertions)]
fn verify_touched_rows(
    hg: &Hypergraph,
    inc: &IncidenceIndex,
    part: &Partitioning,
    pins_all: &PinsMatrix,
    pins_in: &PinsMatrix,
    applied: &[Move],
) {
    use std::collections::HashSet;
    let mut touched: HashSet<EdgeId> = HashSet::new();
    for mv in applied {
        touched.extend(inc.incident(mv.node).iter().copied());
    }
    for &e in &touched {
        for (matrix, pins) in [
            (pins_all, hg.edge_pins(e)),
            (pins_in, hg.edge_dst(e)),
        ] {
            let mut scratch: Vec<PartId> = pins.iter().map(|&n| part.part(n)).collect();
            scratch.sort_unstable();
            let mut expect: Vec<(PartId, u32)> = Vec::new();
            for p in scratch {
                match expect.last_mut() {
                    Some(last) if last.0 == p => last.1 += 1,
                    _ => expect.push((p, 1)),
                }
            }
            assert_eq!(matrix.row(e), expect.as_slice(), "pins row drift on edge {e}");
        }
    }
}

/// Per-pass refinement statistics.
#[derive(Debug, Clone, Serialize)]
pub struct PassStats {
    pub pass: usize,
    pub enforce_size: bool,
    pub proposed: usize,
    pub applied: usize,
    pub connectivity_after: f64,
}

/// Wall-clock seconds spent in each refinement phase.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct RefineTimings {
    pub propose: f64,
    pub chains: f64,
    pub gains: f64,
    pub events: f64,
    pub apply: f64,
}

/// Runs the full refinement schedule on one level: `theta` passes of
/// propose, chain, in-sequence gains, events, and prefix application. The
/// first half of the passes proposes without the size bound; landing-point
/// validation enforces both constraints throughout, so connectivity never
/// increases and a valid starting state stays valid.
pub fn refine_level(
    hg: &Hypergraph,
    inc: &IncidenceIndex,
    part: &mut Partitioning,
    cons: &Constraints,
    params: &RefineParams,
) -> (Vec<PassStats>, RefineTimings) {
    let mut stats = Vec::new();
    let mut timings = RefineTimings::default();
    if params.theta == 0 {
        return (stats, timings);
    }
    let mut pins_all = build_pins_matrix(hg, part, PinsMode::All);
    let mut pins_in = build_pins_matrix(hg, part, PinsMode::Inbound);
    let relaxed_passes = params.theta.div_ceil(2);
    let mut pass = 0;
    while pass < params.theta {
        let enforce = pass >= relaxed_passes;
        let t0 = Instant::now();
        let moves = propose_moves(hg, inc, part, &pins_all, cons, enforce);
        timings.propose += t0.elapsed().as_secs_f64();
        let proposed = moves.len();
        let t1 = Instant::now();
        let mut seq = build_chains(moves, hg, inc, params);
        timings.chains += t1.elapsed().as_secs_f64();
        let t2 = Instant::now();
        in_sequence_gains(hg, inc, &pins_all, &mut seq);
        timings.gains += t2.elapsed().as_secs_f64();
        let t3 = Instant::now();
        let ev = generate_events(hg, inc, &seq);
        let val = validate_sequence(&ev, part, &pins_in, cons, seq.len());
        timings.events += t3.elapsed().as_secs_f64();
        let t4 = Instant::now();
        let applied = apply_best_prefix(hg, inc, &seq, &val, part, &mut pins_all, &mut pins_in);
        timings.apply += t4.elapsed().as_secs_f64();
        stats.push(PassStats {
            pass,
            enforce_size: enforce,
            proposed,
            applied,
            connectivity_after: connectivity(hg, part.assignment()),
        });
        if applied == 0 {
            if enforce {
                break; // fixed point: later passes would replay identically
            }
            pass = relaxed_passes;
            continue;
        }
        pass += 1;
    }
    (stats, timings)
}
