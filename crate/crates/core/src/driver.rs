//! Multi-level orchestration: coarsen, take initial partitions, project
//! back, and refine, for both the constrained and the k-way balanced modes.
//!
//! Levels proceed strictly in sequence; all parallelism lives inside the
//! phase modules, and every phase produces thread-count-independent output,
//! so a run is fully determined by `(input, config, seed)`.

use std::time::Instant;

use serde::Serialize;

use crate::coarse::{build_gamma, coarsen_hypergraph, coarsen_neighbors, LevelMap};
use crate::coarsening::{leftover_pairing, propose_candidates, CoarseningParams};
use crate::hgraph::{build_incidence, Constraints, Hypergraph, IncidenceIndex, NodeId};
use crate::matching::run_rounds;
use crate::neighborhood::materialize_neighbors;
use crate::partition::{
    connectivity, cut_net, validate_partitioning, PartId, Partitioning,
};
use crate::refinement::{refine_level, PassStats, RefineParams};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Constrained,
    KWay,
}

/// Full configuration of a partitioning run.
#[derive(Debug, Clone)]
pub struct PartitionerConfig {
    pub mode: Mode,
    /// Maximum partition size (constrained mode); `None` is unbounded.
    pub omega: Option<usize>,
    /// Maximum distinct inbound edges per partition; `None` is unbounded.
    pub delta: Option<usize>,
    /// Partition count (k-way mode).
    pub k: usize,
    /// Balance slack (k-way mode).
    pub epsilon: f64,
    /// Pairing candidates per node.
    pub pi: usize,
    /// Refinement passes per level.
    pub theta: usize,
    pub seed: u64,
    /// Score noise cap as a fraction of mean edge weight.
    pub noise_cap_frac: f64,
    /// Histogram batch size.
    pub batch_size: usize,
    /// Chain grade size penalty.
    pub alpha: f64,
    /// Chain grade inbound-degree penalty.
    pub beta: f64,
    /// Chain successor window.
    pub window: usize,
    pub chain_rounds: usize,
    /// Coarsening halts below this node count in k-way mode.
    pub kway_halt: usize,
    /// Coarsening stops once a level matches less than this fraction.
    pub stall_fraction: f64,
}

impl Default for PartitionerConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Constrained,
            omega: None,
            delta: None,
            k: 2,
            epsilon: 0.03,
            pi: 4,
            theta: 16,
            seed: 0,
            noise_cap_frac: 0.1,
            batch_size: 1024,
            alpha: 1e-6,
            beta: 1e-7,
            window: 256,
            chain_rounds: 16,
            kway_halt: 4096,
            stall_fraction: 0.005,
        }
    }
}

impl PartitionerConfig {
    fn coarsening_params(&self) -> CoarseningParams {
        CoarseningParams {
            pi: self.pi,
            noise_cap_frac: self.noise_cap_frac,
            seed: self.seed,
            batch_size: self.batch_size,
        }
    }

    fn refine_params(&self) -> RefineParams {
        RefineParams {
            theta: self.theta,
            alpha: self.alpha,
            beta: self.beta,
            window: self.window,
            chain_rounds: self.chain_rounds,
        }
    }
}

/// One level of the multi-level hierarchy. `from_finer` maps the previous
/// (finer) level's nodes onto this one; the input level has none.
#[derive(Debug)]
pub struct LevelData {
    pub hg: Hypergraph,
    pub inc: IncidenceIndex,
    pub from_finer: Option<LevelMap>,
}

/// The coarsening hierarchy, level 0 being the input.
#[derive(Debug)]
pub struct LevelStack {
    pub levels: Vec<LevelData>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelStats {
    pub nodes: usize,
    pub edges: usize,
    pub pins: usize,
    /// Fraction of this level's nodes clustered when coarsening from it.
    pub matched_fraction: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PassRecord {
    pub level: usize,
    #[serde(flatten)]
    pub stats: PassStats,
}

/// Wall-clock seconds per pipeline phase.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct Timings {
    pub neighbors: f64,
    pub candidates: f64,
    pub matching: f64,
    pub coarse_build: f64,
    pub refine_propose: f64,
    pub refine_chains: f64,
    pub refine_gains: f64,
    pub refine_events: f64,
    pub refine_apply: f64,
    pub total: f64,
}

/// Machine-readable record of one run.
#[derive(Debug, Clone, Serialize)]
pub struct RunStats {
    pub schema_version: u32,
    pub mode: Mode,
    pub levels: Vec<LevelStats>,
    pub passes: Vec<PassRecord>,
    pub connectivity: f64,
    pub cut_net: f64,
    pub partition_count: usize,
    pub timings: Timings,
}

/// Coarsens until `min_nodes` is reached, a level produces no clusters, or
/// the matched fraction stalls. Returns the hierarchy and per-level stats.
pub fn build_level_stack(
    hg: &Hypergraph,
    cons: &Constraints,
    cfg: &PartitionerConfig,
    min_nodes: usize,
    timings: &mut Timings,
) -> Result<(LevelStack, Vec<LevelStats>)> {
    let mut levels = vec![LevelData {
        hg: hg.clone(),
        inc: build_incidence(hg),
        from_finer: None,
    }];
    let mut stats = vec![LevelStats {
        nodes: hg.num_nodes(),
        edges: hg.num_edges(),
        pins: hg.num_pins(),
        matched_fraction: 0.0,
    }];
    let mut carried_ns = None;
    let params = cfg.coarsening_params();
    loop {
        let cur = levels.last().unwrap();
        let n = cur.hg.num_nodes();
        if n <= min_nodes {
            break;
        }
        let t0 = Instant::now();
        let mut ns = match carried_ns.take() {
            Some(ns) => ns,
            None => materialize_neighbors(&cur.hg, &cur.inc),
        };
        timings.neighbors += t0.elapsed().as_secs_f64();

        let t1 = Instant::now();
        let (pg, invalid) = propose_candidates(&cur.hg, &cur.inc, &ns, cons, &params);
        ns.flag_purged(&invalid);
        timings.candidates += t1.elapsed().as_secs_f64();

        let t2 = Instant::now();
        let mut matched = run_rounds(&pg)?;
        let unpaired: Vec<NodeId> = (0..n)
            .filter(|&v| pg.rounds[0].target[v].is_none() && matched[v].is_none())
            .collect();
        for (a, b) in leftover_pairing(&cur.hg, &cur.inc, cons, &unpaired) {
            matched[a] = Some(b);
            matched[b] = Some(a);
        }
        timings.matching += t2.elapsed().as_secs_f64();

        let matched_count = matched.iter().filter(|m| m.is_some()).count();
        if matched_count == 0 {
            break;
        }
        let fraction = matched_count as f64 / n as f64;
        stats.last_mut().unwrap().matched_fraction = fraction;

        let t3 = Instant::now();
        let lm = build_gamma(&matched, levels.len());
        let (chg, cinc) = coarsen_hypergraph(&cur.hg, &lm);
        carried_ns = Some(coarsen_neighbors(&ns, &lm));
        timings.coarse_build += t3.elapsed().as_secs_f64();

        stats.push(LevelStats {
            nodes: chg.num_nodes(),
            edges: chg.num_edges(),
            pins: chg.num_pins(),
            matched_fraction: 0.0,
        });
        levels.push(LevelData {
            hg: chg,
            inc: cinc,
            from_finer: Some(lm),
        });
        if fraction < cfg.stall_fraction {
            break;
        }
    }
    Ok((LevelStack { levels }, stats))
}

/// Projects a coarse-level partitioning one level down, rebuilding the
/// ledgers from scratch on the finer hypergraph. Connectivity is invariant
/// under projection.
pub fn project(coarse: &Partitioning, lm: &LevelMap, fine_hg: &Hypergraph) -> Partitioning {
    let assignment: Vec<PartId> = lm.gamma.iter().map(|&c| coarse.part(c)).collect();
    Partitioning::from_assignment_with_parts(fine_hg, assignment, coarse.num_parts())
}

/// Projects through the stack from the top level down to level 0, refining
/// at each level on the way. `refine_top` also refines the coarsest level
/// first: meaningful when the initial partitions group several coarse nodes
/// (k-way mode), degenerate when every coarse node is its own partition
/// (constrained mode).
pub fn refine_through_levels(
    stack: &LevelStack,
    mut part: Partitioning,
    cons: &Constraints,
    cfg: &PartitionerConfig,
    refine_top: bool,
    passes: &mut Vec<PassRecord>,
    timings: &mut Timings,
) -> Partitioning {
    let params = cfg.refine_params();
    let run = |level: usize, part: &mut Partitioning, timings: &mut Timings, passes: &mut Vec<PassRecord>| {
        let (stats, t) = refine_level(
            &stack.levels[level].hg,
            &stack.levels[level].inc,
            part,
            cons,
            &params,
        );
        timings.refine_propose += t.propose;
        timings.refine_chains += t.chains;
        timings.refine_gains += t.gains;
        timings.refine_events += t.events;
        timings.refine_apply += t.apply;
        passes.extend(stats.into_iter().map(|s| PassRecord { level, stats: s }));
    };
    if refine_top {
        run(stack.levels.len() - 1, &mut part, timings, passes);
    }
    for level in (0..stack.levels.len() - 1).rev() {
        let lm = stack.levels[level + 1].from_finer.as_ref().unwrap();
        part = project(&part, lm, &stack.levels[level].hg);
        run(level, &mut part, timings, passes);
    }
    part
}

fn check_feasible(hg: &Hypergraph, inc: &IncidenceIndex, cons: &Constraints) -> Result<()> {
    for n in 0..hg.num_nodes() {
        if !cons.size_ok(hg.node_size(n)) {
            return Err(Error::Infeasible {
                node: n,
                reason: format!("size {} exceeds the partition size limit", hg.node_size(n)),
            });
        }
        if !cons.inbound_ok(inc.in_count(n)) {
            return Err(Error::Infeasible {
                node: n,
                reason: format!(
                    "{} inbound edges exceed the distinct inbound limit",
                    inc.in_count(n)
                ),
            });
        }
    }
    Ok(())
}

fn finish_stats(
    hg: &Hypergraph,
    part: &Partitioning,
    mode: Mode,
    levels: Vec<LevelStats>,
    passes: Vec<PassRecord>,
    mut timings: Timings,
    started: Instant,
) -> RunStats {
    timings.total = started.elapsed().as_secs_f64();
    RunStats {
        schema_version: 1,
        mode,
        levels,
        passes,
        connectivity: connectivity(hg, part.assignment()),
        cut_net: cut_net(hg, part.assignment()),
        partition_count: part.nonempty_parts(),
        timings,
    }
}

/// Partitions under the size and distinct-inbound limits, minimizing
/// connectivity with as few partitions as the limits allow.
pub fn partition_constrained(
    hg: &Hypergraph,
    cfg: &PartitionerConfig,
) -> Result<(Partitioning, RunStats)> {
    if cfg.omega == Some(0) {
        return Err(Error::InvalidConfig("omega must be at least 1".into()));
    }
    let started = Instant::now();
    let cons = Constraints::new(cfg.omega, cfg.delta);
    let inc = build_incidence(hg);
    check_feasible(hg, &inc, &cons)?;
    drop(inc);
    let target = cfg
        .omega
        .map_or(1, |omega| hg.num_nodes().div_ceil(omega));
    let mut timings = Timings::default();
    let (stack, levels) = build_level_stack(hg, &cons, cfg, target, &mut timings)?;
    // Initial partitions: one per coarsest-level node.
    let top = stack.levels.last().unwrap();
    let identity: Vec<PartId> = (0..top.hg.num_nodes()).collect();
    let initial = Partitioning::from_assignment_with_parts(&top.hg, identity, top.hg.num_nodes());
    let mut passes = Vec::new();
    let part = refine_through_levels(&stack, initial, &cons, cfg, false, &mut passes, &mut timings);
    let report = validate_partitioning(hg, part.assignment(), &cons);
    assert!(
        report.is_valid(),
        "internal error: output violates constraints: {:?}",
        report.violations
    );
    let stats = finish_stats(hg, &part, Mode::Constrained, levels, passes, timings, started);
    Ok((part, stats))
}

/// Balanced k-way partitioning: the size limit becomes
/// `floor((1 + epsilon) * |N| / k)` with no inbound limit, coarsening halts
/// at the configured node count, and initial partitions come from a
/// first-fit-decreasing pass over coarse nodes.
pub fn partition_kway(hg: &Hypergraph, cfg: &PartitionerConfig) -> Result<(Partitioning, RunStats)> {
    if cfg.k < 2 {
        return Err(Error::InvalidConfig("k must be at least 2".into()));
    }
    if cfg.epsilon < 0.0 {
        return Err(Error::InvalidConfig("epsilon must be nonnegative".into()));
    }
    let started = Instant::now();
    let omega = ((1.0 + cfg.epsilon) * hg.num_nodes() as f64 / cfg.k as f64).floor() as usize;
    if omega == 0 || omega * cfg.k < hg.num_nodes() {
        return Err(Error::InvalidConfig(format!(
            "k = {} leaves no feasible balance for {} nodes",
            cfg.k,
            hg.num_nodes()
        )));
    }
    let cons = Constraints::new(Some(omega), None);
    let min_nodes = cfg.kway_halt.saturating_sub(1).max(cfg.k);
    let mut timings = Timings::default();
    let (stack, levels) = build_level_stack(hg, &cons, cfg, min_nodes, &mut timings)?;
    let top = stack.levels.last().unwrap();
    if cfg.k > top.hg.num_nodes() {
        return Err(Error::InvalidConfig(format!(
            "k = {} exceeds the {} nodes left at the coarsening halt",
            cfg.k,
            top.hg.num_nodes()
        )));
    }
    let initial = first_fit_decreasing(&top.hg, cfg.k, omega)?;
    let initial = Partitioning::from_assignment_with_parts(&top.hg, initial, cfg.k);
    let mut passes = Vec::new();
    let part = refine_through_levels(&stack, initial, &cons, cfg, true, &mut passes, &mut timings);
    let report = validate_partitioning(hg, part.assignment(), &cons);
    assert!(
        report.is_valid(),
        "internal error: k-way output violates balance: {:?}",
        report.violations
    );
    let stats = finish_stats(hg, &part, Mode::KWay, levels, passes, timings, started);
    Ok((part, stats))
}

/// Deterministic first fit decreasing: nodes in descending size order (ties
/// by ascending id) each join the lowest-indexed bin with room under the
/// size limit.
fn first_fit_decreasing(hg: &Hypergraph, k: usize, omega: usize) -> Result<Vec<PartId>> {
    let mut order: Vec<NodeId> = (0..hg.num_nodes()).collect();
    order.sort_by_key(|&n| (std::cmp::Reverse(hg.node_size(n)), n));
    let mut load = vec![0usize; k];
    let mut assignment = vec![0 as PartId; hg.num_nodes()];
    for n in order {
        let size = hg.node_size(n);
        match (0..k).find(|&p| load[p] + size <= omega) {
            Some(p) => {
                assignment[n] = p;
                load[p] += size;
            }
            None => {
                return Err(Error::InvalidConfig(format!(
                    "initial balance infeasible: coarse node of size {size} fits no bin"
                )))
            }
        }
    }
    Ok(assignment)
}
