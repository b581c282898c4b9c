//! File formats and the synthetic instance generator.
//!
//! The `dhgr` text format extends the hMETIS exchange format with directed
//! edges: the header is `|E| |N| fmt` with fmt 0 (unweighted) or 1 (edge
//! weights), and each edge line holds an optional weight, the source pin
//! count, then 1-based pin ids with sources first. `%` lines are comments.
//! Plain undirected `hgr` files parse with every pin as a destination.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::hgraph::{Hypergraph, NodeId};
use crate::partition::PartId;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileFormat {
    Dhgr,
    Hgr,
}

impl std::str::FromStr for FileFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dhgr" => Ok(FileFormat::Dhgr),
            "hgr" => Ok(FileFormat::Hgr),
            other => Err(Error::Parse {
                line: 0,
                msg: format!("unknown format {other:?}, expected dhgr or hgr"),
            }),
        }
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

/// Parses a hypergraph from text. Lines are 1-based in error messages.
pub fn parse_hypergraph(text: &str, format: FileFormat) -> Result<Hypergraph> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('%'));
    let (header_line, header) = lines
        .next()
        .ok_or_else(|| parse_err(0, "empty file"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() < 2 || fields.len() > 3 {
        return Err(parse_err(header_line, "header must be `|E| |N| [fmt]`"));
    }
    let num_edges: usize = fields[0]
        .parse()
        .map_err(|_| parse_err(header_line, "bad edge count"))?;
    let num_nodes: usize = fields[1]
        .parse()
        .map_err(|_| parse_err(header_line, "bad node count"))?;
    let weighted = match fields.get(2) {
        None | Some(&"0") => false,
        Some(&"1") => true,
        Some(other) => {
            return Err(parse_err(
                header_line,
                format!("unsupported fmt {other:?}, expected 0 or 1"),
            ))
        }
    };

    let mut edges: Vec<(Vec<NodeId>, Vec<NodeId>, f64)> = Vec::with_capacity(num_edges);
    for _ in 0..num_edges {
        let (line_no, line) = lines
            .next()
            .ok_or_else(|| parse_err(0, format!("expected {num_edges} edge lines")))?;
        let mut tokens = line.split_whitespace();
        let weight = if weighted {
            let t = tokens
                .next()
                .ok_or_else(|| parse_err(line_no, "missing edge weight"))?;
            let w: f64 = t
                .parse()
                .map_err(|_| parse_err(line_no, format!("bad weight {t:?}")))?;
            if !(w > 0.0) {
                return Err(parse_err(line_no, format!("weight must be positive, got {w}")));
            }
            w
        } else {
            1.0
        };
        let (src_count, pins): (usize, Vec<usize>) = match format {
            FileFormat::Dhgr => {
                let t = tokens
                    .next()
                    .ok_or_else(|| parse_err(line_no, "missing source count"))?;
                let s: usize = t
                    .parse()
                    .map_err(|_| parse_err(line_no, format!("bad source count {t:?}")))?;
                let pins = tokens
                    .map(|t| t.parse::<usize>().map_err(|_| parse_err(line_no, format!("bad pin {t:?}"))))
                    .collect::<Result<Vec<_>>>()?;
                (s, pins)
            }
            FileFormat::Hgr => {
                let pins = tokens
                    .map(|t| t.parse::<usize>().map_err(|_| parse_err(line_no, format!("bad pin {t:?}"))))
                    .collect::<Result<Vec<_>>>()?;
                (0, pins)
            }
        };
        if pins.is_empty() {
            return Err(parse_err(line_no, "edge has no pins"));
        }
        if src_count > pins.len() {
            return Err(parse_err(line_no, "source count exceeds pin count"));
        }
        let mut ids = Vec::with_capacity(pins.len());
        for raw in pins {
            if raw == 0 || raw > num_nodes {
                return Err(parse_err(
                    line_no,
                    format!("pin {raw} out of range 1..={num_nodes}"),
                ));
            }
            ids.push(raw - 1);
        }
        let mut sorted = ids.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(parse_err(line_no, "duplicate pin in edge"));
        }
        edges.push((ids[..src_count].to_vec(), ids[src_count..].to_vec(), weight));
    }
    if let Some((line_no, _)) = lines.next() {
        return Err(parse_err(line_no, "trailing content after last edge"));
    }
    Hypergraph::from_edges(num_nodes, &edges)
        .map_err(|e| parse_err(header_line, e.to_string()))
}

/// Reads a hypergraph file in the given format.
pub fn read_hypergraph(path: impl AsRef<Path>, format: FileFormat) -> Result<Hypergraph> {
    let text = fs::read_to_string(path)?;
    parse_hypergraph(&text, format)
}

/// Serializes a hypergraph in dhgr format. Weights are written whenever any
/// edge weight differs from 1.
pub fn format_dhgr(hg: &Hypergraph) -> String {
    let weighted = (0..hg.num_edges()).any(|e| hg.edge_weight(e) != 1.0);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} {} {}",
        hg.num_edges(),
        hg.num_nodes(),
        if weighted { 1 } else { 0 }
    );
    for e in 0..hg.num_edges() {
        if weighted {
            let _ = write!(out, "{} ", hg.edge_weight(e));
        }
        let _ = write!(out, "{}", hg.src_count(e));
        for &p in hg.edge_pins(e) {
            let _ = write!(out, " {}", p + 1);
        }
        out.push('\n');
    }
    out
}

pub fn write_hypergraph(hg: &Hypergraph, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, format_dhgr(hg))?;
    Ok(())
}

/// Formats a partition file: one zero-based partition id per node line, with
/// ids compacted to a contiguous range over nonempty partitions.
pub fn format_partition(assignment: &[PartId]) -> String {
    let num_parts = assignment.iter().max().map_or(0, |&p| p + 1);
    let mut used = vec![false; num_parts];
    for &p in assignment {
        used[p] = true;
    }
    let mut remap = vec![0 as PartId; num_parts];
    let mut next = 0;
    for p in 0..num_parts {
        if used[p] {
            remap[p] = next;
            next += 1;
        }
    }
    let mut out = String::new();
    for &p in assignment {
        let _ = writeln!(out, "{}", remap[p]);
    }
    out
}

pub fn write_partition(assignment: &[PartId], path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, format_partition(assignment))?;
    Ok(())
}

/// Reads a partition file written by [`write_partition`].
pub fn read_partition(path: impl AsRef<Path>) -> Result<Vec<PartId>> {
    let text = fs::read_to_string(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim()
                .parse::<PartId>()
                .map_err(|_| parse_err(i + 1, format!("bad partition id {l:?}")))
        })
        .collect()
}

/// Synthetic instance families. `Layered` wires each node to a few nodes of
/// the next layer; `SmallWorld` additionally rewires destinations to random
/// layers with the given probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceKind {
    Layered,
    SmallWorld,
}

impl std::str::FromStr for InstanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "layered" => Ok(InstanceKind::Layered),
            "smallworld" => Ok(InstanceKind::SmallWorld),
            other => Err(Error::Parse {
                line: 0,
                msg: format!("unknown instance kind {other:?}"),
            }),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GenParams {
    pub layers: usize,
    pub width: usize,
    pub fanout: usize,
    /// Probability of rewiring each destination (small-world only).
    pub rewire: f64,
    pub seed: u64,
}

/// Generates a synthetic instance: `layers x width` nodes, one edge sourced
/// per node toward `fanout` distinct nodes of the next layer. Deterministic
/// per seed.
pub fn generate_instance(kind: InstanceKind, params: &GenParams) -> Result<Hypergraph> {
    let GenParams {
        layers,
        width,
        fanout,
        rewire,
        seed,
    } = *params;
    if layers < 2 || width == 0 || fanout == 0 || fanout > width {
        return Err(Error::InvalidConfig(
            "need layers >= 2, width >= 1, and 1 <= fanout <= width".into(),
        ));
    }
    if !(0.0..=1.0).contains(&rewire) {
        return Err(Error::InvalidConfig("rewire must be in [0, 1]".into()));
    }
    let num_nodes = layers * width;
    let node_at = |layer: usize, slot: usize| layer * width + slot;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::with_capacity((layers - 1) * width);
    for layer in 0..layers - 1 {
        for slot in 0..width {
            let src = node_at(layer, slot);
            let mut dsts: Vec<NodeId> = Vec::with_capacity(fanout);
            while dsts.len() < fanout {
                let mut dst = node_at(layer + 1, rng.random_range(0..width as u64) as usize);
                if kind == InstanceKind::SmallWorld && rng.random_bool(rewire) {
                    let l = rng.random_range(0..layers as u64) as usize;
                    dst = node_at(l, rng.random_range(0..width as u64) as usize);
                }
                if dst != src && !dsts.contains(&dst) {
                    dsts.push(dst);
                }
            }
            dsts.sort_unstable();
            edges.push((vec![src], dsts, 1.0));
        }
    }
    Hypergraph::from_edges(num_nodes, &edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hgraph::example_graph;

    const EXAMPLE_DHGR: &str = "3 4 1\n1 1 1 2 3\n2 1 2 3\n1 1 3 4\n";

    #[test]
    fn parse_example_dhgr() {
        let hg = parse_hypergraph(EXAMPLE_DHGR, FileFormat::Dhgr).unwrap();
        assert_eq!(hg.num_nodes(), 4);
        assert_eq!(hg.num_edges(), 3);
        assert_eq!(hg.edge_src(0), &[0]);
        assert_eq!(hg.edge_dst(0), &[1, 2]);
        assert_eq!(hg.edge_weight(1), 2.0);
    }

    #[test]
    fn dhgr_round_trip() {
        let hg = example_graph();
        let text = format_dhgr(&hg);
        assert_eq!(text, EXAMPLE_DHGR);
        let back = parse_hypergraph(&text, FileFormat::Dhgr).unwrap();
        assert_eq!(format_dhgr(&back), text);
    }

    #[test]
    fn comments_and_blanks_ignored() {
        let text = "% header comment\n1 2 0\n\n% edge comment\n0 1 2\n";
        let hg = parse_hypergraph(text, FileFormat::Dhgr).unwrap();
        assert_eq!(hg.num_edges(), 1);
    }

    #[test]
    fn hgr_pins_become_destinations() {
        let hg = parse_hypergraph("1 2 0\n1 2\n", FileFormat::Hgr).unwrap();
        assert_eq!(hg.num_edges(), 1);
        assert!(hg.edge_src(0).is_empty());
        assert_eq!(hg.edge_dst(0), &[0, 1]);
        // Header without fmt field also parses.
        let hg = parse_hypergraph("1 3\n1 2 3\n", FileFormat::Hgr).unwrap();
        assert_eq!(hg.edge_dst(0).len(), 3);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let dup = parse_hypergraph("1 3 0\n0 1 1\n", FileFormat::Dhgr);
        assert!(matches!(dup, Err(Error::Parse { line: 2, .. })));
        let range = parse_hypergraph("1 2 0\n0 3\n", FileFormat::Dhgr);
        assert!(matches!(range, Err(Error::Parse { line: 2, .. })));
        let empty_edge = parse_hypergraph("1 2 0\n0\n", FileFormat::Dhgr);
        assert!(matches!(empty_edge, Err(Error::Parse { line: 2, .. })));
        let bad_weight = parse_hypergraph("1 2 1\n0 1 2\n", FileFormat::Dhgr);
        assert!(matches!(bad_weight, Err(Error::Parse { line: 2, .. })));
        let missing = parse_hypergraph("2 2 0\n0 1 2\n", FileFormat::Dhgr);
        assert!(missing.is_err());
    }

    #[test]
    fn partition_round_trip() {
        let dir = std::env::temp_dir().join("dhpart_io_test");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("part.txt");
        write_partition(&[0, 0, 1, 1], &path).unwrap();
        assert_eq!(read_partition(&path).unwrap(), vec![0, 0, 1, 1]);
        // Gaps compact: ids {0, 2, 5} become {0, 1, 2}.
        assert_eq!(format_partition(&[2, 0, 5, 0]), "1\n0\n2\n0\n");
        assert_eq!(format_partition(&[0, 0, 0]), "0\n0\n0\n");
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn generator_counts_and_determinism() {
        let params = GenParams {
            layers: 2,
            width: 2,
            fanout: 1,
            rewire: 0.0,
            seed: 3,
        };
        let hg = generate_instance(InstanceKind::Layered, &params).unwrap();
        assert_eq!(hg.num_nodes(), 4);
        assert_eq!(hg.num_edges(), 2);
        // Zero rewire probability reproduces the layered wiring.
        let a = generate_instance(InstanceKind::SmallWorld, &params).unwrap();
        assert_eq!(format_dhgr(&a), format_dhgr(&hg));
        // Same seed, same bytes.
        let b = generate_instance(InstanceKind::Layered, &params).unwrap();
        assert_eq!(format_dhgr(&a), format_dhgr(&b));
    }

    #[test]
    fn generator_rejects_bad_params() {
        let bad = GenParams {
            layers: 1,
            width: 2,
            fanout: 1,
            rewire: 0.0,
            seed: 0,
        };
        assert!(generate_instance(InstanceKind::Layered, &bad).is_err());
    }
}
