//! Command-line front end: partition, validate, generate, and the one-pass
//! baseline. Exit codes: 0 success, 1 infeasible input or failed validation,
//! 2 usage or parse errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dhpart::io::{
    generate_instance, read_hypergraph, read_partition, write_hypergraph, write_partition,
    FileFormat, GenParams, InstanceKind,
};
use dhpart::{
    connectivity, cut_net, oracle, partition_constrained, partition_kway, validate_partitioning,
    Constraints, Error, Hypergraph, Mode, PartitionerConfig,
};

#[derive(Parser)]
#[command(name = "dhpart", version, about = "Directed hypergraph partitioner")]
struct Cli {
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct InputArgs {
    /// Input hypergraph file.
    #[arg(long)]
    input: PathBuf,
    /// Input format.
    #[arg(long, default_value = "dhgr")]
    format: String,
}

#[derive(Subcommand)]
enum Command {
    /// Partition a hypergraph.
    Partition {
        #[command(flatten)]
        input: InputArgs,
        /// constrained | kway
        #[arg(long, default_value = "constrained")]
        mode: String,
        /// Maximum partition size (constrained mode).
        #[arg(long)]
        omega: Option<usize>,
        /// Maximum distinct inbound edges per partition.
        #[arg(long)]
        delta: Option<usize>,
        /// Partition count (kway mode).
        #[arg(long)]
        k: Option<usize>,
        /// Balance slack (kway mode).
        #[arg(long, default_value_t = 0.03)]
        epsilon: f64,
        /// Pairing candidates per node.
        #[arg(long, default_value_t = 4)]
        pi: usize,
        /// Refinement passes per level.
        #[arg(long, default_value_t = 16)]
        theta: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Partition file to write.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Write run statistics as JSON.
        #[arg(long)]
        stats_json: Option<PathBuf>,
    },
    /// Check a partition file against the constraints.
    Validate {
        #[command(flatten)]
        input: InputArgs,
        /// Partition file to check.
        #[arg(long)]
        partition: PathBuf,
        #[arg(long)]
        omega: Option<usize>,
        #[arg(long)]
        delta: Option<usize>,
    },
    /// Generate a synthetic instance.
    Generate {
        /// layered | smallworld
        #[arg(long)]
        kind: String,
        #[arg(long)]
        layers: usize,
        #[arg(long)]
        width: usize,
        #[arg(long)]
        fanout: usize,
        /// Destination rewiring probability (smallworld).
        #[arg(long, default_value_t = 0.0)]
        rewire: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: PathBuf,
    },
    /// Run the greedy one-pass baseline.
    Baseline {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        omega: Option<usize>,
        #[arg(long)]
        delta: Option<usize>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn load(input: &InputArgs) -> Result<Hypergraph, Error> {
    let format: FileFormat = input.format.parse()?;
    read_hypergraph(&input.input, format)
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Infeasible { .. } => 1,
        _ => 2,
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Partition {
            input,
            mode,
            omega,
            delta,
            k,
            epsilon,
            pi,
            theta,
            seed,
            output,
            stats_json,
        } => {
            if omega == Some(0) {
                return Err(Error::InvalidConfig("--omega must be at least 1".into()));
            }
            if pi == 0 {
                return Err(Error::InvalidConfig("--pi must be at least 1".into()));
            }
            let hg = load(&input)?;
            let mut cfg = PartitionerConfig {
                omega,
                delta,
                epsilon,
                pi,
                theta,
                seed,
                ..Default::default()
            };
            let (part, stats) = match mode.as_str() {
                "constrained" => {
                    cfg.mode = Mode::Constrained;
                    partition_constrained(&hg, &cfg)?
                }
                "kway" => {
                    cfg.mode = Mode::KWay;
                    cfg.k = k.ok_or_else(|| {
                        Error::InvalidConfig("kway mode requires --k".into())
                    })?;
                    partition_kway(&hg, &cfg)?
                }
                other => {
                    return Err(Error::InvalidConfig(format!(
                        "unknown mode {other:?}, expected constrained or kway"
                    )))
                }
            };
            if let Some(path) = output {
                write_partition(part.assignment(), path)?;
            }
            if let Some(path) = stats_json {
                std::fs::write(path, serde_json::to_string_pretty(&stats).unwrap())?;
            }
            println!(
                "partitions {} connectivity {} cut-net {} levels {} time {:.3}s",
                stats.partition_count,
                stats.connectivity,
                stats.cut_net,
                stats.levels.len(),
                stats.timings.total
            );
            Ok(0)
        }
        Command::Validate {
            input,
            partition,
            omega,
            delta,
        } => {
            let hg = load(&input)?;
            let assignment = read_partition(&partition)?;
            if assignment.len() != hg.num_nodes() {
                return Err(Error::Parse {
                    line: 0,
                    msg: format!(
                        "partition file has {} entries for {} nodes",
                        assignment.len(),
                        hg.num_nodes()
                    ),
                });
            }
            let cons = Constraints::new(omega, delta);
            let report = validate_partitioning(&hg, &assignment, &cons);
            if report.is_valid() {
                println!(
                    "valid: {} partitions, connectivity {}, cut-net {}",
                    assignment.iter().collect::<std::collections::HashSet<_>>().len(),
                    connectivity(&hg, &assignment),
                    cut_net(&hg, &assignment)
                );
                Ok(0)
            } else {
                for v in &report.violations {
                    eprintln!("violation: {v:?}");
                }
                Ok(1)
            }
        }
        Command::Generate {
            kind,
            layers,
            width,
            fanout,
            rewire,
            seed,
            output,
        } => {
            let kind: InstanceKind = kind.parse()?;
            let params = GenParams {
                layers,
                width,
                fanout,
                rewire,
                seed,
            };
            let hg = generate_instance(kind, &params)?;
            write_hypergraph(&hg, &output)?;
            println!(
                "wrote {} nodes, {} edges, {} pins to {}",
                hg.num_nodes(),
                hg.num_edges(),
                hg.num_pins(),
                output.display()
            );
            Ok(0)
        }
        Command::Baseline {
            input,
            omega,
            delta,
            output,
        } => {
            let hg = load(&input)?;
            let cons = Constraints::new(omega, delta);
            let assignment = oracle::one_pass(&hg, &cons)?;
            if let Some(path) = output {
                write_partition(&assignment, path)?;
            }
            let parts = assignment.iter().max().map_or(0, |&p| p + 1);
            println!(
                "partitions {} connectivity {} cut-net {}",
                parts,
                connectivity(&hg, &assignment),
                cut_net(&hg, &assignment)
            );
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .ok();
    }
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
