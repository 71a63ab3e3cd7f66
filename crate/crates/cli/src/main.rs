use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use lgrass::graph::{generate_graph, load_graph, save_graph, Format, GenSpec};
use lgrass::pipeline::{bench, verify, PipelineConfig};
use lgrass::{sparsify, Graph, TreeDirection};

#[derive(Parser)]
#[command(
    name = "lgrass",
    version,
    about = "Linear-time graph spectral sparsification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sparsify a graph and write the kept edges.
    Sparsify {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, env = "LGRASS_THREADS", default_value_t = 1)]
        threads: usize,
        #[arg(long, default_value = "max")]
        tree: TreeDirection,
        /// Keep at most this many off-tree edges.
        #[arg(long)]
        budget: Option<usize>,
        /// Write stage timings as JSON here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Generate a seeded random connected graph.
    Gen {
        #[arg(short)]
        n: usize,
        #[arg(short)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Compare the pipeline against the quadratic reference (exit 0 on match).
    Verify {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long, env = "LGRASS_THREADS", default_value_t = 1)]
        threads: usize,
        #[arg(long, default_value = "max")]
        tree: TreeDirection,
    },
    /// Time the pipeline on generated graphs of doubling size.
    Bench {
        #[arg(long, default_value_t = 16384)]
        n_start: usize,
        #[arg(long, default_value_t = 1048576)]
        n_end: usize,
        #[arg(long, default_value_t = 4)]
        m_ratio: usize,
        #[arg(long, default_value_t = 3)]
        trials: usize,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
        threads: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load(path: &PathBuf) -> Result<(Graph, Format)> {
    let format = Format::from_path(path);
    let graph = load_graph(path, format).with_context(|| format!("reading {}", path.display()))?;
    Ok((graph, format))
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Sparsify {
            input,
            output,
            threads,
            tree,
            budget,
            report,
        } => {
            let (graph, format) = load(&input)?;
            let config = PipelineConfig {
                workers: threads,
                tree_direction: tree,
                budget,
                report_path: report,
                ..PipelineConfig::default()
            };
            let (sparsifier, stages) = sparsify(&graph, &config)?;
            sparsifier
                .save(&output, format)
                .with_context(|| format!("writing {}", output.display()))?;
            log::info!("{}", stages.to_json());
            println!(
                "kept {} of {} edges ({} tree + {} off-tree) in {:.3} ms",
                sparsifier.edge_count(),
                graph.edge_count(),
                sparsifier.tree_edges.len(),
                sparsifier.selected.len(),
                stages.total_ms
            );
        }
        Command::Gen { n, m, seed, output } => {
            let graph = generate_graph(&GenSpec::new(n, m, seed))?;
            save_graph(&output, &graph, Format::from_path(&output))
                .with_context(|| format!("writing {}", output.display()))?;
        }
        Command::Verify {
            input,
            threads,
            tree,
        } => {
            let (graph, _) = load(&input)?;
            let config = PipelineConfig {
                workers: threads,
                tree_direction: tree,
                ..PipelineConfig::default()
            };
            let report = verify(&graph, &config)?;
            println!(
                "selected {} (reference {}), resistance max rel. deviation {:.3e} over {} pairs",
                report.selected,
                report.oracle_selected,
                report.max_resistance_deviation,
                report.resistance_checks
            );
            if !report.passed() {
                match report.first_mismatch {
                    Some(id) => println!("FAIL: first differing edge {id}"),
                    None => println!("FAIL: resistance deviation above tolerance"),
                }
                return Ok(ExitCode::FAILURE);
            }
            println!("PASS");
        }
        Command::Bench {
            n_start,
            n_end,
            m_ratio,
            trials,
            threads,
            seed,
            out,
        } => {
            if n_start == 0 || n_start > n_end {
                bail!("need 0 < n-start <= n-end");
            }
            let sizes: Vec<(usize, usize)> = std::iter::successors(Some(n_start), |&n| Some(n * 2))
                .take_while(|&n| n <= n_end)
                .map(|n| (n, n * m_ratio))
                .collect();
            let mut writer = csv::Writer::from_path(&out)
                .with_context(|| format!("writing {}", out.display()))?;
            let mut failure = None;
            bench(&sizes, trials, &threads, seed, |row| {
                eprintln!("n={} P={} total={:.3} ms", row.n, row.workers, row.total_ms);
                if let Err(e) = writer
                    .serialize(row)
                    .and_then(|_| writer.flush().map_err(Into::into))
                {
                    failure.get_or_insert(e);
                }
            })?;
            if let Some(e) = failure {
                return Err(e.into());
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
