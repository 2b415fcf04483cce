use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use infoflow::circuit::{build_vqc_ansatz, build_vqe_ansatz, Circuit};
use infoflow::graph::build_graph;
use infoflow::harness::{
    initial_params, run_experiment, summarize, summary_to_csv, ExperimentConfig, ExperimentKind,
};
use infoflow::optimizers::Strategy;

#[derive(Parser)]
#[command(
    name = "infoflow",
    version,
    about = "Path-based optimization of parameterized quantum circuits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// XXZ-Heisenberg ground-state search on a rows x cols grid.
    Vqe {
        #[arg(long)]
        rows: Option<usize>,
        #[arg(long)]
        cols: Option<usize>,
        #[arg(long)]
        j: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        delta: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        field: Option<f64>,
        #[arg(long)]
        iters: Option<usize>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// n-bit parity classification.
    Vqc {
        #[arg(long)]
        bits: Option<usize>,
        #[arg(long)]
        epochs: Option<usize>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Export the weighted circuit graph.
    Graph {
        #[arg(long)]
        dump_dot: PathBuf,
        /// Circuit in the text format (`moment kind qubits slot` per line).
        #[arg(long)]
        circuit: Option<PathBuf>,
        #[arg(long, default_value = "vqe")]
        ansatz: String,
        #[arg(long, default_value_t = 6)]
        qubits: usize,
        #[arg(long, default_value_t = 1)]
        layers: usize,
        /// Seed for the uniform [0, 2π) parameters the weights are computed at.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the circuit in text form.
        #[arg(long)]
        dump_circuit: Option<PathBuf>,
    },
    /// Per-strategy, per-iteration statistics across seeds.
    Summarize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct CommonArgs {
    /// JSON config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    layers: Option<usize>,
    /// Comma-separated: random-path, shortest-path, combined-paths, sgd, nesterov.
    #[arg(long, value_delimiter = ',')]
    strategy: Option<Vec<String>>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    momentum: Option<f64>,
    #[arg(long)]
    seeds: Option<usize>,
    #[arg(long)]
    base_seed: Option<u64>,
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl CommonArgs {
    fn base_config(&self, kind: ExperimentKind) -> Result<ExperimentConfig> {
        let mut config = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                ExperimentConfig::from_json(&text)?
            }
            None => {
                let mut c = ExperimentConfig {
                    experiment: kind,
                    ..Default::default()
                };
                if kind == ExperimentKind::Vqc {
                    c.layers = 2;
                    c.iterations = 50;
                    c.strategies = vec![
                        Strategy::RandomPath,
                        Strategy::ShortestPath,
                        Strategy::Nesterov,
                    ];
                }
                c
            }
        };
        if config.experiment != kind {
            bail!("config describes a {} experiment", config.experiment.name());
        }
        if let Some(v) = self.layers {
            config.layers = v;
        }
        if let Some(list) = &self.strategy {
            config.strategies = list
                .iter()
                .map(|s| s.parse())
                .collect::<infoflow::Result<_>>()?;
        }
        if let Some(v) = self.lr {
            config.learning_rate = v;
        }
        if let Some(v) = self.momentum {
            config.momentum = v;
        }
        if let Some(v) = self.seeds {
            config.n_seeds = v;
        }
        if let Some(v) = self.base_seed {
            config.base_seed = v;
        }
        if self.shots.is_some() {
            config.n_shots = self.shots;
        }
        if self.workers.is_some() {
            config.workers = self.workers;
        }
        if let Some(v) = &self.out {
            config.output = v.clone();
        }
        Ok(config)
    }
}

fn run(config: ExperimentConfig) -> Result<()> {
    let report = run_experiment(&config)?;
    let fallbacks: usize = report.manifest.runs.iter().map(|r| r.fallbacks).sum();
    println!(
        "wrote {} rows to {} (manifest {})",
        report.rows.len(),
        config.output.display(),
        config.manifest_path().display()
    );
    for r in &report.manifest.runs {
        match r.final_accuracy {
            Some(acc) => println!(
                "{:>15} seed {:>3}: loss {:.6} accuracy {:.4}",
                r.strategy, r.seed, r.final_objective, acc
            ),
            None => println!(
                "{:>15} seed {:>3}: energy {:.6}",
                r.strategy, r.seed, r.final_objective
            ),
        }
    }
    if let Some(e0) = report.manifest.exact_ground_energy {
        println!("exact ground energy {e0:.6}");
    }
    if fallbacks > 0 {
        println!("shortest-path fallbacks to random paths: {fallbacks}");
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Vqe {
            rows,
            cols,
            j,
            delta,
            field,
            iters,
            common,
        } => {
            let mut config = common.base_config(ExperimentKind::Vqe)?;
            if let Some(v) = rows {
                config.rows = v;
            }
            if let Some(v) = cols {
                config.cols = v;
            }
            if let Some(v) = j {
                config.j = v;
            }
            if let Some(v) = delta {
                config.delta = v;
            }
            if let Some(v) = field {
                config.h = v;
            }
            if let Some(v) = iters {
                config.iterations = v;
            }
            run(config)
        }
        Command::Vqc {
            bits,
            epochs,
            common,
        } => {
            let mut config = common.base_config(ExperimentKind::Vqc)?;
            if let Some(v) = bits {
                config.bits = v;
            }
            if let Some(v) = epochs {
                config.iterations = v;
            }
            run(config)
        }
        Command::Graph {
            dump_dot,
            circuit,
            ansatz,
            qubits,
            layers,
            seed,
            dump_circuit,
        } => {
            let circuit: Circuit = match circuit {
                Some(path) => Circuit::from_text(&fs::read_to_string(&path)?)?,
                None => match ansatz.as_str() {
                    "vqe" => build_vqe_ansatz(qubits, layers)?,
                    "vqc" => build_vqc_ansatz(qubits, layers)?,
                    other => bail!("unknown ansatz `{other}` (expected vqe or vqc)"),
                },
            };
            let params = initial_params(&circuit, seed);
            let graph = build_graph(&circuit, &params)?;
            fs::write(&dump_dot, graph.to_dot())?;
            if let Some(path) = dump_circuit {
                fs::write(path, circuit.to_text())?;
            }
            println!(
                "{} nodes, {} edges -> {}",
                graph.node_count(),
                graph.edges().len(),
                dump_dot.display()
            );
            Ok(())
        }
        Command::Summarize { input, out } => {
            let text = summary_to_csv(&summarize(&input)?);
            match out {
                Some(path) => fs::write(path, text)?,
                None => print!("{text}"),
            }
            Ok(())
        }
    }
}
