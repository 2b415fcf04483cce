//! Seeded experiment runner and result summaries.
//!
//! Every `(strategy, seed)` run starts from parameters drawn uniformly in
//! `[0, 2π)` by a generator seeded with `base_seed + seed_index`, so the same
//! seed gives every strategy the same starting point. Results go to a CSV with
//! header [`CSV_HEADER`] plus a JSON manifest next to it.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{build_vqc_ansatz, build_vqe_ansatz, Circuit};
use crate::error::{Error, Result};
use crate::optimizers::{
    optimize, EnergyObjective, Objective, OptimizerConfig, Strategy, Trajectory, DEFAULT_MOMENTUM,
};
use crate::problems::{build_xxz, exact_ground_energy, parity_dataset, LatticeSpec, VqcObjective};

pub const CSV_HEADER: &str = "experiment,strategy,seed,iteration,objective,accuracy,updates";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Vqe,
    Vqc,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Vqe => "vqe",
            ExperimentKind::Vqc => "vqc",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    /// VQE lattice.
    pub rows: usize,
    pub cols: usize,
    pub j: f64,
    pub delta: f64,
    pub h: f64,
    /// VQC parity width.
    pub bits: usize,
    pub layers: usize,
    pub strategies: Vec<Strategy>,
    pub learning_rate: f64,
    /// Iterations (VQE) or epochs (VQC).
    pub iterations: usize,
    pub momentum: f64,
    pub n_seeds: usize,
    pub base_seed: u64,
    pub n_shots: Option<u64>,
    /// Parallel runs; `None` uses every core.
    pub workers: Option<usize>,
    pub output: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: ExperimentKind::Vqe,
            rows: 2,
            cols: 3,
            j: 1.0,
            delta: -20.0,
            h: 0.0,
            bits: 4,
            layers: 1,
            strategies: vec![Strategy::ShortestPath, Strategy::RandomPath, Strategy::Sgd],
            learning_rate: 0.1,
            iterations: 100,
            momentum: DEFAULT_MOMENTUM,
            n_seeds: 5,
            base_seed: 0,
            n_shots: None,
            workers: None,
            output: PathBuf::from("results.csv"),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_seeds < 1 {
            return Err(Error::InvalidConfig("n_seeds must be at least 1".into()));
        }
        if self.strategies.is_empty() {
            return Err(Error::InvalidConfig(
                "at least one strategy is required".into(),
            ));
        }
        if self.layers < 1 {
            return Err(Error::InvalidConfig("layers must be at least 1".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::InvalidConfig("workers must be at least 1".into()));
        }
        match self.experiment {
            ExperimentKind::Vqe if self.rows * self.cols < 2 => {
                return Err(Error::InvalidConfig(
                    "lattice needs at least 2 sites".into(),
                ))
            }
            ExperimentKind::Vqc if !(2..=10).contains(&self.bits) => {
                return Err(Error::InvalidConfig(format!(
                    "bits must lie in 2..=10, got {}",
                    self.bits
                )))
            }
            _ => {}
        }
        self.optimizer_config(0).validate()
    }

    pub fn optimizer_config(&self, seed: u64) -> OptimizerConfig {
        OptimizerConfig {
            learning_rate: self.learning_rate,
            max_iterations: self.iterations,
            momentum: self.momentum,
            n_shots: self.n_shots,
            seed,
        }
    }

    pub fn lattice(&self) -> LatticeSpec {
        LatticeSpec::xxz(self.rows, self.cols, self.j, self.delta, self.h)
    }

    pub fn seeds(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.n_seeds as u64).map(|i| self.base_seed + i)
    }

    /// Manifest written next to the CSV.
    pub fn manifest_path(&self) -> PathBuf {
        let mut p = self.output.clone().into_os_string();
        p.push(".manifest.json");
        PathBuf::from(p)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Objective described by a config: XXZ energy or parity square loss.
pub fn build_objective(config: &ExperimentConfig) -> Result<Box<dyn Objective + Sync>> {
    Ok(match config.experiment {
        ExperimentKind::Vqe => {
            let lattice = config.lattice();
            let circuit = build_vqe_ansatz(lattice.n_qubits(), config.layers)?;
            Box::new(EnergyObjective::new(circuit, build_xxz(&lattice)?)?)
        }
        ExperimentKind::Vqc => {
            let circuit = build_vqc_ansatz(config.bits, config.layers)?;
            Box::new(VqcObjective::new(circuit, parity_dataset(config.bits)?)?)
        }
    })
}

/// Initial parameters for a seed, uniform in `[0, 2π)`.
pub fn initial_params(circuit: &Circuit, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..circuit.n_params())
        .map(|_| rng.random_range(0.0..TAU))
        .collect()
}

fn optimizer_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub strategy: Strategy,
    pub seed: u64,
    pub trajectory: Trajectory,
    pub wall_time_secs: f64,
}

/// Runs every `(strategy, seed)` pair, in parallel, returned in
/// `(strategy, seed)` order.
pub fn run_trajectories(config: &ExperimentConfig) -> Result<Vec<RunResult>> {
    config.validate()?;
    let objective = build_objective(config)?;
    let jobs: Vec<(Strategy, u64)> = config
        .strategies
        .iter()
        .flat_map(|&s| config.seeds().map(move |seed| (s, seed)))
        .collect();
    let run = |&(strategy, seed): &(Strategy, u64)| -> Result<RunResult> {
        let start = Instant::now();
        let init = initial_params(objective.circuit(), seed);
        let mut rng = optimizer_rng(seed);
        let trajectory = optimize(
            objective.as_ref(),
            &init,
            strategy,
            &config.optimizer_config(seed),
            &mut rng,
        )?;
        Ok(RunResult {
            strategy,
            seed,
            trajectory,
            wall_time_secs: start.elapsed().as_secs_f64(),
        })
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = config.workers {
        builder = builder.num_threads(w);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    pool.install(|| jobs.par_iter().map(run).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub experiment: String,
    pub strategy: String,
    pub seed: u64,
    pub iteration: usize,
    pub objective: f64,
    pub accuracy: Option<f64>,
    pub updates: usize,
}

pub fn rows_for(kind: ExperimentKind, runs: &[RunResult]) -> Vec<CsvRow> {
    runs.iter()
        .flat_map(|run| {
            run.trajectory.records.iter().map(move |r| CsvRow {
                experiment: kind.name().to_string(),
                strategy: run.strategy.name().to_string(),
                seed: run.seed,
                iteration: r.iteration,
                objective: r.objective,
                accuracy: r.accuracy,
                updates: r.updates,
            })
        })
        .collect()
}

pub fn write_csv(path: &Path, rows: &[CsvRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub strategy: Strategy,
    pub seed: u64,
    pub wall_time_secs: f64,
    pub fallbacks: usize,
    pub final_objective: f64,
    pub final_accuracy: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub config: ExperimentConfig,
    pub exact_ground_energy: Option<f64>,
    pub runs: Vec<RunManifest>,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub runs: Vec<RunResult>,
    pub rows: Vec<CsvRow>,
    pub manifest: Manifest,
}

/// Runs the experiment and writes the CSV and its manifest.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let runs = run_trajectories(config)?;
    let rows = rows_for(config.experiment, &runs);
    write_csv(&config.output, &rows)?;
    let exact_ground_energy = match config.experiment {
        ExperimentKind::Vqe if config.rows * config.cols <= crate::problems::MAX_EXACT_QUBITS => {
            Some(exact_ground_energy(&build_xxz(&config.lattice())?)?)
        }
        _ => None,
    };
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        exact_ground_energy,
        runs: runs
            .iter()
            .map(|r| RunManifest {
                strategy: r.strategy,
                seed: r.seed,
                wall_time_secs: r.wall_time_secs,
                fallbacks: r.trajectory.fallbacks,
                final_objective: r.trajectory.final_objective(),
                final_accuracy: r.trajectory.records.last().and_then(|x| x.accuracy),
            })
            .collect(),
    };
    fs::write(
        config.manifest_path(),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    Ok(ExperimentReport {
        runs,
        rows,
        manifest,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stats {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    /// Population standard deviation.
    pub std: f64,
}

impl Stats {
    pub fn of(values: &[f64]) -> Option<Stats> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Some(Stats {
            mean,
            min,
            max,
            std: var.sqrt(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub experiment: String,
    pub strategy: String,
    pub iteration: usize,
    pub n_seeds: usize,
    pub objective: Stats,
    pub accuracy: Option<Stats>,
}

/// Per `(experiment, strategy, iteration)` statistics across seeds.
pub fn summarize_reader<R: Read>(reader: R) -> Result<Vec<SummaryRow>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != CSV_HEADER {
        return Err(Error::MalformedCsv(format!(
            "unexpected header `{}`",
            header.join(",")
        )));
    }
    type Key = (String, String, usize);
    let mut groups: BTreeMap<Key, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for (i, row) in rdr.deserialize::<CsvRow>().enumerate() {
        let row = row.map_err(|e| Error::MalformedCsv(format!("row {}: {e}", i + 1)))?;
        let entry = groups
            .entry((row.experiment, row.strategy, row.iteration))
            .or_default();
        entry.0.push(row.objective);
        if let Some(a) = row.accuracy {
            entry.1.push(a);
        }
    }
    Ok(groups
        .into_iter()
        .map(
            |((experiment, strategy, iteration), (obj, acc))| SummaryRow {
                experiment,
                strategy,
                iteration,
                n_seeds: obj.len(),
                objective: Stats::of(&obj).expect("group is nonempty"),
                accuracy: Stats::of(&acc),
            },
        )
        .collect())
}

pub fn summarize(path: &Path) -> Result<Vec<SummaryRow>> {
    summarize_reader(fs::File::open(path)?)
}

/// Summary as CSV text; accuracy columns are empty when absent.
pub fn summary_to_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from(
        "experiment,strategy,iteration,n_seeds,objective_mean,objective_min,objective_max,objective_std,\
         accuracy_mean,accuracy_min,accuracy_max,accuracy_std\n",
    );
    for r in rows {
        let o = &r.objective;
        let acc = r.accuracy.map_or_else(
            || ",,,".to_string(),
            |a| format!("{},{},{},{}", a.mean, a.min, a.max, a.std),
        );
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.experiment, r.strategy, r.iteration, r.n_seeds, o.mean, o.min, o.max, o.std, acc
        ));
    }
    out
}
