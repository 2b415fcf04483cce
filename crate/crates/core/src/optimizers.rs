//! Path-based optimization and the SGD / Nesterov baselines.
//!
//! Each outer iteration of [`path_optimize`] rebuilds the circuit graph at the
//! current parameters, selects a parameter subset per objective term from
//! paths in that term's causal cone, then walks the selections in order and
//! takes one gradient step on each subset. Later steps see earlier updates.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::gradients;
use crate::graph::{
    build_graph, causal_cone, sample_random_path, sample_random_path_from, shortest_paths,
};
use crate::statevector::{expectation, Hamiltonian, StateVector};

/// Anything the optimizers can minimize.
pub trait Objective {
    fn circuit(&self) -> &Circuit;

    fn value(&self, params: &[f64]) -> Result<f64>;

    /// Exact partial derivatives for `slots`, in the same order.
    fn gradient(&self, params: &[f64], slots: &[usize]) -> Result<Vec<f64>>;

    fn gradient_nshot(
        &self,
        params: &[f64],
        slots: &[usize],
        n_shots: u64,
        rng: &mut dyn RngCore,
    ) -> Result<Vec<f64>>;

    /// Qubits measured by each term; path selection runs once per entry.
    fn measured_terms(&self) -> Vec<Vec<usize>>;

    fn accuracy(&self, _params: &[f64]) -> Result<Option<f64>> {
        Ok(None)
    }
}

/// `⟨H⟩` on `U(θ)|0…0⟩`.
#[derive(Debug, Clone)]
pub struct EnergyObjective {
    circuit: Circuit,
    ham: Hamiltonian,
}

impl EnergyObjective {
    pub fn new(circuit: Circuit, ham: Hamiltonian) -> Result<Self> {
        if circuit.n_qubits() != ham.n_qubits() {
            return Err(Error::QubitCountMismatch {
                expected: circuit.n_qubits(),
                actual: ham.n_qubits(),
            });
        }
        Ok(EnergyObjective { circuit, ham })
    }

    pub fn hamiltonian(&self) -> &Hamiltonian {
        &self.ham
    }
}

impl Objective for EnergyObjective {
    fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    fn value(&self, params: &[f64]) -> Result<f64> {
        let state = crate::circuit::evaluate(
            &self.circuit,
            params,
            &StateVector::zero(self.circuit.n_qubits()),
        )?;
        expectation(&state, &self.ham)
    }

    fn gradient(&self, params: &[f64], slots: &[usize]) -> Result<Vec<f64>> {
        gradients::gradient(&self.circuit, &self.ham, params, slots)
    }

    fn gradient_nshot(
        &self,
        params: &[f64],
        slots: &[usize],
        n_shots: u64,
        rng: &mut dyn RngCore,
    ) -> Result<Vec<f64>> {
        gradients::gradient_nshot(&self.circuit, &self.ham, params, slots, n_shots, rng)
    }

    fn measured_terms(&self) -> Vec<Vec<usize>> {
        self.ham
            .terms()
            .iter()
            .map(|t| t.qubits().collect())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    RandomPath,
    ShortestPath,
    CombinedPaths,
    Sgd,
    Nesterov,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::RandomPath => "random-path",
            Strategy::ShortestPath => "shortest-path",
            Strategy::CombinedPaths => "combined-paths",
            Strategy::Sgd => "sgd",
            Strategy::Nesterov => "nesterov",
        }
    }

    pub fn is_path_based(self) -> bool {
        matches!(
            self,
            Strategy::RandomPath | Strategy::ShortestPath | Strategy::CombinedPaths
        )
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "random" | "random-path" => Ok(Strategy::RandomPath),
            "shortest" | "shortest-path" => Ok(Strategy::ShortestPath),
            "combined" | "combined-paths" => Ok(Strategy::CombinedPaths),
            "sgd" => Ok(Strategy::Sgd),
            "nesterov" => Ok(Strategy::Nesterov),
            other => Err(Error::InvalidConfig(format!("unknown strategy `{other}`"))),
        }
    }
}

pub const DEFAULT_MOMENTUM: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub learning_rate: f64,
    pub max_iterations: usize,
    pub momentum: f64,
    /// Exact expectations when `None`.
    pub n_shots: Option<u64>,
    pub seed: u64,
}

impl OptimizerConfig {
    pub fn new(learning_rate: f64, max_iterations: usize) -> Self {
        OptimizerConfig {
            learning_rate,
            max_iterations,
            momentum: DEFAULT_MOMENTUM,
            n_shots: None,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.max_iterations < 1 {
            return Err(Error::InvalidConfig(
                "max_iterations must be at least 1".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::InvalidConfig(format!(
                "momentum must lie in [0, 1), got {}",
                self.momentum
            )));
        }
        if self.n_shots == Some(0) {
            return Err(Error::ZeroShots);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub objective: f64,
    pub accuracy: Option<f64>,
    /// Cumulative number of scalar parameter updates so far.
    pub updates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// `max_iterations + 1` records, starting with the initial point.
    pub records: Vec<IterationRecord>,
    pub final_params: Vec<f64>,
    /// Terms for which the shortest-path strategy found no finite-weight
    /// path and fell back to a random path.
    pub fallbacks: usize,
}

impl Trajectory {
    pub fn final_objective(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.objective)
    }
}

fn record<O: Objective + ?Sized>(
    obj: &O,
    iteration: usize,
    params: &[f64],
    updates: usize,
) -> Result<IterationRecord> {
    Ok(IterationRecord {
        iteration,
        objective: obj.value(params)?,
        accuracy: obj.accuracy(params)?,
        updates,
    })
}

fn check_start<O: Objective + ?Sized>(
    obj: &O,
    init: &[f64],
    config: &OptimizerConfig,
) -> Result<()> {
    config.validate()?;
    if init.len() != obj.circuit().n_params() {
        return Err(Error::ParamLengthMismatch {
            expected: obj.circuit().n_params(),
            actual: init.len(),
        });
    }
    Ok(())
}

fn grad<O: Objective + ?Sized>(
    obj: &O,
    params: &[f64],
    slots: &[usize],
    config: &OptimizerConfig,
    rng: &mut dyn RngCore,
) -> Result<Vec<f64>> {
    match config.n_shots {
        Some(n) => obj.gradient_nshot(params, slots, n, rng),
        None => obj.gradient(params, slots),
    }
}

fn push_unique(into: &mut Vec<usize>, slots: &[usize]) {
    for &s in slots {
        if !into.contains(&s) {
            into.push(s);
        }
    }
}

/// Parameter subsets for one iteration, one per objective term, in term order.
/// Returns the subsets and the number of shortest-path fallbacks.
pub fn select_parameters<O: Objective + ?Sized, R: Rng + ?Sized>(
    obj: &O,
    params: &[f64],
    strategy: Strategy,
    rng: &mut R,
) -> Result<(Vec<Vec<usize>>, usize)> {
    if !strategy.is_path_based() {
        return Err(Error::InvalidArgument(format!(
            "{strategy} does not select paths"
        )));
    }
    let graph = build_graph(obj.circuit(), params)?;
    let mut selections = Vec::new();
    let mut fallbacks = 0;
    for measured in obj.measured_terms() {
        if measured.is_empty() {
            // identity terms have no cone
            continue;
        }
        let cone = causal_cone(&graph, &measured)?;
        let mut slots = Vec::new();
        for &q in &measured {
            let terminal = cone.terminal(q).expect("measured terminal is in its cone");
            match strategy {
                Strategy::RandomPath => {
                    push_unique(&mut slots, &sample_random_path(&cone, terminal, rng)?.slots)
                }
                Strategy::ShortestPath => match shortest_paths(&cone, terminal) {
                    Ok(paths) => {
                        let pick = &paths[rng.random_range(0..paths.len())];
                        push_unique(&mut slots, &pick.slots);
                    }
                    Err(Error::MetricDisconnected) => {
                        fallbacks += 1;
                        push_unique(&mut slots, &sample_random_path(&cone, terminal, rng)?.slots);
                    }
                    Err(e) => return Err(e),
                },
                Strategy::CombinedPaths => {
                    let starts: BTreeSet<_> = cone
                        .ancestors(&terminal)
                        .into_iter()
                        .filter(|n| n.segment == 0)
                        .collect();
                    for start in starts {
                        push_unique(
                            &mut slots,
                            &sample_random_path_from(&cone, start, terminal, rng)?.slots,
                        );
                    }
                }
                Strategy::Sgd | Strategy::Nesterov => unreachable!(),
            }
        }
        selections.push(slots);
    }
    Ok((selections, fallbacks))
}

/// Path-based stochastic optimization.
pub fn path_optimize<O: Objective + ?Sized>(
    obj: &O,
    init_params: &[f64],
    strategy: Strategy,
    config: &OptimizerConfig,
    rng: &mut dyn RngCore,
) -> Result<Trajectory> {
    check_start(obj, init_params, config)?;
    if !strategy.is_path_based() {
        return Err(Error::InvalidArgument(format!(
            "{strategy} is not a path strategy"
        )));
    }
    let mut params = init_params.to_vec();
    let mut updates = 0;
    let mut fallbacks = 0;
    let mut records = vec![record(obj, 0, &params, 0)?];
    for iteration in 1..=config.max_iterations {
        let (selections, fell_back) = select_parameters(obj, &params, strategy, rng)?;
        fallbacks += fell_back;
        for slots in selections.iter().filter(|s| !s.is_empty()) {
            let g = grad(obj, &params, slots, config, rng)?;
            for (&slot, gi) in slots.iter().zip(g) {
                params[slot] -= config.learning_rate * gi;
            }
            updates += slots.len();
        }
        records.push(record(obj, iteration, &params, updates)?);
    }
    Ok(Trajectory {
        records,
        final_params: params,
        fallbacks,
    })
}

/// Full-gradient descent, `θ ← θ − α ∇f(θ)`.
pub fn sgd_optimize<O: Objective + ?Sized>(
    obj: &O,
    init_params: &[f64],
    config: &OptimizerConfig,
    rng: &mut dyn RngCore,
) -> Result<Trajectory> {
    check_start(obj, init_params, config)?;
    let all: Vec<usize> = (0..init_params.len()).collect();
    let mut params = init_params.to_vec();
    let mut records = vec![record(obj, 0, &params, 0)?];
    for iteration in 1..=config.max_iterations {
        let g = grad(obj, &params, &all, config, rng)?;
        for (p, gi) in params.iter_mut().zip(g) {
            *p -= config.learning_rate * gi;
        }
        records.push(record(obj, iteration, &params, iteration * all.len())?);
    }
    Ok(Trajectory {
        records,
        final_params: params,
        fallbacks: 0,
    })
}

/// Nesterov accelerated gradient: gradient at `θ + μv`, then
/// `v ← μv − αg`, `θ ← θ + v`, starting from `v = 0`.
pub fn nesterov_optimize<O: Objective + ?Sized>(
    obj: &O,
    init_params: &[f64],
    config: &OptimizerConfig,
    rng: &mut dyn RngCore,
) -> Result<Trajectory> {
    check_start(obj, init_params, config)?;
    let all: Vec<usize> = (0..init_params.len()).collect();
    let mu = config.momentum;
    let mut params = init_params.to_vec();
    let mut velocity = vec![0.0; params.len()];
    let mut records = vec![record(obj, 0, &params, 0)?];
    for iteration in 1..=config.max_iterations {
        let lookahead: Vec<f64> = params
            .iter()
            .zip(&velocity)
            .map(|(p, v)| p + mu * v)
            .collect();
        let g = grad(obj, &lookahead, &all, config, rng)?;
        for ((p, v), gi) in params.iter_mut().zip(velocity.iter_mut()).zip(g) {
            *v = mu * *v - config.learning_rate * gi;
            *p += *v;
        }
        records.push(record(obj, iteration, &params, iteration * all.len())?);
    }
    Ok(Trajectory {
        records,
        final_params: params,
        fallbacks: 0,
    })
}

/// Dispatches to the optimizer matching `strategy`.
pub fn optimize<O: Objective + ?Sized>(
    obj: &O,
    init_params: &[f64],
    strategy: Strategy,
    config: &OptimizerConfig,
    rng: &mut dyn RngCore,
) -> Result<Trajectory> {
    match strategy {
        Strategy::Sgd => sgd_optimize(obj, init_params, config, rng),
        Strategy::Nesterov => nesterov_optimize(obj, init_params, config, rng),
        _ => path_optimize(obj, init_params, strategy, config, rng),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{CircuitBuilder, GateKind};
    use crate::statevector::{Pauli, PauliTerm};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cosine_objective() -> EnergyObjective {
        let mut b = CircuitBuilder::new(2);
        b.rotation(GateKind::Ry, &[0]).unwrap();
        let h = Hamiltonian::new(2, vec![PauliTerm::new(1.0, [(0, Pauli::Z)])]).unwrap();
        EnergyObjective::new(b.build().unwrap(), h).unwrap()
    }

    #[test]
    fn strategy_names_round_trip() {
        for s in [
            Strategy::RandomPath,
            Strategy::ShortestPath,
            Strategy::CombinedPaths,
            Strategy::Sgd,
            Strategy::Nesterov,
        ] {
            assert_eq!(s.name().parse::<Strategy>().unwrap(), s);
        }
        assert_eq!(
            "shortest".parse::<Strategy>().unwrap(),
            Strategy::ShortestPath
        );
        assert!("adam".parse::<Strategy>().is_err());
    }

    #[test]
    fn config_validation() {
        assert!(OptimizerConfig::new(0.0, 10).validate().is_err());
        assert!(OptimizerConfig::new(0.1, 0).validate().is_err());
        let mut c = OptimizerConfig::new(0.1, 10);
        c.momentum = 1.0;
        assert!(c.validate().is_err());
        c.momentum = 0.5;
        c.n_shots = Some(0);
        assert!(c.validate().is_err());
    }

    #[test]
    fn path_strategies_descend_cosine() {
        let obj = cosine_objective();
        let config = OptimizerConfig::new(0.1, 200);
        for s in [
            Strategy::RandomPath,
            Strategy::ShortestPath,
            Strategy::CombinedPaths,
        ] {
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            let t = path_optimize(&obj, &[1.0], s, &config, &mut rng).unwrap();
            assert_eq!(t.records.len(), 201);
            assert!(
                (t.final_objective() + 1.0).abs() < 1e-3,
                "{s}: {}",
                t.final_objective()
            );
        }
    }

    #[test]
    fn out_of_cone_parameters_never_move() {
        let mut b = CircuitBuilder::new(2);
        b.rotation(GateKind::Ry, &[1]).unwrap();
        let h = Hamiltonian::new(2, vec![PauliTerm::new(1.0, [(0, Pauli::Z)])]).unwrap();
        let obj = EnergyObjective::new(b.build().unwrap(), h).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = path_optimize(
            &obj,
            &[0.8],
            Strategy::RandomPath,
            &OptimizerConfig::new(0.1, 20),
            &mut rng,
        )
        .unwrap();
        assert_eq!(t.final_params, vec![0.8]);
        assert!(t
            .records
            .iter()
            .all(|r| r.objective == 1.0 && r.updates == 0));
    }

    #[test]
    fn sgd_rejects_path_only_misuse() {
        let obj = cosine_objective();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(path_optimize(
            &obj,
            &[1.0],
            Strategy::Sgd,
            &OptimizerConfig::new(0.1, 2),
            &mut rng
        )
        .is_err());
        assert!(sgd_optimize(&obj, &[1.0, 2.0], &OptimizerConfig::new(0.1, 2), &mut rng).is_err());
    }
}
