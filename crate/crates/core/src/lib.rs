//! Information flow in parameterized quantum circuits.
//!
//! The crate turns a parameterized circuit into a weighted directed graph
//! whose two-qubit edges are scored by a mutual-information distance, then
//! uses paths through the causal cone of each measured observable to pick
//! which parameters to update during variational optimization.
//!
//! Layers, bottom-up:
//!
//! - [`statevector`]: dense simulation, Pauli expectations, shot sampling.
//! - [`circuit`]: gate sequences, ansatz builders, basis encoding.
//! - [`metric`]: unitary embedding, entropies, mutual information, leg distances.
//! - [`graph`]: circuit graphs, causal cones, random and shortest paths.
//! - [`gradients`]: parameter-shift rules and a finite-difference oracle.
//! - [`problems`]: XXZ lattice Hamiltonians, exact ground energies, parity VQC.
//! - [`optimizers`]: path-based optimizer plus SGD and Nesterov baselines.
//! - [`harness`]: seeded experiment runner, CSV results, summaries.

pub mod circuit;
pub mod error;
pub mod gradients;
pub mod graph;
pub mod harness;
pub mod metric;
pub mod optimizers;
pub mod problems;
pub mod statevector;

pub use error::{Error, Result};
