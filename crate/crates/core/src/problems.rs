//! Problem instances: the XXZ-Heisenberg model on a rectangular grid and the
//! n-bit parity classifier.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{evaluate, Circuit};
use crate::error::{Error, Result};
use crate::gradients::{gradient_from, gradient_nshot_from};
use crate::optimizers::Objective;
use crate::statevector::{sample_expectation, Hamiltonian, Pauli, PauliTerm, StateVector};

/// Largest register handled by [`exact_ground_energy`].
pub const MAX_EXACT_QUBITS: usize = 14;
/// Registers up to this size are diagonalized densely.
pub const DENSE_QUBIT_LIMIT: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub rows: usize,
    pub cols: usize,
    pub jx: f64,
    pub jy: f64,
    pub jz: f64,
    pub h: f64,
}

impl LatticeSpec {
    /// XXZ couplings `J_X = J_Y = j`, `J_Z = delta`.
    pub fn xxz(rows: usize, cols: usize, j: f64, delta: f64, h: f64) -> Self {
        LatticeSpec {
            rows,
            cols,
            jx: j,
            jy: j,
            jz: delta,
            h,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.rows * self.cols
    }

    /// Nearest-neighbour pairs with open boundaries: horizontal first, then vertical.
    /// Site `(r, c)` is qubit `r * cols + c`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let site = |r: usize, c: usize| r * self.cols + c;
        let mut edges = Vec::new();
        for r in 0..self.rows {
            for c in 0..self.cols.saturating_sub(1) {
                edges.push((site(r, c), site(r, c + 1)));
            }
        }
        for r in 0..self.rows.saturating_sub(1) {
            for c in 0..self.cols {
                edges.push((site(r, c), site(r + 1, c)));
            }
        }
        edges
    }
}

/// `H = Σ_⟨i,j⟩ (−J_X XX − J_Y YY − J_Z ZZ) − h Σ Z`; single-site terms are
/// omitted when `h = 0`.
pub fn build_xxz(spec: &LatticeSpec) -> Result<Hamiltonian> {
    if spec.rows == 0 || spec.cols == 0 {
        return Err(Error::InvalidArgument(
            "lattice needs at least one row and column".into(),
        ));
    }
    let mut terms = Vec::new();
    for (i, j) in spec.edges() {
        terms.push(PauliTerm::new(-spec.jx, [(i, Pauli::X), (j, Pauli::X)]));
        terms.push(PauliTerm::new(-spec.jy, [(i, Pauli::Y), (j, Pauli::Y)]));
        terms.push(PauliTerm::new(-spec.jz, [(i, Pauli::Z), (j, Pauli::Z)]));
    }
    if spec.h != 0.0 {
        for k in 0..spec.n_qubits() {
            terms.push(PauliTerm::new(-spec.h, [(k, Pauli::Z)]));
        }
    }
    Hamiltonian::new(spec.n_qubits(), terms)
}

/// Smallest eigenvalue: dense up to [`DENSE_QUBIT_LIMIT`] qubits, Lanczos above.
pub fn exact_ground_energy(ham: &Hamiltonian) -> Result<f64> {
    if ham.n_qubits() <= DENSE_QUBIT_LIMIT {
        dense_ground_energy(ham)
    } else {
        lanczos_ground_energy(ham)
    }
}

pub fn dense_ground_energy(ham: &Hamiltonian) -> Result<f64> {
    if ham.n_qubits() > MAX_EXACT_QUBITS {
        return Err(Error::DimensionTooLarge(ham.n_qubits()));
    }
    let rows = ham.to_dense();
    let dim = rows.len();
    let m = DMatrix::from_fn(dim, dim, |i, j| rows[i][j]);
    let eig = SymmetricEigen::new(m);
    Ok(eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min))
}

const LANCZOS_MAX_STEPS: usize = 300;
const LANCZOS_CHECK_EVERY: usize = 5;
const LANCZOS_TOL: f64 = 1e-12;

fn dot(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

fn lowest_tridiagonal(alpha: &[f64], beta: &[f64]) -> f64 {
    let k = alpha.len();
    let t = DMatrix::from_fn(k, k, |i, j| match i.abs_diff(j) {
        0 => alpha[i],
        1 => beta[i.min(j)],
        _ => 0.0,
    });
    SymmetricEigen::new(t)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Matrix-free Lanczos with full reorthogonalization, from a fixed-seed
/// random start vector.
pub fn lanczos_ground_energy(ham: &Hamiltonian) -> Result<f64> {
    let n = ham.n_qubits();
    if n > MAX_EXACT_QUBITS {
        return Err(Error::DimensionTooLarge(n));
    }
    let dim = 1usize << n;
    let mut rng = ChaCha8Rng::seed_from_u64(0x01a2_c705);
    let mut v: Vec<Complex64> = (0..dim)
        .map(|_| {
            let re = (rng.next_u32() as f64 / u32::MAX as f64) - 0.5;
            let im = (rng.next_u32() as f64 / u32::MAX as f64) - 0.5;
            Complex64::new(re, im)
        })
        .collect();
    let norm = dot(&v, &v).re.sqrt();
    v.iter_mut().for_each(|x| *x /= norm);

    let mut basis: Vec<Vec<Complex64>> = vec![v];
    let (mut alpha, mut beta) = (Vec::new(), Vec::new());
    let mut last = f64::INFINITY;
    for step in 0..LANCZOS_MAX_STEPS.min(dim) {
        let current = &basis[step];
        let mut w = ham.apply(current);
        let a = dot(current, &w).re;
        alpha.push(a);
        for _ in 0..2 {
            for b in &basis {
                let proj = dot(b, &w);
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= proj * y);
            }
        }
        let b = dot(&w, &w).re.sqrt();
        let converged_space = b < LANCZOS_TOL;
        if converged_space || (step + 1) % LANCZOS_CHECK_EVERY == 0 {
            let lowest = lowest_tridiagonal(&alpha, &beta);
            if converged_space || (lowest - last).abs() < LANCZOS_TOL * lowest.abs().max(1.0) {
                return Ok(lowest);
            }
            last = lowest;
        }
        beta.push(b);
        w.iter_mut().for_each(|x| *x /= b);
        basis.push(w);
    }
    Ok(lowest_tridiagonal(&alpha, &beta[..alpha.len() - 1]))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityDataset {
    pub n_bits: usize,
    /// `(bits, label)` in lexicographic order of the bit vectors.
    pub samples: Vec<(Vec<u8>, u8)>,
}

/// All `2^n` bit vectors labelled 1 when the number of ones is odd.
pub fn parity_dataset(n_bits: usize) -> Result<ParityDataset> {
    if !(1..=10).contains(&n_bits) {
        return Err(Error::InvalidArgument(format!(
            "parity dataset supports 1..=10 bits, got {n_bits}"
        )));
    }
    let samples = (0..1usize << n_bits)
        .map(|idx| {
            let bits: Vec<u8> = (0..n_bits)
                .map(|i| ((idx >> (n_bits - 1 - i)) & 1) as u8)
                .collect();
            let label = (idx.count_ones() % 2) as u8;
            (bits, label)
        })
        .collect();
    Ok(ParityDataset { n_bits, samples })
}

/// `±1` target for a `{0, 1}` label.
pub fn mapped_label(label: u8) -> f64 {
    1.0 - 2.0 * label as f64
}

fn encoded_state(bits: &[u8]) -> Result<StateVector> {
    let index = bits
        .iter()
        .fold(0usize, |acc, &b| (acc << 1) | (b != 0) as usize);
    StateVector::basis(bits.len(), index)
}

fn readout() -> PauliTerm {
    PauliTerm::new(1.0, [(0, Pauli::Z)])
}

/// `⟨Z₀⟩` after basis-encoding `bits` and applying the model circuit.
pub fn vqc_predict(circuit: &Circuit, params: &[f64], bits: &[u8]) -> Result<f64> {
    if bits.len() != circuit.n_qubits() {
        return Err(Error::QubitCountMismatch {
            expected: circuit.n_qubits(),
            actual: bits.len(),
        });
    }
    let state = evaluate(circuit, params, &encoded_state(bits)?)?;
    readout().string_expectation(&state)
}

fn predictions(circuit: &Circuit, params: &[f64], data: &ParityDataset) -> Result<Vec<f64>> {
    data.samples
        .iter()
        .map(|(bits, _)| vqc_predict(circuit, params, bits))
        .collect()
}

/// Mean of `(m_i − ŷ_i)²` with `m_i = 1 − 2 y_i`.
pub fn vqc_loss(circuit: &Circuit, params: &[f64], data: &ParityDataset) -> Result<f64> {
    if data.samples.is_empty() {
        return Err(Error::InvalidArgument("empty dataset".into()));
    }
    let preds = predictions(circuit, params, data)?;
    Ok(square_loss(&preds, data))
}

fn square_loss(preds: &[f64], data: &ParityDataset) -> f64 {
    let sum: f64 = preds
        .iter()
        .zip(&data.samples)
        .map(|(p, (_, y))| (mapped_label(*y) - p).powi(2))
        .sum();
    sum / data.samples.len() as f64
}

/// Predicted class is 0 when `ŷ ≥ 0`, else 1.
pub fn predicted_class(prediction: f64) -> u8 {
    if prediction >= 0.0 {
        0
    } else {
        1
    }
}

pub fn vqc_accuracy(circuit: &Circuit, params: &[f64], data: &ParityDataset) -> Result<f64> {
    if data.samples.is_empty() {
        return Err(Error::InvalidArgument("empty dataset".into()));
    }
    let preds = predictions(circuit, params, data)?;
    Ok(accuracy_of(&preds, data))
}

fn accuracy_of(preds: &[f64], data: &ParityDataset) -> f64 {
    let hits = preds
        .iter()
        .zip(&data.samples)
        .filter(|(p, (_, y))| predicted_class(**p) == *y)
        .count();
    hits as f64 / data.samples.len() as f64
}

/// Square-loss training objective of a parity classifier read out on qubit 0.
#[derive(Debug, Clone)]
pub struct VqcObjective {
    circuit: Circuit,
    data: ParityDataset,
    readout: Hamiltonian,
}

impl VqcObjective {
    pub fn new(circuit: Circuit, data: ParityDataset) -> Result<Self> {
        if circuit.n_qubits() != data.n_bits {
            return Err(Error::QubitCountMismatch {
                expected: circuit.n_qubits(),
                actual: data.n_bits,
            });
        }
        if data.samples.is_empty() {
            return Err(Error::InvalidArgument("empty dataset".into()));
        }
        let readout = Hamiltonian::new(circuit.n_qubits(), vec![readout()])?;
        Ok(VqcObjective {
            circuit,
            data,
            readout,
        })
    }

    pub fn data(&self) -> &ParityDataset {
        &self.data
    }
}

impl Objective for VqcObjective {
    fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    fn value(&self, params: &[f64]) -> Result<f64> {
        vqc_loss(&self.circuit, params, &self.data)
    }

    /// `∂L/∂θ = (1/N) Σ −2 (m_i − ŷ_i) ∂ŷ_i/∂θ`, each `∂ŷ_i` by parameter shift.
    fn gradient(&self, params: &[f64], slots: &[usize]) -> Result<Vec<f64>> {
        let n = self.data.samples.len() as f64;
        let mut grad = vec![0.0; slots.len()];
        for (bits, y) in &self.data.samples {
            let initial = encoded_state(bits)?;
            let pred = readout().string_expectation(&evaluate(&self.circuit, params, &initial)?)?;
            let weight = -2.0 * (mapped_label(*y) - pred) / n;
            let dpred = gradient_from(&self.circuit, &self.readout, params, &initial, slots)?;
            grad.iter_mut()
                .zip(dpred)
                .for_each(|(g, d)| *g += weight * d);
        }
        Ok(grad)
    }

    fn gradient_nshot(
        &self,
        params: &[f64],
        slots: &[usize],
        n_shots: u64,
        rng: &mut dyn RngCore,
    ) -> Result<Vec<f64>> {
        let n = self.data.samples.len() as f64;
        let term = readout();
        let mut grad = vec![0.0; slots.len()];
        for (bits, y) in &self.data.samples {
            let initial = encoded_state(bits)?;
            let state = evaluate(&self.circuit, params, &initial)?;
            let pred = sample_expectation(&state, &term, n_shots, rng)?;
            let weight = -2.0 * (mapped_label(*y) - pred) / n;
            let dpred = gradient_nshot_from(
                &self.circuit,
                &self.readout,
                params,
                &initial,
                slots,
                n_shots,
                rng,
            )?;
            grad.iter_mut()
                .zip(dpred)
                .for_each(|(g, d)| *g += weight * d);
        }
        Ok(grad)
    }

    fn measured_terms(&self) -> Vec<Vec<usize>> {
        vec![vec![0]]
    }

    fn accuracy(&self, params: &[f64]) -> Result<Option<f64>> {
        vqc_accuracy(&self.circuit, params, &self.data).map(Some)
    }
}
