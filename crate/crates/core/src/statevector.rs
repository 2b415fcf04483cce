//! Dense statevector simulation.
//!
//! Amplitude ordering: qubit 0 is the most significant bit of the basis
//! index, so on `n` qubits qubit `q` corresponds to bit `n - 1 - q`.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::circuit::{GateInstance, GateMatrix};
use crate::error::{Error, Result};

const NORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩`
    pub fn zero(n_qubits: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        StateVector {
            n_qubits,
            amplitudes,
        }
    }

    /// Computational basis state with the given index (qubit 0 = MSB).
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        if index >= 1 << n_qubits {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for {n_qubits} qubits"
            )));
        }
        let mut s = StateVector {
            n_qubits,
            amplitudes: vec![Complex64::new(0.0, 0.0); 1 << n_qubits],
        };
        s.amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    /// Wraps raw amplitudes; the length must be a power of two and the norm 1.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "amplitude count {len} is not a power of two"
            )));
        }
        let s = StateVector {
            n_qubits: len.trailing_zeros() as usize,
            amplitudes,
        };
        let norm = s.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidArgument(format!(
                "state has squared norm {norm}"
            )));
        }
        Ok(s)
    }

    /// Normalizes arbitrary (nonzero) amplitudes.
    pub fn normalized(mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidArgument("zero vector".into()));
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Self::from_amplitudes(amplitudes)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.inner(other).norm_sqr()
    }

    fn bit(&self, qubit: usize) -> usize {
        1 << (self.n_qubits - 1 - qubit)
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.n_qubits {
            Err(Error::QubitOutOfRange {
                qubit,
                n_qubits: self.n_qubits,
            })
        } else {
            Ok(())
        }
    }

    /// Applies a dense gate matrix in place. For two-qubit matrices
    /// `qubits[0]` is the high bit of the 4x4 index.
    pub fn apply_matrix(&mut self, qubits: &[usize], matrix: &GateMatrix) -> Result<()> {
        for &q in qubits {
            self.check_qubit(q)?;
        }
        match (matrix, qubits) {
            (GateMatrix::One(m), &[q]) => {
                let mask = self.bit(q);
                for i in (0..self.amplitudes.len()).filter(|i| i & mask == 0) {
                    let (a0, a1) = (self.amplitudes[i], self.amplitudes[i | mask]);
                    self.amplitudes[i] = m[0][0] * a0 + m[0][1] * a1;
                    self.amplitudes[i | mask] = m[1][0] * a0 + m[1][1] * a1;
                }
                Ok(())
            }
            (GateMatrix::Two(m), &[q1, q2]) if q1 != q2 => {
                let (hi, lo) = (self.bit(q1), self.bit(q2));
                let idx = |base: usize, k: usize| {
                    base | if k & 2 != 0 { hi } else { 0 } | if k & 1 != 0 { lo } else { 0 }
                };
                for base in (0..self.amplitudes.len()).filter(|i| i & (hi | lo) == 0) {
                    let old: [Complex64; 4] =
                        std::array::from_fn(|k| self.amplitudes[idx(base, k)]);
                    for (r, row) in m.iter().enumerate() {
                        self.amplitudes[idx(base, r)] =
                            row.iter().zip(&old).map(|(x, y)| x * y).sum();
                    }
                }
                Ok(())
            }
            _ => Err(Error::InvalidGate(format!(
                "matrix arity does not match qubits {qubits:?}"
            ))),
        }
    }
}

/// Returns the state after `gate`; the input is left untouched.
pub fn apply_gate(state: &StateVector, gate: &GateInstance, params: &[f64]) -> Result<StateVector> {
    gate.validate()?;
    let mut out = state.clone();
    out.apply_matrix(&gate.qubits, &gate.matrix(params)?)?;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pauli::X => "X",
            Pauli::Y => "Y",
            Pauli::Z => "Z",
        })
    }
}

/// Weighted Pauli string. An empty operator map is the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliTerm {
    pub coefficient: f64,
    pub operators: BTreeMap<usize, Pauli>,
}

impl PauliTerm {
    pub fn new(coefficient: f64, ops: impl IntoIterator<Item = (usize, Pauli)>) -> Self {
        PauliTerm {
            coefficient,
            operators: ops.into_iter().collect(),
        }
    }

    pub fn identity(coefficient: f64) -> Self {
        PauliTerm {
            coefficient,
            operators: BTreeMap::new(),
        }
    }

    pub fn qubits(&self) -> impl Iterator<Item = usize> + '_ {
        self.operators.keys().copied()
    }

    /// Bit masks of the string: (flip mask, phase mask, number of Y factors).
    fn masks(&self, n_qubits: usize) -> (usize, usize, usize) {
        let (mut flip, mut phase, mut ny) = (0, 0, 0);
        for (&q, &p) in &self.operators {
            let bit = 1 << (n_qubits - 1 - q);
            match p {
                Pauli::X => flip |= bit,
                Pauli::Z => phase |= bit,
                Pauli::Y => {
                    flip |= bit;
                    phase |= bit;
                    ny += 1;
                }
            }
        }
        (flip, phase, ny)
    }

    fn check(&self, n_qubits: usize) -> Result<()> {
        match self.operators.keys().find(|&&q| q >= n_qubits) {
            Some(&q) => Err(Error::QubitOutOfRange { qubit: q, n_qubits }),
            None => Ok(()),
        }
    }

    /// `⟨ψ|P|ψ⟩` for the bare string, without the coefficient.
    pub fn string_expectation(&self, state: &StateVector) -> Result<f64> {
        self.check(state.n_qubits())?;
        let (flip, phase, ny) = self.masks(state.n_qubits());
        let amps = state.amplitudes();
        let sum: Complex64 = amps
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let v = amps[i ^ flip].conj() * a;
                if (i & phase).count_ones() % 2 == 1 {
                    -v
                } else {
                    v
                }
            })
            .sum();
        let value = sum * Complex64::i().powu(ny as u32);
        Ok(value.re)
    }

    /// `acc += coefficient · P|ψ⟩`, used for matrix-free Hamiltonian products.
    pub fn apply_add(&self, input: &[Complex64], acc: &mut [Complex64], n_qubits: usize) {
        let (flip, phase, ny) = self.masks(n_qubits);
        let scale = Complex64::i().powu(ny as u32) * self.coefficient;
        for (i, a) in input.iter().enumerate() {
            let sign = if (i & phase).count_ones() % 2 == 1 {
                -1.0
            } else {
                1.0
            };
            acc[i ^ flip] += scale * sign * a;
        }
    }
}

impl fmt::Display for PauliTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.coefficient)?;
        if self.operators.is_empty() {
            return f.write_str(" I");
        }
        for (q, p) in &self.operators {
            write!(f, " {p}{q}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    n_qubits: usize,
    terms: Vec<PauliTerm>,
}

impl Hamiltonian {
    pub fn new(n_qubits: usize, terms: Vec<PauliTerm>) -> Result<Self> {
        for t in &terms {
            t.check(n_qubits)?;
        }
        Ok(Hamiltonian { n_qubits, terms })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    /// `H|ψ⟩` without forming the matrix.
    pub fn apply(&self, input: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); input.len()];
        for t in &self.terms {
            t.apply_add(input, &mut out, self.n_qubits);
        }
        out
    }

    /// Dense matrix, row-major, `dim × dim`.
    pub fn to_dense(&self) -> Vec<Vec<Complex64>> {
        let dim = 1usize << self.n_qubits;
        let mut m = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
        let mut col = vec![Complex64::new(0.0, 0.0); dim];
        for j in 0..dim {
            col.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
            col[j] = Complex64::new(1.0, 0.0);
            for (i, v) in self.apply(&col).into_iter().enumerate() {
                m[i][j] = v;
            }
        }
        m
    }
}

/// `Σ_j c_j ⟨ψ|P_j|ψ⟩`
pub fn expectation(state: &StateVector, ham: &Hamiltonian) -> Result<f64> {
    if ham.n_qubits() != state.n_qubits() {
        return Err(Error::QubitCountMismatch {
            expected: ham.n_qubits(),
            actual: state.n_qubits(),
        });
    }
    ham.terms()
        .iter()
        .map(|t| Ok(t.coefficient * t.string_expectation(state)?))
        .sum()
}

/// n-shot estimate of `c⟨P⟩`: the ±1 outcome of `P` is +1 with probability
/// `(1 + ⟨P⟩)/2`, and the estimate is `c · (2k/n − 1)` for `k` successes.
pub fn sample_expectation<R: Rng + ?Sized>(
    state: &StateVector,
    term: &PauliTerm,
    n_shots: u64,
    rng: &mut R,
) -> Result<f64> {
    if n_shots == 0 {
        return Err(Error::ZeroShots);
    }
    let exact = term.string_expectation(state)?;
    let p = ((1.0 + exact) / 2.0).clamp(0.0, 1.0);
    let successes = if p == 1.0 {
        n_shots
    } else if p == 0.0 {
        0
    } else {
        Binomial::new(n_shots, p).expect("p in (0,1)").sample(rng)
    };
    Ok(term.coefficient * (2.0 * successes as f64 / n_shots as f64 - 1.0))
}
