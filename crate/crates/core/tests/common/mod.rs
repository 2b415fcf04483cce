//! Independent dense-matrix oracles shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use infoflow::circuit::{Circuit, GateInstance, GateKind};
use infoflow::statevector::{Hamiltonian, Pauli, StateVector};

pub type CMat = DMatrix<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn m2(a: [[Complex64; 2]; 2]) -> CMat {
    CMat::from_fn(2, 2, |i, j| a[i][j])
}

/// Local 2×2 rotation written out from exp(−iθP/2).
pub fn local_1q(kind: GateKind, theta: f64) -> CMat {
    let (co, si) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let z = c(0.0, 0.0);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match kind {
        GateKind::X => m2([[z, c(1.0, 0.0)], [c(1.0, 0.0), z]]),
        GateKind::H => m2([[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]]),
        GateKind::Rx => m2([[c(co, 0.0), c(0.0, -si)], [c(0.0, -si), c(co, 0.0)]]),
        GateKind::Ry => m2([[c(co, 0.0), c(-si, 0.0)], [c(si, 0.0), c(co, 0.0)]]),
        GateKind::Rz => m2([[c(co, -si), z], [z, c(co, si)]]),
        other => panic!("{other} is not a single-qubit gate"),
    }
}

/// Local 4×4 matrix, control on the high index bit.
pub fn local_2q(kind: GateKind, theta: f64) -> CMat {
    let target = match kind {
        GateKind::Cnot => local_1q(GateKind::X, 0.0),
        GateKind::Cry => local_1q(GateKind::Ry, theta),
        GateKind::Crz => local_1q(GateKind::Rz, theta),
        other => panic!("{other} is not a two-qubit gate"),
    };
    let mut m = CMat::zeros(4, 4);
    m[(0, 0)] = c(1.0, 0.0);
    m[(1, 1)] = c(1.0, 0.0);
    m.view_mut((2, 2), (2, 2)).copy_from(&target);
    m
}

/// Full 2ⁿ×2ⁿ operator of a local matrix acting on `qubits` (qubit 0 is the
/// most significant bit).
pub fn embed(n: usize, qubits: &[usize], local: &CMat) -> CMat {
    let dim = 1 << n;
    let bit = |i: usize, q: usize| (i >> (n - 1 - q)) & 1;
    let sub = |i: usize| qubits.iter().fold(0, |acc, &q| (acc << 1) | bit(i, q));
    let rest_mask: usize = qubits.iter().fold(dim - 1, |m, &q| m & !(1 << (n - 1 - q)));
    CMat::from_fn(dim, dim, |r, col| {
        if r & rest_mask != col & rest_mask {
            return c(0.0, 0.0);
        }
        local[(sub(r), sub(col))]
    })
}

pub fn gate_operator(n: usize, gate: &GateInstance, params: &[f64]) -> CMat {
    let theta = gate.param_slot.map_or(0.0, |s| params[s]);
    let local = if gate.kind.arity() == 1 {
        local_1q(gate.kind, theta)
    } else {
        local_2q(gate.kind, theta)
    };
    embed(n, &gate.qubits, &local)
}

/// Product of full gate operators in moment order.
pub fn circuit_unitary(circuit: &Circuit, params: &[f64]) -> CMat {
    let n = circuit.n_qubits();
    let mut order: Vec<usize> = (0..circuit.gates().len()).collect();
    order.sort_by_key(|&i| circuit.gates()[i].moment);
    let mut u = CMat::identity(1 << n, 1 << n);
    for i in order {
        u = gate_operator(n, &circuit.gates()[i], params) * u;
    }
    u
}

pub fn to_vec(state: &StateVector) -> DVector<Complex64> {
    DVector::from_column_slice(state.amplitudes())
}

pub fn pauli_local(p: Pauli) -> CMat {
    let (o, z) = (c(1.0, 0.0), c(0.0, 0.0));
    match p {
        Pauli::X => m2([[z, o], [o, z]]),
        Pauli::Y => m2([[z, c(0.0, -1.0)], [c(0.0, 1.0), z]]),
        Pauli::Z => m2([[o, z], [z, -o]]),
    }
}

/// Hamiltonian as a sum of Kronecker products.
pub fn dense_hamiltonian(ham: &Hamiltonian) -> CMat {
    let n = ham.n_qubits();
    let dim = 1 << n;
    let mut h = CMat::zeros(dim, dim);
    for t in ham.terms() {
        let mut op = CMat::identity(1, 1);
        for q in 0..n {
            let factor = t
                .operators
                .get(&q)
                .map_or(CMat::identity(2, 2), |&p| pauli_local(p));
            op = op.kronecker(&factor);
        }
        h += op * c(t.coefficient, 0.0);
    }
    h
}

pub fn quadratic_form(h: &CMat, v: &DVector<Complex64>) -> f64 {
    (v.adjoint() * h * v)[(0, 0)].re
}

pub fn random_state<R: Rng>(n: usize, rng: &mut R) -> StateVector {
    let amps = (0..1usize << n)
        .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    StateVector::normalized(amps).unwrap()
}

pub fn random_pauli<R: Rng>(rng: &mut R) -> Pauli {
    [Pauli::X, Pauli::Y, Pauli::Z][rng.random_range(0..3)]
}

/// Random circuit that uses every gate kind at least once (n ≥ 2).
pub fn random_circuit<R: Rng>(n: usize, extra: usize, rng: &mut R) -> Circuit {
    let mut b = infoflow::circuit::CircuitBuilder::new(n);
    let mut kinds: Vec<GateKind> = GateKind::ALL.to_vec();
    for _ in 0..extra {
        kinds.push(GateKind::ALL[rng.random_range(0..GateKind::ALL.len())]);
    }
    for kind in kinds {
        let q0 = rng.random_range(0..n);
        let qubits = if kind.arity() == 1 {
            vec![q0]
        } else {
            let mut q1 = rng.random_range(0..n - 1);
            if q1 >= q0 {
                q1 += 1;
            }
            vec![q0, q1]
        };
        if kind.is_parameterized() {
            b.rotation(kind, &qubits).unwrap();
        } else {
            b.gate(kind, &qubits).unwrap();
        }
    }
    b.build().unwrap()
}

pub fn random_hamiltonian<R: Rng>(n: usize, n_terms: usize, rng: &mut R) -> Hamiltonian {
    let terms = (0..n_terms)
        .map(|_| {
            let weight = rng.random_range(1..=2.min(n));
            let mut ops = std::collections::BTreeMap::new();
            while ops.len() < weight {
                ops.insert(rng.random_range(0..n), random_pauli(rng));
            }
            infoflow::statevector::PauliTerm::new(rng.random_range(-1.0..1.0), ops)
        })
        .collect();
    Hamiltonian::new(n, terms).unwrap()
}

pub fn random_params<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n)
        .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
        .collect()
}

/// Four-leg state of a 4×4 unitary, index `a b c d` from high to low bit,
/// normalized by its Frobenius norm.
pub fn leg_state(u: &CMat) -> Vec<Complex64> {
    let mut psi = vec![c(0.0, 0.0); 16];
    for a in 0..2 {
        for b in 0..2 {
            for cc in 0..2 {
                for d in 0..2 {
                    psi[a << 3 | b << 2 | cc << 1 | d] = u[(2 * cc + d, 2 * a + b)];
                }
            }
        }
    }
    let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    psi.iter().map(|z| z / norm).collect()
}

/// Partial trace keeping the listed legs (0 = a … 3 = d), any subset size.
pub fn partial_trace(psi: &[Complex64], keep: &[usize]) -> CMat {
    let rest: Vec<usize> = (0..4).filter(|l| !keep.contains(l)).collect();
    let place = |legs: &[usize], v: usize| {
        legs.iter().enumerate().fold(0, |acc, (i, &l)| {
            acc | ((v >> (legs.len() - 1 - i)) & 1) << (3 - l)
        })
    };
    let dim = 1 << keep.len();
    CMat::from_fn(dim, dim, |r, col| {
        (0..1 << rest.len())
            .map(|t| {
                psi[place(keep, r) | place(&rest, t)]
                    * psi[place(keep, col) | place(&rest, t)].conj()
            })
            .sum()
    })
}

/// Von Neumann entropy via the real symmetric embedding `[[Re, −Im], [Im, Re]]`,
/// whose spectrum is that of ρ with every eigenvalue doubled up.
pub fn entropy_oracle(rho: &CMat) -> f64 {
    let n = rho.nrows();
    let real = DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let z = rho[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    let eig = nalgebra::SymmetricEigen::new(real).eigenvalues;
    -eig.iter()
        .filter(|&&l| l > 1e-14)
        .map(|l| l * l.ln())
        .sum::<f64>()
        / 2.0
}

pub fn mi_oracle(psi: &[Complex64], a: &[usize], b: &[usize]) -> f64 {
    let s = |legs: &[usize]| {
        if legs.len() == 4 {
            0.0
        } else {
            entropy_oracle(&partial_trace(psi, legs))
        }
    };
    let joint: Vec<usize> = a.iter().chain(b).copied().collect();
    s(a) + s(b) - s(&joint)
}

pub fn to_matrix4(u: &CMat) -> infoflow::circuit::Matrix4 {
    let mut m = [[c(0.0, 0.0); 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = u[(i, j)];
        }
    }
    m
}

/// Random two-qubit unitary built from local rotations and controlled gates.
pub fn random_unitary4<R: Rng>(rng: &mut R) -> CMat {
    let mut u = CMat::identity(4, 4);
    for _ in 0..4 {
        let rot = |rng: &mut R| {
            let kind = [GateKind::Rx, GateKind::Ry, GateKind::Rz][rng.random_range(0..3)];
            local_1q(kind, rng.random_range(-4.0..4.0))
        };
        let layer = rot(rng).kronecker(&rot(rng));
        let kind = [GateKind::Cry, GateKind::Crz, GateKind::Cnot][rng.random_range(0..3)];
        let ent = local_2q(kind, rng.random_range(-4.0..4.0));
        u = ent * layer * u;
    }
    u
}
