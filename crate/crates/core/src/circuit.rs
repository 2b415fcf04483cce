//! Circuit representation, ansatz builders and basis-state encoding.
//!
//! A [`Circuit`] is an ordered list of [`GateInstance`]s. Each gate carries a
//! moment (time step) assigned by as-soon-as-possible scheduling and, for the
//! rotation kinds, a parameter slot into the circuit's parameter vector.
//!
//! Two-qubit gates act on `qubits[0]` (control) and `qubits[1]` (target). The
//! 4x4 matrices returned by [`GateKind::matrix`] index the two-qubit basis as
//! `2 * bit(qubits[0]) + bit(qubits[1])`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::statevector::StateVector;

pub type Matrix2 = [[Complex64; 2]; 2];
pub type Matrix4 = [[Complex64; 4]; 4];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateKind {
    X,
    H,
    Rx,
    Ry,
    Rz,
    Cnot,
    Cry,
    Crz,
}

/// Dense matrix of a gate at a fixed angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateMatrix {
    One(Matrix2),
    Two(Matrix4),
}

impl GateKind {
    pub const ALL: [GateKind; 8] = [
        GateKind::X,
        GateKind::H,
        GateKind::Rx,
        GateKind::Ry,
        GateKind::Rz,
        GateKind::Cnot,
        GateKind::Cry,
        GateKind::Crz,
    ];

    pub fn arity(self) -> usize {
        match self {
            GateKind::Cnot | GateKind::Cry | GateKind::Crz => 2,
            _ => 1,
        }
    }

    pub fn is_parameterized(self) -> bool {
        matches!(
            self,
            GateKind::Rx | GateKind::Ry | GateKind::Rz | GateKind::Cry | GateKind::Crz
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::X => "x",
            GateKind::H => "h",
            GateKind::Rx => "rx",
            GateKind::Ry => "ry",
            GateKind::Rz => "rz",
            GateKind::Cnot => "cnot",
            GateKind::Cry => "cry",
            GateKind::Crz => "crz",
        }
    }

    /// Matrix of the gate. Rotations follow `R_P(θ) = exp(-iθP/2)`;
    /// controlled rotations apply `R_P(θ)` to the target when the control is 1.
    /// `theta` is ignored for fixed gates.
    pub fn matrix(self, theta: f64) -> GateMatrix {
        let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        let ry = [
            [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
            [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
        ];
        let rz = [[Complex64::new(c, -s), ZERO], [ZERO, Complex64::new(c, s)]];
        match self {
            GateKind::X => GateMatrix::One([[ZERO, ONE], [ONE, ZERO]]),
            GateKind::H => {
                let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                GateMatrix::One([[h, h], [h, -h]])
            }
            GateKind::Rx => GateMatrix::One([
                [Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
                [Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
            ]),
            GateKind::Ry => GateMatrix::One(ry),
            GateKind::Rz => GateMatrix::One(rz),
            GateKind::Cnot => GateMatrix::Two(controlled([[ZERO, ONE], [ONE, ZERO]])),
            GateKind::Cry => GateMatrix::Two(controlled(ry)),
            GateKind::Crz => GateMatrix::Two(controlled(rz)),
        }
    }
}

fn controlled(u: Matrix2) -> Matrix4 {
    let mut m = [[ZERO; 4]; 4];
    m[0][0] = ONE;
    m[1][1] = ONE;
    for r in 0..2 {
        for c in 0..2 {
            m[2 + r][2 + c] = u[r][c];
        }
    }
    m
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GateKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .or_else(|| s.eq_ignore_ascii_case("cx").then_some(GateKind::Cnot))
            .ok_or_else(|| Error::UnknownGateKind(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GateInstance {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    pub param_slot: Option<usize>,
    pub moment: usize,
}

impl GateInstance {
    /// Checks arity, distinct qubits and slot presence. Qubit range is checked
    /// against a concrete register elsewhere.
    pub fn validate(&self) -> Result<()> {
        if self.qubits.len() != self.kind.arity() {
            return Err(Error::InvalidGate(format!(
                "{} expects {} qubit(s), got {}",
                self.kind,
                self.kind.arity(),
                self.qubits.len()
            )));
        }
        if self.qubits.len() == 2 && self.qubits[0] == self.qubits[1] {
            return Err(Error::InvalidGate(format!(
                "{} on repeated qubit {}",
                self.kind, self.qubits[0]
            )));
        }
        match (self.kind.is_parameterized(), self.param_slot) {
            (true, None) => Err(Error::InvalidGate(format!(
                "{} requires a parameter slot",
                self.kind
            ))),
            (false, Some(_)) => Err(Error::InvalidGate(format!(
                "{} takes no parameter",
                self.kind
            ))),
            _ => Ok(()),
        }
    }

    /// Rotation angle for this gate given a parameter vector (0 for fixed gates).
    pub fn angle(&self, params: &[f64]) -> Result<f64> {
        match self.param_slot {
            None => Ok(0.0),
            Some(slot) => params.get(slot).copied().ok_or(Error::MissingParameter {
                slot,
                len: params.len(),
            }),
        }
    }

    pub fn matrix(&self, params: &[f64]) -> Result<GateMatrix> {
        Ok(self.kind.matrix(self.angle(params)?))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<GateInstance>,
    n_params: usize,
}

impl Circuit {
    /// Empty circuit on `n_qubits` wires.
    pub fn empty(n_qubits: usize) -> Self {
        Circuit {
            n_qubits,
            gates: Vec::new(),
            n_params: 0,
        }
    }

    /// Builds a circuit from explicit gates, checking every structural invariant:
    /// gate validity, qubit range, strictly increasing moments per wire, and
    /// that each slot in `0..n_params` is referenced.
    pub fn from_gates(n_qubits: usize, n_params: usize, gates: Vec<GateInstance>) -> Result<Self> {
        let mut last_moment: Vec<Option<usize>> = vec![None; n_qubits];
        let mut used = vec![false; n_params];
        for (i, g) in gates.iter().enumerate() {
            g.validate()?;
            for &q in &g.qubits {
                if q >= n_qubits {
                    return Err(Error::QubitOutOfRange { qubit: q, n_qubits });
                }
                if let Some(prev) = last_moment[q] {
                    if g.moment <= prev {
                        return Err(Error::InvalidCircuit(format!(
                            "gate {i} at moment {} does not follow moment {prev} on qubit {q}",
                            g.moment
                        )));
                    }
                }
            }
            for &q in &g.qubits {
                last_moment[q] = Some(g.moment);
            }
            if let Some(slot) = g.param_slot {
                if slot >= n_params {
                    return Err(Error::InvalidCircuit(format!(
                        "slot {slot} exceeds n_params {n_params}"
                    )));
                }
                used[slot] = true;
            }
        }
        if let Some(unused) = used.iter().position(|u| !u) {
            return Err(Error::InvalidCircuit(format!(
                "parameter slot {unused} is never used"
            )));
        }
        Ok(Circuit {
            n_qubits,
            gates,
            n_params,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn gates(&self) -> &[GateInstance] {
        &self.gates
    }

    /// Indices of gates in execution order: by moment, ties broken by sequence order.
    pub fn execution_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.gates.len()).collect();
        order.sort_by_key(|&i| self.gates[i].moment);
        order
    }

    /// Gate indices that read the given parameter slot.
    pub fn gates_with_slot(&self, slot: usize) -> impl Iterator<Item = usize> + '_ {
        self.gates
            .iter()
            .enumerate()
            .filter(move |(_, g)| g.param_slot == Some(slot))
            .map(|(i, _)| i)
    }

    /// One gate per line: `moment kind qubits slot`, with comma-separated
    /// qubits and `-` for gates without a slot. A leading comment carries
    /// the register and parameter counts.
    pub fn to_text(&self) -> String {
        let mut out = format!("# n_qubits={} n_params={}\n", self.n_qubits, self.n_params);
        for g in &self.gates {
            let qubits: Vec<String> = g.qubits.iter().map(|q| q.to_string()).collect();
            let slot = g
                .param_slot
                .map_or_else(|| "-".to_string(), |s| s.to_string());
            out.push_str(&format!(
                "{} {} {} {}\n",
                g.moment,
                g.kind,
                qubits.join(","),
                slot
            ));
        }
        out
    }

    /// Parses the format written by [`Circuit::to_text`]. Without the header
    /// comment the counts are inferred from the largest qubit and slot seen.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut n_qubits = None;
        let mut n_params = None;
        let mut gates = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                for field in comment.split_whitespace() {
                    if let Some(v) = field.strip_prefix("n_qubits=") {
                        n_qubits = Some(parse_usize(v, lineno)?);
                    } else if let Some(v) = field.strip_prefix("n_params=") {
                        n_params = Some(parse_usize(v, lineno)?);
                    }
                }
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 {
                return Err(Error::InvalidCircuit(format!(
                    "line {}: expected 4 fields",
                    lineno + 1
                )));
            }
            let moment = parse_usize(fields[0], lineno)?;
            let kind: GateKind = fields[1].parse()?;
            let qubits = fields[2]
                .split(',')
                .map(|q| parse_usize(q, lineno))
                .collect::<Result<Vec<_>>>()?;
            let param_slot = match fields[3] {
                "-" => None,
                s => Some(parse_usize(s, lineno)?),
            };
            gates.push(GateInstance {
                kind,
                qubits,
                param_slot,
                moment,
            });
        }
        let n_qubits = n_qubits.unwrap_or_else(|| {
            gates
                .iter()
                .flat_map(|g| g.qubits.iter())
                .max()
                .map_or(0, |&q| q + 1)
        });
        let n_params = n_params.unwrap_or_else(|| {
            gates
                .iter()
                .filter_map(|g| g.param_slot)
                .max()
                .map_or(0, |s| s + 1)
        });
        Circuit::from_gates(n_qubits, n_params, gates)
    }
}

fn parse_usize(s: &str, lineno: usize) -> Result<usize> {
    s.parse()
        .map_err(|_| Error::InvalidCircuit(format!("line {}: `{s}` is not an index", lineno + 1)))
}

/// Incremental builder with as-soon-as-possible moment scheduling.
#[derive(Debug, Clone)]
pub struct CircuitBuilder {
    n_qubits: usize,
    gates: Vec<GateInstance>,
    next_moment: Vec<usize>,
    n_params: usize,
}

impl CircuitBuilder {
    pub fn new(n_qubits: usize) -> Self {
        CircuitBuilder {
            n_qubits,
            gates: Vec::new(),
            next_moment: vec![0; n_qubits],
            n_params: 0,
        }
    }

    /// Appends a fixed gate.
    pub fn gate(&mut self, kind: GateKind, qubits: &[usize]) -> Result<&mut Self> {
        self.push(kind, qubits, None)
    }

    /// Appends a parameterized gate bound to a fresh slot.
    pub fn rotation(&mut self, kind: GateKind, qubits: &[usize]) -> Result<&mut Self> {
        let slot = self.n_params;
        self.push(kind, qubits, Some(slot))
    }

    /// Appends a gate with an explicit (possibly shared) slot.
    pub fn push(
        &mut self,
        kind: GateKind,
        qubits: &[usize],
        param_slot: Option<usize>,
    ) -> Result<&mut Self> {
        if let Some(&q) = qubits.iter().find(|&&q| q >= self.n_qubits) {
            return Err(Error::QubitOutOfRange {
                qubit: q,
                n_qubits: self.n_qubits,
            });
        }
        let moment = qubits
            .iter()
            .map(|&q| self.next_moment[q])
            .max()
            .unwrap_or(0);
        let gate = GateInstance {
            kind,
            qubits: qubits.to_vec(),
            param_slot,
            moment,
        };
        gate.validate()?;
        for &q in qubits {
            self.next_moment[q] = moment + 1;
        }
        if let Some(slot) = param_slot {
            self.n_params = self.n_params.max(slot + 1);
        }
        self.gates.push(gate);
        Ok(self)
    }

    pub fn build(self) -> Result<Circuit> {
        Circuit::from_gates(self.n_qubits, self.n_params, self.gates)
    }
}

/// Moments recomputed from gate order by greedy ASAP scheduling.
pub fn asap_moments(circuit: &Circuit) -> Vec<usize> {
    let mut next = vec![0usize; circuit.n_qubits()];
    circuit
        .gates()
        .iter()
        .map(|g| {
            let m = g.qubits.iter().map(|&q| next[q]).max().unwrap_or(0);
            for &q in &g.qubits {
                next[q] = m + 1;
            }
            m
        })
        .collect()
}

/// Applies the circuit to `initial`, gates in moment order.
pub fn evaluate(circuit: &Circuit, params: &[f64], initial: &StateVector) -> Result<StateVector> {
    evaluate_shifted(circuit, params, initial, None)
}

/// Like [`evaluate`], but with gate `shift.0` rotated by an extra `shift.1`
/// radians. Used to shift a single occurrence of a shared slot.
pub fn evaluate_shifted(
    circuit: &Circuit,
    params: &[f64],
    initial: &StateVector,
    shift: Option<(usize, f64)>,
) -> Result<StateVector> {
    if params.len() != circuit.n_params() {
        return Err(Error::ParamLengthMismatch {
            expected: circuit.n_params(),
            actual: params.len(),
        });
    }
    if initial.n_qubits() != circuit.n_qubits() {
        return Err(Error::QubitCountMismatch {
            expected: circuit.n_qubits(),
            actual: initial.n_qubits(),
        });
    }
    let mut state = initial.clone();
    for idx in circuit.execution_order() {
        let gate = &circuit.gates()[idx];
        let mut theta = gate.angle(params)?;
        if let Some((shifted, delta)) = shift {
            if shifted == idx {
                theta += delta;
            }
        }
        state.apply_matrix(&gate.qubits, &gate.kind.matrix(theta))?;
    }
    Ok(state)
}

/// Hardware-efficient VQE layer: `Ry` on every qubit, then `CRy` on the
/// brickwork pairs (0,1),(2,3),… followed by (1,2),(3,4),…
pub fn build_vqe_ansatz(n_qubits: usize, layers: usize) -> Result<Circuit> {
    if n_qubits < 2 {
        return Err(Error::InvalidArgument(format!(
            "ansatz needs at least 2 qubits, got {n_qubits}"
        )));
    }
    if layers < 1 {
        return Err(Error::InvalidArgument(
            "ansatz needs at least 1 layer".into(),
        ));
    }
    let mut b = CircuitBuilder::new(n_qubits);
    for _ in 0..layers {
        for q in 0..n_qubits {
            b.rotation(GateKind::Ry, &[q])?;
        }
        for start in [0, 1] {
            for q in (start..n_qubits - 1).step_by(2) {
                b.rotation(GateKind::Cry, &[q, q + 1])?;
            }
        }
    }
    b.build()
}

/// Classifier layer: `Ry` then `Rz` on every qubit, then `CRy` around the
/// ring (i, i+1 mod n).
pub fn build_vqc_ansatz(n_qubits: usize, layers: usize) -> Result<Circuit> {
    if n_qubits < 2 {
        return Err(Error::InvalidArgument(format!(
            "ansatz needs at least 2 qubits, got {n_qubits}"
        )));
    }
    if layers < 1 {
        return Err(Error::InvalidArgument(
            "ansatz needs at least 1 layer".into(),
        ));
    }
    let mut b = CircuitBuilder::new(n_qubits);
    for _ in 0..layers {
        for q in 0..n_qubits {
            b.rotation(GateKind::Ry, &[q])?;
            b.rotation(GateKind::Rz, &[q])?;
        }
        for q in 0..n_qubits {
            b.rotation(GateKind::Cry, &[q, (q + 1) % n_qubits])?;
        }
    }
    b.build()
}

/// Basis encoding: an `X` on every qubit whose bit is set.
pub fn encode_basis(bits: &[u8]) -> Circuit {
    let mut b = CircuitBuilder::new(bits.len());
    for (q, _) in bits.iter().enumerate().filter(|(_, &bit)| bit != 0) {
        b.gate(GateKind::X, &[q])
            .expect("qubit index in range by construction");
    }
    b.build().expect("fixed gates only")
}
