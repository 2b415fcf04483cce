//! Mutual-information distances across the legs of a two-qubit gate.
//!
//! A two-qubit unitary with entries `U_{(a,b),(c,d)} = ⟨c,d|U|a,b⟩` is read
//! as the four-qubit pure state `|ψ_U⟩ = (1/N) Σ U_{(a,b),(c,d)} |a,b,c,d⟩`.
//! Legs `a`, `b` are the inputs and `c`, `d` the outputs on the first and
//! second wire respectively. Entropies are in nats.
//!
//! Two distances are provided:
//!
//! - [`distance_original`]: `d(i,j) = −log(I(i:j) / 2 log 2)` for any two legs.
//! - [`distance_modified`]: straight pairs `(a,c)`, `(b,d)` use
//!   `−log(I(i:j) / 4 log 2)`; the diagonals `(a,d)`, `(b,c)` both use
//!   `−log(I(ac:bd) / 4 log 2)`.
//!
//! Mutual information below [`ZERO_MI_CUTOFF`] maps to `+∞`.

use std::f64::consts::LN_2;
use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::circuit::{GateKind, GateMatrix, Matrix4};
use crate::error::{Error, Result};

pub const ZERO_MI_CUTOFF: f64 = 1e-12;
const UNITARY_TOL: f64 = 1e-8;
const DENSITY_TOL: f64 = 1e-12;
const EIGEN_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitaryMatrix4(Matrix4);

impl UnitaryMatrix4 {
    /// Accepts `m` (row = output basis index, column = input) when
    /// `max |U†U − I| ≤ 1e-8`.
    pub fn new(m: Matrix4) -> Result<Self> {
        let mut dev: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                let s: Complex64 = m.iter().map(|row| row[i].conj() * row[j]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((s - target).norm());
            }
        }
        if dev > UNITARY_TOL {
            return Err(Error::NotUnitary(dev));
        }
        Ok(UnitaryMatrix4(m))
    }

    pub fn identity() -> Self {
        let mut m = [[Complex64::new(0.0, 0.0); 4]; 4];
        (0..4).for_each(|i| m[i][i] = Complex64::new(1.0, 0.0));
        UnitaryMatrix4(m)
    }

    pub fn swap() -> Self {
        let mut m = [[Complex64::new(0.0, 0.0); 4]; 4];
        for (i, j) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
            m[i][j] = Complex64::new(1.0, 0.0);
        }
        UnitaryMatrix4(m)
    }

    /// Unitary of a two-qubit gate kind at angle `theta`.
    pub fn from_gate(kind: GateKind, theta: f64) -> Result<Self> {
        match kind.matrix(theta) {
            GateMatrix::Two(m) => Ok(UnitaryMatrix4(m)),
            GateMatrix::One(_) => Err(Error::InvalidGate(format!(
                "{kind} is not a two-qubit gate"
            ))),
        }
    }

    pub fn matrix(&self) -> &Matrix4 {
        &self.0
    }

    /// `U_{(a,b),(c,d)} = ⟨c,d|U|a,b⟩`
    pub fn entry(&self, a: usize, b: usize, c: usize, d: usize) -> Complex64 {
        self.0[2 * c + d][2 * a + b]
    }

    pub fn scaled(&self, phase: Complex64) -> Self {
        UnitaryMatrix4(self.0.map(|row| row.map(|x| x * phase)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Leg {
    A,
    B,
    C,
    D,
}

impl Leg {
    pub const ALL: [Leg; 4] = [Leg::A, Leg::B, Leg::C, Leg::D];

    /// Bit position in the 16-entry amplitude index (`a` is the high bit).
    fn shift(self) -> usize {
        match self {
            Leg::A => 3,
            Leg::B => 2,
            Leg::C => 1,
            Leg::D => 0,
        }
    }

    fn name(self) -> char {
        match self {
            Leg::A => 'a',
            Leg::B => 'b',
            Leg::C => 'c',
            Leg::D => 'd',
        }
    }
}

/// Unordered pair of distinct legs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LegPair(Leg, Leg);

impl LegPair {
    pub const AC: LegPair = LegPair(Leg::A, Leg::C);
    pub const BD: LegPair = LegPair(Leg::B, Leg::D);
    pub const AD: LegPair = LegPair(Leg::A, Leg::D);
    pub const BC: LegPair = LegPair(Leg::B, Leg::C);
    /// The four input→output pairs, in edge order: straight then diagonal.
    pub const CROSSING: [LegPair; 4] = [LegPair::AC, LegPair::BD, LegPair::AD, LegPair::BC];

    pub fn new(x: Leg, y: Leg) -> Result<Self> {
        if x == y {
            return Err(Error::InvalidLegs(format!(
                "pair ({}, {}) repeats a leg",
                x.name(),
                y.name()
            )));
        }
        Ok(LegPair(x.min(y), x.max(y)))
    }

    pub fn legs(self) -> (Leg, Leg) {
        (self.0, self.1)
    }

    pub fn is_straight(self) -> bool {
        self == LegPair::AC || self == LegPair::BD
    }

    pub fn is_diagonal(self) -> bool {
        self == LegPair::AD || self == LegPair::BC
    }
}

impl fmt::Display for LegPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.0.name(), self.1.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddedState {
    amplitudes: [Complex64; 16],
    normalization: f64,
}

impl EmbeddedState {
    /// Amplitude of `|a,b,c,d⟩`.
    pub fn amplitude(&self, a: usize, b: usize, c: usize, d: usize) -> Complex64 {
        self.amplitudes[(a << 3) | (b << 2) | (c << 1) | d]
    }

    pub fn amplitudes(&self) -> &[Complex64; 16] {
        &self.amplitudes
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }
}

/// `|ψ_U⟩`, normalized by the Frobenius norm of `U` (2 for a unitary).
pub fn embed_unitary(u: &UnitaryMatrix4) -> EmbeddedState {
    let mut amplitudes = [Complex64::new(0.0, 0.0); 16];
    for (idx, amp) in amplitudes.iter_mut().enumerate() {
        let bits = |s: usize| (idx >> s) & 1;
        *amp = u.entry(bits(3), bits(2), bits(1), bits(0));
    }
    let normalization = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    amplitudes.iter_mut().for_each(|a| *a /= normalization);
    EmbeddedState {
        amplitudes,
        normalization,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: DMatrix<Complex64>,
    legs: Vec<Leg>,
}

impl DensityMatrix {
    pub fn new(entries: DMatrix<Complex64>, legs: Vec<Leg>) -> Result<Self> {
        let rho = DensityMatrix { entries, legs };
        rho.validate()?;
        Ok(rho)
    }

    fn validate(&self) -> Result<()> {
        let m = &self.entries;
        if !m.is_square() {
            return Err(Error::InvalidDensityMatrix("not square".into()));
        }
        let n = m.nrows();
        for i in 0..n {
            for j in 0..n {
                if (m[(i, j)] - m[(j, i)].conj()).norm() > DENSITY_TOL {
                    return Err(Error::InvalidDensityMatrix(format!(
                        "not Hermitian at ({i}, {j})"
                    )));
                }
            }
        }
        let trace: Complex64 = (0..n).map(|i| m[(i, i)]).sum();
        if (trace - 1.0).norm() > DENSITY_TOL {
            return Err(Error::InvalidDensityMatrix(format!("trace {trace}")));
        }
        Ok(())
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn legs(&self) -> &[Leg] {
        &self.legs
    }
}

fn check_subset(legs: &[Leg]) -> Result<()> {
    for (i, l) in legs.iter().enumerate() {
        if legs[..i].contains(l) {
            return Err(Error::InvalidLegs(format!("leg {} repeated", l.name())));
        }
    }
    Ok(())
}

/// Reduced density matrix on one or two legs. The first leg in `keep` is the
/// high bit of the reduced index.
pub fn reduce(state: &EmbeddedState, keep: &[Leg]) -> Result<DensityMatrix> {
    if keep.is_empty() || keep.len() > 2 {
        return Err(Error::InvalidLegs(format!(
            "can only keep 1 or 2 legs, got {}",
            keep.len()
        )));
    }
    check_subset(keep)?;
    let traced: Vec<Leg> = Leg::ALL.into_iter().filter(|l| !keep.contains(l)).collect();
    let compose = |legs: &[Leg], value: usize| -> usize {
        legs.iter()
            .enumerate()
            .map(|(i, l)| ((value >> (legs.len() - 1 - i)) & 1) << l.shift())
            .fold(0, |acc, b| acc | b)
    };
    let dim = 1 << keep.len();
    let mut rho = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    for r in 0..dim {
        for c in r..dim {
            let v: Complex64 = (0..1 << traced.len())
                .map(|t| {
                    let rest = compose(&traced, t);
                    state.amplitudes[compose(keep, r) | rest]
                        * state.amplitudes[compose(keep, c) | rest].conj()
                })
                .sum();
            rho[(r, c)] = v;
            rho[(c, r)] = v.conj();
        }
    }
    DensityMatrix::new(rho, keep.to_vec())
}

/// Von Neumann entropy `−Σ λ ln λ`; eigenvalues below 1e-12 contribute nothing.
pub fn entropy(rho: &DensityMatrix) -> Result<f64> {
    rho.validate()?;
    let eig = SymmetricEigen::new(rho.entries.clone());
    let mut s = 0.0;
    for &lambda in eig.eigenvalues.iter() {
        if lambda < -EIGEN_FLOOR {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {lambda}"
            )));
        }
        if lambda >= EIGEN_FLOOR {
            s -= lambda * lambda.ln();
        }
    }
    Ok(s)
}

/// Entropy of any leg subset, using purity of the global state for subsets
/// larger than two.
fn subset_entropy(state: &EmbeddedState, legs: &[Leg]) -> Result<f64> {
    match legs.len() {
        0 | 4 => Ok(0.0),
        1 | 2 => entropy(&reduce(state, legs)?),
        _ => {
            let complement: Vec<Leg> = Leg::ALL.into_iter().filter(|l| !legs.contains(l)).collect();
            entropy(&reduce(state, &complement)?)
        }
    }
}

/// `I(A:B) = S(ρ^A) + S(ρ^B) − S(ρ^{AB})`
pub fn mutual_information(state: &EmbeddedState, a: &[Leg], b: &[Leg]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidLegs("empty subset".into()));
    }
    check_subset(a)?;
    check_subset(b)?;
    if a.iter().any(|l| b.contains(l)) {
        return Err(Error::InvalidLegs("subsets overlap".into()));
    }
    let joint: Vec<Leg> = a.iter().chain(b).copied().collect();
    Ok(subset_entropy(state, a)? + subset_entropy(state, b)? - subset_entropy(state, &joint)?)
}

fn neg_log_ratio(mi: f64, scale: f64) -> f64 {
    if mi < ZERO_MI_CUTOFF {
        f64::INFINITY
    } else {
        -(mi / scale).ln()
    }
}

/// `−log(I(i:j) / 2 log 2)` for any pair of distinct legs.
pub fn distance_original(state: &EmbeddedState, pair: LegPair) -> Result<f64> {
    let (x, y) = pair.legs();
    Ok(neg_log_ratio(
        mutual_information(state, &[x], &[y])?,
        2.0 * LN_2,
    ))
}

/// Modified distance: straight pairs use the single-leg mutual information,
/// diagonals use `I(ac:bd)`, both normalized by `4 log 2`.
pub fn distance_modified(state: &EmbeddedState, pair: LegPair) -> Result<f64> {
    let mi = if pair.is_straight() {
        let (x, y) = pair.legs();
        mutual_information(state, &[x], &[y])?
    } else if pair.is_diagonal() {
        mutual_information(state, &[Leg::A, Leg::C], &[Leg::B, Leg::D])?
    } else {
        return Err(Error::InvalidLegs(format!(
            "({pair}) is not an input/output pair"
        )));
    };
    Ok(neg_log_ratio(mi, 4.0 * LN_2))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegDistance {
    pub pair: LegPair,
    pub value: f64,
}

/// Modified distances for the four crossing pairs, in [`LegPair::CROSSING`] order.
/// Shares the entropy evaluations between pairs.
pub fn crossing_distances(u: &UnitaryMatrix4) -> Result<[LegDistance; 4]> {
    let state = embed_unitary(u);
    let s = |legs: &[Leg]| subset_entropy(&state, legs);
    let (sa, sb, sc, sd) = (s(&[Leg::A])?, s(&[Leg::B])?, s(&[Leg::C])?, s(&[Leg::D])?);
    let (sac, sbd) = (s(&[Leg::A, Leg::C])?, s(&[Leg::B, Leg::D])?);
    let scale = 4.0 * LN_2;
    let diagonal = neg_log_ratio(sac + sbd, scale);
    Ok([
        LegDistance {
            pair: LegPair::AC,
            value: neg_log_ratio(sa + sc - sac, scale),
        },
        LegDistance {
            pair: LegPair::BD,
            value: neg_log_ratio(sb + sd - sbd, scale),
        },
        LegDistance {
            pair: LegPair::AD,
            value: diagonal,
        },
        LegDistance {
            pair: LegPair::BC,
            value: diagonal,
        },
    ])
}
