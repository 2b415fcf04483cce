//! Parameter-shift gradients of `f(θ) = Σ_j ⟨H_j⟩_θ`.
//!
//! For a slot read by several gates, the rule is applied to each gate
//! occurrence separately and the contributions summed.

use std::f64::consts::{FRAC_PI_2, SQRT_2};

use rand::Rng;

use crate::circuit::{evaluate, evaluate_shifted, Circuit, GateKind};
use crate::error::{Error, Result};
use crate::statevector::{expectation, sample_expectation, Hamiltonian, StateVector};

/// `∂f/∂θ = Σ_k coefficient_k · f(θ + shift_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftRule {
    pub kind: GateKind,
    pub terms: Vec<(f64, f64)>,
}

/// Registered rules: two-term for single-Pauli rotations, four-term for
/// controlled rotations (generator eigenvalues 0, ±1/2).
pub fn shift_rule(kind: GateKind) -> Option<ShiftRule> {
    let terms = match kind {
        GateKind::Rx | GateKind::Ry | GateKind::Rz => vec![(FRAC_PI_2, 0.5), (-FRAC_PI_2, -0.5)],
        GateKind::Cry | GateKind::Crz => {
            let near = (SQRT_2 + 1.0) / (4.0 * SQRT_2);
            let far = (SQRT_2 - 1.0) / (4.0 * SQRT_2);
            let far_shift = 3.0 * FRAC_PI_2;
            vec![
                (FRAC_PI_2, near),
                (-FRAC_PI_2, -near),
                (far_shift, -far),
                (-far_shift, far),
            ]
        }
        GateKind::X | GateKind::H | GateKind::Cnot => return None,
    };
    Some(ShiftRule { kind, terms })
}

/// Applies the shift rule for every requested slot, calling `value` with the
/// (gate index, shift) to evaluate.
pub(crate) fn shift_gradient<F>(
    circuit: &Circuit,
    slots: &[usize],
    mut value: F,
) -> Result<Vec<f64>>
where
    F: FnMut(usize, f64) -> Result<f64>,
{
    let mut grad = Vec::with_capacity(slots.len());
    for &slot in slots {
        if slot >= circuit.n_params() {
            return Err(Error::MissingParameter {
                slot,
                len: circuit.n_params(),
            });
        }
        let mut g = 0.0;
        for idx in circuit.gates_with_slot(slot) {
            let kind = circuit.gates()[idx].kind;
            let rule = shift_rule(kind).ok_or_else(|| Error::NoShiftRule(kind.to_string()))?;
            for (shift, coeff) in rule.terms {
                g += coeff * value(idx, shift)?;
            }
        }
        grad.push(g);
    }
    Ok(grad)
}

/// Exact gradient of `⟨H⟩` on `U(θ)|0…0⟩` restricted to `slots`.
pub fn gradient(
    circuit: &Circuit,
    ham: &Hamiltonian,
    params: &[f64],
    slots: &[usize],
) -> Result<Vec<f64>> {
    gradient_from(
        circuit,
        ham,
        params,
        &StateVector::zero(circuit.n_qubits()),
        slots,
    )
}

/// [`gradient`] with an explicit initial state.
pub fn gradient_from(
    circuit: &Circuit,
    ham: &Hamiltonian,
    params: &[f64],
    initial: &StateVector,
    slots: &[usize],
) -> Result<Vec<f64>> {
    shift_gradient(circuit, slots, |idx, shift| {
        expectation(
            &evaluate_shifted(circuit, params, initial, Some((idx, shift)))?,
            ham,
        )
    })
}

/// Gradient with every shifted `⟨H_j⟩` replaced by a fresh n-shot estimate.
pub fn gradient_nshot<R: Rng + ?Sized>(
    circuit: &Circuit,
    ham: &Hamiltonian,
    params: &[f64],
    slots: &[usize],
    n_shots: u64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    gradient_nshot_from(
        circuit,
        ham,
        params,
        &StateVector::zero(circuit.n_qubits()),
        slots,
        n_shots,
        rng,
    )
}

pub fn gradient_nshot_from<R: Rng + ?Sized>(
    circuit: &Circuit,
    ham: &Hamiltonian,
    params: &[f64],
    initial: &StateVector,
    slots: &[usize],
    n_shots: u64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if n_shots == 0 {
        return Err(Error::ZeroShots);
    }
    shift_gradient(circuit, slots, |idx, shift| {
        let state = evaluate_shifted(circuit, params, initial, Some((idx, shift)))?;
        ham.terms()
            .iter()
            .map(|t| sample_expectation(&state, t, n_shots, rng))
            .sum()
    })
}

/// Central difference `(f(θ + h e_s) − f(θ − h e_s)) / 2h` on `|0…0⟩`.
pub fn finite_difference(
    circuit: &Circuit,
    ham: &Hamiltonian,
    params: &[f64],
    slot: usize,
    step: f64,
) -> Result<f64> {
    if step <= 0.0 || !step.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "finite-difference step must be positive, got {step}"
        )));
    }
    if slot >= params.len() {
        return Err(Error::MissingParameter {
            slot,
            len: params.len(),
        });
    }
    let initial = StateVector::zero(circuit.n_qubits());
    let mut p = params.to_vec();
    p[slot] = params[slot] + step;
    let plus = expectation(&evaluate(circuit, &p, &initial)?, ham)?;
    p[slot] = params[slot] - step;
    let minus = expectation(&evaluate(circuit, &p, &initial)?, ham)?;
    Ok((plus - minus) / (2.0 * step))
}
