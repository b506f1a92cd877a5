//! Depolarizing noise as Kraus operator sets, and noisy circuit evolution on
//! density matrices.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::ansatz::{CircuitDescriptor, GateKind};
use crate::error::{Error, Result};
use crate::qcore::{tensor, DensityMatrix, Matrix};

/// Largest `p` for which the Pauli-mixture reading of the channel holds.
pub const MAX_NOISE_LEVEL: f64 = 0.75;

/// Depolarizing probability `p` in `[0, 0.75]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct NoiseLevel(f64);

impl NoiseLevel {
    pub const ZERO: NoiseLevel = NoiseLevel(0.0);

    pub fn new(p: f64) -> Result<Self> {
        if (0.0..=MAX_NOISE_LEVEL).contains(&p) {
            Ok(Self(p))
        } else {
            Err(Error::invalid(format!(
                "noise level {p} outside [0, {MAX_NOISE_LEVEL}]"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Factor `1 - 4p/3` by which one channel application scales every
    /// single-qubit Pauli expectation.
    pub fn damping(self) -> f64 {
        1.0 - 4.0 * self.0 / 3.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    arity: usize,
    operators: Vec<Matrix>,
}

impl KrausChannel {
    /// Wraps an arbitrary operator set after checking shapes and
    /// completeness to 1e-10.
    pub fn new(arity: usize, operators: Vec<Matrix>) -> Result<Self> {
        if arity == 0 || operators.is_empty() {
            return Err(Error::invalid("channel needs an arity and operators"));
        }
        if let Some(op) = operators.iter().find(|k| k.dim() != 1 << arity) {
            return Err(Error::DimensionMismatch {
                expected: 1 << arity,
                actual: op.dim(),
            });
        }
        let ch = Self { arity, operators };
        let err = ch.completeness_error();
        if err > 1e-10 {
            return Err(Error::invalid(format!(
                "Kraus operators are not trace preserving (error {err:e})"
            )));
        }
        Ok(ch)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn operators(&self) -> &[Matrix] {
        &self.operators
    }

    /// Max-abs deviation of `Σ K†K` from the identity.
    pub fn completeness_error(&self) -> f64 {
        let dim = 1 << self.arity;
        let sum = self
            .operators
            .iter()
            .map(|k| k.adjoint().matmul(k).expect("equal dims"))
            .fold(Matrix::zeros(dim), |acc, m| {
                acc.add(&m).expect("equal dims")
            });
        sum.max_abs_diff(&Matrix::identity(dim))
    }
}

/// `{√(1-p) I, √(p/3) X, √(p/3) Y, √(p/3) Z}`.
pub fn depolarizing_1q(p: NoiseLevel) -> KrausChannel {
    let p = p.value();
    let pauli = (p / 3.0).sqrt();
    KrausChannel {
        arity: 1,
        operators: vec![
            Matrix::identity(2).scaled((1.0 - p).sqrt()),
            Matrix::pauli_x().scaled(pauli),
            Matrix::pauli_y().scaled(pauli),
            Matrix::pauli_z().scaled(pauli),
        ],
    }
}

/// The 16 products `K_i ⊗ K_j` of the single-qubit operators at the same `p`.
pub fn depolarizing_2q(p: NoiseLevel) -> KrausChannel {
    let single = depolarizing_1q(p);
    let mut operators = Vec::with_capacity(16);
    for a in &single.operators {
        for b in &single.operators {
            operators.push(tensor(a, b).expect("two qubits are within the cap"));
        }
    }
    KrausChannel {
        arity: 2,
        operators,
    }
}

/// `ρ' = Σ K ρ K†` with each `K` embedded on `targets`.
pub fn apply_channel(
    rho: &DensityMatrix,
    channel: &KrausChannel,
    targets: &[usize],
) -> Result<DensityMatrix> {
    if targets.len() != channel.arity {
        return Err(Error::invalid(format!(
            "channel of arity {} given {} targets",
            channel.arity,
            targets.len()
        )));
    }
    let mut out = rho.zeroed_like();
    for k in &channel.operators {
        out.accumulate(&rho.conjugated_by(k, targets)?);
    }
    Ok(out)
}

/// Weight `λ = 4p/3` of the fully mixed form `ρ → (1-λ)ρ + λ I/2`, which is
/// the same single-qubit map as [`depolarizing_1q`] at `p`.
pub fn mixed_form_lambda(p: NoiseLevel) -> f64 {
    4.0 * p.value() / 3.0
}

/// Gate-attached depolarizing noise: every gate whose kind is in the filter
/// is followed by the channel of matching arity on its targets.
#[derive(Clone, Debug)]
pub struct NoiseModel {
    level: NoiseLevel,
    gate_filter: BTreeSet<GateKind>,
    channel_1q: KrausChannel,
    channel_2q: KrausChannel,
}

impl NoiseModel {
    /// Noise after every gate kind.
    pub fn depolarizing(level: NoiseLevel) -> Self {
        Self {
            level,
            gate_filter: GateKind::ALL.into_iter().collect(),
            channel_1q: depolarizing_1q(level),
            channel_2q: depolarizing_2q(level),
        }
    }

    pub fn with_gate_filter(
        level: NoiseLevel,
        gate_filter: impl IntoIterator<Item = GateKind>,
    ) -> Result<Self> {
        let gate_filter: BTreeSet<GateKind> = gate_filter.into_iter().collect();
        if gate_filter.is_empty() && level.value() > 0.0 {
            return Err(Error::invalid("gate filter is empty but p > 0"));
        }
        Ok(Self {
            gate_filter,
            ..Self::depolarizing(level)
        })
    }

    pub fn ideal() -> Self {
        Self::depolarizing(NoiseLevel::ZERO)
    }

    pub fn level(&self) -> NoiseLevel {
        self.level
    }

    pub fn gate_filter(&self) -> &BTreeSet<GateKind> {
        &self.gate_filter
    }

    pub fn channel_for(&self, kind: GateKind) -> Option<&KrausChannel> {
        if !self.gate_filter.contains(&kind) {
            return None;
        }
        match kind.arity() {
            1 => Some(&self.channel_1q),
            2 => Some(&self.channel_2q),
            _ => None,
        }
    }
}

/// Evolves `|0...0><0...0|` through the circuit, applying the gate unitary
/// and then the matching depolarizing channel for each filtered gate.
pub fn evolve_noisy(circuit: &CircuitDescriptor, model: &NoiseModel) -> Result<DensityMatrix> {
    let mut rho = DensityMatrix::zero(circuit.n_qubits())?;
    let noisy = model.level.value() > 0.0;
    for op in circuit.ops() {
        rho.apply_unitary(&op.matrix()?, &op.targets)?;
        if noisy {
            if let Some(ch) = model.channel_for(op.kind) {
                rho = apply_channel(&rho, ch, &op.targets)?;
            }
        }
    }
    let tr = rho.trace();
    if !tr.is_finite() || (tr.re - 1.0).abs() > 1e-10 {
        return Err(Error::Numeric(format!("noisy evolution lost trace: {tr}")));
    }
    Ok(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::{build_ry_rz_circuit, prepare_state, GateOp, ThetaVector};
    use crate::qcore::{gate_ry, to_density, StateVector};
    use num_complex::Complex64;

    fn level(p: f64) -> NoiseLevel {
        NoiseLevel::new(p).unwrap()
    }

    fn z_expectation(rho: &DensityMatrix) -> f64 {
        rho.get(0, 0).re - rho.get(1, 1).re
    }

    #[test]
    fn level_bounds() {
        assert!(NoiseLevel::new(-0.01).is_err());
        assert!(NoiseLevel::new(0.76).is_err());
        assert!(NoiseLevel::new(f64::NAN).is_err());
        assert!(NoiseLevel::new(0.75).is_ok());
    }

    #[test]
    fn zero_noise_is_identity_channel() {
        let ch = depolarizing_1q(NoiseLevel::ZERO);
        assert_eq!(ch.operators()[0], Matrix::identity(2));
        assert!(ch.operators()[1..]
            .iter()
            .all(|k| k.max_abs_diff(&Matrix::zeros(2)) == 0.0));
        let ch2 = depolarizing_2q(NoiseLevel::ZERO);
        assert_eq!(ch2.operators().len(), 16);
        let mut psi = StateVector::zero(2).unwrap();
        psi.apply(&gate_ry(1.1).unwrap(), &[1]).unwrap();
        let rho = to_density(&psi);
        let out = apply_channel(&rho, &ch2, &[0, 1]).unwrap();
        assert!(out.to_matrix().max_abs_diff(&rho.to_matrix()) < 1e-15);
    }

    #[test]
    fn completeness() {
        for p in [0.0, 0.03, 0.75] {
            assert!(depolarizing_1q(level(p)).completeness_error() < 1e-12);
            assert!(depolarizing_2q(level(p)).completeness_error() < 1e-12);
        }
        assert!(KrausChannel::new(1, vec![Matrix::identity(2).scaled(0.5)]).is_err());
    }

    #[test]
    fn fully_depolarizing_at_three_quarters() {
        let mut psi = StateVector::zero(1).unwrap();
        psi.apply(&gate_ry(0.4).unwrap(), &[0]).unwrap();
        let out = apply_channel(&to_density(&psi), &depolarizing_1q(level(0.75)), &[0]).unwrap();
        let mixed = DensityMatrix::maximally_mixed(1).unwrap();
        assert!(out.to_matrix().max_abs_diff(&mixed.to_matrix()) < 1e-15);
    }

    #[test]
    fn ground_state_populations() {
        let p = 0.03;
        let rho = DensityMatrix::zero(1).unwrap();
        let out = apply_channel(&rho, &depolarizing_1q(level(p)), &[0]).unwrap();
        assert!((out.get(0, 0).re - (1.0 - 2.0 * p / 3.0)).abs() < 1e-15);
        assert!((out.get(1, 1).re - 2.0 * p / 3.0).abs() < 1e-15);

        let rho = DensityMatrix::zero(2).unwrap();
        let out = apply_channel(&rho, &depolarizing_2q(level(p)), &[0, 1]).unwrap();
        let q = 1.0 - 2.0 * p / 3.0;
        assert!((out.get(0, 0).re - q * q).abs() < 1e-15);
        for r in 0..4 {
            for c in 0..4 {
                if r != c {
                    assert!(out.get(r, c).norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn arity_mismatch() {
        let rho = DensityMatrix::zero(2).unwrap();
        assert!(apply_channel(&rho, &depolarizing_2q(level(0.1)), &[0]).is_err());
        assert!(apply_channel(&rho, &depolarizing_1q(level(0.1)), &[2]).is_err());
    }

    #[test]
    fn mixed_form_agrees_with_kraus_form() {
        assert_eq!(mixed_form_lambda(NoiseLevel::ZERO), 0.0);
        assert!((mixed_form_lambda(level(0.75)) - 1.0).abs() < 1e-15);
        let mut psi = StateVector::zero(1).unwrap();
        psi.apply(&gate_ry(0.9).unwrap(), &[0]).unwrap();
        psi.apply(&Matrix::hadamard(), &[0]).unwrap();
        let rho = to_density(&psi);
        for p in [0.01, 0.2, 0.5] {
            let lam = mixed_form_lambda(level(p));
            let kraus = apply_channel(&rho, &depolarizing_1q(level(p)), &[0]).unwrap();
            let half = Complex64::new(0.5, 0.0);
            for r in 0..2 {
                for c in 0..2 {
                    let id = if r == c {
                        half
                    } else {
                        Complex64::new(0.0, 0.0)
                    };
                    let mixed = rho.get(r, c) * (1.0 - lam) + id * lam;
                    assert!((kraus.get(r, c) - mixed).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn single_rotation_damping() {
        let p = level(0.04);
        for theta in [0.0, 0.7, 2.0, 3.0] {
            let c = CircuitDescriptor::new(
                1,
                vec![GateOp {
                    kind: GateKind::Ry,
                    angle: Some(theta),
                    targets: vec![0],
                }],
            )
            .unwrap();
            let rho = evolve_noisy(&c, &NoiseModel::depolarizing(p)).unwrap();
            assert!((z_expectation(&rho) - p.damping() * theta.cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_noise_matches_pure_state() {
        let theta = ThetaVector::new(vec![0.3, 1.9, -0.4, 2.2]).unwrap();
        let c = build_ry_rz_circuit(2, &theta).unwrap();
        let rho = evolve_noisy(&c, &NoiseModel::ideal()).unwrap();
        let pure = to_density(&prepare_state(&c).unwrap());
        assert!(rho.to_matrix().max_abs_diff(&pure.to_matrix()) < 1e-12);
    }

    #[test]
    fn gate_filter_restricts_noise() {
        let theta = ThetaVector::new(vec![0.0, std::f64::consts::PI, 0.0, 0.0]).unwrap();
        let c = build_ry_rz_circuit(2, &theta).unwrap();
        let only_cnot = NoiseModel::with_gate_filter(level(0.05), [GateKind::Cnot]).unwrap();
        let rho = evolve_noisy(&c, &only_cnot).unwrap();
        let zz = rho.get(0, 0).re - rho.get(1, 1).re - rho.get(2, 2).re + rho.get(3, 3).re;
        // Only the CNOT's two-qubit channel acts: ZZ damps by f^2.
        assert!((zz + level(0.05).damping().powi(2)).abs() < 1e-12);
        assert!(NoiseModel::with_gate_filter(level(0.05), []).is_err());
        assert!(NoiseModel::with_gate_filter(NoiseLevel::ZERO, []).is_ok());
    }

    #[test]
    fn anti_aligned_pair_stays_near_minus_one() {
        let theta = ThetaVector::new(vec![0.0, std::f64::consts::PI, 0.0, 0.0]).unwrap();
        let c = build_ry_rz_circuit(2, &theta).unwrap();
        let rho = evolve_noisy(&c, &NoiseModel::depolarizing(level(0.01))).unwrap();
        let zz = rho.get(0, 0).re - rho.get(1, 1).re - rho.get(2, 2).re + rho.get(3, 3).re;
        assert!(zz > -1.0 && zz < -0.9, "{zz}");
    }
}
