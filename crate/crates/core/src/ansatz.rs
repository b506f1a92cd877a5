//! The RY-RZ-CNOT ansatz and the angle grids it is scanned over.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{gate_cnot, gate_rx, gate_ry, gate_rz, Matrix, StateVector, UnitaryMatrix};

/// Default upper bound on the number of points a grid may enumerate.
pub const DEFAULT_SCAN_CAP: usize = 1_000_000;

/// Ansatz angles: the first `n` drive RY on qubits 0..n, the last `n` drive RZ.
///
/// Values are stored verbatim; nothing is wrapped into `[0, 2π)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ThetaVector(Vec<f64>);

impl ThetaVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || !values.len().is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "theta needs an even, non-zero length, got {}",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("theta entry {v} is not finite")));
        }
        Ok(Self(values))
    }

    pub fn n_qubits(&self) -> usize {
        self.0.len() / 2
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn ry_angles(&self) -> &[f64] {
        &self.0[..self.n_qubits()]
    }

    pub fn rz_angles(&self) -> &[f64] {
        &self.0[self.n_qubits()..]
    }
}

impl fmt::Display for ThetaVector {
    /// Angles reduced modulo 2π, for display only.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|v| format!("{:.6}", v.rem_euclid(TAU)))
            .collect();
        write!(f, "({})", parts.join(", "))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    I,
    X,
    Y,
    Z,
    H,
    Rx,
    Ry,
    Rz,
    Cnot,
}

impl GateKind {
    pub const ALL: [GateKind; 9] = [
        GateKind::I,
        GateKind::X,
        GateKind::Y,
        GateKind::Z,
        GateKind::H,
        GateKind::Rx,
        GateKind::Ry,
        GateKind::Rz,
        GateKind::Cnot,
    ];

    pub fn arity(self) -> usize {
        match self {
            GateKind::Cnot => 2,
            _ => 1,
        }
    }

    pub fn is_parameterized(self) -> bool {
        matches!(self, GateKind::Rx | GateKind::Ry | GateKind::Rz)
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::I => "i",
            GateKind::X => "x",
            GateKind::Y => "y",
            GateKind::Z => "z",
            GateKind::H => "h",
            GateKind::Rx => "rx",
            GateKind::Ry => "ry",
            GateKind::Rz => "rz",
            GateKind::Cnot => "cnot",
        }
    }

    pub fn matrix(self, angle: Option<f64>) -> Result<UnitaryMatrix> {
        let angle =
            || angle.ok_or_else(|| Error::invalid(format!("gate {} needs an angle", self.name())));
        match self {
            GateKind::I => Ok(Matrix::identity(2)),
            GateKind::X => Ok(Matrix::pauli_x()),
            GateKind::Y => Ok(Matrix::pauli_y()),
            GateKind::Z => Ok(Matrix::pauli_z()),
            GateKind::H => Ok(Matrix::hadamard()),
            GateKind::Rx => gate_rx(angle()?),
            GateKind::Ry => gate_ry(angle()?),
            GateKind::Rz => gate_rz(angle()?),
            GateKind::Cnot => Ok(gate_cnot()),
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "i" | "id" => Ok(GateKind::I),
            "x" => Ok(GateKind::X),
            "y" => Ok(GateKind::Y),
            "z" => Ok(GateKind::Z),
            "h" => Ok(GateKind::H),
            "rx" => Ok(GateKind::Rx),
            "ry" => Ok(GateKind::Ry),
            "rz" => Ok(GateKind::Rz),
            "cnot" | "cx" => Ok(GateKind::Cnot),
            other => Err(Error::invalid(format!("unknown gate kind `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GateOp {
    pub kind: GateKind,
    pub angle: Option<f64>,
    pub targets: Vec<usize>,
}

impl GateOp {
    pub fn matrix(&self) -> Result<UnitaryMatrix> {
        self.kind.matrix(self.angle)
    }
}

/// An ordered gate list on a fixed register.
#[derive(Clone, Debug, PartialEq)]
pub struct CircuitDescriptor {
    n_qubits: usize,
    ops: Vec<GateOp>,
}

impl CircuitDescriptor {
    /// Builds an arbitrary circuit, validating arity, angles and targets.
    pub fn new(n_qubits: usize, ops: Vec<GateOp>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::invalid("circuit needs at least one qubit"));
        }
        for op in &ops {
            if op.targets.len() != op.kind.arity() {
                return Err(Error::invalid(format!(
                    "gate {} takes {} targets, got {}",
                    op.kind,
                    op.kind.arity(),
                    op.targets.len()
                )));
            }
            if op.kind.is_parameterized() != op.angle.is_some() {
                return Err(Error::invalid(format!(
                    "angle mismatch on gate {}",
                    op.kind
                )));
            }
            if let Some(q) = op.targets.iter().find(|&&q| q >= n_qubits) {
                return Err(Error::QubitOutOfRange {
                    index: *q,
                    n_qubits,
                });
            }
        }
        Ok(Self { n_qubits, ops })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn ops(&self) -> &[GateOp] {
        &self.ops
    }
}

/// RY layer, then RZ layer, then a CNOT chain `(i, i+1)` with the lower index
/// as control.
pub fn build_ry_rz_circuit(n: usize, theta: &ThetaVector) -> Result<CircuitDescriptor> {
    if n == 0 {
        return Err(Error::invalid("ansatz needs at least one qubit"));
    }
    if theta.values().len() != 2 * n {
        return Err(Error::invalid(format!(
            "ansatz on {n} qubits needs {} angles, got {}",
            2 * n,
            theta.values().len()
        )));
    }
    let mut ops = Vec::with_capacity(3 * n - 1);
    for (q, &a) in theta.ry_angles().iter().enumerate() {
        ops.push(GateOp {
            kind: GateKind::Ry,
            angle: Some(a),
            targets: vec![q],
        });
    }
    for (q, &a) in theta.rz_angles().iter().enumerate() {
        ops.push(GateOp {
            kind: GateKind::Rz,
            angle: Some(a),
            targets: vec![q],
        });
    }
    for q in 0..n - 1 {
        ops.push(GateOp {
            kind: GateKind::Cnot,
            angle: None,
            targets: vec![q, q + 1],
        });
    }
    Ok(CircuitDescriptor { n_qubits: n, ops })
}

/// Runs the circuit on `|0...0>`.
pub fn prepare_state(circuit: &CircuitDescriptor) -> Result<StateVector> {
    let mut state = StateVector::zero(circuit.n_qubits)?;
    for op in &circuit.ops {
        state.apply(&op.matrix()?, &op.targets)?;
    }
    Ok(state)
}

/// A `points_per_axis^(2n)` lattice of angle vectors over the half-open
/// range `[lo, hi)` on every axis, enumerated lexicographically with axis 0
/// varying slowest.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThetaGrid {
    n_qubits: usize,
    points_per_axis: usize,
    lo: f64,
    hi: f64,
    len: usize,
}

impl ThetaGrid {
    pub fn new(n_qubits: usize, points_per_axis: usize, range: (f64, f64)) -> Result<Self> {
        Self::with_cap(n_qubits, points_per_axis, range, DEFAULT_SCAN_CAP)
    }

    /// Full-turn grid `[0, 2π)`.
    pub fn full_turn(n_qubits: usize, points_per_axis: usize) -> Result<Self> {
        Self::new(n_qubits, points_per_axis, (0.0, TAU))
    }

    pub fn with_cap(
        n_qubits: usize,
        points_per_axis: usize,
        (lo, hi): (f64, f64),
        cap: usize,
    ) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::invalid("grid needs at least one qubit"));
        }
        if points_per_axis == 0 {
            return Err(Error::invalid("points_per_axis must be at least 1"));
        }
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::invalid(format!("axis range ({lo}, {hi}) is empty")));
        }
        let len = u32::try_from(2 * n_qubits)
            .ok()
            .and_then(|dims| points_per_axis.checked_pow(dims))
            .filter(|&len| len <= cap)
            .ok_or_else(|| {
                Error::Capacity(format!(
                    "{points_per_axis}^{} grid points exceeds the scan cap of {cap}",
                    2 * n_qubits
                ))
            })?;
        Ok(Self {
            n_qubits,
            points_per_axis,
            lo,
            hi,
            len,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dims(&self) -> usize {
        2 * self.n_qubits
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    pub fn range(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn axis_value(&self, k: usize) -> f64 {
        self.lo + k as f64 * (self.hi - self.lo) / self.points_per_axis as f64
    }

    pub fn axis_values(&self) -> Vec<f64> {
        (0..self.points_per_axis)
            .map(|k| self.axis_value(k))
            .collect()
    }

    /// Per-axis positions of point `index`, axis 0 first.
    pub fn axis_indices(&self, index: usize) -> Vec<usize> {
        let g = self.points_per_axis;
        let mut digits = vec![0; self.dims()];
        let mut rest = index;
        for d in digits.iter_mut().rev() {
            *d = rest % g;
            rest /= g;
        }
        digits
    }

    pub fn point(&self, index: usize) -> Result<ThetaVector> {
        if index >= self.len {
            return Err(Error::invalid(format!(
                "grid index {index} out of range ({} points)",
                self.len
            )));
        }
        ThetaVector::new(
            self.axis_indices(index)
                .into_iter()
                .map(|k| self.axis_value(k))
                .collect(),
        )
    }

    /// Inverse of [`ThetaGrid::point`]; `None` unless every entry is exactly
    /// an axis value.
    pub fn index_of(&self, theta: &ThetaVector) -> Option<usize> {
        if theta.values().len() != self.dims() {
            return None;
        }
        let step = (self.hi - self.lo) / self.points_per_axis as f64;
        let mut index = 0usize;
        for &v in theta.values() {
            let k = ((v - self.lo) / step).round();
            if !(0.0..self.points_per_axis as f64).contains(&k) {
                return None;
            }
            let k = k as usize;
            if self.axis_value(k) != v {
                return None;
            }
            index = index * self.points_per_axis + k;
        }
        Some(index)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, ThetaVector)> + '_ {
        (0..self.len).map(move |i| (i, self.point(i).expect("index within grid")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

    fn theta(v: &[f64]) -> ThetaVector {
        ThetaVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn structure_two_qubits() {
        let c = build_ry_rz_circuit(2, &theta(&[0.0; 4])).unwrap();
        let kinds: Vec<(GateKind, Vec<usize>)> = c
            .ops()
            .iter()
            .map(|o| (o.kind, o.targets.clone()))
            .collect();
        assert_eq!(
            kinds,
            vec![
                (GateKind::Ry, vec![0]),
                (GateKind::Ry, vec![1]),
                (GateKind::Rz, vec![0]),
                (GateKind::Rz, vec![1]),
                (GateKind::Cnot, vec![0, 1]),
            ]
        );
        assert!(c.ops()[..4].iter().all(|o| o.angle == Some(0.0)));
    }

    #[test]
    fn structure_one_and_three_qubits() {
        let c = build_ry_rz_circuit(1, &theta(&[0.3, 0.4])).unwrap();
        assert_eq!(c.ops().len(), 2);
        assert_eq!(c.ops()[0].angle, Some(0.3));
        assert_eq!(c.ops()[1].kind, GateKind::Rz);
        assert_eq!(c.ops()[1].angle, Some(0.4));

        let c = build_ry_rz_circuit(3, &theta(&[0.1, 0.2, 0.3, 0.4, 0.5, 0.6])).unwrap();
        assert_eq!(c.ops().len(), 3 * 3 - 1);
        let cnots: Vec<&Vec<usize>> = c
            .ops()
            .iter()
            .filter(|o| o.kind == GateKind::Cnot)
            .map(|o| &o.targets)
            .collect();
        assert_eq!(cnots, vec![&vec![0, 1], &vec![1, 2]]);
        assert_eq!(c.ops()[4].angle, Some(0.5));
        assert_eq!(c.ops()[4].targets, vec![1]);
    }

    #[test]
    fn length_mismatch() {
        assert!(matches!(
            build_ry_rz_circuit(3, &theta(&[0.0; 4])),
            Err(Error::InvalidArgument(_))
        ));
        assert!(ThetaVector::new(vec![0.0; 3]).is_err());
        assert!(ThetaVector::new(vec![0.0, f64::NAN]).is_err());
    }

    #[test]
    fn prepared_states() {
        let s = prepare_state(&build_ry_rz_circuit(2, &theta(&[0.0; 4])).unwrap()).unwrap();
        assert_eq!(s, StateVector::zero(2).unwrap());

        let s =
            prepare_state(&build_ry_rz_circuit(2, &theta(&[0.0, PI, 0.0, 0.0])).unwrap()).unwrap();
        let p = s.probabilities();
        assert!((p[0b01] - 1.0).abs() < 1e-15, "{p:?}");

        let s =
            prepare_state(&build_ry_rz_circuit(2, &theta(&[FRAC_PI_2, 0.0, 0.0, 0.0])).unwrap())
                .unwrap();
        let a = s.amplitudes();
        assert!((a[0b00].re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((a[0b11].re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(a[0b01].norm() < 1e-15 && a[0b10].norm() < 1e-15);
    }

    #[test]
    fn default_grid() {
        let g = ThetaGrid::full_turn(2, 8).unwrap();
        assert_eq!(g.len(), 4096);
        let axis = g.axis_values();
        for (k, v) in axis.iter().enumerate() {
            assert!((v - k as f64 * PI / 4.0).abs() < 1e-15);
        }
        let target = theta(&[0.0, PI, 0.0, 0.0]);
        let idx = g.index_of(&target).expect("pi is on the axis");
        assert_eq!(g.point(idx).unwrap(), target);
        assert_eq!(idx, 4 * 64);
    }

    #[test]
    fn degenerate_grid() {
        let g = ThetaGrid::full_turn(1, 1).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g.point(0).unwrap(), theta(&[0.0, 0.0]));
        assert!(g.point(1).is_err());
    }

    #[test]
    fn grid_errors() {
        assert!(matches!(
            ThetaGrid::full_turn(3, 11),
            Err(Error::Capacity(_))
        ));
        assert!(ThetaGrid::full_turn(3, 10).is_ok());
        assert!(matches!(
            ThetaGrid::with_cap(2, 8, (0.0, 1.0), 4095),
            Err(Error::Capacity(_))
        ));
        assert!(ThetaGrid::new(2, 0, (0.0, 1.0)).is_err());
        assert!(ThetaGrid::new(2, 2, (1.0, 1.0)).is_err());
        assert!(matches!(
            ThetaGrid::full_turn(40, 8),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn index_of_rejects_off_grid() {
        let g = ThetaGrid::full_turn(1, 4).unwrap();
        assert_eq!(g.index_of(&theta(&[0.1, 0.0])), None);
        assert_eq!(g.index_of(&theta(&[0.0; 4])), None);
        assert_eq!(g.index_of(&theta(&[7.0, 0.0])), None);
    }

    #[test]
    fn gate_kind_names_round_trip() {
        for k in GateKind::ALL {
            assert_eq!(k.name().parse::<GateKind>().unwrap(), k);
        }
        assert_eq!("cx".parse::<GateKind>().unwrap(), GateKind::Cnot);
        assert!("swap".parse::<GateKind>().is_err());
    }
}
