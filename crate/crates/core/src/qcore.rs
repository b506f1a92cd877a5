//! Dense complex linear algebra for small qubit registers.
//!
//! Basis ordering: qubit 0 is the most significant bit of a basis index, so
//! the bitstring `b0 b1 ... b(n-1)` reads left to right as qubit 0..n-1.
//! Gates are applied with in-place amplitude stencils; full 2^n x 2^n
//! operators are only ever built by [`tensor`] (used as a test oracle).

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexScalar = Complex64;

/// Largest register any state or Kronecker product may span.
pub const MAX_QUBITS: usize = 12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Square complex matrix acting on `log2(dim)` qubits, row-major.
///
/// Gates are unitary; Kraus operators use the same type but are not.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<Complex64>,
}

pub type UnitaryMatrix = Matrix;

impl Matrix {
    pub fn new(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::invalid(format!(
                "matrix dimension {dim} is not a power of two"
            )));
        }
        if dim.trailing_zeros() as usize > MAX_QUBITS {
            return Err(Error::Capacity(format!(
                "matrix spans {} qubits, cap is {MAX_QUBITS}",
                dim.trailing_zeros()
            )));
        }
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                actual: data.len(),
            });
        }
        if data.iter().any(|z| !z.is_finite()) {
            return Err(Error::Numeric("non-finite matrix entry".into()));
        }
        Ok(Self { dim, data })
    }

    pub(crate) fn from_rows<const D: usize>(rows: [[Complex64; D]; D]) -> Self {
        Self {
            dim: D,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut data = vec![ZERO; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = ONE;
        }
        Self { dim, data }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn pauli_x() -> Self {
        Self::from_rows([[ZERO, ONE], [ONE, ZERO]])
    }

    pub fn pauli_y() -> Self {
        let i = Complex64::i();
        Self::from_rows([[ZERO, -i], [i, ZERO]])
    }

    pub fn pauli_z() -> Self {
        Self::from_rows([[ONE, ZERO], [ZERO, -ONE]])
    }

    pub fn hadamard() -> Self {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self::from_rows([[h, h], [h, -h]])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_qubits(&self) -> usize {
        self.dim.trailing_zeros() as usize
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        let mut data = vec![ZERO; d * d];
        for r in 0..d {
            for c in 0..d {
                data[c * d + r] = self.data[r * d + c].conj();
            }
        }
        Self { dim: d, data }
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: other.dim,
            });
        }
        let d = self.dim;
        let mut data = vec![ZERO; d * d];
        for r in 0..d {
            for k in 0..d {
                let a = self.data[r * d + k];
                if a == ZERO {
                    continue;
                }
                for c in 0..d {
                    data[r * d + c] += a * other.data[k * d + c];
                }
            }
        }
        Ok(Matrix { dim: d, data })
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: other.dim,
            });
        }
        Ok(Matrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// Matrix-vector product.
    pub fn apply_vec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: v.len(),
            });
        }
        Ok((0..self.dim)
            .map(|r| (0..self.dim).map(|c| self.get(r, c) * v[c]).sum())
            .collect())
    }

    /// Largest entrywise modulus of `self - other`; infinite on shape mismatch.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        if self.dim != other.dim {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.adjoint()
            .matmul(self)
            .map(|p| p.max_abs_diff(&Matrix::identity(self.dim)) <= tol)
            .unwrap_or(false)
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix({}x{})", self.dim, self.dim)?;
        for r in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|c| {
                    let z = self.get(r, c);
                    format!("{:+.6}{:+.6}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

fn check_angle(theta: f64) -> Result<()> {
    if theta.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "rotation angle {theta} is not finite"
        )))
    }
}

/// `[[cos(t/2), -sin(t/2)], [sin(t/2), cos(t/2)]]`.
pub fn gate_ry(theta: f64) -> Result<UnitaryMatrix> {
    check_angle(theta)?;
    let (s, c) = (theta / 2.0).sin_cos();
    let (s, c) = (Complex64::new(s, 0.0), Complex64::new(c, 0.0));
    Ok(Matrix::from_rows([[c, -s], [s, c]]))
}

/// `diag(e^{-i t/2}, e^{i t/2})`.
pub fn gate_rz(theta: f64) -> Result<UnitaryMatrix> {
    check_angle(theta)?;
    let half = theta / 2.0;
    Ok(Matrix::from_rows([
        [Complex64::from_polar(1.0, -half), ZERO],
        [ZERO, Complex64::from_polar(1.0, half)],
    ]))
}

pub fn gate_rx(theta: f64) -> Result<UnitaryMatrix> {
    check_angle(theta)?;
    let (s, c) = (theta / 2.0).sin_cos();
    let c = Complex64::new(c, 0.0);
    let ms = Complex64::new(0.0, -s);
    Ok(Matrix::from_rows([[c, ms], [ms, c]]))
}

/// Controlled-NOT with the control on the first (more significant) qubit.
pub fn gate_cnot() -> UnitaryMatrix {
    Matrix::from_rows([
        [ONE, ZERO, ZERO, ZERO],
        [ZERO, ONE, ZERO, ZERO],
        [ZERO, ZERO, ZERO, ONE],
        [ZERO, ZERO, ONE, ZERO],
    ])
}

/// Kronecker product `a ⊗ b`; `a` acts on the more significant qubits.
pub fn tensor(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    let qubits = a.n_qubits() + b.n_qubits();
    if qubits > MAX_QUBITS {
        return Err(Error::Capacity(format!(
            "tensor product spans {qubits} qubits, cap is {MAX_QUBITS}"
        )));
    }
    let (da, db) = (a.dim, b.dim);
    let d = da * db;
    let mut data = vec![ZERO; d * d];
    for ar in 0..da {
        for ac in 0..da {
            let x = a.get(ar, ac);
            if x == ZERO {
                continue;
            }
            for br in 0..db {
                for bc in 0..db {
                    data[(ar * db + br) * d + ac * db + bc] = x * b.get(br, bc);
                }
            }
        }
    }
    Ok(Matrix { dim: d, data })
}

/// Index layout for embedding a k-qubit operator into an n-qubit register.
struct Stencil {
    /// Global index offset of each local basis state of the targets.
    offsets: Vec<usize>,
    /// Global indices with every target bit cleared.
    bases: Vec<usize>,
}

impl Stencil {
    fn new(n_qubits: usize, op_dim: usize, targets: &[usize]) -> Result<Self> {
        let k = targets.len();
        if op_dim != 1 << k {
            return Err(Error::DimensionMismatch {
                expected: 1 << k,
                actual: op_dim,
            });
        }
        let mut mask = 0usize;
        for &q in targets {
            if q >= n_qubits {
                return Err(Error::QubitOutOfRange { index: q, n_qubits });
            }
            let bit = 1usize << (n_qubits - 1 - q);
            if mask & bit != 0 {
                return Err(Error::DuplicateTarget(q));
            }
            mask |= bit;
        }
        let offsets = (0..op_dim)
            .map(|local| {
                targets.iter().enumerate().fold(0, |acc, (j, &q)| {
                    if (local >> (k - 1 - j)) & 1 == 1 {
                        acc | 1 << (n_qubits - 1 - q)
                    } else {
                        acc
                    }
                })
            })
            .collect();
        let bases = (0..1usize << n_qubits).filter(|i| i & mask == 0).collect();
        Ok(Self { offsets, bases })
    }

    /// Applies `op` (or its entrywise conjugate) to every stencil group of
    /// `buf`, where `index` maps a register index to a position in `buf`.
    fn transform(
        &self,
        buf: &mut [Complex64],
        op: &Matrix,
        conjugate: bool,
        scratch: &mut Vec<Complex64>,
        index: impl Fn(usize) -> usize,
    ) {
        let d = op.dim;
        scratch.resize(d, ZERO);
        for &base in &self.bases {
            for (l, off) in self.offsets.iter().enumerate() {
                scratch[l] = buf[index(base + off)];
            }
            for (r, off) in self.offsets.iter().enumerate() {
                let mut acc = ZERO;
                for (c, x) in scratch.iter().enumerate() {
                    let g = op.get(r, c);
                    acc += if conjugate { g.conj() } else { g } * x;
                }
                buf[index(base + off)] = acc;
            }
        }
    }
}

/// Pure n-qubit state.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

fn check_register(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 {
        return Err(Error::invalid("register needs at least one qubit"));
    }
    if n_qubits > MAX_QUBITS {
        return Err(Error::Capacity(format!(
            "{n_qubits} qubits requested, cap is {MAX_QUBITS}"
        )));
    }
    Ok(())
}

impl StateVector {
    /// `|0...0>`.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        check_register(n_qubits)?;
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::invalid(format!(
                "basis index {index} out of range for {n_qubits} qubits"
            )));
        }
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Accepts amplitudes whose squared norm is 1 within 1e-10.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::invalid(format!(
                "{dim} amplitudes is not a power of two >= 2"
            )));
        }
        let n_qubits = dim.trailing_zeros() as usize;
        check_register(n_qubits)?;
        if amplitudes.iter().any(|z| !z.is_finite()) {
            return Err(Error::Numeric("non-finite amplitude".into()));
        }
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::invalid(format!("state norm^2 is {norm}, not 1")));
        }
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Born-rule probabilities of the computational basis states.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }

    /// In-place version of [`apply_unitary`].
    pub fn apply(&mut self, gate: &Matrix, targets: &[usize]) -> Result<()> {
        let stencil = Stencil::new(self.n_qubits, gate.dim, targets)?;
        let mut scratch = Vec::with_capacity(gate.dim);
        stencil.transform(&mut self.amplitudes, gate, false, &mut scratch, |i| i);
        Ok(())
    }
}

/// Applies `gate` to the ordered `targets` of `state`. The first target is
/// the most significant qubit of the gate's own basis.
pub fn apply_unitary(
    state: &StateVector,
    gate: &UnitaryMatrix,
    targets: &[usize],
) -> Result<StateVector> {
    let mut out = state.clone();
    out.apply(gate, targets)?;
    Ok(out)
}

/// Mixed n-qubit state, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    data: Vec<Complex64>,
}

impl DensityMatrix {
    /// `|0...0><0...0|`.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Ok(to_density(&StateVector::zero(n_qubits)?))
    }

    /// `I / 2^n`.
    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        check_register(n_qubits)?;
        let dim = 1usize << n_qubits;
        let mut data = vec![ZERO; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = Complex64::new(1.0 / dim as f64, 0.0);
        }
        Ok(Self { n_qubits, data })
    }

    /// Validates Hermiticity and unit trace to within 1e-10.
    pub fn from_matrix(m: Matrix) -> Result<Self> {
        let n_qubits = m.n_qubits();
        check_register(n_qubits)?;
        let rho = Self {
            n_qubits,
            data: m.data,
        };
        if rho.hermiticity_error() > 1e-10 {
            return Err(Error::invalid("density matrix is not Hermitian"));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::invalid(format!("density matrix trace is {tr}")));
        }
        Ok(rho)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim() + col]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix {
            dim: self.dim(),
            data: self.data.clone(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    /// Real parts of the diagonal, i.e. basis-state populations.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.get(i, i).re).collect()
    }

    /// `Tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        // Tr(rho rho) = sum_ij rho_ij rho_ji = sum_ij |rho_ij|^2 for Hermitian rho.
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Largest `|rho_ij - conj(rho_ji)|`.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for r in 0..d {
            for c in r..d {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    /// `rho -> U rho U†` with `U` embedded on `targets`.
    pub fn apply_unitary(&mut self, gate: &Matrix, targets: &[usize]) -> Result<()> {
        let stencil = Stencil::new(self.n_qubits, gate.dim, targets)?;
        self.sandwich(&stencil, gate);
        Ok(())
    }

    /// `K rho K†` with `K` embedded on `targets`; `K` need not be unitary.
    pub fn conjugated_by(&self, op: &Matrix, targets: &[usize]) -> Result<DensityMatrix> {
        let stencil = Stencil::new(self.n_qubits, op.dim, targets)?;
        let mut out = self.clone();
        out.sandwich(&stencil, op);
        Ok(out)
    }

    fn sandwich(&mut self, stencil: &Stencil, op: &Matrix) {
        let d = self.dim();
        let mut scratch = Vec::with_capacity(op.dim);
        // Left multiply: columns are vectors indexed by row.
        for col in 0..d {
            stencil.transform(&mut self.data, op, false, &mut scratch, |i| i * d + col);
        }
        // Right multiply by op†: row vectors transform with conj(op).
        for row in 0..d {
            stencil.transform(&mut self.data, op, true, &mut scratch, |i| row * d + i);
        }
    }

    pub(crate) fn accumulate(&mut self, other: &DensityMatrix) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub(crate) fn zeroed_like(&self) -> DensityMatrix {
        DensityMatrix {
            n_qubits: self.n_qubits,
            data: vec![ZERO; self.data.len()],
        }
    }
}

/// `|psi><psi|`.
pub fn to_density(state: &StateVector) -> DensityMatrix {
    let amps = state.amplitudes();
    let d = amps.len();
    let mut data = Vec::with_capacity(d * d);
    for r in 0..d {
        for c in 0..d {
            data.push(amps[r] * amps[c].conj());
        }
    }
    DensityMatrix {
        n_qubits: state.n_qubits,
        data,
    }
}
