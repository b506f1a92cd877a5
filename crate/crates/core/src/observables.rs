//! Z-string observables: exact expectation values, shot sampling and
//! counts-based estimators.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{DensityMatrix, StateVector};

/// `Z ⊗ Z ⊗ ... ⊗ Z` on every qubit of an n-qubit register.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PauliZString {
    n_qubits: usize,
}

pub fn z_string(n_qubits: usize) -> Result<PauliZString> {
    if n_qubits == 0 {
        return Err(Error::invalid("observable needs at least one qubit"));
    }
    Ok(PauliZString { n_qubits })
}

impl PauliZString {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// `(-1)^popcount(index)`.
    #[inline]
    pub fn eigenvalue(&self, basis_index: usize) -> f64 {
        if basis_index.count_ones().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if dim != 1 << self.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: 1 << self.n_qubits,
                actual: dim,
            });
        }
        Ok(())
    }
}

/// Eigenvalues are ±1, so anything past the bounds is rounding in the
/// probabilities.
fn clamp_unit(value: f64) -> f64 {
    value.clamp(-1.0, 1.0)
}

pub fn expectation_state(state: &StateVector, obs: &PauliZString) -> Result<f64> {
    obs.check_dim(state.dim())?;
    Ok(clamp_unit(
        state
            .amplitudes()
            .iter()
            .enumerate()
            .map(|(b, a)| obs.eigenvalue(b) * a.norm_sqr())
            .sum(),
    ))
}

/// `Tr(ρ Z...Z)`, which only reads the diagonal.
pub fn expectation_density(rho: &DensityMatrix, obs: &PauliZString) -> Result<f64> {
    obs.check_dim(rho.dim())?;
    let mut value = 0.0;
    let mut residue = 0.0;
    for b in 0..rho.dim() {
        let d = rho.get(b, b);
        value += obs.eigenvalue(b) * d.re;
        residue += obs.eigenvalue(b) * d.im;
    }
    if residue.abs() > 1e-10 {
        return Err(Error::Numeric(format!(
            "expectation has imaginary residue {residue:e}"
        )));
    }
    Ok(clamp_unit(value))
}

/// Measurement outcomes keyed by bitstring, qubit 0 leftmost.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotCounts {
    n_qubits: usize,
    counts: BTreeMap<String, u64>,
    shots: u64,
}

impl ShotCounts {
    pub fn new(n_qubits: usize, counts: BTreeMap<String, u64>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::invalid("counts need at least one qubit"));
        }
        for key in counts.keys() {
            if key.len() != n_qubits || !key.bytes().all(|c| c == b'0' || c == b'1') {
                return Err(Error::invalid(format!(
                    "`{key}` is not a {n_qubits}-bit string"
                )));
            }
        }
        let shots = counts.values().sum();
        if shots == 0 {
            return Err(Error::invalid("counts are empty"));
        }
        Ok(Self {
            n_qubits,
            counts,
            shots,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn counts(&self) -> &BTreeMap<String, u64> {
        &self.counts
    }

    pub fn get(&self, bitstring: &str) -> u64 {
        self.counts.get(bitstring).copied().unwrap_or(0)
    }

    pub fn frequency(&self, bitstring: &str) -> f64 {
        self.get(bitstring) as f64 / self.shots as f64
    }
}

pub fn bitstring(index: usize, n_qubits: usize) -> String {
    format!("{index:0n_qubits$b}")
}

/// Multinomial draw of `shots` outcomes from basis-state probabilities
/// (`2^n` entries). Probabilities are renormalized, and must sum to 1 within
/// 1e-9 beforehand.
pub fn sample_counts<R: Rng + ?Sized>(
    probabilities: &[f64],
    shots: u64,
    rng: &mut R,
) -> Result<ShotCounts> {
    if shots == 0 {
        return Err(Error::invalid("shots must be at least 1"));
    }
    let dim = probabilities.len();
    if dim < 2 || !dim.is_power_of_two() {
        return Err(Error::invalid(format!(
            "{dim} probabilities is not a power of two >= 2"
        )));
    }
    let n_qubits = dim.trailing_zeros() as usize;
    if probabilities.iter().any(|p| !p.is_finite() || *p < -1e-12) {
        return Err(Error::invalid(
            "probabilities must be finite and non-negative",
        ));
    }
    let total: f64 = probabilities.iter().map(|p| p.max(0.0)).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("probabilities sum to {total}")));
    }

    // Sequential conditional binomials: outcome i takes Bin(remaining, p_i / mass_left).
    let mut counts = BTreeMap::new();
    let mut remaining = shots;
    let mut mass_left = 1.0;
    for (i, p) in probabilities.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        let p = p.max(0.0) / total;
        let k = if i == dim - 1 {
            remaining
        } else {
            let q = (p / mass_left).clamp(0.0, 1.0);
            if q == 0.0 {
                0
            } else {
                Binomial::new(remaining, q)
                    .map_err(|e| Error::Numeric(e.to_string()))?
                    .sample(rng)
            }
        };
        mass_left -= p;
        remaining -= k;
        if k > 0 {
            counts.insert(bitstring(i, n_qubits), k);
        }
    }
    ShotCounts::new(n_qubits, counts)
}

fn parity_of(bitstring: &str) -> f64 {
    if bitstring.bytes().filter(|&c| c == b'1').count() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Unbiased Z-string estimate: parity-weighted outcome frequencies.
pub fn estimate_parity(counts: &ShotCounts) -> f64 {
    counts
        .counts
        .iter()
        .map(|(b, &k)| parity_of(b) * k as f64)
        .sum::<f64>()
        / counts.shots as f64
}

/// `1 - 2·f(0...0)`, the all-zeros-frequency formula. This maps `|00>` to -1
/// and is not the Z-string expectation.
pub fn estimate_paper00(counts: &ShotCounts) -> f64 {
    let zeros = "0".repeat(counts.n_qubits);
    1.0 - 2.0 * counts.frequency(&zeros)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    #[default]
    Parity,
    Paper00,
}

impl Estimator {
    pub fn estimate(self, counts: &ShotCounts) -> f64 {
        match self {
            Estimator::Parity => estimate_parity(counts),
            Estimator::Paper00 => estimate_paper00(counts),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Estimator::Parity => "parity",
            Estimator::Paper00 => "paper00",
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "parity" => Ok(Estimator::Parity),
            "paper00" => Ok(Estimator::Paper00),
            other => Err(Error::invalid(format!(
                "unknown estimator `{other}` (expected parity or paper00)"
            ))),
        }
    }
}
