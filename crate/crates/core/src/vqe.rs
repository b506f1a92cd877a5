//! Grid-scan VQE: evaluate the ansatz energy at every grid point in ideal,
//! exact-noisy or sampled mode, then pick the minimum.
//!
//! Grid points are evaluated in parallel. Results are collected by grid
//! index and each sampled point draws from its own random substream
//! `(master_seed, grid_index)`, so scan output does not depend on the number
//! of worker threads.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::{build_ry_rz_circuit, prepare_state, ThetaGrid, ThetaVector};
use crate::error::{Error, Result};
use crate::noise::{evolve_noisy, NoiseModel};
use crate::observables::{
    expectation_density, expectation_state, sample_counts, Estimator, PauliZString,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanMode {
    ExactPure,
    ExactMixed,
    Sampled,
}

impl ScanMode {
    pub fn name(self) -> &'static str {
        match self {
            ScanMode::ExactPure => "exact-pure",
            ScanMode::ExactMixed => "exact-mixed",
            ScanMode::Sampled => "sampled",
        }
    }
}

impl fmt::Display for ScanMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScanMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact-pure" => Ok(ScanMode::ExactPure),
            "exact-mixed" => Ok(ScanMode::ExactMixed),
            "sampled" => Ok(ScanMode::Sampled),
            other => Err(Error::invalid(format!("unknown scan mode `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExpectationRecord {
    pub grid_index: usize,
    pub theta: ThetaVector,
    pub noise_p: Option<f64>,
    pub expectation: f64,
    pub mode: ScanMode,
}

/// One record per grid point, ordered by grid index.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanResult {
    pub mode: ScanMode,
    pub n_qubits: usize,
    pub noise_p: Option<f64>,
    pub shots: Option<u64>,
    pub records: Vec<ExpectationRecord>,
}

impl ScanResult {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn expectations(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.expectation)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroundStateEstimate {
    pub energy: f64,
    pub argmin_theta: ThetaVector,
    pub argmin_index: usize,
}

/// Shot-sampling settings for [`scan_sampled`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Sampling {
    pub shots: u64,
    pub estimator: Estimator,
    pub master_seed: u64,
}

/// Random stream for one grid point of a sampled scan.
pub fn point_rng(master_seed: u64, grid_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(grid_index as u64);
    rng
}

fn check_shapes(grid: &ThetaGrid, n: usize, obs: &PauliZString) -> Result<()> {
    if grid.dims() != 2 * n {
        return Err(Error::invalid(format!(
            "grid has {} axes but the {n}-qubit ansatz needs {}",
            grid.dims(),
            2 * n
        )));
    }
    if obs.n_qubits() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: obs.n_qubits(),
        });
    }
    Ok(())
}

fn scan_with<F>(grid: &ThetaGrid, eval: F) -> Result<Vec<(ThetaVector, f64)>>
where
    F: Fn(usize, &ThetaVector) -> Result<f64> + Sync,
{
    (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let theta = grid.point(i)?;
            let e = eval(i, &theta)?;
            Ok((theta, e))
        })
        .collect()
}

fn into_result(
    mode: ScanMode,
    n_qubits: usize,
    noise_p: Option<f64>,
    shots: Option<u64>,
    points: Vec<(ThetaVector, f64)>,
) -> ScanResult {
    let records = points
        .into_iter()
        .enumerate()
        .map(|(grid_index, (theta, expectation))| ExpectationRecord {
            grid_index,
            theta,
            noise_p,
            expectation,
            mode,
        })
        .collect();
    ScanResult {
        mode,
        n_qubits,
        noise_p,
        shots,
        records,
    }
}

/// Noise-free statevector energies.
pub fn scan_ideal(grid: &ThetaGrid, n: usize, obs: &PauliZString) -> Result<ScanResult> {
    check_shapes(grid, n, obs)?;
    let points = scan_with(grid, |_, theta| {
        let state = prepare_state(&build_ry_rz_circuit(n, theta)?)?;
        expectation_state(&state, obs)
    })?;
    Ok(into_result(ScanMode::ExactPure, n, None, None, points))
}

/// Exact density-matrix energies under `model`.
pub fn scan_noisy(
    grid: &ThetaGrid,
    n: usize,
    obs: &PauliZString,
    model: &NoiseModel,
) -> Result<ScanResult> {
    check_shapes(grid, n, obs)?;
    let points = scan_with(grid, |_, theta| {
        let rho = evolve_noisy(&build_ry_rz_circuit(n, theta)?, model)?;
        expectation_density(&rho, obs)
    })?;
    let p = model.level().value();
    Ok(into_result(ScanMode::ExactMixed, n, Some(p), None, points))
}

/// Finite-shot estimates: evolve (noisily when `p > 0`), sample counts from
/// the point's substream, then apply the estimator.
pub fn scan_sampled(
    grid: &ThetaGrid,
    n: usize,
    obs: &PauliZString,
    model: &NoiseModel,
    sampling: Sampling,
) -> Result<ScanResult> {
    check_shapes(grid, n, obs)?;
    if sampling.shots == 0 {
        return Err(Error::invalid("shots must be at least 1"));
    }
    let noisy = model.level().value() > 0.0;
    let points = scan_with(grid, |i, theta| {
        let circuit = build_ry_rz_circuit(n, theta)?;
        let probs = if noisy {
            evolve_noisy(&circuit, model)?.diagonal()
        } else {
            prepare_state(&circuit)?.probabilities()
        };
        let counts = sample_counts(
            &probs,
            sampling.shots,
            &mut point_rng(sampling.master_seed, i),
        )?;
        Ok(sampling.estimator.estimate(&counts))
    })?;
    let p = model.level().value();
    Ok(into_result(
        ScanMode::Sampled,
        n,
        Some(p),
        Some(sampling.shots),
        points,
    ))
}

/// Minimum energy; ties go to the lowest grid index.
pub fn min_energy(scan: &ScanResult) -> Result<GroundStateEstimate> {
    let mut best: Option<&ExpectationRecord> = None;
    for r in &scan.records {
        if best.is_none_or(|b| r.expectation < b.expectation) {
            best = Some(r);
        }
    }
    let best = best.ok_or_else(|| Error::invalid("scan has no records"))?;
    Ok(GroundStateEstimate {
        energy: best.expectation,
        argmin_theta: best.theta.clone(),
        argmin_index: best.grid_index,
    })
}

/// Pointwise `a - b` over two scans of the same grid.
pub fn delta_e(a: &ScanResult, b: &ScanResult) -> Result<Vec<(usize, f64)>> {
    if a.records.len() != b.records.len() || a.n_qubits != b.n_qubits {
        return Err(Error::invalid(format!(
            "scans cover different grids ({} vs {} points)",
            a.records.len(),
            b.records.len()
        )));
    }
    a.records
        .iter()
        .zip(&b.records)
        .map(|(x, y)| {
            if x.grid_index != y.grid_index || x.theta != y.theta {
                return Err(Error::invalid(format!(
                    "grid point mismatch at index {}",
                    x.grid_index
                )));
            }
            Ok((x.grid_index, x.expectation - y.expectation))
        })
        .collect()
}
