//! Zero-noise extrapolation from `(p, min energy)` pairs: a small MLP trained
//! with Adam, and classical polynomial baselines.

mod adam;
mod baselines;
mod mlp;

pub use adam::{adam_step, adam_update_slice, AdamConfig, AdamState};
pub use baselines::{
    fit_linear, fit_polynomial, lagrange_eval, richardson_extrapolate, LinearFit, Polynomial,
};
pub use mlp::{
    backward, forward, init_mlp, mse, predict_zero_noise, train, Gradients, MlpParameters,
    TrainConfig, TrainingMetrics, DEFAULT_LAYER_SIZES,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub noise_p: f64,
    pub min_expectation: f64,
}

/// Training pairs `(p, r)`: distinct finite `p`, `r` in `[-1, 1]`. Inputs
/// are used raw, without normalization.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingDataset {
    samples: Vec<Sample>,
}

impl TrainingDataset {
    pub fn new(samples: Vec<Sample>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("training dataset is empty"));
        }
        for (i, s) in samples.iter().enumerate() {
            if !s.noise_p.is_finite() || !s.min_expectation.is_finite() {
                return Err(Error::invalid(format!("sample {i} is not finite")));
            }
            if !(-1.0..=1.0).contains(&s.min_expectation) {
                return Err(Error::invalid(format!(
                    "sample {i} target {} outside [-1, 1]",
                    s.min_expectation
                )));
            }
            if samples[..i].iter().any(|o| o.noise_p == s.noise_p) {
                return Err(Error::invalid(format!(
                    "duplicate noise level {} in dataset",
                    s.noise_p
                )));
            }
        }
        Ok(Self { samples })
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|&(noise_p, min_expectation)| Sample {
                    noise_p,
                    min_expectation,
                })
                .collect(),
        )
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn pairs(&self) -> Vec<(f64, f64)> {
        self.samples
            .iter()
            .map(|s| (s.noise_p, s.min_expectation))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn max_noise(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.noise_p)
            .fold(f64::MIN, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dataset_validation() {
        assert!(TrainingDataset::from_pairs(&[]).is_err());
        assert!(TrainingDataset::from_pairs(&[(0.1, -0.9), (0.1, -0.8)]).is_err());
        assert!(TrainingDataset::from_pairs(&[(0.1, -1.5)]).is_err());
        assert!(TrainingDataset::from_pairs(&[(f64::NAN, 0.0)]).is_err());
        let d = TrainingDataset::from_pairs(&[(0.01, -0.9), (0.02, -0.8)]).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.max_noise(), 0.02);
        assert_eq!(d.pairs(), vec![(0.01, -0.9), (0.02, -0.8)]);
    }
}
