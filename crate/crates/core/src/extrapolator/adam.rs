use serde::{Deserialize, Serialize};

use super::mlp::{Gradients, MlpParameters};
use crate::error::{Error, Result};

/// Adam hyperparameters. With `bias_correction` off the update is
///
/// ```text
/// m = β1·m + (1-β1)·g
/// v = β2·v + (1-β2)·g²
/// θ = θ - α·m / sqrt(v + ε)
/// ```
///
/// With it on, `m` and `v` are divided by `1-β1^t` and `1-β2^t` before the
/// parameter update.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub bias_correction: bool,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            alpha: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            bias_correction: false,
        }
    }
}

impl AdamConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, reason: &str| {
            Err(Error::Validation {
                key: key.into(),
                reason: reason.into(),
            })
        };
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad("adam_alpha", "must be positive");
        }
        if !(0.0..1.0).contains(&self.beta1) {
            return bad("adam_beta1", "must lie in [0, 1)");
        }
        if !(0.0..1.0).contains(&self.beta2) {
            return bad("adam_beta2", "must lie in [0, 1)");
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad("adam_epsilon", "must be positive");
        }
        Ok(())
    }
}

/// First and second moment estimates, shaped like the parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub m: Gradients,
    pub v: Gradients,
    pub t: u64,
}

impl AdamState {
    pub fn new(params: &MlpParameters) -> Self {
        Self {
            m: Gradients::zeros_like(params),
            v: Gradients::zeros_like(params),
            t: 0,
        }
    }
}

/// One Adam update of a flat parameter slice at step `t` (1-based).
pub fn adam_update_slice(
    params: &mut [f64],
    grads: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    t: u64,
    config: &AdamConfig,
) {
    let (b1, b2) = (config.beta1, config.beta2);
    let (c1, c2) = if config.bias_correction {
        let t = t.min(i32::MAX as u64) as i32;
        (1.0 - b1.powi(t), 1.0 - b2.powi(t))
    } else {
        (1.0, 1.0)
    };
    for (((p, &g), m), v) in params
        .iter_mut()
        .zip(grads)
        .zip(m.iter_mut())
        .zip(v.iter_mut())
    {
        *m = b1 * *m + (1.0 - b1) * g;
        *v = b2 * *v + (1.0 - b2) * g * g;
        *p -= config.alpha * (*m / c1) / (*v / c2 + config.epsilon).sqrt();
    }
}

pub fn adam_step(
    params: &mut MlpParameters,
    grads: &Gradients,
    state: &mut AdamState,
    config: &AdamConfig,
) -> Result<()> {
    let shapes_match = |a: &[Vec<f64>], b: &[Vec<f64>]| {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.len() == y.len())
    };
    if !shapes_match(&params.weights, &grads.weights)
        || !shapes_match(&params.biases, &grads.biases)
        || !shapes_match(&params.weights, &state.m.weights)
        || !shapes_match(&params.biases, &state.m.biases)
    {
        return Err(Error::invalid("gradient or optimizer state shape mismatch"));
    }
    state.t += 1;
    let t = state.t;
    let groups = params
        .weights
        .iter_mut()
        .zip(&grads.weights)
        .zip(state.m.weights.iter_mut().zip(state.v.weights.iter_mut()))
        .chain(
            params
                .biases
                .iter_mut()
                .zip(&grads.biases)
                .zip(state.m.biases.iter_mut().zip(state.v.biases.iter_mut())),
        );
    for ((p, g), (m, v)) in groups {
        adam_update_slice(p, g, m, v, t, config);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_steps(grads: &[f64], config: &AdamConfig) -> Vec<f64> {
        let (mut p, mut m, mut v) = ([0.0], [0.0], [0.0]);
        let mut out = Vec::new();
        for (t, g) in grads.iter().enumerate() {
            adam_update_slice(&mut p, &[*g], &mut m, &mut v, t as u64 + 1, config);
            out.push(p[0]);
        }
        out
    }

    #[test]
    fn zero_gradient_is_a_no_op() {
        let mut params = MlpParameters::zeros(&[1, 3, 1]).unwrap();
        params.weights[0] = vec![0.1, -0.2, 0.3];
        let before = params.clone();
        let mut state = AdamState::new(&params);
        let grads = Gradients::zeros_like(&params);
        adam_step(&mut params, &grads, &mut state, &AdamConfig::default()).unwrap();
        assert_eq!(params, before);
        assert_eq!(state.t, 1);
    }

    #[test]
    fn first_scalar_step_by_hand() {
        let (mut p, mut m, mut v) = ([0.0], [0.0], [0.0]);
        adam_update_slice(&mut p, &[1.0], &mut m, &mut v, 1, &AdamConfig::default());
        assert!((m[0] - 0.1).abs() < 1e-15);
        assert!((v[0] - 0.001).abs() < 1e-15);
        let expected = -0.001 * 0.1 / (0.001f64 + 1e-8).sqrt();
        assert!((p[0] - expected).abs() < 1e-15);
        assert!((p[0] + 0.0031623).abs() < 1e-7);
    }

    /// Oracle for constant g = 1: m_t = 1 - β1^t, v_t = 1 - β2^t, so the raw
    /// step is α·m_t / sqrt(v_t + ε) and the bias-corrected one α / sqrt(1 + ε).
    fn oracle_steps(cfg: &AdamConfig, t_max: i32) -> Vec<f64> {
        (1..=t_max)
            .map(|t| {
                if cfg.bias_correction {
                    cfg.alpha / (1.0 + cfg.epsilon).sqrt()
                } else {
                    let m = 1.0 - cfg.beta1.powi(t);
                    let v = 1.0 - cfg.beta2.powi(t);
                    cfg.alpha * m / (v + cfg.epsilon).sqrt()
                }
            })
            .collect()
    }

    fn deltas(p: &[f64]) -> Vec<f64> {
        let mut prev = 0.0;
        p.iter()
            .map(|&x| {
                let d = (x - prev).abs();
                prev = x;
                d
            })
            .collect()
    }

    #[test]
    fn constant_gradient_step_sizes() {
        // Without bias correction m/sqrt(v) grows over the first steps
        // (3.162 -> 4.249), so the second step is larger.
        let raw = AdamConfig::default();
        let want = oracle_steps(&raw, 2);
        let got = deltas(&scalar_steps(&[1.0, 1.0], &raw));
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-15, "{got:?} vs {want:?}");
        }
        assert!((got[0] - 3.1623e-3).abs() < 1e-6 && (got[1] - 4.2496e-3).abs() < 1e-6);
        assert!(got[1] > got[0]);

        let corrected = AdamConfig {
            bias_correction: true,
            ..raw
        };
        let want = oracle_steps(&corrected, 2);
        let got = deltas(&scalar_steps(&[1.0, 1.0], &corrected));
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-15, "{got:?} vs {want:?}");
        }
        assert!(got[1] <= got[0]);
    }

    #[test]
    fn bias_corrected_first_step_is_alpha() {
        let cfg = AdamConfig {
            bias_correction: true,
            ..AdamConfig::default()
        };
        let p = scalar_steps(&[0.5], &cfg);
        let expected = -cfg.alpha * 0.5 / (0.25f64 + cfg.epsilon).sqrt();
        assert!((p[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn shape_mismatch() {
        let mut params = MlpParameters::zeros(&[1, 3, 1]).unwrap();
        let mut state = AdamState::new(&params);
        let grads = Gradients::zeros_like(&MlpParameters::zeros(&[1, 2, 1]).unwrap());
        assert!(adam_step(&mut params, &grads, &mut state, &AdamConfig::default()).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(AdamConfig::default().validate().is_ok());
        for cfg in [
            AdamConfig {
                alpha: 0.0,
                ..Default::default()
            },
            AdamConfig {
                beta1: 1.0,
                ..Default::default()
            },
            AdamConfig {
                beta2: -0.1,
                ..Default::default()
            },
            AdamConfig {
                epsilon: 0.0,
                ..Default::default()
            },
        ] {
            assert!(matches!(cfg.validate(), Err(Error::Validation { .. })));
        }
    }
}
