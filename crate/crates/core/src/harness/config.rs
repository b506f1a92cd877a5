//! Experiment configuration.
//!
//! Config files are flat TOML documents. Every key is optional and unknown
//! keys are rejected:
//!
//! ```toml
//! n_qubits = 2
//! points_per_axis = 8
//! theta_range = [0.0, 6.283185307179586]   # half-open [lo, hi)
//! scan_cap = 1000000
//! noise_levels = [0.01, 0.02, 0.03, 0.04, 0.05]
//! dataset_densify = 0      # extra exact-noise levels between neighbours
//! device_noise = 0.03      # default: middle of noise_levels
//! shots = 1024
//! estimator = "parity"     # or "paper00"
//! gate_filter = ["ry", "rz", "cnot"]   # default: every gate kind
//! layer_sizes = [1, 512, 1024, 1]
//! adam_alpha = 0.001
//! adam_beta1 = 0.9
//! adam_beta2 = 0.999
//! adam_epsilon = 1e-8
//! adam_bias_correction = false
//! epochs = 500
//! master_seed = 42
//! output_dir = "out"
//! ```

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ansatz::{GateKind, ThetaGrid};
use crate::error::{Error, Result};
use crate::extrapolator::{AdamConfig, TrainConfig, DEFAULT_LAYER_SIZES};
use crate::noise::{NoiseLevel, MAX_NOISE_LEVEL};
use crate::observables::Estimator;
use crate::qcore::MAX_QUBITS;

const MAX_DENSIFY: usize = 100;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n_qubits: usize,
    pub points_per_axis: usize,
    pub theta_range: [f64; 2],
    pub scan_cap: usize,
    pub noise_levels: Vec<f64>,
    pub dataset_densify: usize,
    pub device_noise: Option<f64>,
    pub shots: u64,
    pub estimator: Estimator,
    pub gate_filter: Option<Vec<String>>,
    pub layer_sizes: Vec<usize>,
    pub adam_alpha: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    pub adam_bias_correction: bool,
    pub epochs: usize,
    pub master_seed: u64,
    /// Not echoed into reports, so identical experiments written to
    /// different directories produce identical reports.
    #[serde(skip_serializing)]
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let adam = AdamConfig::default();
        Self {
            n_qubits: 2,
            points_per_axis: 8,
            theta_range: [0.0, TAU],
            scan_cap: crate::ansatz::DEFAULT_SCAN_CAP,
            noise_levels: vec![0.01, 0.02, 0.03, 0.04, 0.05],
            dataset_densify: 0,
            device_noise: None,
            shots: 1024,
            estimator: Estimator::Parity,
            gate_filter: None,
            layer_sizes: DEFAULT_LAYER_SIZES.to_vec(),
            adam_alpha: adam.alpha,
            adam_beta1: adam.beta1,
            adam_beta2: adam.beta2,
            adam_epsilon: adam.epsilon,
            adam_bias_correction: adam.bias_correction,
            epochs: 500,
            master_seed: 42,
            output_dir: PathBuf::from("out"),
        }
    }
}

fn invalid(key: &str, reason: impl Into<String>) -> Error {
    Error::Validation {
        key: key.into(),
        reason: reason.into(),
    }
}

/// Reads, parses and validates a config file.
pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let mut config = read_config_document(path)?;
    config.resolve()?;
    Ok(config)
}

/// Reads and parses a config file without validating it, so callers can
/// apply overrides before [`ExperimentConfig::resolve`].
pub fn read_config_document(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_document(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Parses and validates a config document; missing keys take defaults.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut config = parse_document(text)?;
    config.resolve()?;
    Ok(config)
}

fn parse_document(text: &str) -> Result<ExperimentConfig> {
    toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_string()))
}

impl ExperimentConfig {
    /// Validates every key and fills derived defaults (the device noise
    /// level). Call again after overriding fields.
    pub fn resolve(&mut self) -> Result<()> {
        if self.n_qubits == 0 || self.n_qubits > MAX_QUBITS {
            return Err(invalid("n_qubits", format!("must lie in 1..={MAX_QUBITS}")));
        }
        if self.points_per_axis == 0 {
            return Err(invalid("points_per_axis", "must be at least 1"));
        }
        let [lo, hi] = self.theta_range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(invalid("theta_range", "needs finite lo < hi"));
        }
        self.grid()
            .map_err(|e| invalid("points_per_axis", e.to_string()))?;

        if self.noise_levels.len() < 3 {
            return Err(invalid(
                "noise_levels",
                "at least three levels are needed for the quadratic baseline",
            ));
        }
        for (i, &p) in self.noise_levels.iter().enumerate() {
            if !(p.is_finite() && (0.0..=MAX_NOISE_LEVEL).contains(&p)) {
                return Err(invalid(
                    "noise_levels",
                    format!("{p} outside [0, {MAX_NOISE_LEVEL}]"),
                ));
            }
            if self.noise_levels[..i].contains(&p) {
                return Err(invalid("noise_levels", format!("duplicate level {p}")));
            }
        }
        if self.dataset_densify > MAX_DENSIFY {
            return Err(invalid("dataset_densify", format!("at most {MAX_DENSIFY}")));
        }
        let device = self.device_noise.unwrap_or_else(|| {
            let mut sorted = self.noise_levels.clone();
            sorted.sort_by(f64::total_cmp);
            sorted[sorted.len() / 2]
        });
        NoiseLevel::new(device).map_err(|e| invalid("device_noise", e.to_string()))?;
        self.device_noise = Some(device);

        if self.shots == 0 {
            return Err(invalid("shots", "must be at least 1"));
        }
        self.gate_kinds()?;

        if self.layer_sizes.len() < 2 || self.layer_sizes.contains(&0) {
            return Err(invalid("layer_sizes", "needs at least two positive sizes"));
        }
        if self.layer_sizes[0] != 1 || self.layer_sizes[self.layer_sizes.len() - 1] != 1 {
            return Err(invalid(
                "layer_sizes",
                "input and output layers must have size 1",
            ));
        }
        self.adam().validate()?;
        if self.epochs == 0 {
            return Err(invalid("epochs", "must be at least 1"));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<ThetaGrid> {
        let [lo, hi] = self.theta_range;
        ThetaGrid::with_cap(self.n_qubits, self.points_per_axis, (lo, hi), self.scan_cap)
    }

    pub fn scan_points(&self) -> Result<usize> {
        Ok(self.grid()?.len())
    }

    pub fn gate_kinds(&self) -> Result<Vec<GateKind>> {
        match &self.gate_filter {
            None => Ok(GateKind::ALL.to_vec()),
            Some(names) => {
                if names.is_empty() {
                    return Err(invalid("gate_filter", "must name at least one gate"));
                }
                names
                    .iter()
                    .map(|n| {
                        n.parse()
                            .map_err(|e: Error| invalid("gate_filter", e.to_string()))
                    })
                    .collect()
            }
        }
    }

    pub fn device_noise(&self) -> f64 {
        self.device_noise
            .unwrap_or(self.noise_levels[self.noise_levels.len() / 2])
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            alpha: self.adam_alpha,
            beta1: self.adam_beta1,
            beta2: self.adam_beta2,
            epsilon: self.adam_epsilon,
            bias_correction: self.adam_bias_correction,
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            adam: self.adam(),
            epochs: self.epochs,
        }
    }

    /// Configured levels plus `dataset_densify` evenly spaced extra levels
    /// between each sorted neighbour pair.
    pub fn dataset_levels(&self) -> Vec<f64> {
        let mut sorted = self.noise_levels.clone();
        sorted.sort_by(f64::total_cmp);
        let mut out = Vec::with_capacity(sorted.len() * (self.dataset_densify + 1));
        for pair in sorted.windows(2) {
            out.push(pair[0]);
            let step = (pair[1] - pair[0]) / (self.dataset_densify + 1) as f64;
            out.extend((1..=self.dataset_densify).map(|k| pair[0] + k as f64 * step));
        }
        out.push(sorted[sorted.len() - 1]);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let c = parse_config("").unwrap();
        let mut d = ExperimentConfig::default();
        d.resolve().unwrap();
        assert_eq!(c, d);
        assert_eq!(c.device_noise(), 0.03);
        assert_eq!(c.scan_points().unwrap(), 4096);
        assert_eq!(c.train_config(), TrainConfig::default());
    }

    #[test]
    fn overrides_parse() {
        let c = parse_config(
            "n_qubits = 1\npoints_per_axis = 4\nestimator = \"paper00\"\nnoise_levels = [0.1, 0.2, 0.3, 0.4]\ngate_filter = [\"cx\"]\n",
        )
        .unwrap();
        assert_eq!(c.n_qubits, 1);
        assert_eq!(c.estimator, Estimator::Paper00);
        assert_eq!(c.device_noise(), 0.3);
        assert_eq!(c.gate_kinds().unwrap(), vec![GateKind::Cnot]);
        assert_eq!(c.scan_points().unwrap(), 16);
    }

    #[test]
    fn duplicate_levels_rejected() {
        match parse_config("noise_levels = [0.1, 0.1, 0.2]") {
            Err(Error::Validation { key, .. }) => assert_eq!(key, "noise_levels"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_key_rejected() {
        let err = parse_config("n_qubits = 2\nshotz = 5\n").unwrap_err();
        assert!(
            matches!(err, Error::Config(ref m) if m.contains("shotz")),
            "{err}"
        );
    }

    #[test]
    fn parse_error_reports_line() {
        let err = parse_config("n_qubits = 2\nshots = \n").unwrap_err();
        assert!(
            matches!(err, Error::Config(ref m) if m.contains("line 2")),
            "{err}"
        );
        let err = parse_config("shots = \"many\"").unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn validation_names_keys() {
        for (doc, key) in [
            ("n_qubits = 0", "n_qubits"),
            ("shots = 0", "shots"),
            ("epochs = 0", "epochs"),
            ("noise_levels = [0.01, 0.9, 0.2]", "noise_levels"),
            ("noise_levels = [0.01, 0.02]", "noise_levels"),
            ("device_noise = 0.8", "device_noise"),
            ("layer_sizes = [2, 4, 1]", "layer_sizes"),
            ("gate_filter = [\"swap\"]", "gate_filter"),
            ("gate_filter = []", "gate_filter"),
            ("adam_beta1 = 1.0", "adam_beta1"),
            ("points_per_axis = 40", "points_per_axis"),
            ("theta_range = [1.0, 0.0]", "theta_range"),
        ] {
            match parse_config(doc) {
                Err(Error::Validation { key: k, .. }) => assert_eq!(k, key, "{doc}"),
                other => panic!("{doc}: {other:?}"),
            }
        }
    }

    #[test]
    fn densified_levels() {
        let c = parse_config("noise_levels = [0.03, 0.01, 0.02]\ndataset_densify = 1").unwrap();
        let levels = c.dataset_levels();
        assert_eq!(levels.len(), 5);
        assert!((levels[1] - 0.015).abs() < 1e-15 && (levels[3] - 0.025).abs() < 1e-15);
        let c = parse_config("").unwrap();
        assert_eq!(c.dataset_levels(), c.noise_levels);
    }
}
