//! End-to-end experiment: exact scans, dataset, network training, baselines,
//! the simulated device run and the final report.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::io::{self, ModelDocument};
use super::plot;
use crate::error::{Error, Result};
use crate::extrapolator::{
    fit_linear, fit_polynomial, init_mlp, predict_zero_noise, richardson_extrapolate, train,
    LinearFit, Polynomial, TrainingDataset,
};
use crate::noise::{NoiseLevel, NoiseModel};
use crate::observables::{z_string, PauliZString};
use crate::vqe::{self, min_energy, Sampling, ScanResult};

pub const DEVICE_LABEL: &str = "simulated_device";

pub const IDEAL_SCAN_FILE: &str = "ideal_scan.csv";
pub const DEVICE_SCAN_FILE: &str = "device_scan.csv";
pub const DATASET_FILE: &str = "dataset.csv";
pub const MODEL_FILE: &str = "model.json";
pub const REPORT_FILE: &str = "report.json";

pub fn noisy_scan_file(p: f64) -> String {
    format!("noisy_scan_p{p}.csv")
}

/// Seed for network initialisation, kept apart from the sampling streams.
pub fn model_seed(master_seed: u64) -> u64 {
    master_seed.wrapping_add(0x9E37_79B9_7F4A_7C15)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub ideal_energy: f64,
    /// Keyed by the noise level as written by `{}` formatting.
    pub noisy_energies: BTreeMap<String, f64>,
    pub device_energy: f64,
    pub device_label: String,
    pub nn_prediction: f64,
    pub baseline_linear: f64,
    pub baseline_richardson: f64,
    pub baseline_poly2: f64,
    pub abs_err_nn: f64,
    pub abs_err_device: f64,
    pub inequality_holds: bool,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub tool_version: String,
}

impl Report {
    /// Fills the derived fields. Measured energies must lie in [-1, 1];
    /// extrapolated ones only need to be finite.
    pub fn assemble(
        config: &ExperimentConfig,
        ideal_energy: f64,
        dataset: &TrainingDataset,
        device_energy: f64,
        extrapolation: &Extrapolation,
    ) -> Result<Self> {
        let in_range = |name: &str, e: f64| {
            if e.is_finite() && (-1.0..=1.0).contains(&e) {
                Ok(())
            } else {
                Err(Error::Numeric(format!("{name} {e} outside [-1, 1]")))
            }
        };
        in_range("ideal energy", ideal_energy)?;
        in_range("device energy", device_energy)?;
        for (name, v) in extrapolation.named() {
            if !v.is_finite() {
                return Err(Error::Numeric(format!("{name} extrapolation is {v}")));
            }
        }
        let noisy_energies = dataset
            .samples()
            .iter()
            .map(|s| (format!("{}", s.noise_p), s.min_expectation))
            .collect();
        let abs_err_nn = (ideal_energy - extrapolation.nn).abs();
        let abs_err_device = (ideal_energy - device_energy).abs();
        Ok(Self {
            ideal_energy,
            noisy_energies,
            device_energy,
            device_label: DEVICE_LABEL.to_string(),
            nn_prediction: extrapolation.nn,
            baseline_linear: extrapolation.linear,
            baseline_richardson: extrapolation.richardson,
            baseline_poly2: extrapolation.poly2,
            abs_err_nn,
            abs_err_device,
            inequality_holds: abs_err_nn < abs_err_device,
            seed: config.master_seed,
            config: config.clone(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        })
    }
}

/// Classical fits of the dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct Baselines {
    pub linear: LinearFit,
    pub poly2: Polynomial,
    /// Zero-noise value of the interpolant through every point.
    pub richardson: f64,
}

impl Baselines {
    pub fn fit(dataset: &TrainingDataset) -> Result<Self> {
        let points = dataset.pairs();
        Ok(Self {
            linear: fit_linear(&points)?,
            poly2: fit_polynomial(&points, 2)?,
            richardson: richardson_extrapolate(&points)?,
        })
    }
}

/// Zero-noise estimates from the network and each baseline.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    pub nn: f64,
    pub linear: f64,
    pub richardson: f64,
    pub poly2: f64,
}

impl Extrapolation {
    pub fn compute(model: &ModelDocument, baselines: &Baselines) -> Result<Self> {
        Ok(Self {
            nn: predict_zero_noise(&model.params()?)?,
            linear: baselines.linear.intercept,
            richardson: baselines.richardson,
            poly2: baselines.poly2.eval(0.0),
        })
    }

    fn named(&self) -> [(&'static str, f64); 4] {
        [
            ("nn", self.nn),
            ("linear", self.linear),
            ("richardson", self.richardson),
            ("poly2", self.poly2),
        ]
    }
}

fn observable(config: &ExperimentConfig) -> Result<PauliZString> {
    z_string(config.n_qubits)
}

fn noise_model(config: &ExperimentConfig, p: f64) -> Result<NoiseModel> {
    NoiseModel::with_gate_filter(NoiseLevel::new(p)?, config.gate_kinds()?)
}

pub fn ideal_scan(config: &ExperimentConfig) -> Result<ScanResult> {
    vqe::scan_ideal(&config.grid()?, config.n_qubits, &observable(config)?)
}

pub fn noisy_scan(config: &ExperimentConfig, p: f64) -> Result<ScanResult> {
    vqe::scan_noisy(
        &config.grid()?,
        config.n_qubits,
        &observable(config)?,
        &noise_model(config, p)?,
    )
}

/// Shot-sampled scan at the device noise level.
pub fn device_scan(config: &ExperimentConfig) -> Result<ScanResult> {
    vqe::scan_sampled(
        &config.grid()?,
        config.n_qubits,
        &observable(config)?,
        &noise_model(config, config.device_noise())?,
        Sampling {
            shots: config.shots,
            estimator: config.estimator,
            master_seed: config.master_seed,
        },
    )
}

/// `(p, min energy)` for each exact-noise scan.
pub fn dataset_from_scans(scans: &[ScanResult]) -> Result<TrainingDataset> {
    let pairs = scans
        .iter()
        .map(|s| {
            let p = s
                .noise_p
                .ok_or_else(|| Error::invalid("scan carries no noise level"))?;
            Ok((p, min_energy(s)?.energy))
        })
        .collect::<Result<Vec<_>>>()?;
    TrainingDataset::from_pairs(&pairs)
}

pub fn train_model(config: &ExperimentConfig, dataset: &TrainingDataset) -> Result<ModelDocument> {
    let seed = model_seed(config.master_seed);
    let init = init_mlp(&config.layer_sizes, seed)?;
    let (params, metrics) = train(dataset, init, &config.train_config())?;
    Ok(ModelDocument::new(&params, seed, &metrics))
}

fn stage(name: &'static str) -> impl Fn(Error) -> Error {
    move |e| Error::Stage {
        stage: name,
        source: Box::new(e),
    }
}

/// Files written by one pipeline run; renamed to `*.partial` on failure.
struct Outputs {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Outputs {
    fn save(&mut self, name: &str, write: impl FnOnce(&Path) -> Result<()>) -> Result<()> {
        let path = self.dir.join(name);
        write(&path)?;
        self.written.push(path);
        Ok(())
    }

    fn mark_partial(&self) {
        for path in &self.written {
            let mut partial = path.clone().into_os_string();
            partial.push(".partial");
            let _ = fs::rename(path, partial);
        }
    }
}

/// Runs every stage in order and writes all artifacts to
/// `config.output_dir`. A failing stage aborts with its name; files already
/// written by this run get a `.partial` suffix.
pub fn run_pipeline(config: &ExperimentConfig) -> Result<Report> {
    let mut config = config.clone();
    config.resolve().map_err(stage("config"))?;
    io::ensure_dir(&config.output_dir).map_err(stage("output"))?;
    let mut out = Outputs {
        dir: config.output_dir.clone(),
        written: Vec::new(),
    };
    let result = execute(&config, &mut out);
    if result.is_err() {
        out.mark_partial();
    }
    result
}

fn execute(config: &ExperimentConfig, out: &mut Outputs) -> Result<Report> {
    let ideal = ideal_scan(config).map_err(stage("scan_ideal"))?;
    out.save(IDEAL_SCAN_FILE, |p| io::write_scan_csv(&ideal, p))
        .map_err(stage("scan_ideal"))?;
    let ideal_energy = min_energy(&ideal).map_err(stage("scan_ideal"))?.energy;

    let mut noisy = Vec::new();
    for p in config.dataset_levels() {
        let scan = noisy_scan(config, p).map_err(stage("scan_noisy"))?;
        out.save(&noisy_scan_file(p), |path| io::write_scan_csv(&scan, path))
            .map_err(stage("scan_noisy"))?;
        noisy.push(scan);
    }

    let dataset = dataset_from_scans(&noisy).map_err(stage("dataset"))?;
    out.save(DATASET_FILE, |p| io::write_dataset_csv(&dataset, p))
        .map_err(stage("dataset"))?;

    let model = train_model(config, &dataset).map_err(stage("train"))?;
    out.save(MODEL_FILE, |p| io::write_model_json(&model, p))
        .map_err(stage("train"))?;

    let baselines = Baselines::fit(&dataset).map_err(stage("baselines"))?;
    let extrapolation = Extrapolation::compute(&model, &baselines).map_err(stage("baselines"))?;

    let device = device_scan(config).map_err(stage("scan_device"))?;
    out.save(DEVICE_SCAN_FILE, |p| io::write_scan_csv(&device, p))
        .map_err(stage("scan_device"))?;
    let device_energy = min_energy(&device).map_err(stage("scan_device"))?.energy;

    let report = Report::assemble(
        config,
        ideal_energy,
        &dataset,
        device_energy,
        &extrapolation,
    )
    .map_err(stage("report"))?;
    out.save(REPORT_FILE, |p| io::write_report_json(&report, p))
        .map_err(stage("report"))?;

    let series = plot::PlotInputs {
        ideal: &ideal,
        device: &device,
        dataset: &dataset,
        model: &model,
        baselines: &baselines,
    };
    let files = plot::plot_series(&series).map_err(stage("plot_data"))?;
    for (name, header, rows) in files {
        out.save(name, |p| io::write_table_csv(p, header, rows))
            .map_err(stage("plot_data"))?;
    }
    Ok(report)
}

/// Rebuilds the report from the artifacts of earlier stages in `dir`.
pub fn report_from_artifacts(config: &ExperimentConfig, dir: &Path) -> Result<Report> {
    let ideal = io::read_scan_csv(&dir.join(IDEAL_SCAN_FILE))?;
    let device = io::read_scan_csv(&dir.join(DEVICE_SCAN_FILE))?;
    let dataset = io::read_dataset_csv(&dir.join(DATASET_FILE))?;
    let model = io::read_model_json(&dir.join(MODEL_FILE))?;
    let baselines = Baselines::fit(&dataset)?;
    let extrapolation = Extrapolation::compute(&model, &baselines)?;
    Report::assemble(
        config,
        min_energy(&ideal)?.energy,
        &dataset,
        min_energy(&device)?.energy,
        &extrapolation,
    )
}
