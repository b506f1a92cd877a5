use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use znelab::harness::io;
use znelab::harness::pipeline::{
    self, Baselines, Extrapolation, DATASET_FILE, DEVICE_SCAN_FILE, IDEAL_SCAN_FILE, MODEL_FILE,
    REPORT_FILE,
};
use znelab::harness::{emit_plot_data, read_config_document, ExperimentConfig, PlotInputs};
use znelab::observables::Estimator;
use znelab::vqe::min_energy;
use znelab::{Error, Result};

/// Noisy VQE scans and zero-noise extrapolation.
#[derive(Parser)]
#[command(name = "znelab", version)]
struct Cli {
    #[command(flatten)]
    overrides: Overrides,

    #[command(subcommand)]
    command: Command,
}

/// Every flag overrides the matching config key.
#[derive(Args)]
struct Overrides {
    /// TOML config file; missing keys take defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// master_seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// output_dir
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    n_qubits: Option<usize>,
    #[arg(long, global = true)]
    points_per_axis: Option<usize>,
    #[arg(long, global = true, value_delimiter = ',')]
    noise_levels: Option<Vec<f64>>,
    #[arg(long, global = true)]
    device_noise: Option<f64>,
    #[arg(long, global = true)]
    shots: Option<u64>,
    #[arg(long, global = true)]
    estimator: Option<Estimator>,
    #[arg(long, global = true, value_delimiter = ',')]
    gate_filter: Option<Vec<String>>,
    #[arg(long, global = true)]
    epochs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Noise-free scan -> ideal_scan.csv
    ScanIdeal,
    /// Exact depolarizing scans -> noisy_scan_p<p>.csv
    ScanNoisy {
        /// Noise levels; defaults to the dataset levels.
        #[arg(long, value_delimiter = ',')]
        p: Option<Vec<f64>>,
    },
    /// Shot-sampled scan at the device noise level -> device_scan.csv
    ScanDevice,
    /// Exact scans at every dataset level -> dataset.csv
    GenDataset,
    /// Train the network on dataset.csv -> model.json
    Train,
    /// Print zero-noise estimates from model.json and dataset.csv
    Extrapolate,
    /// Run every stage -> all artifacts and report.json
    RunAll,
    /// Assemble report.json from earlier stages
    Report,
    /// Plot series from the pipeline artifacts
    PlotData,
}

impl Overrides {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => read_config_document(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(v) = self.seed {
            c.master_seed = v;
        }
        if let Some(v) = &self.out {
            c.output_dir = v.clone();
        }
        if let Some(v) = self.n_qubits {
            c.n_qubits = v;
        }
        if let Some(v) = self.points_per_axis {
            c.points_per_axis = v;
        }
        if let Some(v) = &self.noise_levels {
            c.noise_levels = v.clone();
        }
        if let Some(v) = self.device_noise {
            c.device_noise = Some(v);
        }
        if let Some(v) = self.shots {
            c.shots = v;
        }
        if let Some(v) = self.estimator {
            c.estimator = v;
        }
        if let Some(v) = &self.gate_filter {
            c.gate_filter = Some(v.clone());
        }
        if let Some(v) = self.epochs {
            c.epochs = v;
        }
        c.resolve()?;
        Ok(c)
    }
}

fn json_line<T: serde::Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::Numeric(e.to_string()))
}

fn run(cli: Cli) -> Result<()> {
    let config = cli.overrides.resolve()?;
    let dir = io::ensure_dir(&config.output_dir)?;
    let at = |name: &str| dir.join(name);
    match cli.command {
        Command::ScanIdeal => {
            let scan = pipeline::ideal_scan(&config)?;
            io::write_scan_csv(&scan, &at(IDEAL_SCAN_FILE))?;
            println!(
                "ideal minimum {} over {} points",
                min_energy(&scan)?.energy,
                scan.len()
            );
        }
        Command::ScanNoisy { p } => {
            let levels = p.unwrap_or_else(|| config.dataset_levels());
            for p in levels {
                let scan = pipeline::noisy_scan(&config, p)?;
                io::write_scan_csv(&scan, &at(&pipeline::noisy_scan_file(p)))?;
                println!("p = {p}: minimum {}", min_energy(&scan)?.energy);
            }
        }
        Command::ScanDevice => {
            let scan = pipeline::device_scan(&config)?;
            io::write_scan_csv(&scan, &at(DEVICE_SCAN_FILE))?;
            println!(
                "device (p = {}, {} shots, {}): minimum {}",
                config.device_noise(),
                config.shots,
                config.estimator,
                min_energy(&scan)?.energy
            );
        }
        Command::GenDataset => {
            let mut scans = Vec::new();
            for p in config.dataset_levels() {
                let scan = pipeline::noisy_scan(&config, p)?;
                io::write_scan_csv(&scan, &at(&pipeline::noisy_scan_file(p)))?;
                scans.push(scan);
            }
            let dataset = pipeline::dataset_from_scans(&scans)?;
            io::write_dataset_csv(&dataset, &at(DATASET_FILE))?;
            for s in dataset.samples() {
                println!("{},{}", s.noise_p, s.min_expectation);
            }
        }
        Command::Train => {
            let dataset = io::read_dataset_csv(&at(DATASET_FILE))?;
            let model = pipeline::train_model(&config, &dataset)?;
            io::write_model_json(&model, &at(MODEL_FILE))?;
            println!(
                "trained {} epochs, final loss {:e}",
                model.training.epochs, model.training.final_loss
            );
        }
        Command::Extrapolate => {
            let ex = extrapolate(&dir)?;
            println!("{}", json_line(&ex)?);
        }
        Command::RunAll => {
            let report = pipeline::run_pipeline(&config)?;
            println!(
                "ideal {}  device {}  nn {}  inequality_holds {}",
                report.ideal_energy,
                report.device_energy,
                report.nn_prediction,
                report.inequality_holds
            );
        }
        Command::Report => {
            let report = pipeline::report_from_artifacts(&config, &dir)?;
            io::write_report_json(&report, &at(REPORT_FILE))?;
            println!("{}", json_line(&report)?);
        }
        Command::PlotData => {
            let report = io::read_report_json(&at(REPORT_FILE))?;
            let ideal = io::read_scan_csv(&at(IDEAL_SCAN_FILE))?;
            let device = io::read_scan_csv(&at(DEVICE_SCAN_FILE))?;
            let dataset = io::read_dataset_csv(&at(DATASET_FILE))?;
            let model = io::read_model_json(&at(MODEL_FILE))?;
            let baselines = Baselines::fit(&dataset)?;
            let inputs = PlotInputs {
                ideal: &ideal,
                device: &device,
                dataset: &dataset,
                model: &model,
                baselines: &baselines,
            };
            for name in emit_plot_data(&report, &inputs, &dir)? {
                println!("{}", dir.join(name).display());
            }
        }
    }
    Ok(())
}

fn extrapolate(dir: &Path) -> Result<Extrapolation> {
    let dataset = io::read_dataset_csv(&dir.join(DATASET_FILE))?;
    let model = io::read_model_json(&dir.join(MODEL_FILE))?;
    Extrapolation::compute(&model, &Baselines::fit(&dataset)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("znelab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
