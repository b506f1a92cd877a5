//! Configuration, the end-to-end pipeline, and artifact files.

pub mod config;
pub mod io;
pub mod pipeline;
pub mod plot;

pub use config::{load_config, parse_config, read_config_document, ExperimentConfig};
pub use io::{
    read_dataset_csv, read_model_json, read_report_json, read_scan_csv, write_dataset_csv,
    write_model_json, write_report_json, write_scan_csv, ModelDocument,
};
pub use pipeline::{run_pipeline, Baselines, Extrapolation, Report, DEVICE_LABEL};
pub use plot::{emit_plot_data, PlotInputs};
