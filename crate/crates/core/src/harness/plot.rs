//! Plot-ready data series. No rendering: each series is a CSV table.
//!
//! - `training_curve.csv`: `epoch,loss`
//! - `comparison.csv`: `grid_index,e_ideal,e_sampled,delta_e`
//! - `extrapolation_points.csv`: `noise_p,min_expectation`
//! - `extrapolation_curves.csv`: `noise_p,nn,linear,poly2,richardson`,
//!   100 evenly spaced levels on `[0, max p]`

use std::path::Path;

use super::io::{self, fmt_f64, ModelDocument};
use super::pipeline::{Baselines, Report};
use crate::error::{Error, Result};
use crate::extrapolator::{forward, lagrange_eval, TrainingDataset};
use crate::vqe::{delta_e, ScanResult};

pub const TRAINING_CURVE_FILE: &str = "training_curve.csv";
pub const COMPARISON_FILE: &str = "comparison.csv";
pub const EXTRAPOLATION_POINTS_FILE: &str = "extrapolation_points.csv";
pub const EXTRAPOLATION_CURVES_FILE: &str = "extrapolation_curves.csv";
pub const CURVE_POINTS: usize = 100;

pub struct PlotInputs<'a> {
    pub ideal: &'a ScanResult,
    pub device: &'a ScanResult,
    pub dataset: &'a TrainingDataset,
    pub model: &'a ModelDocument,
    pub baselines: &'a Baselines,
}

pub type Series = (&'static str, &'static [&'static str], Vec<Vec<String>>);

/// Builds every series in memory.
pub fn plot_series(inputs: &PlotInputs<'_>) -> Result<Vec<Series>> {
    let training = inputs
        .model
        .training
        .loss_history
        .iter()
        .enumerate()
        .map(|(epoch, &loss)| vec![epoch.to_string(), fmt_f64(loss)])
        .collect();

    let deltas = delta_e(inputs.device, inputs.ideal)?;
    let comparison = inputs
        .ideal
        .records
        .iter()
        .zip(&inputs.device.records)
        .zip(&deltas)
        .map(|((i, d), &(index, de))| {
            vec![
                index.to_string(),
                fmt_f64(i.expectation),
                fmt_f64(d.expectation),
                fmt_f64(de),
            ]
        })
        .collect();

    let points = inputs.dataset.pairs();
    let dataset_rows = points
        .iter()
        .map(|&(p, r)| vec![fmt_f64(p), fmt_f64(r)])
        .collect();

    let params = inputs.model.params()?;
    let max_p = inputs.dataset.max_noise();
    let curves = (0..CURVE_POINTS)
        .map(|k| {
            let p = max_p * k as f64 / (CURVE_POINTS - 1) as f64;
            Ok(vec![
                fmt_f64(p),
                fmt_f64(forward(&params, p)?),
                fmt_f64(inputs.baselines.linear.eval(p)),
                fmt_f64(inputs.baselines.poly2.eval(p)),
                fmt_f64(lagrange_eval(&points, p)?),
            ])
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(vec![
        (TRAINING_CURVE_FILE, &["epoch", "loss"], training),
        (
            COMPARISON_FILE,
            &["grid_index", "e_ideal", "e_sampled", "delta_e"],
            comparison,
        ),
        (
            EXTRAPOLATION_POINTS_FILE,
            &["noise_p", "min_expectation"],
            dataset_rows,
        ),
        (
            EXTRAPOLATION_CURVES_FILE,
            &["noise_p", "nn", "linear", "poly2", "richardson"],
            curves,
        ),
    ])
}

/// Writes every series into `dir`. The report must belong to the same
/// model; its network prediction is checked against the curve at p = 0.
pub fn emit_plot_data(report: &Report, inputs: &PlotInputs<'_>, dir: &Path) -> Result<Vec<String>> {
    let at_zero = forward(&inputs.model.params()?, 0.0)?;
    if (at_zero - report.nn_prediction).abs() > 1e-12 {
        return Err(Error::invalid(format!(
            "report prediction {} does not match the model ({at_zero})",
            report.nn_prediction
        )));
    }
    let mut names = Vec::new();
    for (name, header, rows) in plot_series(inputs)? {
        io::write_table_csv(&dir.join(name), header, rows)?;
        names.push(name.to_string());
    }
    Ok(names)
}
