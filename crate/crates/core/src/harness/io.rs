//! CSV and JSON artifacts. Every write goes to a temporary sibling first and
//! is renamed into place, so a final path never holds a partial file.
//!
//! Floating-point CSV fields use 17 significant digits in scientific
//! notation (`{:.16e}`), which round-trips every `f64` and is locale free.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ansatz::ThetaVector;
use crate::error::{Error, Result};
use crate::extrapolator::{MlpParameters, Sample, TrainingDataset, TrainingMetrics};
use crate::harness::pipeline::Report;
use crate::vqe::{ExpectationRecord, ScanMode, ScanResult};

pub const MODEL_FORMAT_VERSION: u32 = 1;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn format_err(path: &Path, reason: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
/// The parent directory must already exist.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    if !parent.is_dir() {
        return Err(Error::io(
            path,
            std::io::Error::new(
                std::io::ErrorKind::NotFound,
                format!("directory {} does not exist", parent.display()),
            ),
        ));
    }
    let file_name = path
        .file_name()
        .ok_or_else(|| format_err(path, "path has no file name"))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(file_name);
    tmp_name.push(".tmp");
    let tmp = parent.join(tmp_name);
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(Error::io(path, e));
    }
    Ok(())
}

fn csv_bytes(header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let wrap = |e: csv::Error| Error::Numeric(format!("csv encoding failed: {e}"));
    w.write_record(header).map_err(wrap)?;
    for row in rows {
        w.write_record(&row).map_err(wrap)?;
    }
    w.into_inner()
        .map_err(|e| Error::Numeric(format!("csv encoding failed: {e}")))
}

/// Writes a table of pre-formatted fields.
pub fn write_table_csv(path: &Path, header: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
    let header: Vec<String> = header.iter().map(|s| s.to_string()).collect();
    write_atomic(path, &csv_bytes(&header, rows)?)
}

fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<csv::StringRecord>)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r
        .headers()
        .map_err(|e| format_err(path, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let rows = r
        .records()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| format_err(path, e.to_string()))?;
    Ok((header, rows))
}

fn parse_f64(path: &Path, field: &str) -> Result<f64> {
    field
        .parse()
        .map_err(|_| format_err(path, format!("`{field}` is not a number")))
}

pub fn scan_header(n_qubits: usize) -> Vec<String> {
    let mut h = vec!["grid_index".to_string()];
    h.extend((0..2 * n_qubits).map(|i| format!("theta_{i}")));
    h.extend(["noise_p", "shots", "mode", "expectation"].map(String::from));
    h
}

/// `grid_index,theta_0..theta_{2n-1},noise_p,shots,mode,expectation`.
pub fn write_scan_csv(scan: &ScanResult, path: &Path) -> Result<()> {
    let rows = scan.records.iter().map(|r| {
        let mut row = vec![r.grid_index.to_string()];
        row.extend(r.theta.values().iter().map(|&t| fmt_f64(t)));
        row.push(r.noise_p.map(fmt_f64).unwrap_or_default());
        row.push(scan.shots.map(|s| s.to_string()).unwrap_or_default());
        row.push(r.mode.name().to_string());
        row.push(fmt_f64(r.expectation));
        row
    });
    write_atomic(path, &csv_bytes(&scan_header(scan.n_qubits), rows)?)
}

pub fn read_scan_csv(path: &Path) -> Result<ScanResult> {
    let (header, rows) = read_csv(path)?;
    if header.len() < 6 || header.len() % 2 != 1 {
        return Err(format_err(path, "unexpected scan header"));
    }
    let n_qubits = (header.len() - 5) / 2;
    if header != scan_header(n_qubits) {
        return Err(format_err(path, "unexpected scan header"));
    }
    let mut records = Vec::with_capacity(rows.len());
    let mut shots = None;
    for row in &rows {
        let grid_index: usize = row[0]
            .parse()
            .map_err(|_| format_err(path, format!("bad grid index `{}`", &row[0])))?;
        let theta = (1..=2 * n_qubits)
            .map(|i| parse_f64(path, &row[i]))
            .collect::<Result<Vec<_>>>()?;
        let theta = ThetaVector::new(theta).map_err(|e| format_err(path, e.to_string()))?;
        let at = 1 + 2 * n_qubits;
        let noise_p = match &row[at] {
            "" => None,
            s => Some(parse_f64(path, s)?),
        };
        shots = match &row[at + 1] {
            "" => None,
            s => Some(
                s.parse()
                    .map_err(|_| format_err(path, format!("bad shots `{s}`")))?,
            ),
        };
        let mode: ScanMode = row[at + 2]
            .parse()
            .map_err(|e: Error| format_err(path, e.to_string()))?;
        records.push(ExpectationRecord {
            grid_index,
            theta,
            noise_p,
            expectation: parse_f64(path, &row[at + 3])?,
            mode,
        });
    }
    let first = records
        .first()
        .ok_or_else(|| format_err(path, "scan has no rows"))?;
    Ok(ScanResult {
        mode: first.mode,
        n_qubits,
        noise_p: first.noise_p,
        shots,
        records,
    })
}

/// `noise_p,min_expectation`.
pub fn write_dataset_csv(dataset: &TrainingDataset, path: &Path) -> Result<()> {
    let rows = dataset
        .samples()
        .iter()
        .map(|s| vec![fmt_f64(s.noise_p), fmt_f64(s.min_expectation)]);
    let header = ["noise_p", "min_expectation"].map(String::from);
    write_atomic(path, &csv_bytes(&header, rows)?)
}

pub fn read_dataset_csv(path: &Path) -> Result<TrainingDataset> {
    let (header, rows) = read_csv(path)?;
    if header != ["noise_p", "min_expectation"] {
        return Err(format_err(path, "expected header noise_p,min_expectation"));
    }
    let samples = rows
        .iter()
        .map(|r| {
            Ok(Sample {
                noise_p: parse_f64(path, &r[0])?,
                min_expectation: parse_f64(path, &r[1])?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    TrainingDataset::new(samples).map_err(|e| format_err(path, e.to_string()))
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)
        .map_err(|e| Error::Numeric(format!("json encoding failed: {e}")))?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| format_err(path, e.to_string()))
}

pub fn write_report_json(report: &Report, path: &Path) -> Result<()> {
    write_json(report, path)
}

pub fn read_report_json(path: &Path) -> Result<Report> {
    read_json(path)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Activations {
    pub hidden: String,
    pub output: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingInfo {
    pub seed: u64,
    pub epochs: usize,
    pub final_loss: f64,
    pub loss_history: Vec<f64>,
}

/// Versioned on-disk form of a trained network. Weight arrays are flat and
/// row-major (`out x in`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub format_version: u32,
    pub layer_sizes: Vec<usize>,
    pub activations: Activations,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
    pub training: TrainingInfo,
}

impl ModelDocument {
    pub fn new(params: &MlpParameters, seed: u64, metrics: &TrainingMetrics) -> Self {
        Self {
            format_version: MODEL_FORMAT_VERSION,
            layer_sizes: params.layer_sizes.clone(),
            activations: Activations {
                hidden: "relu".into(),
                output: "linear".into(),
            },
            weights: params.weights.clone(),
            biases: params.biases.clone(),
            training: TrainingInfo {
                seed,
                epochs: metrics.epochs,
                final_loss: metrics.final_loss,
                loss_history: metrics.losses.clone(),
            },
        }
    }

    pub fn params(&self) -> Result<MlpParameters> {
        MlpParameters::from_parts(
            self.layer_sizes.clone(),
            self.weights.clone(),
            self.biases.clone(),
        )
    }

    pub fn metrics(&self) -> TrainingMetrics {
        TrainingMetrics {
            losses: self.training.loss_history.clone(),
            final_loss: self.training.final_loss,
            epochs: self.training.epochs,
        }
    }
}

pub fn write_model_json(model: &ModelDocument, path: &Path) -> Result<()> {
    let bytes = serde_json::to_vec(model)
        .map_err(|e| Error::Numeric(format!("json encoding failed: {e}")))?;
    write_atomic(path, &bytes)
}

pub fn read_model_json(path: &Path) -> Result<ModelDocument> {
    let doc: ModelDocument = read_json(path)?;
    if doc.format_version != MODEL_FORMAT_VERSION {
        return Err(format_err(
            path,
            format!("unsupported model format version {}", doc.format_version),
        ));
    }
    if doc.activations.hidden != "relu" || doc.activations.output != "linear" {
        return Err(format_err(path, "only relu/linear networks are supported"));
    }
    doc.params().map_err(|e| format_err(path, e.to_string()))?;
    Ok(doc)
}

/// Creates `dir` (and parents) if needed.
pub fn ensure_dir(dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    Ok(dir.to_path_buf())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::ThetaGrid;
    use crate::observables::z_string;
    use crate::vqe::scan_ideal;

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_f64(-1.0), "-1.0000000000000000e0");
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        for x in [0.1, -0.9644999999999999, std::f64::consts::PI, 1e-300] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn missing_directory_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let target = dir.path().join("nope").join("report.json");
        let err = write_atomic(&target, b"{}").unwrap_err();
        assert!(matches!(err, Error::Io { ref path, .. } if path == &target));
        assert!(!target.exists());
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
    }

    #[test]
    fn dataset_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dataset.csv");
        let d = TrainingDataset::from_pairs(&[(0.01, -0.9477), (0.02, -0.1 / 3.0)]).unwrap();
        write_dataset_csv(&d, &path).unwrap();
        assert_eq!(read_dataset_csv(&path).unwrap(), d);
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("noise_p,min_expectation\n"));
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn scan_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scan.csv");
        let grid = ThetaGrid::full_turn(1, 3).unwrap();
        let scan = scan_ideal(&grid, 1, &z_string(1).unwrap()).unwrap();
        write_scan_csv(&scan, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("grid_index,theta_0,theta_1,noise_p,shots,mode,expectation\n"));
        assert_eq!(read_scan_csv(&path).unwrap(), scan);
    }

    #[test]
    fn malformed_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        fs::write(&path, "p,r\n0.1,0.2\n").unwrap();
        assert!(matches!(read_dataset_csv(&path), Err(Error::Format { .. })));
        fs::write(&path, "noise_p,min_expectation\n0.1,abc\n").unwrap();
        assert!(matches!(read_dataset_csv(&path), Err(Error::Format { .. })));
        assert!(matches!(
            read_dataset_csv(&dir.path().join("missing.csv")),
            Err(Error::Io { .. })
        ));
    }
}
