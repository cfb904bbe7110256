//! On-disk formats: numeric panels, estimate bundles (paired re/im CSV
//! matrices plus a JSON manifest), and simulation truth bundles.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::{CMatrix, HermitianMatrix, MatrixError};
use crate::periodogram::{PeriodogramError, TimeSeriesPanel};
use crate::simulate::{SimulationConfig, SimulationTruth};

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{path}: {source}")]
    Json {
        path: String,
        source: serde_json::Error,
    },
    #[error("{path}: row {row}, column {col}: cannot parse '{cell}' as a number")]
    Parse {
        path: String,
        row: usize,
        col: usize,
        cell: String,
    },
    #[error("{path}: row {row}, column {col}: NaN is not a valid observation")]
    NaN { path: String, row: usize, col: usize },
    #[error("{path}: row {row} has {got} cells, expected {expected}")]
    Ragged {
        path: String,
        row: usize,
        expected: usize,
        got: usize,
    },
    #[error("{path}: file is empty")]
    Empty { path: String },
    #[error("bundle is inconsistent: {0}")]
    Manifest(String),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Panel(#[from] PeriodogramError),
}

/// How a numeric table file is interpreted.
#[derive(Debug, Clone, Copy)]
pub struct PanelReadOptions {
    pub delimiter: char,
    /// Skip the first line.
    pub header: bool,
    /// Input is time-by-series instead of series-by-time.
    pub transpose: bool,
}

impl Default for PanelReadOptions {
    fn default() -> Self {
        Self {
            delimiter: ',',
            header: false,
            transpose: false,
        }
    }
}

fn read_numeric_table(path: &Path, delimiter: char, header: bool) -> Result<DMatrix<f64>, IoError> {
    let display = path.display().to_string();
    let file = fs::File::open(path)?;
    let reader = BufReader::new(file);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width: Option<usize> = None;
    for (line_idx, line) in reader.lines().enumerate() {
        let line = line?;
        if header && line_idx == 0 {
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let row_number = rows.len() + 1;
        let mut row = Vec::new();
        for (col_idx, cell) in line.split(delimiter).enumerate() {
            let trimmed = cell.trim();
            let value: f64 = trimmed.parse().map_err(|_| IoError::Parse {
                path: display.clone(),
                row: row_number,
                col: col_idx + 1,
                cell: trimmed.to_string(),
            })?;
            if value.is_nan() {
                return Err(IoError::NaN {
                    path: display.clone(),
                    row: row_number,
                    col: col_idx + 1,
                });
            }
            row.push(value);
        }
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(IoError::Ragged {
                    path: display,
                    row: row_number,
                    expected: w,
                    got: row.len(),
                })
            }
            _ => {}
        }
        rows.push(row);
    }
    let width = width.ok_or(IoError::Empty { path: display })?;
    let m = DMatrix::from_fn(rows.len(), width, |i, j| rows[i][j]);
    Ok(m)
}

/// Reads a panel from a delimited numeric table. Rows are series and columns
/// are time points unless `transpose` is set.
pub fn read_panel(path: &Path, options: &PanelReadOptions) -> Result<TimeSeriesPanel, IoError> {
    let table = read_numeric_table(path, options.delimiter, options.header)?;
    let table = if options.transpose {
        table.transpose()
    } else {
        table
    };
    Ok(TimeSeriesPanel::new(table)?)
}

/// Full decimal precision used in every file this crate writes; 17
/// significant digits round-trip f64 exactly.
fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_real_csv(path: &Path, m: &DMatrix<f64>) -> Result<(), IoError> {
    let mut file = fs::File::create(path)?;
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| fmt(m[(i, j)])).collect();
        writeln!(file, "{}", row.join(","))?;
    }
    Ok(())
}

fn write_matrix_pair(dir: &Path, name: &str, h: usize, m: &CMatrix) -> Result<(), IoError> {
    let re = m.map(|v| v.re);
    let im = m.map(|v| v.im);
    write_real_csv(&dir.join(format!("{name}_h{h}_re.csv")), &re)?;
    write_real_csv(&dir.join(format!("{name}_h{h}_im.csv")), &im)?;
    Ok(())
}

fn read_matrix_pair(dir: &Path, name: &str, h: usize) -> Result<HermitianMatrix, IoError> {
    let re = read_numeric_table(&dir.join(format!("{name}_h{h}_re.csv")), ',', false)?;
    let im = read_numeric_table(&dir.join(format!("{name}_h{h}_im.csv")), ',', false)?;
    if re.nrows() != im.nrows() || re.ncols() != im.ncols() {
        return Err(IoError::Manifest(format!(
            "{name}_h{h}: real and imaginary parts have different shapes"
        )));
    }
    let m = CMatrix::from_fn(re.nrows(), re.ncols(), |i, j| {
        Complex64::new(re[(i, j)], im[(i, j)])
    });
    Ok(HermitianMatrix::try_new(m)?)
}

/// Per-frequency summary row of an estimate manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrequencySummary {
    pub h: usize,
    pub frequency: f64,
    pub rank: usize,
    pub psi: f64,
    pub rho: f64,
    pub beta_hat: f64,
    pub zeta_hat: Option<f64>,
    pub nonzero_count: usize,
    pub converged: bool,
    pub iterations: usize,
    pub s_pd: bool,
    pub sigma_pd: bool,
    /// Present when thresholds were grid-selected.
    pub mc_value: Option<f64>,
    pub boundary_flag: Option<bool>,
}

/// Metadata written next to the matrix files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    pub p: usize,
    pub t: usize,
    pub m_t: usize,
    pub kernel: String,
    pub demean: bool,
    pub seed: Option<u64>,
    pub frequencies: Vec<f64>,
    pub per_frequency: Vec<FrequencySummary>,
    /// Matrix names present on disk, e.g. "L", "S", "Sigma", "SigmaTilde".
    pub matrices: Vec<String>,
    /// Unix seconds; informational only and excluded from determinism
    /// comparisons.
    pub created_utc: u64,
}

/// An estimate bundle: manifest plus per-frequency named Hermitian matrices.
#[derive(Debug, Clone)]
pub struct EstimateBundle {
    pub manifest: Manifest,
    pub matrices: BTreeMap<String, Vec<HermitianMatrix>>,
}

pub fn now_unix() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let text = serde_json::to_string_pretty(value).map_err(|source| IoError::Json {
        path: path.display().to_string(),
        source,
    })?;
    fs::write(path, text + "\n")?;
    Ok(())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, IoError> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|source| IoError::Json {
        path: path.display().to_string(),
        source,
    })
}

/// Writes the bundle into `dir` (created if missing): `manifest.json` plus
/// `<name>_h<h>_re.csv` / `<name>_h<h>_im.csv` for every stored matrix.
pub fn write_estimate(bundle: &EstimateBundle, dir: &Path) -> Result<(), IoError> {
    let h_count = bundle.manifest.frequencies.len();
    for (name, list) in &bundle.matrices {
        if list.len() != h_count {
            return Err(IoError::Manifest(format!(
                "matrix '{name}' has {} frequencies, manifest lists {h_count}",
                list.len()
            )));
        }
    }
    fs::create_dir_all(dir)?;
    write_json(&dir.join("manifest.json"), &bundle.manifest)?;
    for (name, list) in &bundle.matrices {
        for (h, m) in list.iter().enumerate() {
            write_matrix_pair(dir, name, h, m.as_matrix())?;
        }
    }
    Ok(())
}

/// Reads a bundle back; every matrix named in the manifest must exist with
/// one file pair per manifest frequency.
pub fn read_estimate(dir: &Path) -> Result<EstimateBundle, IoError> {
    let manifest: Manifest = read_json(&dir.join("manifest.json"))?;
    if manifest.per_frequency.len() != manifest.frequencies.len() {
        return Err(IoError::Manifest(format!(
            "manifest lists {} frequencies but {} per-frequency rows",
            manifest.frequencies.len(),
            manifest.per_frequency.len()
        )));
    }
    let mut matrices = BTreeMap::new();
    for name in &manifest.matrices {
        let mut list = Vec::with_capacity(manifest.frequencies.len());
        for h in 0..manifest.frequencies.len() {
            let m = read_matrix_pair(dir, name, h).map_err(|e| match e {
                IoError::Io(io) if io.kind() == std::io::ErrorKind::NotFound => {
                    IoError::Manifest(format!("missing matrix file for '{name}' at h={h}"))
                }
                other => other,
            })?;
            if m.dim() != manifest.p {
                return Err(IoError::Manifest(format!(
                    "matrix '{name}' at h={h} is {}x{} but manifest says p={}",
                    m.dim(),
                    m.dim(),
                    manifest.p
                )));
            }
            list.push(m);
        }
        matrices.insert(name.clone(), list);
    }
    Ok(EstimateBundle { manifest, matrices })
}

/// Generation metadata stored with a simulated replication.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TruthManifest {
    pub tool_version: String,
    pub p: usize,
    pub t: usize,
    pub r: usize,
    pub scenario: String,
    pub condition_number: f64,
    pub beta: f64,
    pub tau: f64,
    pub delta: f64,
    pub delta_bis: f64,
    pub lambda_coeffs: Vec<f64>,
    pub normalize_lambda: bool,
    pub kappa_pert: f64,
    pub seed: u64,
    pub frequencies: Vec<f64>,
    pub created_utc: u64,
}

/// Writes a truth bundle: `truth.json`, `panel.csv`, and per-frequency
/// `L_h<h>_*` / `S_h<h>_*` matrix pairs.
pub fn write_truth(
    truth: &SimulationTruth,
    config: &SimulationConfig,
    dir: &Path,
) -> Result<(), IoError> {
    fs::create_dir_all(dir)?;
    let manifest = TruthManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        p: config.p,
        t: config.t,
        r: config.r,
        scenario: config.scenario.name().to_string(),
        condition_number: config.condition_number,
        beta: config.beta,
        tau: config.tau,
        delta: config.delta,
        delta_bis: config.delta_bis,
        lambda_coeffs: config.lambda_coeffs.clone(),
        normalize_lambda: config.normalize_lambda,
        kappa_pert: config.kappa_pert,
        seed: config.seed,
        frequencies: truth.frequencies.clone(),
        created_utc: now_unix(),
    };
    write_json(&dir.join("truth.json"), &manifest)?;
    write_real_csv(&dir.join("panel.csv"), truth.panel.values())?;
    for (h, (l, s)) in truth.l_true.iter().zip(truth.s_true.iter()).enumerate() {
        write_matrix_pair(dir, "L", h, l.as_matrix())?;
        write_matrix_pair(dir, "S", h, s.as_matrix())?;
    }
    Ok(())
}

/// A truth bundle read back from disk.
#[derive(Debug, Clone)]
pub struct TruthBundle {
    pub manifest: TruthManifest,
    pub panel: TimeSeriesPanel,
    pub l_true: Vec<HermitianMatrix>,
    pub s_true: Vec<HermitianMatrix>,
}

pub fn read_truth(dir: &Path) -> Result<TruthBundle, IoError> {
    let manifest: TruthManifest = read_json(&dir.join("truth.json"))?;
    let panel = read_panel(&dir.join("panel.csv"), &PanelReadOptions::default())?;
    let mut l_true = Vec::with_capacity(manifest.frequencies.len());
    let mut s_true = Vec::with_capacity(manifest.frequencies.len());
    for h in 0..manifest.frequencies.len() {
        l_true.push(read_matrix_pair(dir, "L", h)?);
        s_true.push(read_matrix_pair(dir, "S", h)?);
    }
    Ok(TruthBundle {
        manifest,
        panel,
        l_true,
        s_true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use tempfile::tempdir;

    #[test]
    fn read_panel_basic() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("x.csv");
        fs::write(&path, "1,2,3\n4,5,6\n").unwrap();
        let panel = read_panel(&path, &PanelReadOptions::default()).unwrap();
        assert_eq!(panel.series_count(), 2);
        assert_eq!(panel.sample_size(), 3);
        assert_eq!(panel.values()[(1, 2)], 6.0);
    }

    #[test]
    fn read_panel_header_and_transpose() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("x.csv");
        fs::write(&path, "a,b\n1,2\n3,4\n5,6\n").unwrap();
        let options = PanelReadOptions {
            header: true,
            transpose: true,
            ..Default::default()
        };
        let panel = read_panel(&path, &options).unwrap();
        // three time rows, two series columns, transposed to 2 x 3
        assert_eq!(panel.series_count(), 2);
        assert_eq!(panel.sample_size(), 3);
        assert_eq!(panel.values()[(0, 0)], 1.0);
        assert_eq!(panel.values()[(1, 2)], 6.0);
    }

    #[test]
    fn read_panel_reports_bad_cell() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("x.csv");
        fs::write(&path, "1,2\n3,abc\n").unwrap();
        match read_panel(&path, &PanelReadOptions::default()) {
            Err(IoError::Parse { row, col, cell, .. }) => {
                assert_eq!((row, col), (2, 2));
                assert_eq!(cell, "abc");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn read_panel_rejects_nan_and_ragged() {
        let dir = tempdir().unwrap();
        let nan_path = dir.path().join("nan.csv");
        fs::write(&nan_path, "1,NaN\n").unwrap();
        assert!(matches!(
            read_panel(&nan_path, &PanelReadOptions::default()),
            Err(IoError::NaN { row: 1, col: 2, .. })
        ));

        let ragged = dir.path().join("ragged.csv");
        fs::write(&ragged, "1,2\n3\n").unwrap();
        assert!(matches!(
            read_panel(&ragged, &PanelReadOptions::default()),
            Err(IoError::Ragged { row: 2, .. })
        ));
    }

    fn random_bundle(seed: u64, p: usize, freqs: usize) -> EstimateBundle {
        let mut rng = StdRng::seed_from_u64(seed);
        let mut random_herm = || {
            let m = CMatrix::from_fn(p, p, |_, _| {
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            crate::matrix::hermitize(&m).unwrap()
        };
        let mut matrices = BTreeMap::new();
        for name in ["L", "S", "Sigma"] {
            matrices.insert(
                name.to_string(),
                (0..freqs).map(|_| random_herm()).collect(),
            );
        }
        let frequencies: Vec<f64> = (0..freqs).map(|h| h as f64 * 0.3).collect();
        let per_frequency = frequencies
            .iter()
            .enumerate()
            .map(|(h, &f)| FrequencySummary {
                h,
                frequency: f,
                rank: 1,
                psi: 0.5,
                rho: 0.25,
                beta_hat: 0.5,
                zeta_hat: Some(0.1),
                nonzero_count: 3,
                converged: true,
                iterations: 12,
                s_pd: true,
                sigma_pd: true,
                mc_value: None,
                boundary_flag: None,
            })
            .collect();
        EstimateBundle {
            manifest: Manifest {
                tool_version: "test".into(),
                p,
                t: 100,
                m_t: 10,
                kernel: "bartlett".into(),
                demean: true,
                seed: Some(seed),
                frequencies,
                per_frequency,
                matrices: vec!["L".into(), "S".into(), "Sigma".into()],
                created_utc: 0,
            },
            matrices,
        }
    }

    #[test]
    fn estimate_bundle_round_trip_is_exact() {
        let dir = tempdir().unwrap();
        let bundle = random_bundle(9, 4, 3);
        write_estimate(&bundle, dir.path()).unwrap();
        let back = read_estimate(dir.path()).unwrap();
        assert_eq!(back.manifest.p, 4);
        for name in ["L", "S", "Sigma"] {
            for (a, b) in bundle.matrices[name].iter().zip(back.matrices[name].iter()) {
                assert_eq!(a.as_matrix(), b.as_matrix(), "matrix {name} round trip");
            }
        }
    }

    #[test]
    fn one_by_one_bundle_has_expected_files() {
        let dir = tempdir().unwrap();
        let mut bundle = random_bundle(5, 1, 1);
        bundle.matrices.retain(|k, _| k == "L");
        bundle.manifest.matrices = vec!["L".into()];
        write_estimate(&bundle, dir.path()).unwrap();
        assert!(dir.path().join("manifest.json").exists());
        assert!(dir.path().join("L_h0_re.csv").exists());
        assert!(dir.path().join("L_h0_im.csv").exists());
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 3);
    }

    #[test]
    fn manifest_mismatch_is_detected() {
        let dir = tempdir().unwrap();
        let bundle = random_bundle(11, 3, 2);
        write_estimate(&bundle, dir.path()).unwrap();
        // Claim a third frequency that has no files.
        let mut manifest = bundle.manifest.clone();
        manifest.frequencies.push(0.9);
        manifest.per_frequency.push(manifest.per_frequency[0].clone());
        write_json(&dir.path().join("manifest.json"), &manifest).unwrap();
        assert!(matches!(
            read_estimate(dir.path()),
            Err(IoError::Manifest(_))
        ));
    }

    #[test]
    fn truth_bundle_round_trip() {
        use crate::simulate::{simulate, Scenario};
        let config = SimulationConfig {
            p: 6,
            t: 80,
            r: 2,
            condition_number: 2.0,
            beta: 0.5,
            tau: 1.0,
            delta: 0.5,
            delta_bis: 0.5,
            lambda_coeffs: vec![0.8, 0.2],
            normalize_lambda: true,
            scenario: Scenario::Basic,
            kappa_pert: 0.1,
            seed: 7,
            frequencies: vec![0.0, 0.5, 1.0],
            burn_in: None,
        };
        let truth = simulate(&config).unwrap();
        let dir = tempdir().unwrap();
        write_truth(&truth, &config, dir.path()).unwrap();
        let back = read_truth(dir.path()).unwrap();
        assert_eq!(back.manifest.r, 2);
        assert_eq!(back.panel.values(), truth.panel.values());
        for (a, b) in truth.l_true.iter().zip(back.l_true.iter()) {
            assert_eq!(a.as_matrix(), b.as_matrix());
        }
    }
}
