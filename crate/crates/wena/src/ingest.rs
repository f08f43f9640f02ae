//! Cohort manifests, ROI time-series and motion CSV files, and motion QC.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::path::{Path, PathBuf};

use log::warn;
use serde::{Deserialize, Serialize};
use wena_core::ingest::{qc_violations, MotionTrace, QcRule, QcThresholds, TimeSeriesMatrix};
use wena_core::Matrix;

use crate::error::{AtStage, Result, Stage, WenaError};

const ID: &str = "subject_id";
const TIMESERIES: &str = "timeseries_path";
const SCORE: &str = "score";
const MOTION: &str = "motion_path";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectRecord {
    pub id: String,
    pub timeseries_path: PathBuf,
    pub motion_path: Option<PathBuf>,
    pub score: f64,
    pub covariates: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortManifest {
    pub subjects: Vec<SubjectRecord>,
    /// Covariate column names in file order.
    pub covariate_names: Vec<String>,
    /// Directory relative paths are resolved against.
    pub base_dir: PathBuf,
}

impl CohortManifest {
    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn scores(&self) -> Vec<f64> {
        self.subjects.iter().map(|s| s.score).collect()
    }

    pub fn covariate(&self, name: &str) -> Option<Vec<f64>> {
        self.subjects
            .iter()
            .map(|s| s.covariates.get(name).copied())
            .collect()
    }

    pub fn ids(&self) -> Vec<String> {
        self.subjects.iter().map(|s| s.id.clone()).collect()
    }
}

fn csv_reader(path: &Path, headers: bool) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| WenaError::io(Stage::Ingest, path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(headers)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn parse_number(path: &Path, row: usize, col: usize, text: &str) -> Result<f64> {
    let v: f64 = text.parse().map_err(|_| {
        WenaError::parse(
            Stage::Ingest,
            path,
            format!("row {row}, column {col}: {text:?} is not a number"),
        )
    })?;
    if !v.is_finite() {
        return Err(WenaError::NonFiniteValue {
            path: path.to_path_buf(),
            row,
            col,
        });
    }
    Ok(v)
}

pub fn load_manifest(path: &Path) -> Result<CohortManifest> {
    if !path.is_file() {
        return Err(WenaError::ManifestNotFound(path.to_path_buf()));
    }
    let mut reader = csv_reader(path, true)?;
    let headers = reader
        .headers()
        .map_err(|e| WenaError::parse(Stage::Ingest, path, e))?
        .clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| WenaError::MissingColumn(name.to_string()))
    };
    let (id_col, ts_col, score_col) = (column(ID)?, column(TIMESERIES)?, column(SCORE)?);
    let motion_col = headers.iter().position(|h| h == MOTION);
    let covariate_cols: Vec<(usize, String)> = headers
        .iter()
        .enumerate()
        .filter(|(_, h)| ![ID, TIMESERIES, SCORE, MOTION].contains(h))
        .map(|(i, h)| (i, h.to_string()))
        .collect();

    let mut seen = HashSet::new();
    let mut subjects = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| WenaError::parse(Stage::Ingest, path, e))?;
        let row = r + 2;
        let field = |i: usize| record.get(i).unwrap_or("");
        let id = field(id_col).to_string();
        if id.is_empty() {
            return Err(WenaError::parse(
                Stage::Ingest,
                path,
                format!("row {row}: empty subject_id"),
            ));
        }
        if !seen.insert(id.clone()) {
            return Err(WenaError::DuplicateSubject(id));
        }
        let ts = field(ts_col);
        if ts.is_empty() {
            return Err(WenaError::parse(
                Stage::Ingest,
                path,
                format!("row {row}: empty timeseries_path"),
            ));
        }
        let score = parse_number(path, row, score_col + 1, field(score_col))?;
        let motion_path = motion_col
            .map(field)
            .filter(|m| !m.is_empty())
            .map(PathBuf::from);
        let covariates = covariate_cols
            .iter()
            .map(|(i, name)| Ok((name.clone(), parse_number(path, row, i + 1, field(*i))?)))
            .collect::<Result<_>>()?;
        subjects.push(SubjectRecord {
            id,
            timeseries_path: PathBuf::from(ts),
            motion_path,
            score,
            covariates,
        });
    }
    Ok(CohortManifest {
        subjects,
        covariate_names: covariate_cols.into_iter().map(|(_, n)| n).collect(),
        base_dir: path.parent().map(Path::to_path_buf).unwrap_or_default(),
    })
}

/// Writes the manifest with paths exactly as stored.
pub fn write_manifest(manifest: &CohortManifest, path: &Path) -> Result<()> {
    let mut w =
        csv::Writer::from_path(path).map_err(|e| WenaError::parse(Stage::Output, path, e))?;
    let has_motion = manifest.subjects.iter().any(|s| s.motion_path.is_some());
    let mut header = vec![ID, TIMESERIES, SCORE];
    if has_motion {
        header.push(MOTION);
    }
    header.extend(manifest.covariate_names.iter().map(String::as_str));
    let out_err = |e: csv::Error| WenaError::parse(Stage::Output, path, e);
    w.write_record(&header).map_err(out_err)?;
    for s in &manifest.subjects {
        let mut row = vec![
            s.id.clone(),
            s.timeseries_path.display().to_string(),
            s.score.to_string(),
        ];
        if has_motion {
            row.push(
                s.motion_path
                    .as_ref()
                    .map(|p| p.display().to_string())
                    .unwrap_or_default(),
            );
        }
        row.extend(
            manifest
                .covariate_names
                .iter()
                .map(|n| s.covariates[n].to_string()),
        );
        w.write_record(&row).map_err(out_err)?;
    }
    w.flush().map_err(|e| WenaError::io(Stage::Output, path, e))
}

/// Reads a numeric CSV; a non-numeric first row is taken as a header.
pub fn read_numeric_csv(path: &Path) -> Result<Matrix> {
    let mut reader = csv_reader(path, false)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| WenaError::parse(Stage::Ingest, path, e))?;
        if r == 0 && record.iter().any(|f| f.parse::<f64>().is_err()) {
            continue;
        }
        let row = record
            .iter()
            .enumerate()
            .map(|(c, f)| parse_number(path, r + 1, c + 1, f))
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(WenaError::parse(
                    Stage::Ingest,
                    path,
                    format!(
                        "row {} has {} columns, expected {}",
                        r + 1,
                        row.len(),
                        first.len()
                    ),
                ));
            }
        }
        rows.push(row);
    }
    Matrix::from_rows(&rows).at(Stage::Ingest)
}

pub fn load_timeseries(path: &Path, expected_n: Option<usize>) -> Result<TimeSeriesMatrix> {
    let m = read_numeric_csv(path)?;
    if let Some(n) = expected_n {
        if m.cols() != n {
            return Err(WenaError::RoiCountMismatch {
                path: path.to_path_buf(),
                expected: n,
                actual: m.cols(),
            });
        }
    }
    TimeSeriesMatrix::new(m).map_err(|e| WenaError::parse(Stage::Ingest, path, e))
}

pub fn load_motion(path: &Path) -> Result<MotionTrace> {
    MotionTrace::new(read_numeric_csv(path)?).map_err(|e| WenaError::parse(Stage::Qc, path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exclusion {
    pub subject_id: String,
    pub rule: QcRule,
    pub value: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExclusionReport {
    /// One entry per violated rule.
    pub exclusions: Vec<Exclusion>,
    /// Subjects retained without a motion trace.
    pub unchecked: Vec<String>,
}

/// Drops subjects whose motion trace violates any threshold.
pub fn qc_filter(
    manifest: &CohortManifest,
    thresholds: &QcThresholds,
) -> Result<(CohortManifest, ExclusionReport)> {
    let mut report = ExclusionReport::default();
    let mut retained = Vec::new();
    for s in &manifest.subjects {
        let Some(motion) = &s.motion_path else {
            warn!("{}: no motion trace, retained without QC", s.id);
            report.unchecked.push(s.id.clone());
            retained.push(s.clone());
            continue;
        };
        let trace = load_motion(&manifest.resolve(motion))?;
        let violations = qc_violations(&trace, thresholds);
        if violations.is_empty() {
            retained.push(s.clone());
        }
        report
            .exclusions
            .extend(violations.into_iter().map(|v| Exclusion {
                subject_id: s.id.clone(),
                rule: v.rule,
                value: v.value,
                threshold: v.threshold,
            }));
    }
    Ok((
        CohortManifest {
            subjects: retained,
            ..manifest.clone()
        },
        report,
    ))
}

/// Loads every subject's series, checking that ROI counts agree.
pub fn load_cohort_series(manifest: &CohortManifest) -> Result<Vec<TimeSeriesMatrix>> {
    let mut expected = None;
    manifest
        .subjects
        .iter()
        .map(|s| {
            let ts = load_timeseries(&manifest.resolve(&s.timeseries_path), expected)?;
            expected = Some(ts.n());
            Ok(ts)
        })
        .collect()
}
