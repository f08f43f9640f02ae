//! CSV and JSON readers and writers for intermediate and report files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use wena_core::connectivity::SparseNetwork;
use wena_core::{FeatureMatrix, Matrix};

use crate::error::{Result, Stage, WenaError};

/// Subject-indexed feature table: `subject_id` followed by named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub ids: Vec<String>,
    pub features: FeatureMatrix,
}

impl FeatureTable {
    /// Rows reordered to follow `ids`.
    pub fn aligned(&self, ids: &[String], path: &Path) -> Result<Matrix> {
        let index: std::collections::HashMap<&str, usize> = self
            .ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str(), i))
            .collect();
        let rows = ids
            .iter()
            .map(|id| {
                index.get(id.as_str()).copied().ok_or_else(|| {
                    WenaError::parse(Stage::Ingest, path, format!("no row for subject {id:?}"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self.features.values.select_rows(&rows))
    }
}

fn csv_error(stage: Stage, path: &Path) -> impl Fn(csv::Error) -> WenaError + '_ {
    move |e| WenaError::parse(stage, path, e)
}

fn create_csv(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(csv_error(Stage::Output, path))
}

fn finish(mut w: csv::Writer<fs::File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| WenaError::io(Stage::Output, path, e))
}

pub fn write_feature_table(path: &Path, ids: &[String], features: &FeatureMatrix) -> Result<()> {
    let mut w = create_csv(path)?;
    let err = csv_error(Stage::Output, path);
    let mut header = vec!["subject_id".to_string()];
    header.extend(features.columns.iter().cloned());
    w.write_record(&header).map_err(&err)?;
    for (id, row) in ids.iter().zip(features.values.row_iter()) {
        let mut rec = vec![id.clone()];
        rec.extend(row.iter().map(f64::to_string));
        w.write_record(&rec).map_err(&err)?;
    }
    finish(w, path)
}

pub fn read_feature_table(path: &Path) -> Result<FeatureTable> {
    let mut r = csv::Reader::from_path(path).map_err(csv_error(Stage::Ingest, path))?;
    let headers = r.headers().map_err(csv_error(Stage::Ingest, path))?.clone();
    if headers.get(0) != Some("subject_id") {
        return Err(WenaError::MissingColumn("subject_id".into()));
    }
    let columns: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
    let mut ids = Vec::new();
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_error(Stage::Ingest, path))?;
        ids.push(rec.get(0).unwrap_or_default().to_string());
        let row = rec
            .iter()
            .skip(1)
            .map(|v| {
                v.parse::<f64>().map_err(|_| {
                    WenaError::parse(
                        Stage::Ingest,
                        path,
                        format!("row {}: {v:?} is not a number", i + 2),
                    )
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let values = Matrix::from_rows(&rows).map_err(|e| WenaError::parse(Stage::Ingest, path, e))?;
    let features = FeatureMatrix::new(columns, values)
        .map_err(|e| WenaError::parse(Stage::Ingest, path, e))?;
    Ok(FeatureTable { ids, features })
}

/// Headerless numeric matrix.
pub fn write_matrix(path: &Path, m: &Matrix) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(csv_error(Stage::Output, path))?;
    for row in m.row_iter() {
        w.write_record(row.iter().map(f64::to_string))
            .map_err(csv_error(Stage::Output, path))?;
    }
    finish(w, path)
}

pub fn write_edge_list(path: &Path, net: &SparseNetwork) -> Result<()> {
    let mut w = create_csv(path)?;
    let err = csv_error(Stage::Output, path);
    w.write_record(["i", "j", "weight"]).map_err(&err)?;
    for &(i, j, weight) in &net.edges {
        w.write_record([i.to_string(), j.to_string(), weight.to_string()])
            .map_err(&err)?;
    }
    finish(w, path)
}

/// Header plus rows of already formatted cells.
pub fn write_rows<R, C>(path: &Path, header: &[&str], rows: R) -> Result<()>
where
    R: IntoIterator<Item = C>,
    C: IntoIterator<Item = String>,
{
    let mut w = create_csv(path)?;
    let err = csv_error(Stage::Output, path);
    w.write_record(header).map_err(&err)?;
    for row in rows {
        w.write_record(row).map_err(&err)?;
    }
    finish(w, path)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| WenaError::parse(Stage::Output, path, e))?;
    text.push('\n');
    let mut f = fs::File::create(path).map_err(|e| WenaError::io(Stage::Output, path, e))?;
    f.write_all(text.as_bytes())
        .map_err(|e| WenaError::io(Stage::Output, path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path, stage: Stage) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| WenaError::io(stage, path, e))?;
    serde_json::from_str(&text).map_err(|e| WenaError::parse(stage, path, e))
}

/// Optional value as a CSV cell; undefined values are written empty.
pub fn cell(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Tracks files written into an output directory so a failed run can
/// remove what it produced.
#[derive(Debug)]
pub struct OutputBundle {
    dir: PathBuf,
    created_dir: bool,
    written: Vec<PathBuf>,
}

impl OutputBundle {
    pub fn create(dir: &Path) -> Result<Self> {
        let created_dir = !dir.exists();
        fs::create_dir_all(dir).map_err(|e| WenaError::io(Stage::Output, dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            created_dir,
            written: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Path for `name`, recorded for cleanup.
    pub fn file(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.written.push(p.clone());
        p
    }

    pub fn subdir(&mut self, name: &str) -> Result<PathBuf> {
        let p = self.dir.join(name);
        fs::create_dir_all(&p).map_err(|e| WenaError::io(Stage::Output, &p, e))?;
        self.written.push(p.clone());
        Ok(p)
    }

    /// Best-effort removal of everything this bundle wrote.
    pub fn discard(self) {
        for p in self.written.iter().rev() {
            let _ = if p.is_dir() {
                fs::remove_dir_all(p)
            } else {
                fs::remove_file(p)
            };
        }
        if self.created_dir {
            let _ = fs::remove_dir(&self.dir);
        }
    }
}
