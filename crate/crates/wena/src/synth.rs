//! Writes a synthetic cohort to disk in the ingest formats.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use wena_core::synthetic::{SynthSpec, SyntheticCohort};
use wena_core::Matrix;

use crate::error::{Result, Stage, WenaError};
use crate::formats::{write_json, write_rows};

pub const MANIFEST: &str = "manifest.csv";
pub const GROUND_TRUTH: &str = "ground_truth.json";

#[derive(Serialize)]
struct GroundTruth<'a> {
    spec: &'a SynthSpec,
    planted_edges: &'a [(usize, usize)],
    latent: Vec<(&'a str, f64)>,
}

fn write_series(path: &Path, header: &[String], m: &Matrix) -> Result<()> {
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    write_rows(
        path,
        &header,
        m.row_iter()
            .map(|r| r.iter().map(f64::to_string).collect::<Vec<_>>()),
    )
}

/// Exports `cohort` under `dir` and returns the manifest path. Paths in the
/// manifest are relative to `dir`.
pub fn export_cohort(cohort: &SyntheticCohort, dir: &Path) -> Result<PathBuf> {
    for sub in ["series", "motion"] {
        let p = dir.join(sub);
        fs::create_dir_all(&p).map_err(|e| WenaError::io(Stage::Synth, &p, e))?;
    }
    let roi_header: Vec<String> = (0..cohort.spec.rois)
        .map(|r| format!("roi_{r:03}"))
        .collect();
    let motion_header: Vec<String> = ["tx", "ty", "tz", "rx", "ry", "rz"]
        .map(String::from)
        .to_vec();
    let mut rows = Vec::with_capacity(cohort.subjects.len());
    for s in &cohort.subjects {
        let ts = format!("series/{}.csv", s.id);
        let motion = format!("motion/{}.csv", s.id);
        write_series(&dir.join(&ts), &roi_header, &s.series)?;
        write_series(&dir.join(&motion), &motion_header, &s.motion)?;
        rows.push(vec![
            s.id.clone(),
            ts,
            s.score.to_string(),
            motion,
            s.age.to_string(),
        ]);
    }
    let manifest = dir.join(MANIFEST);
    write_rows(
        &manifest,
        &[
            "subject_id",
            "timeseries_path",
            "score",
            "motion_path",
            "age",
        ],
        rows,
    )?;
    write_json(
        &dir.join(GROUND_TRUTH),
        &GroundTruth {
            spec: &cohort.spec,
            planted_edges: &cohort.planted_edges,
            latent: cohort
                .subjects
                .iter()
                .map(|s| (s.id.as_str(), s.latent))
                .collect(),
        },
    )?;
    Ok(manifest)
}
