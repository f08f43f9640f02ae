use std::fs;
use std::path::Path;

use wena::formats::{read_feature_table, write_feature_table};
use wena::ingest::{load_cohort_series, load_manifest, qc_filter};
use wena::synth::export_cohort;
use wena::WenaError;
use wena_core::ingest::{QcRule, QcThresholds};
use wena_core::synthetic::{generate_cohort, SynthSpec};
use wena_core::{FeatureMatrix, Matrix};

fn small_cohort(dir: &Path) -> std::path::PathBuf {
    let spec = SynthSpec {
        subjects: 6,
        rois: 5,
        timepoints: 30,
        planted_edges: 2,
        ..SynthSpec::default()
    };
    export_cohort(&generate_cohort(&spec).unwrap(), dir).unwrap()
}

#[test]
fn synthetic_export_loads_back() {
    let dir = tempfile::tempdir().unwrap();
    let path = small_cohort(dir.path());
    let m = load_manifest(&path).unwrap();
    assert_eq!(m.ids().len(), 6);
    assert_eq!(m.covariate_names, vec!["age".to_string()]);
    let series = load_cohort_series(&m).unwrap();
    assert!(series.iter().all(|s| s.t() == 30 && s.n() == 5));
    let (kept, report) = qc_filter(&m, &QcThresholds::default()).unwrap();
    assert_eq!(kept.subjects.len(), 6);
    assert!(report.exclusions.is_empty() && report.unchecked.is_empty());
}

#[test]
fn excessive_motion_is_excluded_once_per_rule() {
    let dir = tempfile::tempdir().unwrap();
    let path = small_cohort(dir.path());
    // 3 mm translation jump: violates the translation and mean-FD rules
    let mut text = String::from("tx,ty,tz,rx,ry,rz\n");
    for t in 0..30 {
        let v = if t % 2 == 0 { 0.0 } else { 3.0 };
        text.push_str(&format!("{v},0,0,0,0,0\n"));
    }
    fs::write(dir.path().join("motion/sub-002.csv"), text).unwrap();
    let m = load_manifest(&path).unwrap();
    let (kept, report) = qc_filter(&m, &QcThresholds::default()).unwrap();
    assert_eq!(kept.subjects.len(), 5);
    assert!(!kept.ids().contains(&"sub-002".to_string()));
    let rules: Vec<QcRule> = report.exclusions.iter().map(|e| e.rule).collect();
    assert_eq!(
        rules,
        vec![QcRule::TranslationExceeded, QcRule::MeanFdExceeded]
    );
}

#[test]
fn manifest_errors() {
    let dir = tempfile::tempdir().unwrap();
    let missing = load_manifest(&dir.path().join("nope.csv")).unwrap_err();
    assert!(matches!(missing, WenaError::ManifestNotFound(_)));
    assert_eq!(missing.exit_code(), 2);
    assert_eq!(missing.to_string(), "ingest: manifest not found");

    let p = dir.path().join("m.csv");
    fs::write(&p, "subject_id,score\na,1\n").unwrap();
    assert!(
        matches!(load_manifest(&p), Err(WenaError::MissingColumn(c)) if c == "timeseries_path")
    );

    fs::write(
        &p,
        "subject_id,timeseries_path,score\na,x.csv,1\na,y.csv,2\n",
    )
    .unwrap();
    assert!(matches!(load_manifest(&p), Err(WenaError::DuplicateSubject(id)) if id == "a"));

    fs::write(&p, "subject_id,timeseries_path,score\na,x.csv,NaN\n").unwrap();
    assert!(matches!(
        load_manifest(&p),
        Err(WenaError::NonFiniteValue { .. })
    ));
}

#[test]
fn roi_count_mismatch_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let path = small_cohort(dir.path());
    fs::write(
        dir.path().join("series/sub-004.csv"),
        "1,2,3\n4,5,7\n2,2,9\n1,0,0\n",
    )
    .unwrap();
    let m = load_manifest(&path).unwrap();
    match load_cohort_series(&m) {
        Err(WenaError::RoiCountMismatch {
            expected, actual, ..
        }) => assert_eq!((expected, actual), (5, 3)),
        other => panic!("expected an ROI mismatch, got {other:?}"),
    }
}

#[test]
fn feature_table_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("f.csv");
    let values = Matrix::from_rows(&[[0.1, 1.0 / 3.0], [1e-300, -2.5]]).unwrap();
    let f = FeatureMatrix::new(vec!["a".into(), "b".into()], values).unwrap();
    let ids = vec!["s1".to_string(), "s2".to_string()];
    write_feature_table(&p, &ids, &f).unwrap();
    let back = read_feature_table(&p).unwrap();
    assert_eq!(back.ids, ids);
    assert_eq!(back.features, f);
    let swapped = back.aligned(&["s2".into(), "s1".into()], &p).unwrap();
    assert_eq!(swapped.row(0), f.values.row(1));
}
