//! Full pipeline from a manifest to an on-disk report bundle.

use std::fs;
use std::path::Path;

use log::info;
use rayon::prelude::*;
use serde::Serialize;
use wena_core::connectivity::nodes_for_edges;
use wena_core::ensemble::{StackHead, StreamScore, TrainedStack, TrainedStream};
use wena_core::evaluation::{kfold_split, MetricsReport};
use wena_core::ingest::detrend;
use wena_core::pipeline::{
    assemble_outcome, cohort_from_subjects, pattern_analysis, run_fold, subject_features,
    CohortFeatures, CvOutcome, PatternAnalysis, PipelineConfig,
};

use crate::config::RunConfig;
use crate::error::{AtStage, Result, Stage, WenaError};
use crate::formats::{cell, write_json, write_rows, OutputBundle};
use crate::ingest::{
    load_cohort_series, load_manifest, qc_filter, CohortManifest, ExclusionReport,
};

pub fn thread_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| WenaError::Config(format!("thread pool: {e}")))
}

/// Retained cohort after QC.
#[derive(Debug, Clone)]
pub struct PreparedCohort {
    pub manifest: CohortManifest,
    pub exclusions: ExclusionReport,
    pub features: CohortFeatures,
}

/// Per-subject edge and graph vectors, computed in parallel.
pub fn extract_features(manifest: &CohortManifest, config: &RunConfig) -> Result<CohortFeatures> {
    let series = load_cohort_series(manifest)?;
    let subjects = series
        .par_iter()
        .map(|ts| {
            let ts = if config.detrend {
                detrend(ts)
            } else {
                ts.clone()
            };
            subject_features(&ts, config.fc_method, config.mi_bins, config.threshold).at(Stage::Fc)
        })
        .collect::<Result<Vec<_>>>()?;
    cohort_from_subjects(&subjects, manifest.scores(), config.use_graph).at(Stage::Fc)
}

pub fn prepare_cohort(config: &RunConfig) -> Result<PreparedCohort> {
    let path = config
        .manifest
        .as_deref()
        .ok_or_else(|| WenaError::Config("no manifest given".into()))?;
    let manifest = load_manifest(path)?;
    let (manifest, exclusions) = qc_filter(&manifest, &config.qc)?;
    info!(
        "{} subjects retained, {} QC violations",
        manifest.subjects.len(),
        exclusions.exclusions.len()
    );
    if manifest.subjects.len() < config.k {
        return Err(WenaError::invalid(
            Stage::Qc,
            format!(
                "{} subjects retained, fewer than k = {}",
                manifest.subjects.len(),
                config.k
            ),
        ));
    }
    let features = extract_features(&manifest, config)?;
    Ok(PreparedCohort {
        manifest,
        exclusions,
        features,
    })
}

/// Outer cross-validation with folds run in parallel. The result does not
/// depend on the number of threads.
pub fn cross_validate_parallel(
    features: &CohortFeatures,
    config: &PipelineConfig,
    k: usize,
) -> Result<CvOutcome> {
    config.validate().at(Stage::Train)?;
    let assignment = kfold_split(features.subjects(), k, config.seed).at(Stage::Train)?;
    let folds = (0..k)
        .into_par_iter()
        .map(|fold| run_fold(features, config, &assignment, fold).at(Stage::Train))
        .collect::<Result<Vec<_>>>()?;
    assemble_outcome(&features.y, assignment, folds).at(Stage::Evaluate)
}

#[derive(Debug, Clone, Serialize)]
pub struct StreamWeight {
    pub label: String,
    pub weight: f64,
    pub correlation: f64,
    pub mae: f64,
    pub clamped: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FoldWeights {
    pub fold: usize,
    pub conventional: bool,
    pub layers: Vec<Vec<StreamWeight>>,
    pub fusion: Option<Vec<StreamWeight>>,
}

fn stream_weights(
    streams: &[TrainedStream],
    scores: &[StreamScore],
    weights: &[f64],
    clamped: &[bool],
) -> Vec<StreamWeight> {
    streams
        .iter()
        .zip(scores)
        .zip(weights.iter().zip(clamped))
        .map(|((s, score), (&weight, &clamped))| StreamWeight {
            label: s.label.clone(),
            weight,
            correlation: score.correlation,
            mae: score.mae,
            clamped,
        })
        .collect()
}

pub fn fold_weights(fold: usize, stack: &TrainedStack) -> FoldWeights {
    FoldWeights {
        fold,
        conventional: stack.conventional,
        layers: stack
            .layers
            .iter()
            .map(|l| stream_weights(&l.streams, &l.scores, &l.weights, &l.clamped))
            .collect(),
        fusion: match &stack.head {
            StackHead::Fusion {
                models,
                scores,
                weights,
                clamped,
            } => Some(stream_weights(models, scores, weights, clamped)),
            StackHead::Meta { .. } => None,
        },
    }
}

fn read_labels(path: &Path, n: usize) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| WenaError::io(Stage::Pattern, path, e))?;
    let labels: Vec<String> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(String::from)
        .collect();
    if labels.len() != n {
        return Err(WenaError::parse(
            Stage::Pattern,
            path,
            format!("{} labels for {n} ROIs", labels.len()),
        ));
    }
    Ok(labels)
}

/// What a finished run produced.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub report: MetricsReport,
    pub retained: usize,
    pub excluded: usize,
}

/// Runs the whole pipeline and writes the report bundle into
/// `config.output`. On failure every file written so far is removed.
pub fn run_experiment(config: &RunConfig) -> Result<RunSummary> {
    config.validate()?;
    let output = config.output.as_deref().expect("validated");
    if let Some(m) = &config.manifest {
        if !m.is_file() {
            return Err(WenaError::ManifestNotFound(m.clone()));
        }
    }
    let pool = thread_pool(config.threads)?;
    let mut bundle = OutputBundle::create(output)?;
    match pool.install(|| write_bundle(config, &mut bundle)) {
        Ok(summary) => Ok(summary),
        Err(e) => {
            bundle.discard();
            Err(e)
        }
    }
}

fn write_bundle(config: &RunConfig, bundle: &mut OutputBundle) -> Result<RunSummary> {
    let cohort = prepare_cohort(config)?;
    write_json(
        &bundle.file("exclusions.json"),
        &cohort.exclusions.exclusions,
    )?;
    let ids = cohort.manifest.ids();

    let outcome = cross_validate_parallel(&cohort.features, &config.pipeline(), config.k)?;
    info!(
        "pooled MAE {:.4}, R {:?}",
        outcome.report.mae, outcome.report.r
    );
    write_json(&bundle.file("metrics.json"), &outcome.report)?;
    write_rows(
        &bundle.file("per_fold.csv"),
        &["fold", "n", "mae", "r", "r2"],
        outcome.report.per_fold.iter().flatten().map(|f| {
            vec![
                f.fold.to_string(),
                f.n.to_string(),
                f.mae.to_string(),
                cell(f.r),
                f.r2.to_string(),
            ]
        }),
    )?;
    write_rows(
        &bundle.file("predictions.csv"),
        &["subject_id", "fold", "score", "predicted", "difference"],
        ids.iter().enumerate().map(|(i, id)| {
            let (y, p) = (cohort.features.y[i], outcome.predictions[i]);
            vec![
                id.clone(),
                outcome.assignment.assignment[i].to_string(),
                y.to_string(),
                p.to_string(),
                (p - y).to_string(),
            ]
        }),
    )?;
    let weights: Vec<FoldWeights> = outcome
        .folds
        .iter()
        .filter_map(|f| f.model.stack().map(|s| fold_weights(f.fold, s)))
        .collect();
    write_json(&bundle.file("weights.json"), &weights)?;

    let covariate = cohort.manifest.covariate(&config.covariate);
    if covariate.is_none() {
        log::warn!(
            "covariate {:?} missing for some subjects, skipping correlation",
            config.covariate
        );
    }
    let labels = match (
        &config.roi_labels,
        nodes_for_edges(cohort.features.edges.cols()),
    ) {
        (Some(p), Some(n)) => Some(read_labels(p, n)?),
        _ => None,
    };
    let analysis = pattern_analysis(
        &cohort.features.edges,
        &cohort.features.y,
        covariate.as_deref(),
        &config.pattern_ae,
        &config.relief,
        labels.as_deref(),
        config.seed,
    )
    .at(Stage::Pattern)?;
    write_pattern(bundle, &analysis, &config.covariate)?;

    Ok(RunSummary {
        report: outcome.report,
        retained: ids.len(),
        excluded: cohort.exclusions.exclusions.len(),
    })
}

fn write_pattern(
    bundle: &mut OutputBundle,
    analysis: &PatternAnalysis,
    covariate: &str,
) -> Result<()> {
    let label = |l: &Option<String>| l.clone().unwrap_or_default();
    let roi_label: std::collections::HashMap<usize, String> = analysis
        .pattern
        .rois
        .iter()
        .map(|r| (r.roi, label(&r.label)))
        .collect();
    write_rows(
        &bundle.file("pattern_edges.csv"),
        &["rank", "i", "j", "label_i", "label_j", "weight"],
        analysis.pattern.edges.iter().enumerate().map(|(rank, e)| {
            vec![
                (rank + 1).to_string(),
                e.i.to_string(),
                e.j.to_string(),
                roi_label[&e.i].clone(),
                roi_label[&e.j].clone(),
                e.weight.to_string(),
            ]
        }),
    )?;
    write_rows(
        &bundle.file("pattern_rois.csv"),
        &["rank", "roi", "label", "importance"],
        analysis.pattern.rois.iter().enumerate().map(|(rank, r)| {
            vec![
                (rank + 1).to_string(),
                r.roi.to_string(),
                label(&r.label),
                r.importance.to_string(),
            ]
        }),
    )?;
    let columns = &analysis.features.columns;
    write_rows(
        &bundle.file("relief_ranking.csv"),
        &["rank", "feature", "score"],
        analysis
            .relief
            .ranking
            .iter()
            .enumerate()
            .map(|(rank, &f)| {
                vec![
                    (rank + 1).to_string(),
                    columns[f].clone(),
                    analysis.relief.scores[f].to_string(),
                ]
            }),
    )?;
    if let Some(corr) = &analysis.covariate {
        write_rows(
            &bundle.file("feature_age_correlation.csv"),
            &["feature", "covariate", "r", "p"],
            columns
                .iter()
                .zip(corr)
                .map(|(name, c)| vec![name.clone(), covariate.to_string(), cell(c.r), cell(c.p)]),
        )?;
    }
    Ok(())
}
