use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::info;
use rayon::prelude::*;
use wena_core::connectivity::{compute_fc, threshold_network, vectorize_edges, FcMethod};
use wena_core::encoder::{extract_pattern, train_autoencoder, AeModel, Pca};
use wena_core::ensemble::{
    fit_conventional_stack, fit_weighted_stack, predict_stack, Block, StackConfig, TrainedStack,
};
use wena_core::evaluation::{compute_metrics, covariate_correlation, rrelieff_rank, ReliefParams};
use wena_core::graph::{assemble_graph_features, GraphIndexVector};
use wena_core::ingest::detrend;
use wena_core::pipeline::Predictor;
use wena_core::regressors::RegressorSpec;
use wena_core::synthetic::{generate_cohort, SynthSpec};
use wena_core::{FeatureMatrix, Matrix};

use crate::config::RunConfig;
use crate::error::{AtStage, Result, Stage, WenaError};
use crate::formats::{
    cell, read_feature_table, read_json, write_edge_list, write_feature_table, write_json,
    write_matrix, write_rows, FeatureTable,
};
use crate::ingest::{load_cohort_series, load_manifest, qc_filter, CohortManifest};
use crate::run::{fold_weights, run_experiment, thread_pool};
use crate::synth::export_cohort;

#[derive(Debug, Parser)]
#[command(
    name = "wena",
    version,
    about = "Predict a behavioral score from ROI time series"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic cohort (manifest, series, motion, ground truth).
    Synth(SynthArgs),
    /// Load a manifest, apply motion QC and report exclusions.
    IngestCheck(CohortArgs),
    /// Per-subject connectivity matrices and the cohort edge table.
    Fc(CohortArgs),
    /// Per-subject thresholded networks and the cohort graph-index table.
    Graph(CohortArgs),
    /// Fit an autoencoder (or PCA) on a feature table and encode it.
    Encode(EncodeArgs),
    /// Fit a stacking ensemble on encoded feature tables.
    Train(TrainArgs),
    /// Score a trained ensemble on feature tables.
    Evaluate(EvaluateArgs),
    /// RReliefF ranking of a feature table against the score.
    Rank(RankArgs),
    /// Back-project one hidden unit of an autoencoder onto edges and ROIs.
    Pattern(PatternArgs),
    /// Full pipeline with cross-validation and the report bundle.
    Run(RunArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub subjects: Option<usize>,
    #[arg(long)]
    pub rois: Option<usize>,
    #[arg(long)]
    pub timepoints: Option<usize>,
    #[arg(long)]
    pub planted_edges: Option<usize>,
    #[arg(long)]
    pub signal_strength: Option<f64>,
    #[arg(long)]
    pub noise_sd: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Settings shared by every command that reads a config file.
#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// TOML run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub fc_method: Option<FcMethod>,
    #[arg(long)]
    pub mi_bins: Option<usize>,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub no_detrend: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub threads: Option<usize>,
}

impl ConfigArgs {
    /// Flag over config file over default.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(m) = &self.manifest {
            c.manifest = Some(m.clone());
        }
        if let Some(v) = self.fc_method {
            c.fc_method = v;
        }
        if let Some(v) = self.mi_bins {
            c.mi_bins = v;
        }
        if let Some(v) = self.threshold {
            c.threshold = v;
        }
        if self.no_detrend {
            c.detrend = false;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.threads {
            c.threads = v;
        }
        Ok(c)
    }
}

#[derive(Debug, Args)]
pub struct CohortArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Output directory (ingest-check: exclusion report file).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Where to write the fitted model as JSON.
    #[arg(long)]
    pub model_out: Option<PathBuf>,
    /// Use PCA with this many components instead of the autoencoder.
    #[arg(long)]
    pub pca: Option<usize>,
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Encoded feature tables, one per block, in a fixed order.
    #[arg(long = "block", required = true)]
    pub blocks: Vec<PathBuf>,
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Stack settings come from the `[predictor]` table.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub layers: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Unit-weight stack with a ridge meta-model.
    #[arg(long)]
    pub conventional: bool,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub stack: PathBuf,
    #[arg(long = "block", required = true)]
    pub blocks: Vec<PathBuf>,
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub k_neighbors: usize,
    /// Also correlate every feature with this manifest covariate.
    #[arg(long)]
    pub covariate: Option<String>,
    #[arg(long)]
    pub correlation_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PatternArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub unit: usize,
    /// One ROI label per line.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub layers: Option<usize>,
    /// Hidden units for both block autoencoders.
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Leave graph indices out of the feature blocks.
    #[arg(long)]
    pub no_graph: bool,
}

impl RunArgs {
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut c = self.config.resolve()?;
        if let Some(o) = &self.output {
            c.output = Some(o.clone());
        }
        if let Some(k) = self.k {
            c.k = k;
        }
        if let Some(layers) = self.layers {
            match &mut c.predictor {
                Predictor::Wena(s) | Predictor::Conventional { stack: s, .. } => s.layers = layers,
                Predictor::Single { .. } => {
                    return Err(WenaError::Config(
                        "--layers needs a stacking predictor".into(),
                    ))
                }
            }
        }
        for ae in [&mut c.edge_ae, &mut c.graph_ae] {
            if let Some(h) = self.hidden {
                ae.hidden = h;
            }
            if let Some(e) = self.epochs {
                ae.epochs = e;
            }
        }
        if self.no_graph {
            c.use_graph = false;
        }
        Ok(c)
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| WenaError::io(Stage::Output, dir, e))
}

fn require_out(out: &Option<PathBuf>) -> Result<&Path> {
    out.as_deref()
        .ok_or_else(|| WenaError::Config("--out is required".into()))
}

fn retained_manifest(config: &RunConfig) -> Result<CohortManifest> {
    let path = config
        .manifest
        .as_deref()
        .ok_or_else(|| WenaError::Config("no manifest given".into()))?;
    Ok(qc_filter(&load_manifest(path)?, &config.qc)?.0)
}

fn edge_columns(n: usize) -> Vec<String> {
    let width = n.saturating_sub(1).to_string().len().max(3);
    wena_core::connectivity::edge_pairs(n)
        .map(|(i, j)| format!("e_{i:0width$}_{j:0width$}"))
        .collect()
}

pub fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth(a) => synth(a),
        Command::IngestCheck(a) => ingest_check(a),
        Command::Fc(a) => fc(a),
        Command::Graph(a) => graph(a),
        Command::Encode(a) => encode(a),
        Command::Train(a) => train(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Rank(a) => rank(a),
        Command::Pattern(a) => pattern(a),
        Command::Run(a) => {
            let summary = run_experiment(&a.resolve()?)?;
            println!(
                "{} subjects ({} QC violations): MAE {:.4}, R {}, R2 {:.4}",
                summary.retained,
                summary.excluded,
                summary.report.mae,
                summary
                    .report
                    .r
                    .map_or("undefined".into(), |r| format!("{r:.4}")),
                summary.report.r2
            );
            Ok(())
        }
    }
}

fn synth(a: SynthArgs) -> Result<()> {
    let d = SynthSpec::default();
    let spec = SynthSpec {
        subjects: a.subjects.unwrap_or(d.subjects),
        rois: a.rois.unwrap_or(d.rois),
        timepoints: a.timepoints.unwrap_or(d.timepoints),
        planted_edges: a.planted_edges.unwrap_or(d.planted_edges),
        signal_strength: a.signal_strength.unwrap_or(d.signal_strength),
        noise_sd: a.noise_sd.unwrap_or(d.noise_sd),
        seed: a.seed.unwrap_or(d.seed),
    };
    spec.validate()
        .map_err(|e| WenaError::Config(e.to_string()))?;
    let cohort = generate_cohort(&spec).at(Stage::Synth)?;
    let manifest = export_cohort(&cohort, &a.out)?;
    println!("{}", manifest.display());
    Ok(())
}

fn ingest_check(a: CohortArgs) -> Result<()> {
    let config = a.config.resolve()?;
    let path = config
        .manifest
        .as_deref()
        .ok_or_else(|| WenaError::Config("no manifest given".into()))?;
    let manifest = load_manifest(path)?;
    let (retained, report) = qc_filter(&manifest, &config.qc)?;
    let series = load_cohort_series(&retained)?;
    let excluded = manifest.subjects.len() - retained.subjects.len();
    println!(
        "{} subjects, {} retained, {} excluded, {} without motion data, {} ROIs",
        manifest.subjects.len(),
        retained.subjects.len(),
        excluded,
        report.unchecked.len(),
        series.first().map_or(0, |s| s.n())
    );
    for e in &report.exclusions {
        println!(
            "{}: {:?} {} > {}",
            e.subject_id, e.rule, e.value, e.threshold
        );
    }
    if let Some(out) = &a.out {
        write_json(out, &report.exclusions)?;
    }
    Ok(())
}

fn fc(a: CohortArgs) -> Result<()> {
    let config = a.config.resolve()?;
    let out = require_out(&a.out)?;
    let manifest = retained_manifest(&config)?;
    let series = load_cohort_series(&manifest)?;
    let dir = out.join("fc");
    create_dir(&dir)?;
    let pool = thread_pool(config.threads)?;
    let edges = pool.install(|| {
        manifest
            .subjects
            .par_iter()
            .zip(&series)
            .map(|(s, ts)| {
                let ts = if config.detrend {
                    detrend(ts)
                } else {
                    ts.clone()
                };
                let fc = compute_fc(&ts, config.fc_method, config.mi_bins).at(Stage::Fc)?;
                write_matrix(&dir.join(format!("{}.csv", s.id)), &fc.values)?;
                Ok(vectorize_edges(&fc).values)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let n = series.first().map_or(0, |s| s.n());
    let values = Matrix::from_rows(&edges).at(Stage::Fc)?;
    let table = FeatureMatrix::new(edge_columns(n), values).at(Stage::Fc)?;
    write_feature_table(&out.join("edges.csv"), &manifest.ids(), &table)?;
    info!("wrote {} connectivity matrices", edges.len());
    Ok(())
}

fn graph(a: CohortArgs) -> Result<()> {
    let config = a.config.resolve()?;
    let out = require_out(&a.out)?;
    let manifest = retained_manifest(&config)?;
    let series = load_cohort_series(&manifest)?;
    let dir = out.join("networks");
    create_dir(&dir)?;
    let pool = thread_pool(config.threads)?;
    let rows = pool.install(|| {
        manifest
            .subjects
            .par_iter()
            .zip(&series)
            .map(|(s, ts)| {
                let ts = if config.detrend {
                    detrend(ts)
                } else {
                    ts.clone()
                };
                let fc = compute_fc(&ts, config.fc_method, config.mi_bins).at(Stage::Fc)?;
                let net = threshold_network(&fc, config.threshold).at(Stage::Graph)?;
                write_edge_list(&dir.join(format!("{}.csv", s.id)), &net)?;
                Ok(assemble_graph_features(&net).at(Stage::Graph)?.flattened())
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let n = series.first().map_or(0, |s| s.n());
    let values = Matrix::from_rows(&rows).at(Stage::Graph)?;
    let table = FeatureMatrix::new(GraphIndexVector::column_names(n), values).at(Stage::Graph)?;
    write_feature_table(&out.join("graph.csv"), &manifest.ids(), &table)
}

#[derive(serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum EncoderCheckpoint {
    Autoencoder(AeModel),
    Pca(Pca),
}

fn encode(a: EncodeArgs) -> Result<()> {
    let table = read_feature_table(&a.features)?;
    let x = &table.features.values;
    let (encoded, checkpoint) = match a.pca {
        Some(k) => {
            let pca = Pca::fit(x, k).at(Stage::Encode)?;
            let z = pca.transform(x).at(Stage::Encode)?;
            (
                FeatureMatrix::with_prefix("pc", z),
                EncoderCheckpoint::Pca(pca),
            )
        }
        None => {
            let mut ae = RunConfig::default().edge_ae;
            ae.hidden = a.hidden.unwrap_or(ae.hidden);
            ae.epochs = a.epochs.unwrap_or(ae.epochs);
            ae.learning_rate = a.learning_rate.unwrap_or(ae.learning_rate);
            ae.epsilon = a.epsilon.unwrap_or(ae.epsilon);
            ae.seed = a.seed.unwrap_or(ae.seed);
            let model = train_autoencoder(x, &ae).at(Stage::Encode)?;
            info!(
                "autoencoder loss {} -> {}",
                model.initial_loss, model.final_loss
            );
            (
                model.features(x).at(Stage::Encode)?,
                EncoderCheckpoint::Autoencoder(model),
            )
        }
    };
    write_feature_table(&a.out, &table.ids, &encoded)?;
    if let Some(p) = &a.model_out {
        write_json(p, &checkpoint)?;
    }
    Ok(())
}

fn block_name(path: &Path) -> String {
    path.file_stem()
        .map_or_else(|| "block".into(), |s| s.to_string_lossy().into_owned())
}

/// Feature tables aligned to the manifest's subject order.
fn load_blocks(paths: &[PathBuf], manifest: &CohortManifest) -> Result<Vec<Block>> {
    let ids = manifest.ids();
    paths
        .iter()
        .map(|p| {
            let table: FeatureTable = read_feature_table(p)?;
            Ok(Block::new(block_name(p), table.aligned(&ids, p)?))
        })
        .collect()
}

fn train(a: TrainArgs) -> Result<()> {
    let manifest = load_manifest(&a.manifest)?;
    let blocks = load_blocks(&a.blocks, &manifest)?;
    let base = match &a.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let (mut stack, meta) = match base.predictor {
        Predictor::Wena(s) => (s, None),
        Predictor::Conventional { stack, meta } => (stack, Some(meta)),
        Predictor::Single { .. } => (StackConfig::default(), None),
    };
    stack.seed = a.seed.unwrap_or(base.seed);
    if let Some(l) = a.layers {
        stack.layers = l;
    }
    let y = manifest.scores();
    let trained = if a.conventional || meta.is_some() {
        let meta = meta.unwrap_or_else(RegressorSpec::ridge);
        fit_conventional_stack(&blocks, &y, &meta, &stack).at(Stage::Train)?
    } else {
        fit_weighted_stack(&blocks, &y, &stack).at(Stage::Train)?
    };
    write_json(&a.out, &trained)?;
    let w = fold_weights(0, &trained);
    println!("{}", serde_json::to_string(&w.fusion).unwrap_or_default());
    Ok(())
}

fn evaluate(a: EvaluateArgs) -> Result<()> {
    let stack: TrainedStack = read_json(&a.stack, Stage::Evaluate)?;
    let manifest = load_manifest(&a.manifest)?;
    let blocks = load_blocks(&a.blocks, &manifest)?;
    let predictions = predict_stack(&stack, &blocks).at(Stage::Evaluate)?;
    let y = manifest.scores();
    let report = compute_metrics(&y, &predictions).at(Stage::Evaluate)?;
    create_dir(&a.out)?;
    write_json(&a.out.join("metrics.json"), &report)?;
    write_rows(
        &a.out.join("predictions.csv"),
        &["subject_id", "score", "predicted", "difference"],
        manifest
            .ids()
            .into_iter()
            .zip(y.iter().zip(&predictions))
            .map(|(id, (y, p))| vec![id, y.to_string(), p.to_string(), (p - y).to_string()]),
    )?;
    println!(
        "MAE {:.4}, R {}, R2 {:.4}",
        report.mae,
        cell(report.r),
        report.r2
    );
    Ok(())
}

fn rank(a: RankArgs) -> Result<()> {
    let manifest = load_manifest(&a.manifest)?;
    let table = read_feature_table(&a.features)?;
    let x = table.aligned(&manifest.ids(), &a.features)?;
    let params = ReliefParams {
        k_neighbors: a.k_neighbors,
        ..ReliefParams::default()
    };
    let ranking = rrelieff_rank(&x, &manifest.scores(), &params).at(Stage::Rank)?;
    let columns = &table.features.columns;
    write_rows(
        &a.out,
        &["rank", "feature", "score"],
        ranking.ranking.iter().enumerate().map(|(r, &f)| {
            vec![
                (r + 1).to_string(),
                columns[f].clone(),
                ranking.scores[f].to_string(),
            ]
        }),
    )?;
    if let Some(name) = &a.covariate {
        let cov = manifest
            .covariate(name)
            .ok_or_else(|| WenaError::Config(format!("covariate {name:?} not in manifest")))?;
        let out = a.correlation_out.as_deref().ok_or_else(|| {
            WenaError::Config("--correlation-out is required with --covariate".into())
        })?;
        let corr = covariate_correlation(&x, &cov).at(Stage::Rank)?;
        write_rows(
            out,
            &["feature", "covariate", "r", "p"],
            columns
                .iter()
                .zip(&corr)
                .map(|(c, v)| vec![c.clone(), name.clone(), cell(v.r), cell(v.p)]),
        )?;
    }
    Ok(())
}

fn pattern(a: PatternArgs) -> Result<()> {
    let model = match read_json::<EncoderCheckpoint>(&a.model, Stage::Pattern)? {
        EncoderCheckpoint::Autoencoder(m) => m,
        EncoderCheckpoint::Pca(_) => {
            return Err(WenaError::invalid(
                Stage::Pattern,
                "pattern extraction needs an autoencoder model",
            ))
        }
    };
    let labels = match &a.labels {
        Some(p) => Some(
            fs::read_to_string(p)
                .map_err(|e| WenaError::io(Stage::Pattern, p, e))?
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(String::from)
                .collect::<Vec<_>>(),
        ),
        None => None,
    };
    let report = extract_pattern(&model, a.unit, labels.as_deref()).at(Stage::Pattern)?;
    create_dir(&a.out)?;
    write_rows(
        &a.out.join("pattern_edges.csv"),
        &["rank", "i", "j", "weight"],
        report.edges.iter().enumerate().map(|(r, e)| {
            vec![
                (r + 1).to_string(),
                e.i.to_string(),
                e.j.to_string(),
                e.weight.to_string(),
            ]
        }),
    )?;
    write_rows(
        &a.out.join("pattern_rois.csv"),
        &["rank", "roi", "label", "importance"],
        report.rois.iter().enumerate().map(|(r, roi)| {
            vec![
                (r + 1).to_string(),
                roi.roi.to_string(),
                roi.label.clone().unwrap_or_default(),
                roi.importance.to_string(),
            ]
        }),
    )
}
