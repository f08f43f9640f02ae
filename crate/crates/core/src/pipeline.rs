//! Cohort-level pipeline: per-fold feature encoding, model fitting and
//! pooled cross-validated scoring, plus pattern analysis on the full cohort.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::connectivity::{compute_fc, threshold_network, vectorize_edges, FcMethod};
use crate::encoder::{extract_pattern, train_autoencoder, AeConfig, AeModel, PatternReport, Pca};
use crate::ensemble::{
    fit_conventional_stack, fit_weighted_stack, predict_stack, Block, StackConfig, TrainedStack,
};
use crate::evaluation::{
    compute_metrics, covariate_correlation, kfold_split, rrelieff_rank, CovariateCorrelation,
    FoldAssignment, FoldMetrics, MetricsReport, ReliefParams, ReliefRanking,
};
use crate::graph::assemble_graph_features;
use crate::ingest::TimeSeriesMatrix;
use crate::regressors::{RegressorSpec, TrainedRegressor};
use crate::rng::derive_seed;
use crate::{Error, FeatureMatrix, Matrix, Result};

const EDGE_BLOCK: &str = "edges";
const GRAPH_BLOCK: &str = "graph";

/// Stage tags mixed into derived seeds.
const TAG_ENCODE: u64 = 1;
const TAG_PREDICT: u64 = 2;
const TAG_PATTERN: u64 = 3;

/// Subject-level inputs for one cohort: edge vectors, optional graph-index
/// vectors and the target score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortFeatures {
    pub edges: Matrix,
    pub graph: Option<Matrix>,
    pub y: Vec<f64>,
}

impl CohortFeatures {
    pub fn new(edges: Matrix, graph: Option<Matrix>, y: Vec<f64>) -> Result<Self> {
        let s = edges.rows();
        if y.len() != s {
            return Err(Error::DimensionMismatch {
                expected: s,
                actual: y.len(),
            });
        }
        if let Some(g) = &graph {
            if g.rows() != s {
                return Err(Error::DimensionMismatch {
                    expected: s,
                    actual: g.rows(),
                });
            }
        }
        Ok(Self { edges, graph, y })
    }

    pub fn subjects(&self) -> usize {
        self.y.len()
    }
}

/// Edge vector and flattened graph-index vector of one subject.
pub fn subject_features(
    ts: &TimeSeriesMatrix,
    method: FcMethod,
    mi_bins: usize,
    threshold: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let fc = compute_fc(ts, method, mi_bins)?;
    let graph = assemble_graph_features(&threshold_network(&fc, threshold)?)?;
    Ok((vectorize_edges(&fc).values, graph.flattened()))
}

/// Stacks per-subject edge and graph vectors into cohort matrices.
pub fn cohort_from_subjects(
    subjects: &[(Vec<f64>, Vec<f64>)],
    y: Vec<f64>,
    with_graph: bool,
) -> Result<CohortFeatures> {
    let edges: Vec<&[f64]> = subjects.iter().map(|(e, _)| e.as_slice()).collect();
    let edges = Matrix::from_rows(&edges)?;
    let graph = if with_graph {
        let rows: Vec<&[f64]> = subjects.iter().map(|(_, g)| g.as_slice()).collect();
        Some(Matrix::from_rows(&rows)?)
    } else {
        None
    };
    CohortFeatures::new(edges, graph, y)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Encoding {
    Autoencoder,
    Pca {
        components: usize,
    },
    /// Feed the blocks to the predictor unchanged.
    Raw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Predictor {
    Wena(StackConfig),
    Conventional {
        stack: StackConfig,
        meta: RegressorSpec,
    },
    /// One regressor on the concatenated encoded blocks.
    Single {
        model: RegressorSpec,
    },
}

impl Default for Predictor {
    fn default() -> Self {
        Predictor::Wena(StackConfig::default())
    }
}

/// Seeds inside `edge_ae`, `graph_ae` and the stack config are replaced by
/// values derived from `seed` and the fold index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub encoding: Encoding,
    pub edge_ae: AeConfig,
    pub graph_ae: AeConfig,
    pub predictor: Predictor,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            encoding: Encoding::Autoencoder,
            edge_ae: AeConfig::default(),
            graph_ae: AeConfig::default(),
            predictor: Predictor::default(),
            seed: 0,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.edge_ae.validate()?;
        self.graph_ae.validate()?;
        match &self.predictor {
            Predictor::Wena(stack) | Predictor::Conventional { stack, .. } => stack.validate(),
            Predictor::Single { .. } => Ok(()),
        }
    }
}

/// Fitted encoder for one block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BlockEncoder {
    Autoencoder(AeModel),
    Pca(Pca),
    Raw,
}

impl BlockEncoder {
    pub fn fit(train: &Matrix, encoding: Encoding, ae: &AeConfig) -> Result<Self> {
        Ok(match encoding {
            Encoding::Autoencoder => BlockEncoder::Autoencoder(train_autoencoder(train, ae)?),
            Encoding::Pca { components } => BlockEncoder::Pca(Pca::fit(train, components)?),
            Encoding::Raw => BlockEncoder::Raw,
        })
    }

    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        match self {
            BlockEncoder::Autoencoder(model) => Ok(model.features(x)?.values),
            BlockEncoder::Pca(pca) => pca.transform(x),
            BlockEncoder::Raw => Ok(x.clone()),
        }
    }
}

/// Encoders fit on one fold's training rows and the encoded blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedFold {
    pub fold: usize,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub encoders: Vec<BlockEncoder>,
    pub train_blocks: Vec<Block>,
    pub test_blocks: Vec<Block>,
}

fn block_sources(features: &CohortFeatures) -> Vec<(&'static str, &Matrix)> {
    let mut out = vec![(EDGE_BLOCK, &features.edges)];
    if let Some(g) = &features.graph {
        out.push((GRAPH_BLOCK, g));
    }
    out
}

/// Fits one encoder per block on the training rows of `fold` and encodes
/// both partitions. Test rows are only transformed.
pub fn encode_fold(
    features: &CohortFeatures,
    config: &PipelineConfig,
    assignment: &FoldAssignment,
    fold: usize,
) -> Result<EncodedFold> {
    let (train, test) = assignment.split(fold);
    let mut encoders = Vec::new();
    let mut train_blocks = Vec::new();
    let mut test_blocks = Vec::new();
    for (b, (name, values)) in block_sources(features).into_iter().enumerate() {
        let mut ae = if b == 0 {
            config.edge_ae
        } else {
            config.graph_ae
        };
        ae.seed = derive_seed(config.seed, &[TAG_ENCODE, fold as u64, b as u64]);
        let x_train = values.select_rows(&train);
        let encoder = BlockEncoder::fit(&x_train, config.encoding, &ae)?;
        train_blocks.push(Block::new(name, encoder.transform(&x_train)?));
        test_blocks.push(Block::new(
            name,
            encoder.transform(&values.select_rows(&test))?,
        ));
        encoders.push(encoder);
    }
    Ok(EncodedFold {
        fold,
        train,
        test,
        encoders,
        train_blocks,
        test_blocks,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FittedPredictor {
    Stack(TrainedStack),
    Single { model: TrainedRegressor },
}

impl FittedPredictor {
    pub fn fit(blocks: &[Block], y: &[f64], predictor: &Predictor, seed: u64) -> Result<Self> {
        Ok(match predictor {
            Predictor::Wena(stack) => {
                let config = StackConfig {
                    seed,
                    ..stack.clone()
                };
                FittedPredictor::Stack(fit_weighted_stack(blocks, y, &config)?)
            }
            Predictor::Conventional { stack, meta } => {
                let config = StackConfig {
                    seed,
                    ..stack.clone()
                };
                FittedPredictor::Stack(fit_conventional_stack(blocks, y, meta, &config)?)
            }
            Predictor::Single { model } => FittedPredictor::Single {
                model: model.fit(&concatenate(blocks)?, y, seed)?,
            },
        })
    }

    pub fn predict(&self, blocks: &[Block]) -> Result<Vec<f64>> {
        match self {
            FittedPredictor::Stack(stack) => predict_stack(stack, blocks),
            FittedPredictor::Single { model } => model.predict(&concatenate(blocks)?),
        }
    }

    pub fn stack(&self) -> Option<&TrainedStack> {
        match self {
            FittedPredictor::Stack(s) => Some(s),
            FittedPredictor::Single { .. } => None,
        }
    }
}

fn concatenate(blocks: &[Block]) -> Result<Matrix> {
    let parts: Vec<&Matrix> = blocks.iter().map(|b| &b.values).collect();
    Matrix::hstack(&parts)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldOutcome {
    pub fold: usize,
    pub test: Vec<usize>,
    pub predictions: Vec<f64>,
    pub model: FittedPredictor,
}

/// Fits `predictor` on an encoded fold and predicts its test rows.
pub fn predict_fold(
    features: &CohortFeatures,
    encoded: &EncodedFold,
    predictor: &Predictor,
    seed: u64,
) -> Result<FoldOutcome> {
    let y_train: Vec<f64> = encoded.train.iter().map(|&i| features.y[i]).collect();
    let fold_seed = derive_seed(seed, &[TAG_PREDICT, encoded.fold as u64]);
    let model = FittedPredictor::fit(&encoded.train_blocks, &y_train, predictor, fold_seed)?;
    let predictions = model.predict(&encoded.test_blocks)?;
    Ok(FoldOutcome {
        fold: encoded.fold,
        test: encoded.test.clone(),
        predictions,
        model,
    })
}

/// Encoding and prediction for one outer fold.
pub fn run_fold(
    features: &CohortFeatures,
    config: &PipelineConfig,
    assignment: &FoldAssignment,
    fold: usize,
) -> Result<FoldOutcome> {
    let encoded = encode_fold(features, config, assignment, fold)?;
    predict_fold(features, &encoded, &config.predictor, config.seed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvOutcome {
    pub report: MetricsReport,
    /// Out-of-fold prediction per subject.
    pub predictions: Vec<f64>,
    pub assignment: FoldAssignment,
    pub folds: Vec<FoldOutcome>,
}

/// Pools fold outcomes (in any order) into subject-ordered predictions and
/// a metrics report with per-fold entries.
pub fn assemble_outcome(
    y: &[f64],
    assignment: FoldAssignment,
    mut folds: Vec<FoldOutcome>,
) -> Result<CvOutcome> {
    folds.sort_by_key(|f| f.fold);
    let mut predictions = vec![f64::NAN; y.len()];
    let mut per_fold = Vec::with_capacity(folds.len());
    for f in &folds {
        for (&i, &p) in f.test.iter().zip(&f.predictions) {
            predictions[i] = p;
        }
        let y_test: Vec<f64> = f.test.iter().map(|&i| y[i]).collect();
        let (mae, r, r2) = if y_test.len() >= 2 {
            let m = compute_metrics(&y_test, &f.predictions)?;
            (m.mae, m.r, m.r2)
        } else {
            (
                crate::stats::mean_absolute_error(&y_test, &f.predictions),
                None,
                f64::NAN,
            )
        };
        per_fold.push(FoldMetrics {
            fold: f.fold,
            mae,
            r,
            r2,
            n: y_test.len(),
        });
    }
    let mut report = compute_metrics(y, &predictions)?;
    report.per_fold = Some(per_fold);
    Ok(CvOutcome {
        report,
        predictions,
        assignment,
        folds,
    })
}

/// Outer k-fold cross-validation of the whole pipeline. Every fitted
/// component sees only the training rows of its fold.
pub fn cross_validate(
    features: &CohortFeatures,
    config: &PipelineConfig,
    k: usize,
) -> Result<CvOutcome> {
    config.validate()?;
    let assignment = kfold_split(features.subjects(), k, config.seed)?;
    let folds = (0..k)
        .map(|fold| run_fold(features, config, &assignment, fold))
        .collect::<Result<Vec<_>>>()?;
    assemble_outcome(&features.y, assignment, folds)
}

/// Autoencoder settings for pattern analysis. Stronger weight decay than the
/// prediction default keeps encoder rows from being dominated by their
/// random initialization.
pub fn pattern_ae_config() -> AeConfig {
    AeConfig {
        epsilon: 1e-2,
        ..AeConfig::default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternAnalysis {
    pub model: AeModel,
    pub features: FeatureMatrix,
    pub relief: ReliefRanking,
    pub pattern: PatternReport,
    pub covariate: Option<Vec<CovariateCorrelation>>,
}

/// Fits the edge autoencoder on the whole cohort, ranks its hidden units by
/// RReliefF against the score and back-projects the top unit onto edges.
pub fn pattern_analysis(
    edges: &Matrix,
    y: &[f64],
    covariate: Option<&[f64]>,
    ae: &AeConfig,
    relief: &ReliefParams,
    roi_labels: Option<&[String]>,
    seed: u64,
) -> Result<PatternAnalysis> {
    let config = AeConfig {
        seed: derive_seed(seed, &[TAG_PATTERN]),
        ..*ae
    };
    let model = train_autoencoder(edges, &config)?;
    let features = model.features(edges)?;
    let relief = rrelieff_rank(&features.values, y, relief)?;
    let pattern = extract_pattern(&model, relief.ranking[0], roi_labels)?;
    let covariate = covariate
        .map(|c| covariate_correlation(&features.values, c))
        .transpose()?;
    Ok(PatternAnalysis {
        model,
        features,
        relief,
        pattern,
        covariate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{seeded, standard_normal};

    fn linear_cohort(s: usize, f: usize) -> CohortFeatures {
        let mut rng = seeded(5);
        let edges = Matrix::from_fn(s, f, |_, _| standard_normal(&mut rng));
        let y = (0..s)
            .map(|i| 3.0 * edges.get(i, 0) - edges.get(i, 1) + 0.1 * standard_normal(&mut rng))
            .collect();
        CohortFeatures::new(edges, None, y).unwrap()
    }

    fn raw_config(predictor: Predictor) -> PipelineConfig {
        PipelineConfig {
            encoding: Encoding::Raw,
            predictor,
            seed: 11,
            ..PipelineConfig::default()
        }
    }

    #[test]
    fn raw_ridge_recovers_linear_signal() {
        let cohort = linear_cohort(60, 4);
        let out = cross_validate(
            &cohort,
            &raw_config(Predictor::Single {
                model: RegressorSpec::ridge(),
            }),
            5,
        )
        .unwrap();
        assert!(out.report.r.unwrap() > 0.95);
        assert_eq!(out.report.per_fold.as_ref().unwrap().len(), 5);
        assert!(out.predictions.iter().all(|p| p.is_finite()));
    }

    #[test]
    fn test_rows_do_not_affect_fold_model() {
        let cohort = linear_cohort(40, 3);
        let config = raw_config(Predictor::Wena(StackConfig {
            first_layer_models: vec![RegressorSpec::ridge()],
            fusion_models: vec![RegressorSpec::ridge()],
            ..StackConfig::default()
        }));
        let assignment = kfold_split(40, 4, 1).unwrap();
        let base = run_fold(&cohort, &config, &assignment, 0).unwrap();
        let mut altered = cohort.clone();
        for &i in &base.test {
            altered.y[i] += 100.0;
            altered.edges.row_mut(i).iter_mut().for_each(|v| *v *= 3.0);
        }
        let again = run_fold(&altered, &config, &assignment, 0).unwrap();
        assert_eq!(base.model, again.model);
    }

    #[test]
    fn too_many_folds() {
        let cohort = linear_cohort(5, 2);
        assert!(cross_validate(
            &cohort,
            &raw_config(Predictor::Single {
                model: RegressorSpec::ridge()
            }),
            10
        )
        .is_err());
    }

    #[test]
    fn mismatched_cohort() {
        assert!(CohortFeatures::new(Matrix::zeros(3, 2), None, vec![1.0; 2]).is_err());
        assert!(
            CohortFeatures::new(Matrix::zeros(3, 2), Some(Matrix::zeros(2, 2)), vec![1.0; 3])
                .is_err()
        );
    }
}
