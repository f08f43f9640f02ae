//! Weighted stacking with model fusion.
//!
//! Layer 1 fits every base model on every feature block and scores each
//! stream's out-of-fold predictions by `R / MAE`. The normalized ratios are
//! the stream weights; the weighted predictions become the features of the
//! next layer. Optional middle layers repeat this on those columns. The last
//! layer fits the fusion models and combines their predictions with the same
//! ratio weighting. Deployed models are refit on all training rows; the
//! weights stay those estimated out-of-fold.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::evaluation::{kfold_split, FoldAssignment};
use crate::regressors::{RegressorSpec, TrainedRegressor};
use crate::rng::derive_seed;
use crate::stats::{mean_absolute_error, pearson};
use crate::{Error, Matrix, Result};

/// Floor applied to stream correlations before weighting; keeps weights
/// non-negative when a stream is anti-correlated or degenerate.
pub const CORRELATION_FLOOR: f64 = 1e-6;
/// Floor applied to stream MAE so a perfect stream keeps a finite ratio.
pub const MAE_FLOOR: f64 = 1e-12;

/// Correlation and mean absolute error of one prediction stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StreamScore {
    pub correlation: f64,
    pub mae: f64,
    /// Pearson R was undefined (constant predictions or labels); stored as 0.
    pub degenerate: bool,
}

impl StreamScore {
    pub fn new(correlation: f64, mae: f64) -> Self {
        Self {
            correlation,
            mae,
            degenerate: false,
        }
    }

    pub fn from_predictions(y: &[f64], yhat: &[f64]) -> Self {
        let mae = mean_absolute_error(y, yhat);
        match pearson(y, yhat) {
            Some(r) => Self::new(r, mae),
            None => Self {
                correlation: 0.0,
                mae,
                degenerate: true,
            },
        }
    }
}

/// `Wᵢ = (Rᵢ/MAEᵢ) / Σₖ (Rₖ/MAEₖ)`.
pub fn weight_operator(scores: &[StreamScore]) -> Result<Vec<f64>> {
    if scores.is_empty() {
        return Err(Error::InvalidParameter {
            name: "scores",
            reason: "need at least one stream".into(),
        });
    }
    if let Some(s) = scores
        .iter()
        .find(|s| !(s.mae > 0.0) || !s.correlation.is_finite())
    {
        return Err(Error::InvalidParameter {
            name: "scores",
            reason: format!(
                "MAE must be positive and R finite, got R={} MAE={}",
                s.correlation, s.mae
            ),
        });
    }
    let ratios: Vec<f64> = scores.iter().map(|s| s.correlation / s.mae).collect();
    let total: f64 = ratios.iter().sum();
    if total == 0.0 || !total.is_finite() {
        return Err(Error::DegenerateWeights(total));
    }
    Ok(ratios.iter().map(|r| r / total).collect())
}

/// Fusion weights over last-layer models; same ratio rule as
/// [`weight_operator`].
pub fn fusion_operator(scores: &[StreamScore]) -> Result<Vec<f64>> {
    weight_operator(scores)
}

/// Applies the correlation and MAE floors, then [`weight_operator`].
/// The flags mark streams whose correlation was raised to the floor.
pub fn guarded_weights(scores: &[StreamScore]) -> Result<(Vec<f64>, Vec<bool>)> {
    let mut clamped = Vec::with_capacity(scores.len());
    let guarded: Vec<StreamScore> = scores
        .iter()
        .map(|s| {
            let low = s.degenerate || s.correlation < CORRELATION_FLOOR;
            clamped.push(low);
            StreamScore {
                correlation: if low {
                    CORRELATION_FLOOR
                } else {
                    s.correlation
                },
                mae: s.mae.max(MAE_FLOOR),
                degenerate: s.degenerate,
            }
        })
        .collect();
    Ok((weight_operator(&guarded)?, clamped))
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutOfFold {
    pub predictions: Vec<f64>,
    pub score: StreamScore,
    pub assignment: FoldAssignment,
}

/// Predicts every row with a model trained without that row's fold.
pub fn out_of_fold_predictions(
    x: &Matrix,
    y: &[f64],
    spec: &RegressorSpec,
    folds: usize,
    seed: u64,
) -> Result<OutOfFold> {
    let assignment = kfold_split(x.rows(), folds, seed)?;
    out_of_fold_with(x, y, spec, &assignment, seed)
}

/// As [`out_of_fold_predictions`] with a given fold assignment.
pub fn out_of_fold_with(
    x: &Matrix,
    y: &[f64],
    spec: &RegressorSpec,
    assignment: &FoldAssignment,
    seed: u64,
) -> Result<OutOfFold> {
    if x.rows() != y.len() || assignment.assignment.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.rows(),
            actual: y.len(),
        });
    }
    let mut predictions = alloc::vec![0.0; y.len()];
    for fold in 0..assignment.k {
        let (train, test) = assignment.split(fold);
        let y_train: Vec<f64> = train.iter().map(|&i| y[i]).collect();
        let model = spec.fit(
            &x.select_rows(&train),
            &y_train,
            derive_seed(seed, &[fold as u64]),
        )?;
        let pred = model.predict(&x.select_rows(&test))?;
        for (&i, p) in test.iter().zip(pred) {
            predictions[i] = p;
        }
    }
    let score = StreamScore::from_predictions(y, &predictions);
    Ok(OutOfFold {
        predictions,
        score,
        assignment: assignment.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StackConfig {
    /// Total depth including the fusion layer, 2..=4.
    pub layers: usize,
    pub first_layer_models: Vec<RegressorSpec>,
    pub inner_models: Vec<RegressorSpec>,
    pub fusion_models: Vec<RegressorSpec>,
    pub inner_folds: usize,
    pub seed: u64,
    /// Build next-layer features from in-sample predictions instead of
    /// out-of-fold ones.
    pub resubstitution: bool,
}

impl Default for StackConfig {
    fn default() -> Self {
        Self {
            layers: 2,
            first_layer_models: alloc::vec![RegressorSpec::etr(), RegressorSpec::ridge()],
            inner_models: alloc::vec![RegressorSpec::etr(), RegressorSpec::ridge()],
            fusion_models: alloc::vec![RegressorSpec::etr(), RegressorSpec::ridge()],
            inner_folds: 5,
            seed: 0,
            resubstitution: false,
        }
    }
}

impl StackConfig {
    pub fn validate(&self) -> Result<()> {
        if !(2..=4).contains(&self.layers) {
            return Err(Error::LayersOutOfRange(self.layers));
        }
        let empty = |name| Error::InvalidParameter {
            name,
            reason: "need at least one model".into(),
        };
        if self.first_layer_models.is_empty() {
            return Err(empty("first_layer_models"));
        }
        if self.layers > 2 && self.inner_models.is_empty() {
            return Err(empty("inner_models"));
        }
        if self.fusion_models.is_empty() {
            return Err(empty("fusion_models"));
        }
        if self.inner_folds < 2 {
            return Err(Error::InvalidParameter {
                name: "inner_folds",
                reason: "must be at least 2".into(),
            });
        }
        Ok(())
    }
}

/// A named feature block feeding layer 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub name: String,
    pub values: Matrix,
}

impl Block {
    pub fn new(name: impl Into<String>, values: Matrix) -> Self {
        Self {
            name: name.into(),
            values,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockDescriptor {
    pub name: String,
    pub columns: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedStream {
    pub label: String,
    /// Source block for layer-1 streams.
    pub block: Option<usize>,
    pub model: TrainedRegressor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedLayer {
    pub streams: Vec<TrainedStream>,
    pub scores: Vec<StreamScore>,
    pub weights: Vec<f64>,
    pub clamped: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StackHead {
    Fusion {
        models: Vec<TrainedStream>,
        scores: Vec<StreamScore>,
        weights: Vec<f64>,
        clamped: Vec<bool>,
    },
    Meta {
        model: TrainedRegressor,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedStack {
    pub config: StackConfig,
    pub blocks: Vec<BlockDescriptor>,
    /// Layer 1 followed by any middle layers.
    pub layers: Vec<TrainedLayer>,
    pub head: StackHead,
    pub conventional: bool,
}

impl TrainedStack {
    /// Fusion weights, absent for conventional stacks.
    pub fn fusion_weights(&self) -> Option<&[f64]> {
        match &self.head {
            StackHead::Fusion { weights, .. } => Some(weights),
            StackHead::Meta { .. } => None,
        }
    }
}

struct FittedStream {
    stream: TrainedStream,
    oof: Vec<f64>,
    score: StreamScore,
}

fn fit_stream(
    x: &Matrix,
    y: &[f64],
    spec: &RegressorSpec,
    label: String,
    block: Option<usize>,
    config: &StackConfig,
    seed: u64,
) -> Result<FittedStream> {
    let model = spec.fit(x, y, seed)?;
    let oof = if config.resubstitution {
        model.predict(x)?
    } else {
        out_of_fold_predictions(x, y, spec, config.inner_folds, seed)?.predictions
    };
    let score = StreamScore::from_predictions(y, &oof);
    Ok(FittedStream {
        stream: TrainedStream {
            label,
            block,
            model,
        },
        oof,
        score,
    })
}

/// Columns `wᵢ · predᵢ`.
fn weighted_columns(columns: &[Vec<f64>], weights: &[f64]) -> Matrix {
    let rows = columns.first().map_or(0, Vec::len);
    Matrix::from_fn(rows, columns.len(), |i, j| weights[j] * columns[j][i])
}

fn check_blocks(blocks: &[Block], rows: usize) -> Result<()> {
    if blocks.is_empty() {
        return Err(Error::BlockMismatch("no feature blocks".into()));
    }
    if let Some(b) = blocks.iter().find(|b| b.values.rows() != rows) {
        return Err(Error::BlockMismatch(format!(
            "block {:?} has {} rows, expected {rows}",
            b.name,
            b.values.rows()
        )));
    }
    Ok(())
}

fn finish_layer(fitted: Vec<FittedStream>, weighted: bool) -> Result<(TrainedLayer, Matrix)> {
    let scores: Vec<StreamScore> = fitted.iter().map(|f| f.score).collect();
    let (weights, clamped) = if weighted {
        guarded_weights(&scores)?
    } else {
        (
            alloc::vec![1.0; scores.len()],
            alloc::vec![false; scores.len()],
        )
    };
    let columns: Vec<Vec<f64>> = fitted.iter().map(|f| f.oof.clone()).collect();
    let next = weighted_columns(&columns, &weights);
    let layer = TrainedLayer {
        streams: fitted.into_iter().map(|f| f.stream).collect(),
        scores,
        weights,
        clamped,
    };
    Ok((layer, next))
}

/// Layer 1 and middle layers; returns them with the final feature matrix.
fn fit_layers(
    blocks: &[Block],
    y: &[f64],
    config: &StackConfig,
    weighted: bool,
) -> Result<(Vec<TrainedLayer>, Matrix)> {
    config.validate()?;
    check_blocks(blocks, y.len())?;
    let mut fitted = Vec::new();
    let per_block = config.first_layer_models.len();
    for (b, block) in blocks.iter().enumerate() {
        for (m, spec) in config.first_layer_models.iter().enumerate() {
            let stream = (b * per_block + m) as u64;
            let label = format!("{}/{}", block.name, spec.name());
            let seed = derive_seed(config.seed, &[1, stream]);
            fitted.push(fit_stream(
                &block.values,
                y,
                spec,
                label,
                Some(b),
                config,
                seed,
            )?);
        }
    }
    let (first, mut z) = finish_layer(fitted, weighted)?;
    let mut layers = alloc::vec![first];
    for layer in 2..config.layers {
        let mut fitted = Vec::new();
        for (m, spec) in config.inner_models.iter().enumerate() {
            let label = format!("layer{layer}/{}", spec.name());
            let seed = derive_seed(config.seed, &[layer as u64, m as u64]);
            fitted.push(fit_stream(&z, y, spec, label, None, config, seed)?);
        }
        let (trained, next) = finish_layer(fitted, weighted)?;
        layers.push(trained);
        z = next;
    }
    Ok((layers, z))
}

fn descriptors(blocks: &[Block]) -> Vec<BlockDescriptor> {
    blocks
        .iter()
        .map(|b| BlockDescriptor {
            name: b.name.clone(),
            columns: b.values.cols(),
        })
        .collect()
}

pub fn fit_weighted_stack(
    blocks: &[Block],
    y: &[f64],
    config: &StackConfig,
) -> Result<TrainedStack> {
    let (layers, z) = fit_layers(blocks, y, config, true)?;
    let mut fitted = Vec::new();
    for (j, spec) in config.fusion_models.iter().enumerate() {
        let label = format!("fusion/{}", spec.name());
        let seed = derive_seed(config.seed, &[config.layers as u64, j as u64]);
        fitted.push(fit_stream(&z, y, spec, label, None, config, seed)?);
    }
    let scores: Vec<StreamScore> = fitted.iter().map(|f| f.score).collect();
    let (weights, clamped) = guarded_weights(&scores)?;
    Ok(TrainedStack {
        config: config.clone(),
        blocks: descriptors(blocks),
        layers,
        head: StackHead::Fusion {
            models: fitted.into_iter().map(|f| f.stream).collect(),
            scores,
            weights,
            clamped,
        },
        conventional: false,
    })
}

/// Same layer structure with unit weights and a single meta-model on the
/// raw out-of-fold predictions.
pub fn fit_conventional_stack(
    blocks: &[Block],
    y: &[f64],
    meta_model: &RegressorSpec,
    config: &StackConfig,
) -> Result<TrainedStack> {
    let (layers, z) = fit_layers(blocks, y, config, false)?;
    let model = meta_model.fit(&z, y, derive_seed(config.seed, &[config.layers as u64, 0]))?;
    Ok(TrainedStack {
        config: config.clone(),
        blocks: descriptors(blocks),
        layers,
        head: StackHead::Meta { model },
        conventional: true,
    })
}

pub fn predict_stack(stack: &TrainedStack, blocks: &[Block]) -> Result<Vec<f64>> {
    if blocks.len() != stack.blocks.len() {
        return Err(Error::BlockMismatch(format!(
            "expected {} blocks, got {}",
            stack.blocks.len(),
            blocks.len()
        )));
    }
    for (given, want) in blocks.iter().zip(&stack.blocks) {
        if given.name != want.name || given.values.cols() != want.columns {
            return Err(Error::BlockMismatch(format!(
                "expected block {:?} with {} columns, got {:?} with {}",
                want.name,
                want.columns,
                given.name,
                given.values.cols()
            )));
        }
    }
    let rows = blocks[0].values.rows();
    check_blocks(blocks, rows)?;
    if rows == 0 {
        return Ok(Vec::new());
    }
    let mut z: Option<Matrix> = None;
    for layer in &stack.layers {
        let columns = layer
            .streams
            .iter()
            .map(|s| match (s.block, &z) {
                (Some(b), _) => s.model.predict(&blocks[b].values),
                (None, Some(prev)) => s.model.predict(prev),
                (None, None) => Err(Error::BlockMismatch("middle layer without input".into())),
            })
            .collect::<Result<Vec<_>>>()?;
        z = Some(weighted_columns(&columns, &layer.weights));
    }
    let z = z.ok_or_else(|| Error::BlockMismatch("stack has no layers".into()))?;
    match &stack.head {
        StackHead::Fusion {
            models, weights, ..
        } => {
            let mut out = alloc::vec![0.0; rows];
            for (m, &w) in models.iter().zip(weights) {
                for (o, p) in out.iter_mut().zip(m.model.predict(&z)?) {
                    *o += w * p;
                }
            }
            Ok(out)
        }
        StackHead::Meta { model } => model.predict(&z),
    }
}
