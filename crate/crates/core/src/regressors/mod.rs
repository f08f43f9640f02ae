//! Base regression models behind one fit/predict contract: ridge,
//! bagged regression trees, ε-SVR with an RBF kernel, and an extreme
//! learning machine.

use alloc::vec::Vec;

#[allow(unused_imports)] // unused only when std is linked
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::{Error, Matrix, Result};

mod elm;
mod ridge;
mod svr;
mod tree;

pub use elm::{fit_elm, ElmModel, ElmParams};
pub use ridge::{fit_ridge, RidgeModel};
pub use svr::{fit_svr, SvrModel, SvrParams};
pub use tree::{fit_etr, EtrParams, Forest, RegressionTree};

/// Which model to fit and with what hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegressorSpec {
    Ridge {
        #[serde(default = "default_ridge_lambda")]
        lambda: f64,
    },
    EnsembleTree(EtrParams),
    Svr(SvrParams),
    Elm(ElmParams),
}

fn default_ridge_lambda() -> f64 {
    1.0
}

impl RegressorSpec {
    pub fn ridge() -> Self {
        RegressorSpec::Ridge {
            lambda: default_ridge_lambda(),
        }
    }

    pub fn etr() -> Self {
        RegressorSpec::EnsembleTree(EtrParams::default())
    }

    pub fn svr() -> Self {
        RegressorSpec::Svr(SvrParams::default())
    }

    pub fn elm() -> Self {
        RegressorSpec::Elm(ElmParams::default())
    }

    pub fn name(&self) -> &'static str {
        match self {
            RegressorSpec::Ridge { .. } => "ridge",
            RegressorSpec::EnsembleTree(_) => "ensemble_tree",
            RegressorSpec::Svr(_) => "svr",
            RegressorSpec::Elm(_) => "elm",
        }
    }

    pub fn fit(&self, x: &Matrix, y: &[f64], seed: u64) -> Result<TrainedRegressor> {
        Ok(match self {
            RegressorSpec::Ridge { lambda } => TrainedRegressor::Ridge(fit_ridge(x, y, *lambda)?),
            RegressorSpec::EnsembleTree(p) => {
                TrainedRegressor::EnsembleTree(fit_etr(x, y, p, seed)?)
            }
            RegressorSpec::Svr(p) => TrainedRegressor::Svr(fit_svr(x, y, p)?),
            RegressorSpec::Elm(p) => TrainedRegressor::Elm(fit_elm(x, y, p, seed)?),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrainedRegressor {
    Ridge(RidgeModel),
    EnsembleTree(Forest),
    Svr(SvrModel),
    Elm(ElmModel),
}

impl TrainedRegressor {
    pub fn input_dim(&self) -> usize {
        match self {
            TrainedRegressor::Ridge(m) => m.coef.len(),
            TrainedRegressor::EnsembleTree(m) => m.input_dim,
            TrainedRegressor::Svr(m) => m.scaler.mean.len(),
            TrainedRegressor::Elm(m) => m.scaler.mean.len(),
        }
    }

    fn predict_row(&self, row: &[f64]) -> f64 {
        match self {
            TrainedRegressor::Ridge(m) => m.predict_row(row),
            TrainedRegressor::EnsembleTree(m) => m.predict_row(row),
            TrainedRegressor::Svr(m) => m.predict_row(row),
            TrainedRegressor::Elm(m) => m.predict_row(row),
        }
    }

    /// One prediction per row of `x`; an empty `x` yields an empty vector.
    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        if x.rows() == 0 {
            return Ok(Vec::new());
        }
        if x.cols() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                actual: x.cols(),
            });
        }
        Ok(x.row_iter().map(|row| self.predict_row(row)).collect())
    }
}

pub(crate) fn check_training_data(x: &Matrix, y: &[f64]) -> Result<()> {
    if x.rows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.rows(),
            actual: y.len(),
        });
    }
    if x.rows() < 2 {
        return Err(Error::TooFewSamples {
            required: 2,
            actual: x.rows(),
        });
    }
    if let Some((row, col)) = x.find_non_finite() {
        return Err(Error::NonFiniteValue { row, col });
    }
    if let Some(row) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteValue { row, col: 0 });
    }
    Ok(())
}

/// Per-feature z-scoring with training means and standard deviations;
/// zero-variance features keep scale 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &Matrix) -> Self {
        let s = x.rows() as f64;
        let mean: Vec<f64> = (0..x.cols())
            .map(|j| crate::stats::mean(&x.column(j)))
            .collect();
        let scale = (0..x.cols())
            .map(|j| {
                let var = x.row_iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / s;
                let sd = var.sqrt();
                if sd > 0.0 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Self { mean, scale }
    }

    pub fn transform_row(&self, row: &[f64], out: &mut [f64]) {
        for (((o, &v), m), s) in out.iter_mut().zip(row).zip(&self.mean).zip(&self.scale) {
            *o = (v - m) / s;
        }
    }

    pub fn transform(&self, x: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(x.rows(), x.cols());
        for i in 0..x.rows() {
            self.transform_row(x.row(i), out.row_mut(i));
        }
        out
    }
}
