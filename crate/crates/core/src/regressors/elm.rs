use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{check_training_data, Standardizer};
use crate::encoder::sigmoid;
use crate::linalg::{gram, outer_gram, transpose_mul_vec, Cholesky};
use crate::matrix::dot;
use crate::rng::{seeded, uniform};
use crate::{Error, Matrix, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ElmParams {
    pub hidden: usize,
    pub lambda: f64,
}

impl Default for ElmParams {
    fn default() -> Self {
        Self {
            hidden: 200,
            lambda: 1e-2,
        }
    }
}

/// Extreme learning machine: fixed random sigmoid hidden layer, ridge
/// output weights, intercept `ȳ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElmModel {
    pub scaler: Standardizer,
    /// hidden × features
    pub input_weights: Matrix,
    pub input_bias: Vec<f64>,
    pub output_weights: Vec<f64>,
    pub intercept: f64,
}

impl ElmModel {
    fn hidden_row(&self, z: &[f64], out: &mut [f64]) {
        for (k, o) in out.iter_mut().enumerate() {
            *o = sigmoid(dot(self.input_weights.row(k), z) + self.input_bias[k]);
        }
    }

    pub(crate) fn predict_row(&self, row: &[f64]) -> f64 {
        let mut z = vec![0.0; row.len()];
        self.scaler.transform_row(row, &mut z);
        let mut h = vec![0.0; self.input_bias.len()];
        self.hidden_row(&z, &mut h);
        self.intercept + dot(&self.output_weights, &h)
    }
}

/// Solves `(HᵀH + λI)β = Hᵀy_c`; when the hidden layer is wider than the
/// sample count the equivalent `β = Hᵀ(HHᵀ + λI)⁻¹y_c` is used.
pub fn fit_elm(x: &Matrix, y: &[f64], params: &ElmParams, seed: u64) -> Result<ElmModel> {
    check_training_data(x, y)?;
    if params.hidden == 0 {
        return Err(Error::InvalidParameter {
            name: "hidden",
            reason: "must be at least 1".into(),
        });
    }
    if !(params.lambda >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "lambda",
            reason: "must be non-negative".into(),
        });
    }
    let scaler = Standardizer::fit(x);
    let z = scaler.transform(x);
    let mut rng = seeded(seed);
    let input_weights =
        Matrix::from_fn(params.hidden, x.cols(), |_, _| uniform(&mut rng, -1.0, 1.0));
    let input_bias: Vec<f64> = (0..params.hidden)
        .map(|_| uniform(&mut rng, -1.0, 1.0))
        .collect();
    let mut model = ElmModel {
        scaler,
        input_weights,
        input_bias,
        output_weights: Vec::new(),
        intercept: crate::stats::mean(y),
    };
    let mut h = Matrix::zeros(x.rows(), params.hidden);
    for i in 0..x.rows() {
        model.hidden_row(z.row(i), h.row_mut(i));
    }
    let yc: Vec<f64> = y.iter().map(|v| v - model.intercept).collect();
    model.output_weights = if params.hidden <= x.rows() {
        let mut a = gram(&h);
        for k in 0..params.hidden {
            a.set(k, k, a.get(k, k) + params.lambda);
        }
        Cholesky::factor(&a)?.solve(&transpose_mul_vec(&h, &yc))?
    } else {
        let mut a = outer_gram(&h);
        for k in 0..x.rows() {
            a.set(k, k, a.get(k, k) + params.lambda);
        }
        let dual = Cholesky::factor(&a)?.solve(&yc)?;
        transpose_mul_vec(&h, &dual)
    };
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heavy_penalty_predicts_mean() {
        let x = Matrix::from_fn(25, 3, |i, j| ((i * 7 + j * 3) % 11) as f64);
        let y: Vec<f64> = (0..25).map(|i| i as f64).collect();
        let params = ElmParams {
            hidden: 20,
            lambda: 1e12,
        };
        let m = fit_elm(&x, &y, &params, 5).unwrap();
        for row in x.row_iter() {
            assert!((m.predict_row(row) - 12.0).abs() < 1e-3);
        }
    }
}
