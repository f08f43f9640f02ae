use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::check_training_data;
use crate::linalg::{gram, transpose_mul_vec, Cholesky};
use crate::matrix::dot;
use crate::{Error, Matrix, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeModel {
    pub intercept: f64,
    pub coef: Vec<f64>,
    pub lambda: f64,
}

impl RidgeModel {
    pub(crate) fn predict_row(&self, row: &[f64]) -> f64 {
        self.intercept + dot(&self.coef, row)
    }
}

/// Solves `(X_cᵀX_c + λI)β = X_cᵀy_c` on mean-centered data; the intercept
/// is left unpenalized.
pub fn fit_ridge(x: &Matrix, y: &[f64], lambda: f64) -> Result<RidgeModel> {
    check_training_data(x, y)?;
    if !(lambda >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "lambda",
            reason: alloc::format!("must be non-negative, got {lambda}"),
        });
    }
    let f = x.cols();
    let x_mean: Vec<f64> = (0..f).map(|j| crate::stats::mean(&x.column(j))).collect();
    let y_mean = crate::stats::mean(y);
    let xc = Matrix::from_fn(x.rows(), f, |i, j| x.get(i, j) - x_mean[j]);
    let yc: Vec<f64> = y.iter().map(|v| v - y_mean).collect();
    let mut a = gram(&xc);
    for j in 0..f {
        a.set(j, j, a.get(j, j) + lambda);
    }
    let coef = Cholesky::factor(&a)?.solve(&transpose_mul_vec(&xc, &yc))?;
    let intercept = y_mean - dot(&x_mean, &coef);
    Ok(RidgeModel {
        intercept,
        coef,
        lambda,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x = Matrix::from_rows(&[[0.0], [1.0], [2.0]]).unwrap();
        let m = fit_ridge(&x, &[1.0, 3.0, 5.0], 0.0).unwrap();
        assert!((m.coef[0] - 2.0).abs() < 1e-14);
        assert!((m.intercept - 1.0).abs() < 1e-14);
    }

    #[test]
    fn heavy_shrinkage_predicts_mean() {
        let x = Matrix::from_rows(&[[0.0, 1.0], [1.0, 5.0], [2.0, 2.0], [4.0, 0.5]]).unwrap();
        let y = [1.0, 3.0, 5.0, 2.0];
        let m = fit_ridge(&x, &y, 1e12).unwrap();
        for row in x.row_iter() {
            assert!((m.predict_row(row) - 2.75).abs() < 1e-3);
        }
    }

    #[test]
    fn collinear_without_penalty_is_singular() {
        let x = Matrix::from_rows(&[[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]]).unwrap();
        assert_eq!(
            fit_ridge(&x, &[1.0, 2.0, 3.0], 0.0).unwrap_err(),
            Error::SingularSystem
        );
    }
}
