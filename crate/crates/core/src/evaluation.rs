//! Metrics, fold assignment, RReliefF relevance ranking and covariate
//! correlation with two-sided p-values.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // unused only when std is linked
use num_traits::Float;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::rng::seeded;
use crate::stats::{correlation_p_value, mean, pearson};
use crate::{Error, Matrix, Result};

pub use crate::pipeline::cross_validate;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldMetrics {
    pub fold: usize,
    pub mae: f64,
    pub r: Option<f64>,
    pub r2: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub mae: f64,
    /// `None` when either side has zero variance.
    pub r: Option<f64>,
    /// Coefficient of determination; may be negative.
    pub r2: f64,
    /// Squared Pearson R, the other common reading of "R squared".
    pub r_squared: Option<f64>,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_fold: Option<Vec<FoldMetrics>>,
}

/// MAE, Pearson R and the coefficient of determination
/// `1 − Σ(y−ŷ)² / Σ(y−ȳ)²`. With constant `y` the ratio is undefined and
/// R² is reported as 1 for a perfect fit, 0 otherwise.
pub fn compute_metrics(y: &[f64], yhat: &[f64]) -> Result<MetricsReport> {
    if y.len() != yhat.len() {
        return Err(Error::DimensionMismatch {
            expected: y.len(),
            actual: yhat.len(),
        });
    }
    if y.len() < 2 {
        return Err(Error::TooFewSamples {
            required: 2,
            actual: y.len(),
        });
    }
    let y_mean = mean(y);
    let ss_res: f64 = y.iter().zip(yhat).map(|(a, b)| (a - b) * (a - b)).sum();
    let ss_tot: f64 = y.iter().map(|a| (a - y_mean) * (a - y_mean)).sum();
    let r2 = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else if ss_res == 0.0 {
        1.0
    } else {
        0.0
    };
    let r = pearson(y, yhat);
    Ok(MetricsReport {
        mae: crate::stats::mean_absolute_error(y, yhat),
        r,
        r2,
        r_squared: r.map(|r| r * r),
        n: y.len(),
        per_fold: None,
    })
}

/// Fold index per sample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    pub k: usize,
    pub assignment: Vec<usize>,
}

impl FoldAssignment {
    /// `(train, test)` row indices for `fold`, both ascending.
    pub fn split(&self, fold: usize) -> (Vec<usize>, Vec<usize>) {
        let (test, train): (Vec<usize>, Vec<usize>) =
            (0..self.assignment.len()).partition(|&i| self.assignment[i] == fold);
        (train, test)
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        self.assignment.iter().for_each(|&f| sizes[f] += 1);
        sizes
    }
}

/// Seeded permutation of `0..s` dealt round-robin into `k` folds.
pub fn kfold_split(s: usize, k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(Error::InvalidParameter {
            name: "k",
            reason: alloc::format!("need at least 2 folds, got {k}"),
        });
    }
    if s < k {
        return Err(Error::TooFewSamples {
            required: k,
            actual: s,
        });
    }
    let mut order: Vec<usize> = (0..s).collect();
    order.shuffle(&mut seeded(seed));
    let mut assignment = vec![0; s];
    for (pos, &row) in order.iter().enumerate() {
        assignment[row] = pos % k;
    }
    Ok(FoldAssignment { k, assignment })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReliefParams {
    pub k_neighbors: usize,
    /// Instances to sample; `None` uses every instance in order.
    pub sample_count: Option<usize>,
    pub seed: u64,
}

impl Default for ReliefParams {
    fn default() -> Self {
        Self {
            k_neighbors: 10,
            sample_count: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliefRanking {
    pub scores: Vec<f64>,
    /// Feature indices by descending score, ties by index.
    pub ranking: Vec<usize>,
}

/// RReliefF relevance estimates for a continuous target.
///
/// Features and target are min-max scaled; neighbors are the `k` nearest
/// rows by Euclidean distance on the scaled features, weighted by
/// `exp(−(rank/σ)²)` with `σ = k/3`, normalized over the `k` neighbors.
pub fn rrelieff_rank(x: &Matrix, y: &[f64], params: &ReliefParams) -> Result<ReliefRanking> {
    let (s, f) = (x.rows(), x.cols());
    if y.len() != s {
        return Err(Error::DimensionMismatch {
            expected: s,
            actual: y.len(),
        });
    }
    let k = params.k_neighbors;
    if k == 0 {
        return Err(Error::InvalidParameter {
            name: "k_neighbors",
            reason: "must be at least 1".into(),
        });
    }
    if s <= k {
        return Err(Error::TooFewSamples {
            required: k + 1,
            actual: s,
        });
    }
    let y_lo = y.iter().copied().fold(f64::INFINITY, f64::min);
    let y_hi = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(y_hi > y_lo) {
        return Err(Error::ConstantTarget);
    }
    let y_range = y_hi - y_lo;
    let scaled = crate::encoder::Normalizer::fit(x)?;
    let ranges: Vec<f64> = scaled
        .min
        .iter()
        .zip(&scaled.max)
        .map(|(lo, hi)| hi - lo)
        .collect();
    // constant features contribute no differences at all
    let z = Matrix::from_fn(s, f, |i, j| {
        if ranges[j] > 0.0 {
            (x.get(i, j) - scaled.min[j]) / ranges[j]
        } else {
            0.0
        }
    });

    let sampled: Vec<usize> = match params.sample_count {
        Some(m) if m < s => {
            let mut order: Vec<usize> = (0..s).collect();
            order.shuffle(&mut seeded(params.seed));
            order.truncate(m);
            order
        }
        _ => (0..s).collect(),
    };
    let m = sampled.len() as f64;

    let sigma = k as f64 / 3.0;
    let rank_weights: Vec<f64> = (1..=k)
        .map(|r| (-(r as f64 / sigma).powi(2)).exp())
        .collect();
    let weight_total: f64 = rank_weights.iter().sum();

    let mut n_dc = 0.0;
    let mut n_da = vec![0.0; f];
    let mut n_dc_da = vec![0.0; f];
    let mut dist: Vec<(f64, usize)> = Vec::with_capacity(s);
    for &i in &sampled {
        dist.clear();
        dist.extend((0..s).filter(|&j| j != i).map(|j| {
            let d: f64 = z
                .row(i)
                .iter()
                .zip(z.row(j))
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            (d, j)
        }));
        dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for (rank, &(_, j)) in dist.iter().take(k).enumerate() {
            let d = rank_weights[rank] / weight_total;
            let diff_y = (y[i] - y[j]).abs() / y_range;
            n_dc += diff_y * d;
            for a in 0..f {
                let diff_a = (z.get(i, a) - z.get(j, a)).abs();
                n_da[a] += diff_a * d;
                n_dc_da[a] += diff_y * diff_a * d;
            }
        }
    }
    let scores: Vec<f64> = (0..f)
        .map(|a| {
            let first = if n_dc > 0.0 { n_dc_da[a] / n_dc } else { 0.0 };
            let rest = m - n_dc;
            let second = if rest > 0.0 {
                (n_da[a] - n_dc_da[a]) / rest
            } else {
                0.0
            };
            first - second
        })
        .collect();
    let mut ranking: Vec<usize> = (0..f).collect();
    ranking.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    Ok(ReliefRanking { scores, ranking })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovariateCorrelation {
    /// `None` for zero-variance features.
    pub r: Option<f64>,
    pub p: Option<f64>,
}

/// Pearson r of every feature column against `covariate`, with a two-sided
/// p-value from Student's t on `S − 2` degrees of freedom.
pub fn covariate_correlation(
    features: &Matrix,
    covariate: &[f64],
) -> Result<Vec<CovariateCorrelation>> {
    let s = features.rows();
    if covariate.len() != s {
        return Err(Error::DimensionMismatch {
            expected: s,
            actual: covariate.len(),
        });
    }
    if s < 3 {
        return Err(Error::TooFewSamples {
            required: 3,
            actual: s,
        });
    }
    if covariate.iter().all(|&v| v == covariate[0]) {
        return Err(Error::ConstantTarget);
    }
    Ok((0..features.cols())
        .map(|j| {
            let r = pearson(&features.column(j), covariate);
            CovariateCorrelation {
                r,
                p: r.map(|r| correlation_p_value(r, s)),
            }
        })
        .collect())
}
