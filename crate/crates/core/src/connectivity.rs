//! Functional-connectivity estimation, edge vectorization and proportional
//! thresholding.
//!
//! Three estimators are available. Pearson is the product-moment
//! correlation of column pairs. Mutual information is the plug-in estimate
//! (nats) over equal-width marginal bins; its diagonal is the column's
//! entropy. Distance correlation is the biased sample version built from
//! double-centered pairwise-distance matrices, defined as 0 when either
//! series is constant.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // unused only when std is linked
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::ingest::TimeSeriesMatrix;
use crate::{Error, Matrix, Result};

pub const DEFAULT_MI_BINS: usize = 16;
pub const DEFAULT_THRESHOLD: f64 = 0.20;

/// Standard deviations at or below this are treated as constant series.
const CONSTANT_SD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FcMethod {
    #[serde(rename = "pearson")]
    Pearson,
    #[serde(rename = "mi")]
    MutualInformation,
    #[serde(rename = "dcor")]
    DistanceCorrelation,
}

impl FcMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            FcMethod::Pearson => "pearson",
            FcMethod::MutualInformation => "mi",
            FcMethod::DistanceCorrelation => "dcor",
        }
    }
}

impl core::str::FromStr for FcMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pearson" => Ok(FcMethod::Pearson),
            "mi" => Ok(FcMethod::MutualInformation),
            "dcor" => Ok(FcMethod::DistanceCorrelation),
            other => Err(Error::InvalidParameter {
                name: "fc_method",
                reason: alloc::format!("unknown method {other:?}; expected pearson, mi or dcor"),
            }),
        }
    }
}

/// Symmetric N×N connectivity matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnectivityMatrix {
    pub method: FcMethod,
    pub values: Matrix,
}

impl ConnectivityMatrix {
    pub fn n(&self) -> usize {
        self.values.rows()
    }
}

pub fn compute_fc(
    ts: &TimeSeriesMatrix,
    method: FcMethod,
    mi_bins: usize,
) -> Result<ConnectivityMatrix> {
    let values = match method {
        FcMethod::Pearson => pearson_matrix(ts)?,
        FcMethod::MutualInformation => mutual_information_matrix(ts, mi_bins)?,
        FcMethod::DistanceCorrelation => distance_correlation_matrix(ts),
    };
    Ok(ConnectivityMatrix { method, values })
}

fn columns(ts: &TimeSeriesMatrix) -> Vec<Vec<f64>> {
    (0..ts.n()).map(|j| ts.values().column(j)).collect()
}

fn symmetric_from_pairs(
    n: usize,
    diag: impl Fn(usize) -> f64,
    mut pair: impl FnMut(usize, usize) -> f64,
) -> Matrix {
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        m.set(i, i, diag(i));
        for j in i + 1..n {
            let v = pair(i, j);
            m.set(i, j, v);
            m.set(j, i, v);
        }
    }
    m
}

fn pearson_matrix(ts: &TimeSeriesMatrix) -> Result<Matrix> {
    let t = ts.t() as f64;
    let mut centered = columns(ts);
    let mut norms = Vec::with_capacity(centered.len());
    for (j, col) in centered.iter_mut().enumerate() {
        let mean = crate::stats::mean(col);
        col.iter_mut().for_each(|v| *v -= mean);
        let ss: f64 = col.iter().map(|v| v * v).sum();
        if (ss / t).sqrt() <= CONSTANT_SD {
            return Err(Error::ConstantSeries(j));
        }
        norms.push(ss);
    }
    Ok(symmetric_from_pairs(
        centered.len(),
        |_| 1.0,
        |i, j| {
            let sxy = crate::matrix::dot(&centered[i], &centered[j]);
            (sxy / (norms[i] * norms[j]).sqrt()).clamp(-1.0, 1.0)
        },
    ))
}

/// Equal-width bin index of every sample; a constant column falls in bin 0.
pub(crate) fn bin_indices(col: &[f64], bins: usize) -> Vec<usize> {
    let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = hi - lo;
    col.iter()
        .map(|&v| {
            if width <= 0.0 {
                0
            } else {
                let b = ((v - lo) / width * bins as f64).floor() as usize;
                b.min(bins - 1)
            }
        })
        .collect()
}

fn entropy(counts: &[usize], total: f64) -> f64 {
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.ln()
        })
        .sum()
}

fn mutual_information_matrix(ts: &TimeSeriesMatrix, bins: usize) -> Result<Matrix> {
    if bins < 2 {
        return Err(Error::InvalidParameter {
            name: "mi_bins",
            reason: alloc::format!("need at least 2 bins, got {bins}"),
        });
    }
    let total = ts.t() as f64;
    let binned: Vec<Vec<usize>> = columns(ts).iter().map(|c| bin_indices(c, bins)).collect();
    let marginals: Vec<Vec<usize>> = binned
        .iter()
        .map(|b| {
            let mut counts = vec![0usize; bins];
            b.iter().for_each(|&k| counts[k] += 1);
            counts
        })
        .collect();
    let entropies: Vec<f64> = marginals.iter().map(|c| entropy(c, total)).collect();
    let mut joint = vec![0usize; bins * bins];
    Ok(symmetric_from_pairs(
        binned.len(),
        |i| entropies[i],
        |i, j| {
            joint.iter_mut().for_each(|c| *c = 0);
            for (&a, &b) in binned[i].iter().zip(&binned[j]) {
                joint[a * bins + b] += 1;
            }
            let mut mi = 0.0;
            for a in 0..bins {
                let pa = marginals[i][a] as f64;
                if pa == 0.0 {
                    continue;
                }
                for b in 0..bins {
                    let c = joint[a * bins + b];
                    if c == 0 {
                        continue;
                    }
                    let pab = c as f64;
                    let pb = marginals[j][b] as f64;
                    mi += pab / total * (pab * total / (pa * pb)).ln();
                }
            }
            mi.max(0.0)
        },
    ))
}

/// Double-centered distance matrix of one series, flattened T×T.
fn double_centered_distances(x: &[f64]) -> Vec<f64> {
    let t = x.len();
    let mut d = vec![0.0; t * t];
    for k in 0..t {
        for l in 0..t {
            d[k * t + l] = (x[k] - x[l]).abs();
        }
    }
    let row_means: Vec<f64> = (0..t)
        .map(|k| d[k * t..(k + 1) * t].iter().sum::<f64>() / t as f64)
        .collect();
    let grand = row_means.iter().sum::<f64>() / t as f64;
    for k in 0..t {
        for l in 0..t {
            // distance matrix is symmetric, so column means equal row means
            d[k * t + l] += grand - row_means[k] - row_means[l];
        }
    }
    d
}

fn distance_correlation_matrix(ts: &TimeSeriesMatrix) -> Matrix {
    let t2 = (ts.t() * ts.t()) as f64;
    let centered: Vec<Vec<f64>> = columns(ts)
        .iter()
        .map(|c| double_centered_distances(c))
        .collect();
    let dvar: Vec<f64> = centered
        .iter()
        .map(|a| crate::matrix::dot(a, a) / t2)
        .collect();
    symmetric_from_pairs(
        centered.len(),
        |_| 1.0,
        |i, j| {
            let denom = (dvar[i] * dvar[j]).sqrt();
            if denom <= 0.0 {
                return 0.0;
            }
            let dcov2 = (crate::matrix::dot(&centered[i], &centered[j]) / t2).max(0.0);
            (dcov2 / denom).sqrt().min(1.0)
        },
    )
}

/// Number of undirected edges among `n` nodes.
pub fn edge_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Upper-triangle pairs `(i, j)`, `i < j`, in row-major order.
pub fn edge_pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
}

/// Recovers the node count from an edge-vector length.
pub fn nodes_for_edges(edges: usize) -> Option<usize> {
    let n = ((1.0 + (1.0 + 8.0 * edges as f64).sqrt()) / 2.0).round() as usize;
    (edge_count(n) == edges).then_some(n)
}

/// Flattened upper triangle of a connectivity matrix, row-major, `i < j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeVector {
    pub n: usize,
    pub values: Vec<f64>,
}

pub fn vectorize_edges(fc: &ConnectivityMatrix) -> EdgeVector {
    let n = fc.n();
    EdgeVector {
        n,
        values: edge_pairs(n).map(|(i, j)| fc.values.get(i, j)).collect(),
    }
}

impl EdgeVector {
    /// Symmetric matrix with the given diagonal value.
    pub fn to_symmetric(&self, diagonal: f64) -> Matrix {
        let mut m = Matrix::zeros(self.n, self.n);
        for ((i, j), &v) in edge_pairs(self.n).zip(&self.values) {
            m.set(i, j, v);
            m.set(j, i, v);
        }
        for i in 0..self.n {
            m.set(i, i, diagonal);
        }
        m
    }
}

/// Thresholded weighted graph; weights are the absolute connectivity values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseNetwork {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
    pub retained_fraction: f64,
}

impl SparseNetwork {
    /// Builds a network from explicit edges; `i < j` is enforced by swapping.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let edges: Vec<_> = edges
            .into_iter()
            .map(|(i, j, w)| if i < j { (i, j, w) } else { (j, i, w) })
            .collect();
        let retained_fraction = match edge_count(n) {
            0 => 0.0,
            e => edges.len() as f64 / e as f64,
        };
        Self {
            n,
            edges,
            retained_fraction,
        }
    }
}

/// `⌈fraction · total⌉`, robust to representation error in `fraction`
/// (e.g. `0.2 · 10` must give 2, not 3).
pub fn retained_edge_count(fraction: f64, total: usize) -> usize {
    let x = fraction * total as f64;
    let nearest = x.round();
    let k = if (x - nearest).abs() <= 1e-9 * x.max(1.0) {
        nearest
    } else {
        x.ceil()
    };
    (k as usize).min(total)
}

/// Keeps the top `⌈fraction · E⌉` edges ranked by absolute weight; ties at
/// the cut go to the lexicographically smaller `(i, j)`.
pub fn threshold_network(fc: &ConnectivityMatrix, fraction: f64) -> Result<SparseNetwork> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "fraction",
            reason: alloc::format!("must be in (0, 1], got {fraction}"),
        });
    }
    let n = fc.n();
    let mut ranked: Vec<(usize, usize, f64)> = edge_pairs(n)
        .map(|(i, j)| (i, j, fc.values.get(i, j).abs()))
        .collect();
    // stable sort keeps row-major (lexicographic) order among equal weights
    ranked.sort_by(|a, b| b.2.total_cmp(&a.2));
    let keep = retained_edge_count(fraction, ranked.len());
    ranked.truncate(keep);
    ranked.sort_by_key(|e| (e.0, e.1));
    Ok(SparseNetwork {
        n,
        edges: ranked,
        retained_fraction: fraction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(cols: &[&[f64]]) -> TimeSeriesMatrix {
        let t = cols[0].len();
        TimeSeriesMatrix::new(Matrix::from_fn(t, cols.len(), |i, j| cols[j][i])).unwrap()
    }

    #[test]
    fn pearson_identical_columns() {
        let fc = compute_fc(
            &ts(&[&[1.0, 4.0, 2.0], &[1.0, 4.0, 2.0]]),
            FcMethod::Pearson,
            16,
        )
        .unwrap();
        assert_eq!(fc.values.get(0, 1), 1.0);
    }

    #[test]
    fn pearson_hand_value() {
        let fc = compute_fc(
            &ts(&[&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]]),
            FcMethod::Pearson,
            16,
        )
        .unwrap();
        assert!((fc.values.get(0, 1) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn pearson_rejects_constant_column() {
        let err = compute_fc(
            &ts(&[&[1.0, 2.0, 3.0], &[2.0, 2.0, 2.0]]),
            FcMethod::Pearson,
            16,
        );
        assert_eq!(err.unwrap_err(), Error::ConstantSeries(1));
    }

    #[test]
    fn mi_self_information_two_bins() {
        // half the samples at each extreme: two occupied bins
        let x = [0.0, 0.0, 0.0, 1.0, 1.0, 1.0];
        let fc = compute_fc(&ts(&[&x, &x]), FcMethod::MutualInformation, 16).unwrap();
        let ln2 = core::f64::consts::LN_2;
        assert!((fc.values.get(0, 0) - ln2).abs() < 1e-15);
        assert!((fc.values.get(0, 1) - ln2).abs() < 1e-15);
    }

    #[test]
    fn mi_rejects_single_bin() {
        let x = [0.0, 1.0, 2.0];
        assert!(compute_fc(&ts(&[&x, &x]), FcMethod::MutualInformation, 1).is_err());
    }

    #[test]
    fn dcor_affine_relation_is_one() {
        let x = [0.3, -1.2, 2.5, 0.7, 1.1];
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v + 1.0).collect();
        let fc = compute_fc(&ts(&[&x, &y]), FcMethod::DistanceCorrelation, 16).unwrap();
        assert!((fc.values.get(0, 1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dcor_constant_series_is_zero() {
        let fc = compute_fc(
            &ts(&[&[1.0, 2.0, 4.0], &[3.0, 3.0, 3.0]]),
            FcMethod::DistanceCorrelation,
            16,
        )
        .unwrap();
        assert_eq!(fc.values.get(0, 1), 0.0);
    }

    #[test]
    fn edge_order_is_row_major() {
        let n = 4;
        let m = Matrix::from_fn(n, n, |i, j| (10 * i.min(j) + i.max(j)) as f64);
        let ev = vectorize_edges(&ConnectivityMatrix {
            method: FcMethod::Pearson,
            values: m,
        });
        assert_eq!(ev.values, [1.0, 2.0, 3.0, 12.0, 13.0, 23.0]);
        assert_eq!(edge_count(160), 12720);
        assert_eq!(nodes_for_edges(12720), Some(160));
        assert_eq!(nodes_for_edges(7), None);
    }

    #[test]
    fn threshold_keeps_top_two_of_ten() {
        let ev = EdgeVector {
            n: 5,
            values: (1..=10).map(f64::from).collect(),
        };
        let fc = ConnectivityMatrix {
            method: FcMethod::Pearson,
            values: ev.to_symmetric(1.0),
        };
        let net = threshold_network(&fc, 0.2).unwrap();
        let weights: Vec<f64> = net.edges.iter().map(|e| e.2).collect();
        assert_eq!(net.edges.len(), 2);
        assert!(weights.contains(&10.0) && weights.contains(&9.0));
        assert_eq!(threshold_network(&fc, 1.0).unwrap().edges.len(), 10);
    }

    #[test]
    fn threshold_ties_prefer_smaller_pairs() {
        let fc = ConnectivityMatrix {
            method: FcMethod::Pearson,
            values: EdgeVector {
                n: 5,
                values: vec![0.5; 10],
            }
            .to_symmetric(1.0),
        };
        let net = threshold_network(&fc, 0.2).unwrap();
        assert_eq!(net.edges, [(0, 1, 0.5), (0, 2, 0.5)]);
    }

    #[test]
    fn threshold_uses_absolute_weights() {
        let fc = ConnectivityMatrix {
            method: FcMethod::Pearson,
            values: EdgeVector {
                n: 3,
                values: vec![0.1, -0.9, 0.2],
            }
            .to_symmetric(1.0),
        };
        let net = threshold_network(&fc, 0.2).unwrap();
        assert_eq!(net.edges, [(0, 2, 0.9)]);
        assert!(threshold_network(&fc, 0.0).is_err());
        assert!(threshold_network(&fc, 1.5).is_err());
    }
}
