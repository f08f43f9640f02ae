use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::check_training_data;
use crate::rng::{derive_seed, seeded};
use crate::stats::stable_mean;
use crate::{Error, Matrix, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EtrParams {
    pub trees: usize,
    /// `None` grows until leaves are pure or hit `min_leaf`.
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    /// Resample rows with replacement for each tree.
    pub bootstrap: bool,
}

impl Default for EtrParams {
    fn default() -> Self {
        Self {
            trees: 100,
            max_depth: Some(12),
            min_leaf: 3,
            bootstrap: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf(f64),
    /// Rows with `x[feature] <= threshold` go to `left`.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// CART-style regression tree grown by SSE reduction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub nodes: Vec<Node>,
}

impl RegressionTree {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf(v) => return v,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row[feature] <= threshold {
                        left
                    } else {
                        right
                    }
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    /// Grows a tree on the rows listed in `sample` (repeats allowed).
    pub fn grow(
        x: &Matrix,
        y: &[f64],
        sample: &[usize],
        max_depth: Option<usize>,
        min_leaf: usize,
    ) -> Self {
        let min_leaf = min_leaf.max(1);
        let mut nodes = Vec::new();
        let mut buf = Vec::with_capacity(sample.len());
        let mut idx = sample.to_vec();
        nodes.push(Node::Leaf(0.0));
        // (start, end, depth, node slot)
        let mut stack = alloc::vec![(0usize, idx.len(), 0usize, 0usize)];
        while let Some((start, end, depth, slot)) = stack.pop() {
            let rows = &mut idx[start..end];
            let ys: Vec<f64> = rows.iter().map(|&r| y[r]).collect();
            let leaf = Node::Leaf(stable_mean(&ys));
            let pure = ys.iter().all(|&v| v == ys[0]);
            let depth_capped = max_depth.is_some_and(|d| depth >= d);
            if pure || depth_capped || rows.len() < 2 * min_leaf {
                nodes[slot] = leaf;
                continue;
            }
            let Some((feature, threshold)) = best_split(x, y, rows, min_leaf, &mut buf) else {
                nodes[slot] = leaf;
                continue;
            };
            // partition rows so that the left child comes first
            let mut split_at = 0;
            for k in 0..rows.len() {
                if x.get(rows[k], feature) <= threshold {
                    rows.swap(k, split_at);
                    split_at += 1;
                }
            }
            let left = nodes.len();
            nodes.push(Node::Leaf(0.0));
            let right = nodes.len();
            nodes.push(Node::Leaf(0.0));
            nodes[slot] = Node::Split {
                feature,
                threshold,
                left,
                right,
            };
            stack.push((start + split_at, end, depth + 1, right));
            stack.push((start, start + split_at, depth + 1, left));
        }
        Self { nodes }
    }
}

/// Best `(feature, threshold)` by SSE decrease; thresholds are midpoints
/// between consecutive distinct values. Zero-gain splits are accepted so
/// that impure nodes keep splitting while distinct rows remain.
fn best_split(
    x: &Matrix,
    y: &[f64],
    rows: &[usize],
    min_leaf: usize,
    buf: &mut Vec<(f64, f64)>,
) -> Option<(usize, f64)> {
    let n = rows.len();
    let total: f64 = rows.iter().map(|&r| y[r]).sum();
    let base = total * total / n as f64;
    let mut best: Option<(f64, usize, f64)> = None;
    for f in 0..x.cols() {
        buf.clear();
        buf.extend(rows.iter().map(|&r| (x.get(r, f), y[r])));
        buf.sort_by(|a, b| a.0.total_cmp(&b.0));
        if buf[0].0 == buf[n - 1].0 {
            continue;
        }
        let mut left_sum = 0.0;
        for p in 1..n {
            left_sum += buf[p - 1].1;
            if p < min_leaf || n - p < min_leaf || buf[p - 1].0 == buf[p].0 {
                continue;
            }
            let right_sum = total - left_sum;
            let gain =
                left_sum * left_sum / p as f64 + right_sum * right_sum / (n - p) as f64 - base;
            if best.is_none_or(|(g, _, _)| gain > g) {
                let threshold = buf[p - 1].0 + (buf[p].0 - buf[p - 1].0) / 2.0;
                best = Some((gain, f, threshold));
            }
        }
    }
    best.map(|(_, f, t)| (f, t))
}

/// Bagged regression trees; the prediction is the mean over trees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<RegressionTree>,
    pub input_dim: usize,
}

impl Forest {
    pub(crate) fn predict_row(&self, row: &[f64]) -> f64 {
        let per_tree: Vec<f64> = self.trees.iter().map(|t| t.predict_row(row)).collect();
        stable_mean(&per_tree)
    }
}

pub fn fit_etr(x: &Matrix, y: &[f64], params: &EtrParams, seed: u64) -> Result<Forest> {
    check_training_data(x, y)?;
    if params.trees == 0 {
        return Err(Error::InvalidParameter {
            name: "trees",
            reason: "must be at least 1".into(),
        });
    }
    let s = x.rows();
    let trees = (0..params.trees)
        .map(|t| {
            let sample: Vec<usize> = if params.bootstrap {
                let mut rng = seeded(derive_seed(seed, &[t as u64]));
                (0..s).map(|_| rng.random_range(0..s)).collect()
            } else {
                (0..s).collect()
            };
            RegressionTree::grow(x, y, &sample, params.max_depth, params.min_leaf)
        })
        .collect();
    Ok(Forest {
        trees,
        input_dim: x.cols(),
    })
}
