//! Graph-theory indices on a thresholded weighted network.
//!
//! Degree is binary. Strength, betweenness and local efficiency use the
//! weights, with edge length `1/weight` for path computations. Edges of
//! weight zero count toward degree but are not traversable.

use alloc::collections::BinaryHeap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::connectivity::SparseNetwork;
use crate::matrix::digits;
use crate::{Error, Result};

/// Relative tolerance for treating two path lengths as equal.
const PATH_TIE_EPS: f64 = 1e-12;

/// Adjacency lists with edge lengths `1/weight` (positive weights only).
struct Adjacency {
    lists: Vec<Vec<(usize, f64)>>,
}

impl Adjacency {
    fn new(net: &SparseNetwork) -> Self {
        let mut lists = vec![Vec::new(); net.n];
        for &(i, j, w) in &net.edges {
            if w > 0.0 {
                lists[i].push((j, 1.0 / w));
                lists[j].push((i, 1.0 / w));
            }
        }
        Self { lists }
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Queued {
    dist: f64,
    node: usize,
}

impl Eq for Queued {}

impl Ord for Queued {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance, then node index
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[inline]
fn same_length(a: f64, b: f64) -> bool {
    (a - b).abs() <= PATH_TIE_EPS * a.abs().max(b.abs())
}

pub fn degree_centrality(net: &SparseNetwork) -> Vec<f64> {
    let mut deg = vec![0.0; net.n];
    for &(i, j, _) in &net.edges {
        deg[i] += 1.0;
        deg[j] += 1.0;
    }
    deg
}

pub fn node_strength(net: &SparseNetwork) -> Result<Vec<f64>> {
    let mut strength = vec![0.0; net.n];
    for &(i, j, w) in &net.edges {
        if w < 0.0 {
            return Err(Error::NegativeWeight { i, j, weight: w });
        }
        strength[i] += w;
        strength[j] += w;
    }
    Ok(strength)
}

/// Unnormalized weighted betweenness (Brandes accumulation over Dijkstra).
/// Each unordered pair is counted once; endpoints are excluded.
pub fn betweenness_centrality(net: &SparseNetwork) -> Vec<f64> {
    let n = net.n;
    let adj = Adjacency::new(net);
    let mut bc = vec![0.0; n];

    let mut dist = vec![f64::INFINITY; n];
    let mut sigma = vec![0.0f64; n];
    let mut delta = vec![0.0f64; n];
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut settled = vec![false; n];
    let mut order = Vec::with_capacity(n);

    for s in 0..n {
        dist.iter_mut().for_each(|d| *d = f64::INFINITY);
        sigma.iter_mut().for_each(|v| *v = 0.0);
        delta.iter_mut().for_each(|v| *v = 0.0);
        settled.iter_mut().for_each(|v| *v = false);
        preds.iter_mut().for_each(Vec::clear);
        order.clear();

        dist[s] = 0.0;
        sigma[s] = 1.0;
        let mut heap = BinaryHeap::new();
        heap.push(Queued { dist: 0.0, node: s });
        while let Some(Queued { dist: d, node: v }) = heap.pop() {
            if settled[v] || d > dist[v] {
                continue;
            }
            settled[v] = true;
            order.push(v);
            for &(w, len) in &adj.lists[v] {
                if settled[w] {
                    continue;
                }
                let alt = dist[v] + len;
                if dist[w].is_infinite() || (alt < dist[w] && !same_length(alt, dist[w])) {
                    dist[w] = alt;
                    sigma[w] = sigma[v];
                    preds[w].clear();
                    preds[w].push(v);
                    heap.push(Queued { dist: alt, node: w });
                } else if same_length(alt, dist[w]) {
                    sigma[w] += sigma[v];
                    preds[w].push(v);
                }
            }
        }
        for &w in order.iter().rev() {
            for &v in &preds[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                bc[w] += delta[w];
            }
        }
    }
    bc.iter_mut().for_each(|b| *b /= 2.0);
    bc
}

/// Single-source weighted distances restricted to nodes with `allowed[v]`.
fn dijkstra_within(adj: &Adjacency, source: usize, allowed: &[bool], dist: &mut [f64]) {
    dist.iter_mut().for_each(|d| *d = f64::INFINITY);
    dist[source] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(Queued {
        dist: 0.0,
        node: source,
    });
    while let Some(Queued { dist: d, node: v }) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for &(w, len) in &adj.lists[v] {
            if !allowed[w] {
                continue;
            }
            let alt = d + len;
            if alt < dist[w] {
                dist[w] = alt;
                heap.push(Queued { dist: alt, node: w });
            }
        }
    }
}

/// Mean inverse shortest-path length among each node's neighbors, computed
/// inside the subgraph induced by those neighbors. Zero below two neighbors.
pub fn local_efficiency(net: &SparseNetwork) -> Vec<f64> {
    let n = net.n;
    let adj = Adjacency::new(net);
    let mut allowed = vec![false; n];
    let mut dist = vec![f64::INFINITY; n];
    let mut out = vec![0.0; n];
    for v in 0..n {
        let neighbors: Vec<usize> = adj.lists[v].iter().map(|&(u, _)| u).collect();
        let k = neighbors.len();
        if k < 2 {
            continue;
        }
        neighbors.iter().for_each(|&u| allowed[u] = true);
        let mut sum = 0.0;
        for &u in &neighbors {
            dijkstra_within(&adj, u, &allowed, &mut dist);
            sum += neighbors
                .iter()
                .filter(|&&w| w != u && dist[w].is_finite())
                .map(|&w| 1.0 / dist[w])
                .sum::<f64>();
        }
        neighbors.iter().for_each(|&u| allowed[u] = false);
        out[v] = sum / (k * (k - 1)) as f64;
    }
    out
}

/// The four per-node indices and their flattened `[deg | str | le | btw]` form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphIndexVector {
    pub degree: Vec<f64>,
    pub strength: Vec<f64>,
    pub local_efficiency: Vec<f64>,
    pub betweenness: Vec<f64>,
}

impl GraphIndexVector {
    pub fn flattened(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(4 * self.degree.len());
        v.extend_from_slice(&self.degree);
        v.extend_from_slice(&self.strength);
        v.extend_from_slice(&self.local_efficiency);
        v.extend_from_slice(&self.betweenness);
        v
    }

    /// Column names matching [`Self::flattened`]: `deg_000 … btw_159`.
    pub fn column_names(n: usize) -> Vec<String> {
        let width = digits(n);
        ["deg", "str", "le", "btw"]
            .iter()
            .flat_map(|p| (0..n).map(move |i| format!("{p}_{i:0width$}")))
            .collect()
    }
}

pub fn assemble_graph_features(net: &SparseNetwork) -> Result<GraphIndexVector> {
    Ok(GraphIndexVector {
        degree: degree_centrality(net),
        strength: node_strength(net)?,
        local_efficiency: local_efficiency(net),
        betweenness: betweenness_centrality(net),
    })
}
