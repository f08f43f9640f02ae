//! Definitional reference implementations used by the integration tests and
//! the acceptance suite. They favour directness over speed.

// each test target uses a different subset
#![allow(dead_code)]

use std::collections::HashMap;

use wena_core::connectivity::SparseNetwork;
use wena_core::encoder::AeModel;
use wena_core::rng::{seeded, uniform, SeededRng};
use wena_core::Matrix;

pub fn rng(seed: u64) -> SeededRng {
    seeded(seed)
}

/// Uniform integer in `lo..=hi`.
pub fn int_in(rng: &mut SeededRng, lo: usize, hi: usize) -> usize {
    let v = uniform(rng, lo as f64, hi as f64 + 1.0).floor() as usize;
    v.min(hi)
}

pub fn random_matrix(rng: &mut SeededRng, rows: usize, cols: usize, lo: f64, hi: f64) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| uniform(rng, lo, hi))
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx.sqrt() * syy.sqrt())
}

fn equal_width_bin(v: f64, lo: f64, hi: f64, bins: usize) -> usize {
    if hi == lo {
        return 0;
    }
    let k = ((v - lo) / (hi - lo) * bins as f64).floor() as usize;
    k.min(bins - 1)
}

/// Plug-in mutual information (nats) of two equal-width binned series.
pub fn mutual_information(x: &[f64], y: &[f64], bins: usize) -> f64 {
    let range = |v: &[f64]| {
        (
            v.iter().cloned().fold(f64::INFINITY, f64::min),
            v.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        )
    };
    let (xl, xh) = range(x);
    let (yl, yh) = range(y);
    let n = x.len() as f64;
    let mut joint: HashMap<(usize, usize), f64> = HashMap::new();
    let mut px: HashMap<usize, f64> = HashMap::new();
    let mut py: HashMap<usize, f64> = HashMap::new();
    for (&a, &b) in x.iter().zip(y) {
        let (i, j) = (
            equal_width_bin(a, xl, xh, bins),
            equal_width_bin(b, yl, yh, bins),
        );
        *joint.entry((i, j)).or_default() += 1.0 / n;
        *px.entry(i).or_default() += 1.0 / n;
        *py.entry(j).or_default() += 1.0 / n;
    }
    joint
        .iter()
        .map(|(&(i, j), &p)| p * (p / (px[&i] * py[&j])).ln())
        .sum()
}

fn centered_distances(x: &[f64]) -> Vec<Vec<f64>> {
    let t = x.len();
    let d: Vec<Vec<f64>> = (0..t)
        .map(|k| (0..t).map(|l| (x[k] - x[l]).abs()).collect())
        .collect();
    let row: Vec<f64> = d.iter().map(|r| mean(r)).collect();
    let col: Vec<f64> = (0..t)
        .map(|l| mean(&d.iter().map(|r| r[l]).collect::<Vec<_>>()))
        .collect();
    let grand = mean(&row);
    (0..t)
        .map(|k| (0..t).map(|l| d[k][l] - row[k] - col[l] + grand).collect())
        .collect()
}

fn dcov2(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let t = a.len() as f64;
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x * y).sum::<f64>())
        .sum::<f64>()
        / (t * t)
}

pub fn distance_correlation(x: &[f64], y: &[f64]) -> f64 {
    let (a, b) = (centered_distances(x), centered_distances(y));
    let denom = (dcov2(&a, &a) * dcov2(&b, &b)).sqrt();
    if denom == 0.0 {
        return 0.0;
    }
    (dcov2(&a, &b).max(0.0) / denom).sqrt()
}

/// All-pairs shortest paths with edge length `1/weight`.
pub fn floyd_warshall(n: usize, edges: &[(usize, usize, f64)]) -> Vec<Vec<f64>> {
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for &(i, j, w) in edges {
        if w > 0.0 {
            d[i][j] = d[i][j].min(1.0 / w);
            d[j][i] = d[i][j];
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// Betweenness by enumerating every shortest path of every unordered pair.
pub fn betweenness(net: &SparseNetwork) -> Vec<f64> {
    let n = net.n;
    let d = floyd_warshall(n, &net.edges);
    let mut adj = vec![Vec::new(); n];
    for &(i, j, w) in &net.edges {
        if w > 0.0 {
            adj[i].push((j, 1.0 / w));
            adj[j].push((i, 1.0 / w));
        }
    }
    let mut bc = vec![0.0; n];
    for s in 0..n {
        for t in s + 1..n {
            if !d[s][t].is_finite() {
                continue;
            }
            let mut through = vec![0.0; n];
            let mut total = 0.0;
            let mut path = vec![s];
            walk(&adj, &d, s, t, &mut path, &mut through, &mut total);
            for v in 0..n {
                bc[v] += through[v] / total;
            }
        }
    }
    bc
}

fn walk(
    adj: &[Vec<(usize, f64)>],
    d: &[Vec<f64>],
    s: usize,
    t: usize,
    path: &mut Vec<usize>,
    through: &mut [f64],
    total: &mut f64,
) {
    let u = *path.last().unwrap();
    if u == t {
        *total += 1.0;
        for &v in &path[1..path.len() - 1] {
            through[v] += 1.0;
        }
        return;
    }
    for &(w, len) in &adj[u] {
        if path.contains(&w) {
            continue;
        }
        let on_shortest = close(d[s][u] + len, d[s][w]) && close(d[s][w] + d[w][t], d[s][t]);
        if on_shortest {
            path.push(w);
            walk(adj, d, s, t, path, through, total);
            path.pop();
        }
    }
}

/// Global efficiency of each node's neighbor-induced subgraph.
pub fn local_efficiency(net: &SparseNetwork) -> Vec<f64> {
    let n = net.n;
    (0..n)
        .map(|v| {
            let nb: Vec<usize> = net
                .edges
                .iter()
                .filter(|e| e.2 > 0.0 && (e.0 == v || e.1 == v))
                .map(|e| if e.0 == v { e.1 } else { e.0 })
                .collect();
            let k = nb.len();
            if k < 2 {
                return 0.0;
            }
            let local: Vec<(usize, usize, f64)> = net
                .edges
                .iter()
                .filter_map(|&(i, j, w)| {
                    let a = nb.iter().position(|&x| x == i)?;
                    let b = nb.iter().position(|&x| x == j)?;
                    Some((a, b, w))
                })
                .collect();
            let d = floyd_warshall(k, &local);
            let mut sum = 0.0;
            for a in 0..k {
                for b in 0..k {
                    if a != b && d[a][b].is_finite() {
                        sum += 1.0 / d[a][b];
                    }
                }
            }
            sum / (k * (k - 1)) as f64
        })
        .collect()
}

/// Random undirected network; `discrete` draws weights from {0.5, 1} so
/// that equal-length shortest paths are common.
pub fn random_network(rng: &mut SeededRng, max_n: usize, discrete: bool) -> SparseNetwork {
    let n = int_in(rng, 2, max_n);
    let p = uniform(rng, 0.15, 0.8);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if uniform(rng, 0.0, 1.0) < p {
                let w = if discrete {
                    if uniform(rng, 0.0, 1.0) < 0.5 {
                        0.5
                    } else {
                        1.0
                    }
                } else {
                    uniform(rng, 0.05, 1.0)
                };
                edges.push((i, j, w));
            }
        }
    }
    SparseNetwork::from_edges(n, edges)
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
            .unwrap();
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

/// Ridge with an unpenalized intercept via the augmented normal equations.
/// Returns `[intercept, coef...]`.
pub fn ridge(x: &Matrix, y: &[f64], lambda: f64) -> Vec<f64> {
    let f = x.cols() + 1;
    let design = |i: usize, j: usize| if j == 0 { 1.0 } else { x.get(i, j - 1) };
    let mut a = vec![vec![0.0; f]; f];
    let mut b = vec![0.0; f];
    for i in 0..x.rows() {
        for j in 0..f {
            b[j] += design(i, j) * y[i];
            for k in 0..f {
                a[j][k] += design(i, j) * design(i, k);
            }
        }
    }
    for (j, row) in a.iter_mut().enumerate().skip(1) {
        row[j] += lambda;
    }
    solve(a, b)
}

/// Maximum of the ε-SVR dual `−½βᵀKβ − ε‖β‖₁ + yᵀβ` over `β ∈ [−C, C]⁴`,
/// `Σβ = 0`, by successively refined grid search on three free coordinates.
pub fn svr_dual_max_4(k: &Matrix, y: &[f64], c: f64, eps: f64) -> f64 {
    assert_eq!(y.len(), 4);
    let objective = |b: &[f64; 4]| {
        let mut quad = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                quad += b[i] * b[j] * k.get(i, j);
            }
        }
        -0.5 * quad - eps * b.iter().map(|v| v.abs()).sum::<f64>()
            + b.iter().zip(y).map(|(a, v)| a * v).sum::<f64>()
    };
    let steps = 20i32;
    let mut center = [0.0f64; 3];
    let mut half = c;
    let mut best = f64::NEG_INFINITY;
    while half > 1e-9 * c {
        let h = half / steps as f64;
        let mut arg = center;
        for a in -steps..=steps {
            for b in -steps..=steps {
                for d in -steps..=steps {
                    let p = [
                        (center[0] + a as f64 * h).clamp(-c, c),
                        (center[1] + b as f64 * h).clamp(-c, c),
                        (center[2] + d as f64 * h).clamp(-c, c),
                    ];
                    let last = -(p[0] + p[1] + p[2]);
                    if last.abs() > c {
                        continue;
                    }
                    let v = objective(&[p[0], p[1], p[2], last]);
                    if v > best {
                        best = v;
                        arg = p;
                    }
                }
            }
        }
        center = arg;
        half *= 0.25;
    }
    best
}

/// `Γ((ν+1)/2) / Γ(ν/2)` for integer ν by the two-step recurrence.
fn t_gamma_ratio(dof: u32) -> f64 {
    let mut g = if dof % 2 == 1 {
        1.0 / std::f64::consts::PI.sqrt()
    } else {
        std::f64::consts::PI.sqrt() / 2.0
    };
    let mut v = if dof % 2 == 1 { 1 } else { 2 };
    while v < dof {
        g *= (v as f64 + 1.0) / v as f64;
        v += 2;
    }
    g
}

/// Two-sided Student-t p-value by composite Simpson quadrature of the density.
pub fn t_two_sided_p(t: f64, dof: u32) -> f64 {
    let nu = dof as f64;
    let c = t_gamma_ratio(dof) / (nu * std::f64::consts::PI).sqrt();
    let f = |x: f64| c * (1.0 + x * x / nu).powf(-(nu + 1.0) / 2.0);
    let b = t.abs();
    let n = 20_000;
    let h = b / n as f64;
    let mut s = f(0.0) + f(b);
    for i in 1..n {
        s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    (1.0 - 2.0 * s * h / 3.0).max(0.0)
}

/// Relative difference with an absolute floor.
pub fn rel_err(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

/// Worst relative error between backprop and central differences (step 1e-5)
/// over every parameter.
pub fn ae_gradient_error(model: &AeModel, x: &Matrix) -> f64 {
    let g = model.gradient(x).unwrap();
    let step = 1e-5;
    let mut worst: f64 = 0.0;
    let numeric = |m: &AeModel, perturb: &dyn Fn(&mut AeModel, f64)| {
        let (mut plus, mut minus) = (m.clone(), m.clone());
        perturb(&mut plus, step);
        perturb(&mut minus, -step);
        (plus.loss(x).unwrap() - minus.loss(x).unwrap()) / (2.0 * step)
    };
    for k in 0..model.hidden_dim() {
        for i in 0..model.input_dim() {
            let n = numeric(model, &|m, s| m.w.set(k, i, m.w.get(k, i) + s));
            worst = worst.max(rel_err(g.w.get(k, i), n, 1e-6));
            let n = numeric(model, &|m, s| m.w_dec.set(i, k, m.w_dec.get(i, k) + s));
            worst = worst.max(rel_err(g.w_dec.get(i, k), n, 1e-6));
        }
        let n = numeric(model, &|m, s| m.b[k] += s);
        worst = worst.max(rel_err(g.b[k], n, 1e-6));
    }
    for i in 0..model.input_dim() {
        let n = numeric(model, &|m, s| m.b_dec[i] += s);
        worst = worst.max(rel_err(g.b_dec[i], n, 1e-6));
    }
    worst
}
