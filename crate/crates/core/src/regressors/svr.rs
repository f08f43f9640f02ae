use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // unused only when std is linked
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::{check_training_data, Standardizer};
use crate::{Error, Matrix, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvrParams {
    pub c: f64,
    pub epsilon_tube: f64,
    /// RBF width; `None` means `1 / n_features`.
    pub gamma: Option<f64>,
    /// Stop once the maximal KKT violation falls below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SvrParams {
    fn default() -> Self {
        Self {
            c: 10.0,
            epsilon_tube: 0.1,
            gamma: None,
            tol: 1e-3,
            max_iter: 1_000_000,
        }
    }
}

/// ε-insensitive support vector regression with an RBF kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrModel {
    pub scaler: Standardizer,
    /// Standardized training rows.
    pub support: Matrix,
    pub alpha: Vec<f64>,
    pub alpha_star: Vec<f64>,
    pub bias: f64,
    pub gamma: f64,
    pub c: f64,
    pub epsilon_tube: f64,
    pub iterations: usize,
    /// Maximal KKT violation when the solver stopped.
    pub kkt_gap: f64,
}

fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d2).exp()
}

fn kernel_matrix(z: &Matrix, gamma: f64) -> Matrix {
    let s = z.rows();
    let mut k = Matrix::zeros(s, s);
    for i in 0..s {
        k.set(i, i, 1.0);
        for j in i + 1..s {
            let v = rbf(z.row(i), z.row(j), gamma);
            k.set(i, j, v);
            k.set(j, i, v);
        }
    }
    k
}

/// The 2S-variable dual `min ½βᵀQβ + pᵀβ, Σ yₜβₜ = 0, 0 ≤ β ≤ C`, with
/// `β = [α; α*]`, `yₜ = ±1` and `Q_tu = yₜ y_u K`.
struct Dual<'a> {
    kernel: &'a Matrix,
    s: usize,
    c: f64,
}

impl Dual<'_> {
    #[inline]
    fn sign(&self, t: usize) -> f64 {
        if t < self.s {
            1.0
        } else {
            -1.0
        }
    }

    #[inline]
    fn q(&self, t: usize, u: usize) -> f64 {
        self.sign(t) * self.sign(u) * self.kernel.get(t % self.s, u % self.s)
    }

    fn in_up(&self, t: usize, beta: &[f64]) -> bool {
        if self.sign(t) > 0.0 {
            beta[t] < self.c
        } else {
            beta[t] > 0.0
        }
    }

    fn in_low(&self, t: usize, beta: &[f64]) -> bool {
        if self.sign(t) > 0.0 {
            beta[t] > 0.0
        } else {
            beta[t] < self.c
        }
    }

    /// `max_{I_up} −y G − min_{I_low} −y G`.
    fn violation(&self, beta: &[f64], grad: &[f64]) -> f64 {
        let mut up = f64::NEG_INFINITY;
        let mut low = f64::INFINITY;
        for t in 0..2 * self.s {
            let v = -self.sign(t) * grad[t];
            if self.in_up(t, beta) {
                up = up.max(v);
            }
            if self.in_low(t, beta) {
                low = low.min(v);
            }
        }
        if up.is_finite() && low.is_finite() {
            up - low
        } else {
            0.0
        }
    }

    fn gradient(&self, beta: &[f64], linear: &[f64]) -> Vec<f64> {
        (0..2 * self.s)
            .map(|t| {
                linear[t]
                    + (0..2 * self.s)
                        .filter(|&u| beta[u] != 0.0)
                        .map(|u| self.q(t, u) * beta[u])
                        .sum::<f64>()
            })
            .collect()
    }
}

fn linear_term(y: &[f64], eps: f64) -> Vec<f64> {
    y.iter()
        .map(|v| eps - v)
        .chain(y.iter().map(|v| eps + v))
        .collect()
}

const TAU: f64 = 1e-12;

pub fn fit_svr(x: &Matrix, y: &[f64], params: &SvrParams) -> Result<SvrModel> {
    check_training_data(x, y)?;
    let bad = |name, reason: &str| {
        Err(Error::InvalidParameter {
            name,
            reason: reason.into(),
        })
    };
    if !(params.c > 0.0) {
        return bad("c", "must be positive");
    }
    if !(params.epsilon_tube >= 0.0) {
        return bad("epsilon_tube", "must be non-negative");
    }
    if !(params.tol > 0.0) {
        return bad("tol", "must be positive");
    }
    let gamma = params.gamma.unwrap_or(1.0 / x.cols().max(1) as f64);
    if !(gamma > 0.0) {
        return bad("gamma", "must be positive");
    }

    let scaler = Standardizer::fit(x);
    let z = scaler.transform(x);
    let kernel = kernel_matrix(&z, gamma);
    let s = y.len();
    let l = 2 * s;
    let c = params.c;
    let dual = Dual {
        kernel: &kernel,
        s,
        c,
    };
    let linear = linear_term(y, params.epsilon_tube);
    let mut beta = vec![0.0; l];
    let mut grad = linear.clone();

    let mut iterations = 0;
    let gap = loop {
        // first index: maximal violator in I_up
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..l {
            if dual.in_up(t, &beta) {
                let v = -dual.sign(t) * grad[t];
                if v > gmax {
                    gmax = v;
                    i_sel = Some(t);
                }
            }
        }
        // second index: largest second-order decrease in I_low
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j_sel = None;
        let mut obj_min = f64::INFINITY;
        if let Some(i) = i_sel {
            for t in 0..l {
                if !dual.in_low(t, &beta) {
                    continue;
                }
                let yg = dual.sign(t) * grad[t];
                gmax2 = gmax2.max(yg);
                let b = gmax + yg;
                if b > 0.0 {
                    let k_ii = kernel.get(i % s, i % s);
                    let k_tt = kernel.get(t % s, t % s);
                    let k_it = kernel.get(i % s, t % s);
                    let a = k_ii + k_tt - 2.0 * k_it;
                    let a = if a > 0.0 { a } else { TAU };
                    let obj = -(b * b) / a;
                    if obj <= obj_min {
                        obj_min = obj;
                        j_sel = Some(t);
                    }
                }
            }
        }
        let gap = if gmax.is_finite() && gmax2.is_finite() {
            gmax + gmax2
        } else {
            0.0
        };
        let (Some(i), Some(j)) = (i_sel, j_sel) else {
            break gap;
        };
        if gap < params.tol {
            break gap;
        }
        if iterations >= params.max_iter {
            return Err(Error::NotConverged {
                iterations,
                violation: gap,
            });
        }
        iterations += 1;

        let (old_i, old_j) = (beta[i], beta[j]);
        let q_ij = dual.q(i, j);
        let (q_ii, q_jj) = (dual.q(i, i), dual.q(j, j));
        if dual.sign(i) != dual.sign(j) {
            let quad = (q_ii + q_jj + 2.0 * q_ij).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = beta[i] - beta[j];
            beta[i] += delta;
            beta[j] += delta;
            if diff > 0.0 {
                if beta[j] < 0.0 {
                    beta[j] = 0.0;
                    beta[i] = diff;
                }
            } else if beta[i] < 0.0 {
                beta[i] = 0.0;
                beta[j] = -diff;
            }
            if diff > 0.0 {
                if beta[i] > c {
                    beta[i] = c;
                    beta[j] = c - diff;
                }
            } else if beta[j] > c {
                beta[j] = c;
                beta[i] = c + diff;
            }
        } else {
            let quad = (q_ii + q_jj - 2.0 * q_ij).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = beta[i] + beta[j];
            beta[i] -= delta;
            beta[j] += delta;
            if sum > c {
                if beta[i] > c {
                    beta[i] = c;
                    beta[j] = sum - c;
                }
            } else if beta[j] < 0.0 {
                beta[j] = 0.0;
                beta[i] = sum;
            }
            if sum > c {
                if beta[j] > c {
                    beta[j] = c;
                    beta[i] = sum - c;
                }
            } else if beta[i] < 0.0 {
                beta[i] = 0.0;
                beta[j] = sum;
            }
        }
        let (d_i, d_j) = (beta[i] - old_i, beta[j] - old_j);
        for t in 0..l {
            grad[t] += dual.q(t, i) * d_i + dual.q(t, j) * d_j;
        }
    };

    // bias from free variables, else the midpoint of the feasible interval
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free_sum, mut free_count) = (0.0, 0usize);
    for t in 0..l {
        let yg = dual.sign(t) * grad[t];
        let positive = dual.sign(t) > 0.0;
        if beta[t] >= c {
            if positive {
                lb = lb.max(yg);
            } else {
                ub = ub.min(yg);
            }
        } else if beta[t] <= 0.0 {
            if positive {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free_sum += yg;
            free_count += 1;
        }
    }
    let rho = if free_count > 0 {
        free_sum / free_count as f64
    } else {
        (ub + lb) / 2.0
    };

    Ok(SvrModel {
        scaler,
        support: z,
        alpha: beta[..s].to_vec(),
        alpha_star: beta[s..].to_vec(),
        bias: -rho,
        gamma,
        c,
        epsilon_tube: params.epsilon_tube,
        iterations,
        kkt_gap: gap,
    })
}

impl SvrModel {
    pub(crate) fn predict_row(&self, row: &[f64]) -> f64 {
        let mut z = vec![0.0; row.len()];
        self.scaler.transform_row(row, &mut z);
        let mut acc = self.bias;
        for (k, (a, a_star)) in self.alpha.iter().zip(&self.alpha_star).enumerate() {
            let coef = a - a_star;
            if coef != 0.0 {
                acc += coef * rbf(self.support.row(k), &z, self.gamma);
            }
        }
        acc
    }

    /// Dual objective `−½ Σ βᵢβⱼKᵢⱼ − ε Σ(α+α*) + Σ yᵢβᵢ` with `β = α − α*`.
    pub fn dual_objective(&self, y: &[f64]) -> f64 {
        let kernel = kernel_matrix(&self.support, self.gamma);
        let coef: Vec<f64> = self
            .alpha
            .iter()
            .zip(&self.alpha_star)
            .map(|(a, b)| a - b)
            .collect();
        let quad: f64 = (0..coef.len())
            .map(|i| {
                coef[i]
                    * (0..coef.len())
                        .map(|j| coef[j] * kernel.get(i, j))
                        .sum::<f64>()
            })
            .sum();
        let l1: f64 = self.alpha.iter().chain(&self.alpha_star).sum();
        let lin: f64 = coef.iter().zip(y).map(|(c, v)| c * v).sum();
        -0.5 * quad - self.epsilon_tube * l1 + lin
    }

    /// Maximal KKT violation recomputed from the stored dual variables.
    pub fn kkt_violation(&self, y: &[f64]) -> f64 {
        let kernel = kernel_matrix(&self.support, self.gamma);
        let s = self.alpha.len();
        let dual = Dual {
            kernel: &kernel,
            s,
            c: self.c,
        };
        let beta: Vec<f64> = self.alpha.iter().chain(&self.alpha_star).copied().collect();
        let grad = dual.gradient(&beta, &linear_term(y, self.epsilon_tube));
        dual.violation(&beta, &grad)
    }
}
