//! Small dense solvers: Cholesky for ridge-type systems and cyclic Jacobi
//! for symmetric eigenproblems.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Matrix, Result};
#[allow(unused_imports)] // unused only when std is linked
use num_traits::Float;

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    /// Fails with [`Error::SingularSystem`] when a pivot is not positive
    /// relative to the matrix scale.
    pub fn factor(a: &Matrix) -> Result<Self> {
        let n = a.rows();
        if a.cols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: a.cols(),
            });
        }
        let scale = (0..n).map(|i| a.get(i, i).abs()).fold(0.0, f64::max);
        let tol = scale * 1e-13 * n as f64;
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut d = a.get(j, j);
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if !(d > tol) {
                return Err(Error::SingularSystem);
            }
            let d = d.sqrt();
            l[j * n + j] = d;
            for i in j + 1..n {
                let mut s = a.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / d;
            }
        }
        Ok(Self { n, l })
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        if b.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: b.len(),
            });
        }
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.l[i * n + k] * y[k];
            }
            y[i] = s / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= self.l[k * n + i] * y[k];
            }
            y[i] = s / self.l[i * n + i];
        }
        Ok(y)
    }
}

/// `XᵀX` for an S×F matrix.
pub fn gram(x: &Matrix) -> Matrix {
    let f = x.cols();
    let mut g = Matrix::zeros(f, f);
    for row in x.row_iter() {
        for a in 0..f {
            let ra = row[a];
            if ra == 0.0 {
                continue;
            }
            let g_row = g.row_mut(a);
            for b in a..f {
                g_row[b] += ra * row[b];
            }
        }
    }
    for a in 0..f {
        for b in 0..a {
            let v = g.get(b, a);
            g.set(a, b, v);
        }
    }
    g
}

/// `X Xᵀ` for an S×F matrix.
pub fn outer_gram(x: &Matrix) -> Matrix {
    let s = x.rows();
    let mut g = Matrix::zeros(s, s);
    for i in 0..s {
        for j in i..s {
            let v = crate::matrix::dot(x.row(i), x.row(j));
            g.set(i, j, v);
            g.set(j, i, v);
        }
    }
    g
}

/// `Xᵀv`.
pub fn transpose_mul_vec(x: &Matrix, v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; x.cols()];
    for (row, &vi) in x.row_iter().zip(v) {
        for (o, &r) in out.iter_mut().zip(row) {
            *o += r * vi;
        }
    }
    out
}

/// Eigen-decomposition of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Eigenvectors as columns, matching `values`.
    pub vectors: Matrix,
}

/// Cyclic Jacobi rotations until the off-diagonal mass is negligible.
pub fn symmetric_eigen(a: &Matrix) -> Result<SymmetricEigen> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: a.cols(),
        });
    }
    let mut m = a.clone();
    let mut v = Matrix::identity(n);
    let total: f64 = m.frobenius_sq();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += m.get(p, q) * m.get(p, q);
            }
        }
        if off <= total * 1e-30 || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let app = m.get(p, p);
                let aqq = m.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m.get(k, p);
                    let mkq = m.get(k, q);
                    m.set(k, p, c * mkp - s * mkq);
                    m.set(k, q, s * mkp + c * mkq);
                }
                for k in 0..n {
                    let mpk = m.get(p, k);
                    let mqk = m.get(q, k);
                    m.set(p, k, c * mpk - s * mqk);
                    m.set(q, k, s * mpk + c * mqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m.get(j, j).total_cmp(&m.get(i, i)).then(i.cmp(&j)));
    let values = order.iter().map(|&i| m.get(i, i)).collect();
    let vectors = v.select_columns(&order);
    Ok(SymmetricEigen { values, vectors })
}
