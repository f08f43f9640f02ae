//! Feature compression: min-max normalization, a single-hidden-layer sigmoid
//! autoencoder with weight decay, encoder-weight back-projection onto edges
//! and ROIs, and a PCA baseline.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // unused only when std is linked
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::connectivity::{edge_pairs, nodes_for_edges};
use crate::linalg::{gram, outer_gram, symmetric_eigen};
use crate::matrix::dot;
use crate::rng::{seeded, uniform};
use crate::{Error, FeatureMatrix, Matrix, Result};

/// Per-feature min/max taken from training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl Normalizer {
    pub fn fit(train: &Matrix) -> Result<Self> {
        if train.rows() == 0 {
            return Err(Error::TooFewSamples {
                required: 1,
                actual: 0,
            });
        }
        let mut min = train.row(0).to_vec();
        let mut max = min.clone();
        for row in train.row_iter().skip(1) {
            for ((lo, hi), &v) in min.iter_mut().zip(max.iter_mut()).zip(row) {
                *lo = lo.min(v);
                *hi = hi.max(v);
            }
        }
        Ok(Self { min, max })
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    /// Maps into `[0, 1]`, clipping unseen values; constant features map to 0.5.
    pub fn transform_row(&self, row: &[f64], out: &mut [f64]) {
        for (((o, &v), &lo), &hi) in out.iter_mut().zip(row).zip(&self.min).zip(&self.max) {
            let range = hi - lo;
            *o = if range > 0.0 {
                ((v - lo) / range).clamp(0.0, 1.0)
            } else {
                0.5
            };
        }
    }

    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        check_dim(self.dim(), x.cols())?;
        let mut out = Matrix::zeros(x.rows(), x.cols());
        for i in 0..x.rows() {
            self.transform_row(x.row(i), out.row_mut(i));
        }
        Ok(out)
    }
}

fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}

#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AeConfig {
    pub hidden: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    /// Weight-decay coefficient on the squared Frobenius norm.
    pub epsilon: f64,
    /// Also decay the decoder weights (otherwise encoder only).
    pub decay_decoder: bool,
    pub seed: u64,
}

impl Default for AeConfig {
    fn default() -> Self {
        Self {
            hidden: 50,
            epochs: 500,
            learning_rate: 0.1,
            momentum: 0.9,
            epsilon: 1e-4,
            decay_decoder: true,
            seed: 0,
        }
    }
}

impl AeConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: &str| {
            Err(Error::InvalidParameter {
                name,
                reason: reason.into(),
            })
        };
        if self.hidden == 0 {
            return bad("hidden", "must be at least 1");
        }
        if self.epochs == 0 {
            return bad("epochs", "must be at least 1");
        }
        if !(self.learning_rate > 0.0) {
            return bad("learning_rate", "must be positive");
        }
        if !(self.epsilon >= 0.0) {
            return bad("epsilon", "must be non-negative");
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad("momentum", "must be in [0, 1)");
        }
        Ok(())
    }
}

/// Trained autoencoder: `h = σ(W x + b)`, `r = σ(W_dec h + b_dec)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AeModel {
    /// hidden × input
    pub w: Matrix,
    pub b: Vec<f64>,
    /// input × hidden
    pub w_dec: Matrix,
    pub b_dec: Vec<f64>,
    pub normalizer: Normalizer,
    pub config: AeConfig,
    pub initial_loss: f64,
    pub final_loss: f64,
}

/// Gradients with the same shapes as the model parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct AeGradient {
    pub w: Matrix,
    pub b: Vec<f64>,
    pub w_dec: Matrix,
    pub b_dec: Vec<f64>,
}

impl AeModel {
    pub fn input_dim(&self) -> usize {
        self.w.cols()
    }

    pub fn hidden_dim(&self) -> usize {
        self.w.rows()
    }

    /// Parameters only, with an identity normalizer; used to build nets by hand.
    pub fn from_parameters(
        w: Matrix,
        b: Vec<f64>,
        w_dec: Matrix,
        b_dec: Vec<f64>,
        config: AeConfig,
    ) -> Result<Self> {
        check_dim(w.rows(), b.len())?;
        check_dim(w.cols(), w_dec.rows())?;
        check_dim(w.rows(), w_dec.cols())?;
        check_dim(w_dec.rows(), b_dec.len())?;
        let d = w.cols();
        Ok(Self {
            w,
            b,
            w_dec,
            b_dec,
            normalizer: Normalizer {
                min: vec![0.0; d],
                max: vec![1.0; d],
            },
            config,
            initial_loss: 0.0,
            final_loss: 0.0,
        })
    }

    fn encode_into(&self, x: &[f64], h: &mut [f64]) {
        for (k, hk) in h.iter_mut().enumerate() {
            *hk = sigmoid(dot(self.w.row(k), x) + self.b[k]);
        }
    }

    fn decode_into(&self, h: &[f64], r: &mut [f64]) {
        for (i, ri) in r.iter_mut().enumerate() {
            *ri = sigmoid(dot(self.w_dec.row(i), h) + self.b_dec[i]);
        }
    }

    /// Hidden activations for an already-normalized input.
    pub fn encode(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.input_dim(), x.len())?;
        let mut h = vec![0.0; self.hidden_dim()];
        self.encode_into(x, &mut h);
        Ok(h)
    }

    pub fn decode(&self, h: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.hidden_dim(), h.len())?;
        let mut r = vec![0.0; self.input_dim()];
        self.decode_into(h, &mut r);
        Ok(r)
    }

    fn penalty(&self) -> f64 {
        let dec = if self.config.decay_decoder {
            self.w_dec.frobenius_sq()
        } else {
            0.0
        };
        self.config.epsilon * (self.w.frobenius_sq() + dec)
    }

    /// Mean squared reconstruction error per row plus the weight-decay term.
    pub fn loss(&self, x: &Matrix) -> Result<f64> {
        check_dim(self.input_dim(), x.cols())?;
        if x.rows() == 0 {
            return Err(Error::TooFewSamples {
                required: 1,
                actual: 0,
            });
        }
        let mut h = vec![0.0; self.hidden_dim()];
        let mut r = vec![0.0; self.input_dim()];
        let mut total = 0.0;
        for row in x.row_iter() {
            self.encode_into(row, &mut h);
            self.decode_into(&h, &mut r);
            total += row
                .iter()
                .zip(&r)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>();
        }
        Ok(total / x.rows() as f64 + self.penalty())
    }

    /// Loss and its exact gradient by backpropagation.
    pub fn loss_and_gradient(&self, x: &Matrix) -> Result<(f64, AeGradient)> {
        check_dim(self.input_dim(), x.cols())?;
        let s = x.rows();
        if s == 0 {
            return Err(Error::TooFewSamples {
                required: 1,
                actual: 0,
            });
        }
        let (hd, d) = (self.hidden_dim(), self.input_dim());
        let mut g = AeGradient {
            w: Matrix::zeros(hd, d),
            b: vec![0.0; hd],
            w_dec: Matrix::zeros(d, hd),
            b_dec: vec![0.0; d],
        };
        let mut h = vec![0.0; hd];
        let mut r = vec![0.0; d];
        let mut delta_h = vec![0.0; hd];
        let scale = 2.0 / s as f64;
        let mut total = 0.0;
        for row in x.row_iter() {
            self.encode_into(row, &mut h);
            self.decode_into(&h, &mut r);
            delta_h.iter_mut().for_each(|v| *v = 0.0);
            for i in 0..d {
                let err = r[i] - row[i];
                total += err * err;
                let delta = scale * err * r[i] * (1.0 - r[i]);
                if delta == 0.0 {
                    continue;
                }
                g.b_dec[i] += delta;
                let w_dec_row = self.w_dec.row(i);
                for ((gw, dh), (&hk, &wk)) in g
                    .w_dec
                    .row_mut(i)
                    .iter_mut()
                    .zip(delta_h.iter_mut())
                    .zip(h.iter().zip(w_dec_row))
                {
                    *gw += delta * hk;
                    *dh += delta * wk;
                }
            }
            for k in 0..hd {
                let dk = delta_h[k] * h[k] * (1.0 - h[k]);
                if dk == 0.0 {
                    continue;
                }
                g.b[k] += dk;
                for (gw, &xi) in g.w.row_mut(k).iter_mut().zip(row) {
                    *gw += dk * xi;
                }
            }
        }
        let eps2 = 2.0 * self.config.epsilon;
        for (gw, &w) in g.w.as_mut_slice().iter_mut().zip(self.w.as_slice()) {
            *gw += eps2 * w;
        }
        if self.config.decay_decoder {
            for (gw, &w) in g.w_dec.as_mut_slice().iter_mut().zip(self.w_dec.as_slice()) {
                *gw += eps2 * w;
            }
        }
        Ok((total / s as f64 + self.penalty(), g))
    }

    pub fn gradient(&self, x: &Matrix) -> Result<AeGradient> {
        self.loss_and_gradient(x).map(|(_, g)| g)
    }

    fn parameters_finite(&self) -> bool {
        self.w.is_finite()
            && self.w_dec.is_finite()
            && self.b.iter().chain(&self.b_dec).all(|v| v.is_finite())
    }

    /// Normalizes raw rows (with clipping) and encodes them.
    pub fn features(&self, cohort: &Matrix) -> Result<FeatureMatrix> {
        let x = self.normalizer.transform(cohort)?;
        let mut out = Matrix::zeros(x.rows(), self.hidden_dim());
        for i in 0..x.rows() {
            let mut h = vec![0.0; self.hidden_dim()];
            self.encode_into(x.row(i), &mut h);
            out.row_mut(i).copy_from_slice(&h);
        }
        Ok(FeatureMatrix::with_prefix("ae", out))
    }
}

/// Fits the normalizer on `train`, then runs full-batch gradient descent
/// with momentum for `config.epochs` steps.
pub fn train_autoencoder(train: &Matrix, config: &AeConfig) -> Result<AeModel> {
    config.validate()?;
    if train.rows() < 2 {
        return Err(Error::TooFewSamples {
            required: 2,
            actual: train.rows(),
        });
    }
    let normalizer = Normalizer::fit(train)?;
    let x = normalizer.transform(train)?;
    let (d, hd) = (x.cols(), config.hidden);

    let mut rng = seeded(config.seed);
    let bound = (6.0 / (d + hd) as f64).sqrt();
    let w = Matrix::from_fn(hd, d, |_, _| uniform(&mut rng, -bound, bound));
    let w_dec = Matrix::from_fn(d, hd, |_, _| uniform(&mut rng, -bound, bound));
    let mut model = AeModel {
        w,
        b: vec![0.0; hd],
        w_dec,
        b_dec: vec![0.0; d],
        normalizer,
        config: *config,
        initial_loss: 0.0,
        final_loss: 0.0,
    };

    let mut vel = AeGradient {
        w: Matrix::zeros(hd, d),
        b: vec![0.0; hd],
        w_dec: Matrix::zeros(d, hd),
        b_dec: vec![0.0; d],
    };
    let (lr, mu) = (config.learning_rate, config.momentum);
    let step = |param: &mut [f64], vel: &mut [f64], grad: &[f64]| {
        for ((p, v), g) in param.iter_mut().zip(vel.iter_mut()).zip(grad) {
            *v = mu * *v - lr * g;
            *p += *v;
        }
    };
    for epoch in 0..config.epochs {
        let (loss, grad) = model.loss_and_gradient(&x)?;
        if !loss.is_finite() || !model.parameters_finite() {
            return Err(Error::Diverged { epoch });
        }
        if epoch == 0 {
            model.initial_loss = loss;
        }
        step(
            model.w.as_mut_slice(),
            vel.w.as_mut_slice(),
            grad.w.as_slice(),
        );
        step(&mut model.b, &mut vel.b, &grad.b);
        step(
            model.w_dec.as_mut_slice(),
            vel.w_dec.as_mut_slice(),
            grad.w_dec.as_slice(),
        );
        step(&mut model.b_dec, &mut vel.b_dec, &grad.b_dec);
    }
    let final_loss = model.loss(&x)?;
    if !final_loss.is_finite() || !model.parameters_finite() {
        return Err(Error::Diverged {
            epoch: config.epochs,
        });
    }
    model.final_loss = final_loss;
    Ok(model)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternEdge {
    pub i: usize,
    pub j: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoiImportance {
    pub roi: usize,
    pub label: Option<String>,
    pub importance: f64,
}

/// Encoder weights of one hidden unit mapped back onto edges and ROIs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternReport {
    pub hidden_index: usize,
    /// Sorted by |weight| descending, ties by edge order.
    pub edges: Vec<PatternEdge>,
    /// Sum of incident |weight| per ROI, sorted descending, ties by index.
    pub rois: Vec<RoiImportance>,
}

/// Back-projects row `hidden_index` of the encoder weights onto the
/// upper-triangle edge ordering the model was trained on.
pub fn extract_pattern(
    model: &AeModel,
    hidden_index: usize,
    roi_labels: Option<&[String]>,
) -> Result<PatternReport> {
    if hidden_index >= model.hidden_dim() {
        return Err(Error::IndexOutOfRange {
            index: hidden_index,
            len: model.hidden_dim(),
        });
    }
    let n = nodes_for_edges(model.input_dim()).ok_or_else(|| Error::InvalidParameter {
        name: "model",
        reason: alloc::format!("input dimension {} is not an edge count", model.input_dim()),
    })?;
    if let Some(labels) = roi_labels {
        check_dim(n, labels.len())?;
    }
    let row = model.w.row(hidden_index);
    let mut importance = vec![0.0; n];
    let mut edges: Vec<PatternEdge> = edge_pairs(n)
        .zip(row)
        .map(|((i, j), &weight)| {
            importance[i] += weight.abs();
            importance[j] += weight.abs();
            PatternEdge { i, j, weight }
        })
        .collect();
    edges.sort_by(|a, b| b.weight.abs().total_cmp(&a.weight.abs()));
    let mut rois: Vec<RoiImportance> = importance
        .into_iter()
        .enumerate()
        .map(|(roi, importance)| RoiImportance {
            roi,
            label: roi_labels.map(|l| l[roi].clone()),
            importance,
        })
        .collect();
    rois.sort_by(|a, b| b.importance.total_cmp(&a.importance));
    Ok(PatternReport {
        hidden_index,
        edges,
        rois,
    })
}

/// Principal-component projection fit on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pca {
    pub mean: Vec<f64>,
    /// features × components, orthonormal columns
    pub loadings: Matrix,
    /// Variance along each retained component.
    pub explained_variance: Vec<f64>,
}

impl Pca {
    pub fn fit(train: &Matrix, components: usize) -> Result<Self> {
        let (s, f) = (train.rows(), train.cols());
        if components == 0 || components > s.min(f) {
            return Err(Error::InvalidParameter {
                name: "components",
                reason: alloc::format!("must be in 1..={}, got {components}", s.min(f)),
            });
        }
        let mean: Vec<f64> = (0..f)
            .map(|j| crate::stats::mean(&train.column(j)))
            .collect();
        let centered = Matrix::from_fn(s, f, |i, j| train.get(i, j) - mean[j]);
        let denom = (s.max(2) - 1) as f64;

        let mut loadings = Matrix::zeros(f, components);
        let mut explained = Vec::with_capacity(components);
        if f <= s {
            let eig = symmetric_eigen(&gram(&centered))?;
            for k in 0..components {
                explained.push(eig.values[k].max(0.0) / denom);
                for j in 0..f {
                    loadings.set(j, k, eig.vectors.get(j, k));
                }
            }
        } else {
            // wide data: eigenvectors of X Xᵀ mapped through Xᵀ
            let eig = symmetric_eigen(&outer_gram(&centered))?;
            for k in 0..components {
                explained.push(eig.values[k].max(0.0) / denom);
                let u = eig.vectors.column(k);
                let v = crate::linalg::transpose_mul_vec(&centered, &u);
                let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
                if norm > 0.0 {
                    for j in 0..f {
                        loadings.set(j, k, v[j] / norm);
                    }
                }
            }
        }
        for k in 0..components {
            let col = loadings.column(k);
            let pivot = col.iter().enumerate().fold((0, 0.0f64), |best, (j, v)| {
                if v.abs() > best.1.abs() {
                    (j, *v)
                } else {
                    best
                }
            });
            if pivot.1 < 0.0 {
                for j in 0..f {
                    loadings.set(j, k, -loadings.get(j, k));
                }
            }
        }
        Ok(Self {
            mean,
            loadings,
            explained_variance: explained,
        })
    }

    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        check_dim(self.mean.len(), x.cols())?;
        let centered = Matrix::from_fn(x.rows(), x.cols(), |i, j| x.get(i, j) - self.mean[j]);
        centered.matmul(&self.loadings)
    }

    pub fn inverse_transform(&self, z: &Matrix) -> Result<Matrix> {
        let mut back = z.matmul(&self.loadings.transpose())?;
        for i in 0..back.rows() {
            for (v, m) in back.row_mut(i).iter_mut().zip(&self.mean) {
                *v += m;
            }
        }
        Ok(back)
    }
}

pub fn pca_fit_transform(
    train: &Matrix,
    cohort: &Matrix,
    components: usize,
) -> Result<FeatureMatrix> {
    let pca = Pca::fit(train, components)?;
    Ok(FeatureMatrix::with_prefix("pc", pca.transform(cohort)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalizer_cases() {
        let train = Matrix::from_rows(&[[2.0, 7.0], [4.0, 7.0], [6.0, 7.0]]).unwrap();
        let norm = Normalizer::fit(&train).unwrap();
        let t = norm.transform(&train).unwrap();
        assert_eq!(t.column(0), [0.0, 0.5, 1.0]);
        assert_eq!(t.column(1), [0.5, 0.5, 0.5]);
        let unseen = norm
            .transform(&Matrix::from_rows(&[[8.0, 1.0]]).unwrap())
            .unwrap();
        assert_eq!(unseen.row(0), [1.0, 0.5]);
        assert!(Normalizer::fit(&Matrix::zeros(0, 2)).is_err());
    }

    fn zero_net(d: usize, h: usize, epsilon: f64) -> AeModel {
        let config = AeConfig {
            hidden: h,
            epsilon,
            ..AeConfig::default()
        };
        AeModel::from_parameters(
            Matrix::zeros(h, d),
            vec![0.0; h],
            Matrix::zeros(d, h),
            vec![0.0; d],
            config,
        )
        .unwrap()
    }

    #[test]
    fn zero_weights_give_half_activations() {
        let m = zero_net(3, 2, 0.0);
        assert_eq!(m.encode(&[0.1, 0.9, 0.3]).unwrap(), [0.5, 0.5]);
        assert_eq!(m.decode(&[0.2, 0.7]).unwrap(), [0.5, 0.5, 0.5]);
        assert!(m.encode(&[0.1]).is_err());
    }

    #[test]
    fn saturated_bias() {
        let mut m = zero_net(2, 1, 0.0);
        m.b[0] = 50.0;
        let h = m.encode(&[0.3, 0.4]).unwrap();
        assert!((h[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn scalar_encode_matches_hand_evaluation() {
        let w = Matrix::from_rows(&[[0.7, -1.3]]).unwrap();
        let m = AeModel::from_parameters(
            w,
            vec![0.2],
            Matrix::zeros(2, 1),
            vec![0.0; 2],
            AeConfig::default(),
        )
        .unwrap();
        let x = [0.4, 0.9];
        let z: f64 = 0.7 * 0.4 - 1.3 * 0.9 + 0.2;
        let expected = 1.0 / (1.0 + (-z).exp());
        assert!((m.encode(&x).unwrap()[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn stationary_point_has_zero_gradient() {
        let m = zero_net(3, 2, 0.01);
        let x = Matrix::from_rows(&[[0.5; 3], [0.5; 3]]).unwrap();
        let (loss, g) = m.loss_and_gradient(&x).unwrap();
        assert_eq!(loss, 0.0);
        assert!(g
            .w
            .as_slice()
            .iter()
            .chain(g.w_dec.as_slice())
            .all(|&v| v == 0.0));
        assert!(g.b.iter().chain(&g.b_dec).all(|&v| v == 0.0));
    }

    #[test]
    fn decay_only_gradient_is_two_epsilon_w() {
        // b_dec fixed so r = 0.5, x = 0.5: reconstruction error vanishes,
        // only the penalty remains; the decoder row is zero so the hidden
        // layer receives no error signal either.
        let eps = 0.01;
        let mut m = zero_net(2, 2, eps);
        m.w = Matrix::from_rows(&[[0.3, -0.2], [1.1, 0.4]]).unwrap();
        let x = Matrix::from_rows(&[[0.5, 0.5]]).unwrap();
        let g = m.gradient(&x).unwrap();
        for (gw, w) in g.w.as_slice().iter().zip(m.w.as_slice()) {
            assert_eq!(*gw, 2.0 * eps * w);
        }
    }

    #[test]
    fn penalty_arithmetic() {
        let mut m = zero_net(2, 1, 0.01);
        // ‖W‖² + ‖W_dec‖² = 4 with W_dec = 0 keeps r = 0.5
        m.w = Matrix::from_rows(&[[2.0, 0.0]]).unwrap();
        let x = Matrix::from_rows(&[[0.5, 0.5]]).unwrap();
        assert!((m.loss(&x).unwrap() - 0.04).abs() < 1e-17);
    }

    #[test]
    fn diverges_with_huge_learning_rate() {
        let mut rng = seeded(3);
        let x = Matrix::from_fn(30, 8, |_, _| uniform(&mut rng, 0.0, 1.0));
        let config = AeConfig {
            hidden: 3,
            learning_rate: 1e6,
            ..AeConfig::default()
        };
        assert!(matches!(
            train_autoencoder(&x, &config),
            Err(Error::Diverged { .. })
        ));
    }

    #[test]
    fn pattern_from_one_hot_row() {
        // 8 ROIs → 28 edges; select edge (3, 7)
        let n = 8;
        let target = edge_pairs(n).position(|e| e == (3, 7)).unwrap();
        let mut w = Matrix::zeros(2, 28);
        w.set(1, target, 1.0);
        let m = AeModel::from_parameters(
            w,
            vec![0.0; 2],
            Matrix::zeros(28, 2),
            vec![0.0; 28],
            AeConfig::default(),
        )
        .unwrap();
        let p = extract_pattern(&m, 1, None).unwrap();
        assert_eq!((p.edges[0].i, p.edges[0].j), (3, 7));
        assert_eq!((p.rois[0].roi, p.rois[1].roi), (3, 7));
        assert_eq!(p.rois[0].importance, p.rois[1].importance);
        let zero = extract_pattern(&m, 0, None).unwrap();
        assert!(zero.rois.iter().all(|r| r.importance == 0.0));
        assert!(matches!(
            extract_pattern(&m, 2, None),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn pca_on_a_line() {
        let train = Matrix::from_rows(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]]).unwrap();
        let pca = Pca::fit(&train, 2).unwrap();
        assert!(pca.explained_variance[1].abs() < 1e-12);
        assert!(pca.explained_variance[0] > 0.0);
        assert!(Pca::fit(&train, 3).is_err());
    }
}
