//! In-memory subject data: ROI time series, motion traces, head-motion
//! summary, QC rules and linear detrending.

use alloc::vec::Vec;

#[allow(unused_imports)] // unused only when std is linked
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::{Error, Matrix, Result};

/// One subject's T×N ROI signal matrix (rows are time points).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeriesMatrix(Matrix);

impl TimeSeriesMatrix {
    pub fn new(values: Matrix) -> Result<Self> {
        if values.rows() < 3 {
            return Err(Error::TooFewTimePoints {
                required: 3,
                actual: values.rows(),
            });
        }
        if values.cols() < 2 {
            return Err(Error::TooFewRois {
                required: 2,
                actual: values.cols(),
            });
        }
        if let Some((row, col)) = values.find_non_finite() {
            return Err(Error::NonFiniteValue { row, col });
        }
        Ok(Self(values))
    }

    pub fn t(&self) -> usize {
        self.0.rows()
    }

    pub fn n(&self) -> usize {
        self.0.cols()
    }

    pub fn values(&self) -> &Matrix {
        &self.0
    }

    pub fn into_inner(self) -> Matrix {
        self.0
    }
}

/// M×6 rigid-body motion parameters: translations x,y,z in mm then
/// rotations x,y,z in degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionTrace(Matrix);

impl MotionTrace {
    pub fn new(values: Matrix) -> Result<Self> {
        if values.cols() != 6 {
            return Err(Error::DimensionMismatch {
                expected: 6,
                actual: values.cols(),
            });
        }
        if values.rows() < 2 {
            return Err(Error::TooFewTimePoints {
                required: 2,
                actual: values.rows(),
            });
        }
        if let Some((row, col)) = values.find_non_finite() {
            return Err(Error::NonFiniteValue { row, col });
        }
        Ok(Self(values))
    }

    pub fn m(&self) -> usize {
        self.0.rows()
    }

    pub fn values(&self) -> &Matrix {
        &self.0
    }

    pub fn max_abs_translation(&self) -> f64 {
        self.max_abs_in(0..3)
    }

    pub fn max_abs_rotation(&self) -> f64 {
        self.max_abs_in(3..6)
    }

    fn max_abs_in(&self, cols: core::ops::Range<usize>) -> f64 {
        self.0
            .row_iter()
            .flat_map(|row| row[cols.clone()].iter().map(|v| v.abs()))
            .fold(0.0, f64::max)
    }
}

/// Mean framewise displacement over the six parameters:
/// `1/(M-1) · Σ_{i≥2} ‖d_i − d_{i−1}‖₂`, rotations taken in degrees as given.
pub fn head_motion(trace: &MotionTrace) -> f64 {
    let m = trace.values();
    let steps = m.rows() - 1;
    let total: f64 = (1..m.rows())
        .map(|i| {
            m.row(i)
                .iter()
                .zip(m.row(i - 1))
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        })
        .sum();
    total / steps as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QcThresholds {
    pub max_translation_mm: f64,
    pub max_rotation_deg: f64,
    pub max_mean_fd: f64,
}

impl Default for QcThresholds {
    fn default() -> Self {
        Self {
            max_translation_mm: 2.5,
            max_rotation_deg: 2.5,
            max_mean_fd: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QcRule {
    TranslationExceeded,
    RotationExceeded,
    MeanFdExceeded,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QcViolation {
    pub rule: QcRule,
    pub value: f64,
    pub threshold: f64,
}

/// Every rule the trace violates; empty means the subject is retained.
pub fn qc_violations(trace: &MotionTrace, thresholds: &QcThresholds) -> Vec<QcViolation> {
    let checks = [
        (
            QcRule::TranslationExceeded,
            trace.max_abs_translation(),
            thresholds.max_translation_mm,
        ),
        (
            QcRule::RotationExceeded,
            trace.max_abs_rotation(),
            thresholds.max_rotation_deg,
        ),
        (
            QcRule::MeanFdExceeded,
            head_motion(trace),
            thresholds.max_mean_fd,
        ),
    ];
    checks
        .into_iter()
        .filter(|&(_, value, threshold)| value > threshold)
        .map(|(rule, value, threshold)| QcViolation {
            rule,
            value,
            threshold,
        })
        .collect()
}

/// Removes the least-squares line `a + b·t` from every column.
pub fn detrend(ts: &TimeSeriesMatrix) -> TimeSeriesMatrix {
    let m = ts.values();
    let t_len = m.rows();
    let t_mean = (t_len as f64 - 1.0) / 2.0;
    let stt: f64 = (0..t_len).map(|t| (t as f64 - t_mean).powi(2)).sum();
    let mut out = m.clone();
    for j in 0..m.cols() {
        let col = m.column(j);
        let mean = crate::stats::mean(&col);
        let sty: f64 = col
            .iter()
            .enumerate()
            .map(|(t, y)| (t as f64 - t_mean) * (y - mean))
            .sum();
        let slope = sty / stt;
        for (t, y) in col.iter().enumerate() {
            out.set(t, j, (y - mean) - slope * (t as f64 - t_mean));
        }
    }
    TimeSeriesMatrix(out)
}
