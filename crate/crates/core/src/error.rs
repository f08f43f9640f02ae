use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("ragged rows: row {row} has {actual} values, expected {expected}")]
    RaggedRows {
        row: usize,
        expected: usize,
        actual: usize,
    },
    #[error("need at least {required} time points, got {actual}")]
    TooFewTimePoints { required: usize, actual: usize },
    #[error("need at least {required} ROIs, got {actual}")]
    TooFewRois { required: usize, actual: usize },
    #[error("need at least {required} samples, got {actual}")]
    TooFewSamples { required: usize, actual: usize },
    #[error("non-finite value at row {row}, column {col}")]
    NonFiniteValue { row: usize, col: usize },
    #[error("column {0} has zero variance")]
    ConstantSeries(usize),
    #[error("target has zero variance")]
    ConstantTarget,
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("negative edge weight {weight} on edge ({i}, {j})")]
    NegativeWeight { i: usize, j: usize, weight: f64 },
    #[error("linear system is singular or not positive definite")]
    SingularSystem,
    #[error("training diverged at epoch {epoch}; lower the learning rate")]
    Diverged { epoch: usize },
    #[error(
        "SVR solver did not converge after {iterations} iterations (KKT violation {violation:e})"
    )]
    NotConverged { iterations: usize, violation: f64 },
    #[error("stream weights are degenerate: sum of R/MAE ratios is {0}")]
    DegenerateWeights(f64),
    #[error("stacking layers must be in 2..=4, got {0}")]
    LayersOutOfRange(usize),
    #[error("feature blocks do not match the trained stack: {0}")]
    BlockMismatch(String),
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },
}
