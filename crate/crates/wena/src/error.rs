use std::fmt;
use std::io;
use std::path::{Path, PathBuf};

/// Pipeline stage an error is attributed to; used as the message prefix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Ingest,
    Qc,
    Fc,
    Graph,
    Encode,
    Train,
    Evaluate,
    Rank,
    Pattern,
    Synth,
    Output,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Config => "config",
            Stage::Ingest => "ingest",
            Stage::Qc => "qc",
            Stage::Fc => "fc",
            Stage::Graph => "graph",
            Stage::Encode => "encode",
            Stage::Train => "train",
            Stage::Evaluate => "evaluate",
            Stage::Rank => "rank",
            Stage::Pattern => "pattern",
            Stage::Synth => "synth",
            Stage::Output => "output",
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum WenaError {
    #[error("ingest: manifest not found")]
    ManifestNotFound(PathBuf),
    #[error("ingest: duplicate subject id {0:?}")]
    DuplicateSubject(String),
    #[error("ingest: missing column {0:?}")]
    MissingColumn(String),
    #[error("ingest: {path}: expected {expected} ROI columns, found {actual}")]
    RoiCountMismatch {
        path: PathBuf,
        expected: usize,
        actual: usize,
    },
    #[error("ingest: {path}: non-finite value at row {row}, column {col}")]
    NonFiniteValue {
        path: PathBuf,
        row: usize,
        col: usize,
    },
    #[error("{stage}: {path}: {message}")]
    Parse {
        stage: Stage,
        path: PathBuf,
        message: String,
    },
    #[error("{stage}: {path}: {source}")]
    Io {
        stage: Stage,
        path: PathBuf,
        source: io::Error,
    },
    #[error("{stage}: {source}")]
    Core {
        stage: Stage,
        source: wena_core::Error,
    },
    #[error("config: {0}")]
    Config(String),
    #[error("{stage}: {message}")]
    Invalid { stage: Stage, message: String },
}

pub type Result<T, E = WenaError> = std::result::Result<T, E>;

impl WenaError {
    /// 2 for usage and configuration problems, 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            WenaError::ManifestNotFound(_) | WenaError::Config(_) => 2,
            _ => 1,
        }
    }

    pub fn io(stage: Stage, path: &Path, source: io::Error) -> Self {
        WenaError::Io {
            stage,
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn parse(stage: Stage, path: &Path, message: impl fmt::Display) -> Self {
        WenaError::Parse {
            stage,
            path: path.to_path_buf(),
            message: message.to_string(),
        }
    }

    pub fn invalid(stage: Stage, message: impl fmt::Display) -> Self {
        WenaError::Invalid {
            stage,
            message: message.to_string(),
        }
    }
}

/// Attaches a stage to core results.
pub trait AtStage<T> {
    fn at(self, stage: Stage) -> Result<T>;
}

impl<T> AtStage<T> for wena_core::Result<T> {
    fn at(self, stage: Stage) -> Result<T> {
        self.map_err(|source| WenaError::Core { stage, source })
    }
}
