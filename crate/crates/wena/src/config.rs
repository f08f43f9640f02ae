use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use wena_core::connectivity::{FcMethod, DEFAULT_MI_BINS, DEFAULT_THRESHOLD};
use wena_core::encoder::AeConfig;
use wena_core::evaluation::ReliefParams;
use wena_core::ingest::QcThresholds;
use wena_core::pipeline::{pattern_ae_config, Encoding, PipelineConfig, Predictor};

use crate::error::{Result, WenaError};

/// Everything a `run` needs. Relative paths in a config file are resolved
/// against the file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub manifest: Option<PathBuf>,
    pub output: Option<PathBuf>,
    /// One label per line, in ROI order.
    pub roi_labels: Option<PathBuf>,
    pub fc_method: FcMethod,
    pub mi_bins: usize,
    pub threshold: f64,
    pub detrend: bool,
    /// Include graph indices as a second feature block.
    pub use_graph: bool,
    pub k: usize,
    pub seed: u64,
    /// Worker threads; 0 uses every available core.
    pub threads: usize,
    /// Covariate correlated against the encoded features.
    pub covariate: String,
    pub qc: QcThresholds,
    pub encoding: Encoding,
    pub edge_ae: AeConfig,
    pub graph_ae: AeConfig,
    pub pattern_ae: AeConfig,
    pub predictor: Predictor,
    pub relief: ReliefParams,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            manifest: None,
            output: None,
            roi_labels: None,
            fc_method: FcMethod::Pearson,
            mi_bins: DEFAULT_MI_BINS,
            threshold: DEFAULT_THRESHOLD,
            detrend: true,
            use_graph: true,
            k: 10,
            seed: 0,
            threads: 0,
            covariate: "age".into(),
            qc: QcThresholds::default(),
            encoding: Encoding::Autoencoder,
            edge_ae: AeConfig::default(),
            graph_ae: AeConfig::default(),
            pattern_ae: pattern_ae_config(),
            predictor: Predictor::default(),
            relief: ReliefParams::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| WenaError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| WenaError::Config(format!("{}: {e}", path.display())))?;
        let mut config = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [
            &mut config.manifest,
            &mut config.output,
            &mut config.roi_labels,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(config)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| WenaError::Config(e.to_string()))
    }

    pub fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            encoding: self.encoding,
            edge_ae: self.edge_ae,
            graph_ae: self.graph_ae,
            predictor: self.predictor.clone(),
            seed: self.seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(WenaError::Config(m));
        if self.manifest.is_none() {
            return bad("no manifest given".into());
        }
        if self.output.is_none() {
            return bad("no output directory given".into());
        }
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return bad(format!("threshold {} is outside (0, 1]", self.threshold));
        }
        if self.k < 2 {
            return bad(format!("k must be at least 2, got {}", self.k));
        }
        if self.mi_bins < 2 {
            return bad(format!("mi_bins must be at least 2, got {}", self.mi_bins));
        }
        let core = |e: wena_core::Error| WenaError::Config(e.to_string());
        self.pipeline().validate().map_err(core)?;
        self.pattern_ae.validate().map_err(core)
    }
}
