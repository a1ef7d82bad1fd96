//! Pipeline configuration: one JSON document covering every stage, with
//! defaults matching the shipped presets.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::FusionConfig;
use crate::label::LabelConfig;
use crate::plane::PlaneDetectConfig;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnnotationConfig {
    pub embed_dim: usize,
    pub embed_seed: u64,
}

impl Default for AnnotationConfig {
    fn default() -> Self {
        AnnotationConfig {
            embed_dim: crate::annotate::DEFAULT_EMBED_DIM,
            embed_seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RetrievalConfig {
    pub top_k: usize,
    pub temperature: f64,
}

impl Default for RetrievalConfig {
    fn default() -> Self {
        RetrievalConfig {
            top_k: crate::retrieval::DEFAULT_TOP_K,
            temperature: crate::retrieval::DEFAULT_TEMPERATURE,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub version: u32,
    /// Confidence threshold applied when lifting pixels to 3D.
    pub tau_conf: f64,
    pub rng_seed: u64,
    /// Worker threads; 0 means use all available cores.
    pub threads: usize,
    pub plane: PlaneDetectConfig,
    pub label: LabelConfig,
    pub fusion: FusionConfig,
    pub annotation: AnnotationConfig,
    pub retrieval: RetrievalConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            version: CONFIG_VERSION,
            tau_conf: 3.0,
            rng_seed: 0,
            threads: 0,
            plane: PlaneDetectConfig::default(),
            label: LabelConfig::default(),
            fusion: FusionConfig::default(),
            annotation: AnnotationConfig::default(),
            retrieval: RetrievalConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<PipelineConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        let cfg: PipelineConfig =
            serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::InvalidConfig(format!(
                "unsupported config version {} (expected {CONFIG_VERSION})",
                self.version
            )));
        }
        let positive = [
            ("tau_conf", self.tau_conf),
            ("plane.tau_dist", self.plane.tau_dist),
            ("fusion.kappa", self.fusion.kappa),
            ("fusion.dbscan_eps_m", self.fusion.dbscan_eps_m),
            ("retrieval.temperature", self.retrieval.temperature),
        ];
        for (name, v) in positive {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if self.annotation.embed_dim == 0 {
            return Err(Error::InvalidConfig("annotation.embed_dim must be nonzero".into()));
        }
        if self.retrieval.top_k == 0 {
            return Err(Error::InvalidConfig("retrieval.top_k must be nonzero".into()));
        }
        Ok(())
    }

    /// Stable hex digest of the canonical config JSON; stored in graph meta.
    /// The thread count only affects scheduling, never results, so it is
    /// normalized out before hashing.
    pub fn fingerprint(&self) -> String {
        let mut canonical = self.clone();
        canonical.threads = 0;
        let value = serde_json::to_value(&canonical).expect("config serializes");
        let text = serde_json::to_string(&value).expect("value serializes");
        let mut h: u64 = 0xcbf29ce484222325;
        for b in text.as_bytes() {
            h ^= *b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
        format!("{h:016x}")
    }
}
