//! Artifact configuration: a versioned TOML file holding the hardware
//! profile, generation ranges, scheduler rule thresholds, and training
//! defaults. Tests pin the shipped `config/default.toml` so every consumer
//! agrees on the reference values.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::oracle::{HardwareProfile, ProfileError};
use crate::workload::{ActivationFunction, DataType, ExecutionMode, MYRIAD};

/// Schema version this crate reads and writes.
pub const CONFIG_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config schema_version {found} unsupported (expected {expected})")]
    SchemaMismatch { found: u32, expected: u32 },
    #[error("config field {field}: {reason}")]
    InvalidValue { field: String, reason: String },
    #[error("missing {kind} entry for {name}")]
    MissingEntry { kind: &'static str, name: String },
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error("failed to parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Numeric sampling ranges for the workload generation suite.
///
/// Extents are sampled log-uniformly over the inclusive ranges; padding is
/// sampled uniformly in `0..=padding_max` (clamped below the kernel size);
/// sparsity is drawn uniformly from `sparsity_levels` (repeat a value to
/// weight it).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRanges {
    pub batch: (u32, u32),
    pub spatial: (u32, u32),
    pub channels: (u32, u32),
    pub kernel: (u32, u32),
    pub stride: (u32, u32),
    pub padding_max: u32,
    pub output_write_tiles: (u32, u32),
    pub sparsity_levels: Vec<f64>,
}

impl GenerationRanges {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let check = |name: &str, (lo, hi): (u32, u32)| -> Result<(), ConfigError> {
            if lo == 0 || hi < lo {
                return Err(ConfigError::InvalidValue {
                    field: format!("generation.{name}"),
                    reason: format!("range [{lo}, {hi}] must satisfy 1 <= lo <= hi"),
                });
            }
            Ok(())
        };
        check("batch", self.batch)?;
        check("spatial", self.spatial)?;
        check("channels", self.channels)?;
        check("kernel", self.kernel)?;
        check("stride", self.stride)?;
        check("output_write_tiles", self.output_write_tiles)?;
        if self.sparsity_levels.is_empty() {
            return Err(ConfigError::InvalidValue {
                field: "generation.sparsity_levels".into(),
                reason: "at least one level required".into(),
            });
        }
        for &s in &self.sparsity_levels {
            if !(0.0..=1.0).contains(&s) {
                return Err(ConfigError::InvalidValue {
                    field: "generation.sparsity_levels".into(),
                    reason: format!("level {s} outside [0, 1]"),
                });
            }
        }
        Ok(())
    }
}

/// Thresholds for the rule-based scheduling baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleThresholds {
    /// Split on width when the output width exceeds this many elements.
    pub width_threshold: u32,
    /// Otherwise split on channels when the output channel count reaches this.
    pub channel_threshold: u32,
}

/// Training hyperparameters (see the mlp module for semantics).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingDefaults {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub min_delta: f64,
}

/// The parsed artifact configuration.
#[derive(Debug, Clone)]
pub struct ArtifactConfig {
    pub profile: HardwareProfile,
    pub generation: GenerationRanges,
    pub rules: RuleThresholds,
    pub training: TrainingDefaults,
    pub embedding_k: usize,
}

#[derive(Debug, Deserialize)]
struct RawConfig {
    schema_version: u32,
    profile: RawProfile,
    generation: GenerationRanges,
    rules: RuleThresholds,
    training: TrainingDefaults,
    embedding: RawEmbedding,
}

#[derive(Debug, Deserialize)]
struct RawEmbedding {
    k: usize,
}

#[derive(Debug, Deserialize)]
struct RawProfile {
    fixed_startup_cycles: u64,
    channel_alignment: u32,
    sparsity_speedup_cap: f64,
    macs_per_cycle: BTreeMap<String, u64>,
    dtype_throughput_factor: BTreeMap<String, f64>,
    activation_overhead: BTreeMap<String, f64>,
}

/// Converts a fractional factor to fixed-point 1/10000 units, requiring the
/// value to be exactly representable (at most four decimal places).
fn to_myriad(field: &str, value: f64) -> Result<u32, ConfigError> {
    if !value.is_finite() || value < 0.0 || value > 429_496.0 {
        return Err(ConfigError::InvalidValue {
            field: field.into(),
            reason: format!("{value} not a usable factor"),
        });
    }
    let scaled = value * MYRIAD as f64;
    let rounded = scaled.round();
    if (scaled - rounded).abs() > 1e-6 {
        return Err(ConfigError::InvalidValue {
            field: field.into(),
            reason: format!("{value} has more than four decimal places"),
        });
    }
    Ok(rounded as u32)
}

fn lookup<'a, T: Copy>(
    map: &'a BTreeMap<String, T>,
    kind: &'static str,
    name: &str,
) -> Result<T, ConfigError> {
    map.get(name).copied().ok_or(ConfigError::MissingEntry {
        kind,
        name: name.to_string(),
    })
}

/// TOML key for an execution mode in the `macs_per_cycle` table.
fn mode_key(mode: ExecutionMode) -> &'static str {
    match mode {
        ExecutionMode::Vector => "vector",
        ExecutionMode::Matrix => "matrix",
        ExecutionMode::VectorFP16 => "vector_fp16",
        ExecutionMode::Cuboid16x16 => "cuboid_16x16",
        ExecutionMode::Cuboid8x16 => "cuboid_8x16",
        ExecutionMode::Cuboid4x16 => "cuboid_4x16",
    }
}

fn activation_key(act: ActivationFunction) -> &'static str {
    match act {
        ActivationFunction::None => "none",
        ActivationFunction::RELU => "relu",
        ActivationFunction::LRELU => "lrelu",
        ActivationFunction::Add => "add",
        ActivationFunction::Sub => "sub",
        ActivationFunction::Mult => "mult",
    }
}

impl ArtifactConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text)?;
        if raw.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(ConfigError::SchemaMismatch {
                found: raw.schema_version,
                expected: CONFIG_SCHEMA_VERSION,
            });
        }

        let mut macs_per_cycle = [0u64; 6];
        for mode in ExecutionMode::ALL {
            macs_per_cycle[mode.ordinal() as usize] =
                lookup(&raw.profile.macs_per_cycle, "macs_per_cycle", mode_key(mode))?;
        }
        let mut dtype_factor = [0u32; 4];
        for dtype in DataType::ALL {
            let f = lookup(
                &raw.profile.dtype_throughput_factor,
                "dtype_throughput_factor",
                dtype.name(),
            )?;
            dtype_factor[dtype.ordinal() as usize] =
                to_myriad(&format!("profile.dtype_throughput_factor.{}", dtype.name()), f)?;
        }
        let mut activation_overhead = [0u32; 6];
        for act in ActivationFunction::ALL {
            let f = lookup(
                &raw.profile.activation_overhead,
                "activation_overhead",
                activation_key(act),
            )?;
            activation_overhead[act.ordinal() as usize] = to_myriad(
                &format!("profile.activation_overhead.{}", activation_key(act)),
                f,
            )?;
        }
        let cap = to_myriad("profile.sparsity_speedup_cap", raw.profile.sparsity_speedup_cap)?;

        let profile = HardwareProfile::new(
            macs_per_cycle,
            dtype_factor,
            raw.profile.fixed_startup_cycles,
            raw.profile.channel_alignment,
            activation_overhead,
            cap,
        )?;

        raw.generation.validate()?;
        if raw.training.learning_rate <= 0.0
            || raw.training.batch_size == 0
            || raw.training.max_epochs == 0
            || raw.training.patience == 0
            || raw.training.patience >= raw.training.max_epochs
            || raw.training.min_delta < 0.0
        {
            return Err(ConfigError::InvalidValue {
                field: "training".into(),
                reason: "values must be positive with patience < max_epochs".into(),
            });
        }
        if raw.embedding.k == 0 {
            return Err(ConfigError::InvalidValue {
                field: "embedding.k".into(),
                reason: "k must be at least 1".into(),
            });
        }

        Ok(ArtifactConfig {
            profile,
            generation: raw.generation,
            rules: raw.rules,
            training: raw.training,
            embedding_k: raw.embedding.k,
        })
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }
}

/// The reference configuration shipped with the repository.
pub const DEFAULT_CONFIG_TOML: &str = include_str!("../../../config/default.toml");

/// Parses the built-in reference configuration.
pub fn default_config() -> ArtifactConfig {
    ArtifactConfig::from_toml_str(DEFAULT_CONFIG_TOML)
        .expect("bundled default config must parse")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_parses_with_reference_values() {
        let cfg = default_config();
        assert_eq!(cfg.profile.macs_per_cycle(ExecutionMode::Vector), 16);
        assert_eq!(cfg.profile.macs_per_cycle(ExecutionMode::Matrix), 256);
        assert_eq!(cfg.profile.macs_per_cycle(ExecutionMode::Cuboid16x16), 4096);
        assert_eq!(cfg.profile.dtype_factor_myriad(DataType::Int8), 10_000);
        assert_eq!(cfg.profile.dtype_factor_myriad(DataType::Float16), 5_000);
        assert_eq!(cfg.profile.fixed_startup_cycles(), 1_000);
        assert_eq!(cfg.profile.channel_alignment(), 16);
        assert_eq!(
            cfg.profile.activation_overhead_myriad(ActivationFunction::LRELU),
            1_000
        );
        assert_eq!(
            cfg.profile.activation_overhead_myriad(ActivationFunction::RELU),
            200
        );
        assert_eq!(cfg.profile.sparsity_cap_myriad(), 5_000);
        assert_eq!(cfg.rules.width_threshold, 75);
        assert_eq!(cfg.rules.channel_threshold, 64);
        assert_eq!(cfg.training.batch_size, 64);
        assert_eq!(cfg.training.max_epochs, 1000);
        assert_eq!(cfg.training.patience, 100);
        assert_eq!(cfg.training.min_delta, 0.1);
        assert_eq!(cfg.embedding_k, 4);
    }

    #[test]
    fn schema_version_is_enforced() {
        let text = DEFAULT_CONFIG_TOML.replace("schema_version = 1", "schema_version = 9");
        assert!(matches!(
            ArtifactConfig::from_toml_str(&text),
            Err(ConfigError::SchemaMismatch { found: 9, .. })
        ));
    }

    #[test]
    fn inexact_factors_are_rejected()
    {
        let text = DEFAULT_CONFIG_TOML.replace("relu = 0.02", "relu = 0.020001");
        assert!(matches!(
            ArtifactConfig::from_toml_str(&text),
            Err(ConfigError::InvalidValue { .. })
        ));
    }
}
