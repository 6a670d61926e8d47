//! Run configuration: optional TOML config file merged with CLI overrides.
//! Unknown keys in a config file are hard errors.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::features::FeatureConfig;
use crate::harness::{ExperimentPreset, PresetName};
use crate::lorenz96::ModelParams;
use crate::ridge::ReadoutMode;
use crate::{Error, Result};

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub preset: Option<PresetName>,
    /// Explicit model parameters override the preset's.
    pub model: Option<ModelParams>,
    pub features: Option<FeatureConfig>,
    pub mode: Option<ReadoutMode>,
    pub alpha: Option<f64>,
    pub t_train: Option<f64>,
    pub t_record: Option<f64>,
    pub seed_train: Option<u64>,
    pub seed_ic: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Overlay `other` (e.g. CLI flags) on top of this config.
    pub fn merged_with(mut self, other: RunConfig) -> RunConfig {
        macro_rules! take {
            ($($field:ident),*) => {
                $(if other.$field.is_some() { self.$field = other.$field; })*
            };
        }
        take!(preset, model, features, mode, alpha, t_train, t_record, seed_train, seed_ic, workers, out);
        self
    }

    /// Resolve to a concrete experiment preset, applying model/feature
    /// overrides.
    pub fn resolve_preset(&self) -> Result<ExperimentPreset> {
        let name = self
            .preset
            .ok_or_else(|| Error::Config("no preset specified".into()))?;
        let mut preset = ExperimentPreset::get(name);
        if let Some(model) = self.model {
            model.validate()?;
            preset.params = model;
        }
        if let Some(features) = self.features {
            features.validate(preset.params.l)?;
            preset.feature = features;
        }
        Ok(preset)
    }

    pub fn mode(&self) -> ReadoutMode {
        self.mode.unwrap_or(ReadoutMode::PerLocation)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(1e-2)
    }

    /// Worker count: explicit value, then NGRC_WORKERS, then all cores.
    pub fn workers(&self) -> Option<usize> {
        self.workers.or_else(|| {
            std::env::var("NGRC_WORKERS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_config() {
        let toml = r#"
            preset = "flat"
            mode = "shared"
            alpha = 1e-5
            t_train = 1.0
            t_record = 100.0
            seed_train = 3
            workers = 2

            [features]
            k = 3
            n_nn = 2
            c = 1.0
        "#;
        let cfg: RunConfig = toml::from_str(toml).unwrap();
        assert_eq!(cfg.preset, Some(PresetName::Flat));
        assert_eq!(cfg.mode(), ReadoutMode::Shared);
        let preset = cfg.resolve_preset().unwrap();
        assert_eq!(preset.params.l, 40);
        assert_eq!(preset.feature.k, 3);
    }

    #[test]
    fn unknown_keys_rejected() {
        let toml = "preset = \"main\"\nbogus_key = 1\n";
        assert!(toml::from_str::<RunConfig>(toml).is_err());
    }

    #[test]
    fn cli_overrides_file() {
        let file = RunConfig {
            preset: Some(PresetName::Main),
            alpha: Some(1e-2),
            ..Default::default()
        };
        let cli = RunConfig {
            alpha: Some(1e-5),
            ..Default::default()
        };
        let merged = file.merged_with(cli);
        assert_eq!(merged.preset, Some(PresetName::Main));
        assert_eq!(merged.alpha, Some(1e-5));
    }
}
