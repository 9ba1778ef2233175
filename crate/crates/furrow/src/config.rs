//! TOML application config. Every section and key is optional and falls back
//! to its default; unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use furrow_core::classical::OtsuCannyParams;
use furrow_core::datakit::{AugmentSpec, QualityGate, SplitWeights};
use furrow_core::guidance::GuidanceConfig;
use furrow_core::{CameraModel, DetectorConfig};

use crate::error::{Error, Result};
use crate::io::DEFAULT_DEPTH_SCALE;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IoConfig {
    /// Meters per stored depth unit.
    pub depth_scale: f64,
    /// Output directory when `--out-dir` is not given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

impl Default for IoConfig {
    fn default() -> Self {
        Self {
            depth_scale: DEFAULT_DEPTH_SCALE,
            out_dir: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AppConfig {
    pub detector: DetectorConfig,
    pub camera: CameraModel,
    pub guidance: GuidanceConfig,
    pub augment: AugmentSpec,
    pub canny: OtsuCannyParams,
    pub quality: QualityGate,
    pub splits: SplitWeights,
    pub io: IoConfig,
}

impl AppConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::ConfigParse(inner) => Error::format(path, inner.to_string()),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.detector.validate()?;
        self.camera.validate()?;
        self.guidance.validate()?;
        self.augment.validate()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = AppConfig::default();
        let text = cfg.to_toml().unwrap();
        assert_eq!(AppConfig::from_toml(&text).unwrap(), cfg);
    }

    #[test]
    fn empty_file_is_defaults() {
        assert_eq!(AppConfig::from_toml("").unwrap(), AppConfig::default());
    }

    #[test]
    fn partial_sections_keep_other_defaults() {
        let cfg = AppConfig::from_toml("[detector]\nband_shift = 7\n[camera]\nmount_height = 0.6\n").unwrap();
        assert_eq!(cfg.detector.band_shift, 7);
        assert_eq!(cfg.detector.band_width, 25);
        assert_eq!(cfg.camera.mount_height, 0.6);
        assert_eq!(cfg.camera.fx, 337.0);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(AppConfig::from_toml("[detector]\nband_shiftt = 7\n").is_err());
        assert!(AppConfig::from_toml("[detectors]\n").is_err());
    }

    #[test]
    fn band_limit_forms() {
        let cfg = AppConfig::from_toml("[detector]\nmax_bands = 12\n").unwrap();
        assert_eq!(cfg.detector.max_bands, furrow_core::matcher::BandLimit::Count(12));
        let cfg = AppConfig::from_toml("[detector]\nmax_bands = \"unbounded\"\n").unwrap();
        assert_eq!(cfg.detector.max_bands, furrow_core::matcher::BandLimit::Unbounded);
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(AppConfig::from_toml("[detector]\ntemplate_size = 31\n").is_err());
        assert!(AppConfig::from_toml("[augment]\nnegative_fraction = 1.5\n").is_err());
    }
}
