use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classifier::{Aggregate, ClassifierSettings};
use crate::error::{Error, Result};
use crate::selection::SelectionConfig;
use crate::ssim::SsimParams;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectionRule {
    pub threshold: f64,
    pub rounds: u32,
}

impl Default for SelectionRule {
    fn default() -> Self {
        let d = SelectionConfig::default();
        SelectionRule {
            threshold: d.threshold,
            rounds: d.rounds,
        }
    }
}

/// Everything a run depends on. Relative paths are resolved against the
/// directory holding the config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub images: PathBuf,
    pub labels: PathBuf,
    pub template_dir: PathBuf,
    pub split_ratio: f64,
    pub per_digit_cap: usize,
    pub seed: u64,
    pub selection: SelectionRule,
    pub ssim: SsimParams,
    pub gamma: f64,
    pub margin_threshold: f64,
    pub aggregate: Aggregate,
    /// Per-digit cap on the training samples used as comparands by the
    /// modes that skip selection. `None` uses the whole training split.
    pub ablation_train_cap: Option<usize>,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            images: PathBuf::from("train-images-idx3-ubyte"),
            labels: PathBuf::from("train-labels-idx1-ubyte"),
            template_dir: PathBuf::from("templates"),
            split_ratio: 0.8,
            per_digit_cap: 1000,
            seed: 0,
            selection: SelectionRule::default(),
            ssim: SsimParams::default(),
            gamma: 1.0,
            margin_threshold: 0.05,
            aggregate: Aggregate::Mean,
            ablation_train_cap: None,
            output_dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<()> {
        self.selection_config().validate()?;
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return Err(Error::Config(format!(
                "split_ratio {} is not in (0, 1)",
                self.split_ratio
            )));
        }
        if self.per_digit_cap == 0 {
            return Err(Error::Config("per_digit_cap must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::Config(format!("gamma {} is not in [0, 1]", self.gamma)));
        }
        if !(self.margin_threshold >= 0.0) {
            return Err(Error::Config(format!(
                "margin_threshold {} is negative",
                self.margin_threshold
            )));
        }
        if self.ablation_train_cap == Some(0) {
            return Err(Error::Config("ablation_train_cap must be at least 1".into()));
        }
        Ok(())
    }

    pub fn selection_config(&self) -> SelectionConfig {
        SelectionConfig {
            threshold: self.selection.threshold,
            rounds: self.selection.rounds,
            ssim: self.ssim,
        }
    }

    pub fn classifier_settings(&self) -> ClassifierSettings {
        ClassifierSettings {
            gamma: self.gamma,
            margin_threshold: self.margin_threshold,
            aggregate: self.aggregate,
            ssim: self.ssim,
        }
    }

    /// SHA-256 of the compact JSON form, hex encoded.
    pub fn fingerprint(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serialises");
        Sha256::digest(&bytes)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// A config together with the directory its relative paths hang off.
#[derive(Clone, Debug, PartialEq)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub base_dir: PathBuf,
}

impl LoadedConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let config = RunConfig::from_json(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base_dir = path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_default();
        Ok(LoadedConfig { config, base_dir })
    }

    pub fn in_dir(config: RunConfig, base_dir: impl Into<PathBuf>) -> Self {
        LoadedConfig {
            config,
            base_dir: base_dir.into(),
        }
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn images(&self) -> PathBuf {
        self.resolve(&self.config.images)
    }

    pub fn labels(&self) -> PathBuf {
        self.resolve(&self.config.labels)
    }

    pub fn template_dir(&self) -> PathBuf {
        self.resolve(&self.config.template_dir)
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve(&self.config.output_dir)
    }
}
