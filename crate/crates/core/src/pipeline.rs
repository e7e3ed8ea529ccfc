//! End-to-end steps shared by the CLI and the integration tests.

use std::fs;
use std::path::{Path, PathBuf};

use crate::classifier::AblationMode;
use crate::config::LoadedConfig;
use crate::error::{Error, Result};
use crate::eval::{compare_modes_subset, summary_csv, EvalReport};
use crate::fuzzy::build_weight_table;
use crate::imagery::{load_idx_images, load_idx_labels, load_templates, split_dataset, zip_labels, DatasetSplit};
use crate::model::Model;
use crate::selection::train_all;

pub fn load_split(cfg: &LoadedConfig) -> Result<DatasetSplit> {
    let images = load_idx_images(cfg.images())?;
    let labels = load_idx_labels(cfg.labels())?;
    let samples = zip_labels(images, &labels)?;
    let c = &cfg.config;
    split_dataset(&samples, c.split_ratio, c.per_digit_cap, c.seed)
}

pub struct Trained {
    pub model: Model,
    pub split: DatasetSplit,
}

pub fn train(cfg: &LoadedConfig) -> Result<Trained> {
    cfg.config.validate()?;
    let split = load_split(cfg)?;
    let templates = load_templates(cfg.template_dir())?;
    let pools = train_all(&split, &templates, &cfg.config.selection_config())?;
    let tables = pools.iter().map(|p| build_weight_table(p).ok()).collect();
    Ok(Trained {
        model: Model::new(cfg.config.clone(), pools, tables),
        split,
    })
}

pub fn evaluate(cfg: &LoadedConfig, model: &Model, modes: &[AblationMode]) -> Result<Vec<EvalReport>> {
    model.check_fingerprint(&cfg.config)?;
    let split = load_split(cfg)?;
    compare_modes_subset(modes, &split, model, &cfg.config)
}

fn write(path: PathBuf, contents: impl AsRef<[u8]>) -> Result<PathBuf> {
    fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Writes `reports.json`, `summary.csv` and one `confusion-<mode>.csv` per
/// report into `dir`.
pub fn write_reports(dir: &Path, reports: &[EvalReport]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut json = serde_json::to_string_pretty(reports)?;
    json.push('\n');
    let mut written = vec![
        write(dir.join("reports.json"), json)?,
        write(dir.join("summary.csv"), summary_csv(reports))?,
    ];
    for r in reports {
        written.push(write(dir.join(format!("confusion-{}.csv", r.mode)), r.confusion_csv())?);
    }
    Ok(written)
}

pub fn read_reports(path: &Path) -> Result<Vec<EvalReport>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}
