//! Ablation evaluation over the held-out split.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::{AblationMode, Classifier, ClassifierSettings};
use crate::config::RunConfig;
use crate::error::Result;
use crate::fuzzy::{build_weight_table, FuzzyWeightTable};
use crate::imagery::{DatasetSplit, LabeledImage, DIGITS};
use crate::model::Model;
use crate::selection::{reference_pool, ExemplarPool};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub mode: AblationMode,
    pub samples: usize,
    /// `None` when there were no test samples.
    pub accuracy: Option<f64>,
    /// Row = true digit, column = predicted digit.
    pub confusion: [[u64; DIGITS]; DIGITS],
    pub uncertain_count: usize,
    pub per_digit_accuracy: [Option<f64>; DIGITS],
    pub config_fingerprint: String,
    /// Not persisted: report files must be reproducible byte for byte.
    #[serde(skip)]
    pub wall_time: f64,
}

impl EvalReport {
    fn from_predictions(
        mode: AblationMode,
        outcomes: &[(u8, u8, bool)],
        fingerprint: &str,
        wall_time: f64,
    ) -> Self {
        let mut confusion = [[0u64; DIGITS]; DIGITS];
        let mut uncertain_count = 0;
        for &(truth, predicted, uncertain) in outcomes {
            confusion[truth as usize][predicted as usize] += 1;
            uncertain_count += uncertain as usize;
        }
        let ratio = |hits: u64, total: u64| (total > 0).then(|| hits as f64 / total as f64);
        let total: u64 = confusion.iter().flatten().sum();
        let correct: u64 = (0..DIGITS).map(|d| confusion[d][d]).sum();
        let mut per_digit_accuracy = [None; DIGITS];
        for (d, acc) in per_digit_accuracy.iter_mut().enumerate() {
            *acc = ratio(confusion[d][d], confusion[d].iter().sum());
        }
        EvalReport {
            mode,
            samples: outcomes.len(),
            accuracy: ratio(correct, total),
            confusion,
            uncertain_count,
            per_digit_accuracy,
            config_fingerprint: fingerprint.to_string(),
            wall_time,
        }
    }

    /// Every field except `mode` and `wall_time`.
    pub fn same_outcome(&self, other: &EvalReport) -> bool {
        self.samples == other.samples
            && self.accuracy == other.accuracy
            && self.confusion == other.confusion
            && self.uncertain_count == other.uncertain_count
            && self.per_digit_accuracy == other.per_digit_accuracy
            && self.config_fingerprint == other.config_fingerprint
    }

    /// `true\pred,0..9` header, one row per true digit.
    pub fn confusion_csv(&self) -> String {
        let mut out = String::from("true\\pred");
        for d in 0..DIGITS {
            let _ = write!(out, ",{d}");
        }
        out.push('\n');
        for (d, row) in self.confusion.iter().enumerate() {
            let _ = write!(out, "{d}");
            for count in row {
                let _ = write!(out, ",{count}");
            }
            out.push('\n');
        }
        out
    }
}

fn fmt_opt(value: Option<f64>) -> String {
    value.map(|v| format!("{v}")).unwrap_or_default()
}

/// `mode,accuracy,acc_0..acc_9`, one row per report.
pub fn summary_csv(reports: &[EvalReport]) -> String {
    let mut out = String::from("mode,accuracy");
    for d in 0..DIGITS {
        let _ = write!(out, ",acc_{d}");
    }
    out.push('\n');
    for r in reports {
        let _ = write!(out, "{},{}", r.mode, fmt_opt(r.accuracy));
        for acc in r.per_digit_accuracy {
            let _ = write!(out, ",{}", fmt_opt(acc));
        }
        out.push('\n');
    }
    out
}

/// Plain-text accuracy table.
pub fn summary_table(reports: &[EvalReport]) -> String {
    let mut out = format!("{:<12} {:>8} {:>9} {:>10}\n", "mode", "samples", "accuracy", "uncertain");
    for r in reports {
        let acc = r
            .accuracy
            .map(|a| format!("{:.2}%", 100.0 * a))
            .unwrap_or_else(|| "n/a".into());
        let _ = writeln!(out, "{:<12} {:>8} {:>9} {:>10}", r.mode.name(), r.samples, acc, r.uncertain_count);
    }
    out
}

/// Comparand pools and weight tables for one mode.
pub struct ModeInputs {
    pub pools: Vec<ExemplarPool>,
    pub tables: Vec<Option<FuzzyWeightTable>>,
}

/// Pools built from the raw training split (fonts plus up to `cap` samples
/// per digit), each sample weighted by its own font similarity.
pub fn reference_inputs(
    split: &DatasetSplit,
    fonts_from: &[ExemplarPool],
    config: &RunConfig,
) -> Result<ModeInputs> {
    let pools = (0..DIGITS)
        .map(|d| {
            let train = split.train.get(d).map(Vec::as_slice).unwrap_or(&[]);
            let take = config.ablation_train_cap.unwrap_or(train.len()).min(train.len());
            reference_pool(d as u8, &train[..take], &fonts_from[d].fonts, &config.ssim)
        })
        .collect::<Result<Vec<_>>>()?;
    let tables = pools.iter().map(|p| build_weight_table(p).ok()).collect();
    Ok(ModeInputs { pools, tables })
}

/// Classifies every test sample (digit order, then split order).
pub fn run_mode(
    mode: AblationMode,
    test: &[Vec<LabeledImage>],
    inputs: &ModeInputs,
    settings: ClassifierSettings,
    fingerprint: &str,
) -> Result<EvalReport> {
    let start = Instant::now();
    let classifier = Classifier::new(&inputs.pools, &inputs.tables, mode, settings)?;
    let samples: Vec<&LabeledImage> = test.iter().flatten().collect();
    let outcomes = samples
        .par_iter()
        .map(|s| {
            let r = classifier.classify(&s.image)?;
            Ok((s.label, r.predicted, r.uncertain))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalReport::from_predictions(
        mode,
        &outcomes,
        fingerprint,
        start.elapsed().as_secs_f64(),
    ))
}

pub fn evaluate(mode: AblationMode, split: &DatasetSplit, model: &Model, config: &RunConfig) -> Result<EvalReport> {
    Ok(compare_modes_subset(&[mode], split, model, config)?.remove(0))
}

/// All four modes on the same split, in `AblationMode::ALL` order.
pub fn compare_modes(split: &DatasetSplit, model: &Model, config: &RunConfig) -> Result<Vec<EvalReport>> {
    compare_modes_subset(&AblationMode::ALL, split, model, config)
}

pub fn compare_modes_subset(
    modes: &[AblationMode],
    split: &DatasetSplit,
    model: &Model,
    config: &RunConfig,
) -> Result<Vec<EvalReport>> {
    model.check_fingerprint(config)?;
    let settings = config.classifier_settings();
    let trained = ModeInputs {
        pools: model.pools.clone(),
        tables: model.tables.clone(),
    };
    let reference = if modes.iter().any(|m| !m.uses_selection()) {
        Some(reference_inputs(split, &model.pools, config)?)
    } else {
        None
    };
    modes
        .iter()
        .map(|&mode| {
            let inputs = if mode.uses_selection() {
                &trained
            } else {
                reference.as_ref().expect("built above")
            };
            run_mode(mode, &split.test, inputs, settings, &model.fingerprint)
        })
        .collect()
}
