//! Weighted nearest-pool classification.
//!
//! A test image is scored against every digit's comparands (font templates
//! plus exemplars). Each SSIM value is multiplied by the comparand's weight
//! and the products are aggregated per digit; the highest aggregate wins.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fuzzy::{discount, FuzzyWeightTable};
use crate::imagery::{GrayImage, DIGITS};
use crate::selection::ExemplarPool;
use crate::ssim::{Prepared, Ssim, SsimParams};

/// The four ablation configurations.
///
/// `SsimOnly` and `FuzzyOnly` compare against every training sample;
/// `RlOnly` and `Full` against the selected exemplar pools. `FuzzyOnly` and
/// `Full` weight each exemplar by its fuzzy reward weight. Which comparands a
/// pool holds is up to the caller; the mode here only decides weighting.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AblationMode {
    SsimOnly,
    FuzzyOnly,
    RlOnly,
    Full,
}

impl AblationMode {
    pub const ALL: [AblationMode; 4] = [
        AblationMode::SsimOnly,
        AblationMode::FuzzyOnly,
        AblationMode::RlOnly,
        AblationMode::Full,
    ];

    pub fn weighted(self) -> bool {
        matches!(self, AblationMode::FuzzyOnly | AblationMode::Full)
    }

    pub fn uses_selection(self) -> bool {
        matches!(self, AblationMode::RlOnly | AblationMode::Full)
    }

    pub fn name(self) -> &'static str {
        match self {
            AblationMode::SsimOnly => "ssim_only",
            AblationMode::FuzzyOnly => "fuzzy_only",
            AblationMode::RlOnly => "rl_only",
            AblationMode::Full => "full",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        AblationMode::ALL.into_iter().find(|m| m.name() == key)
    }
}

impl std::fmt::Display for AblationMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregate {
    #[default]
    Mean,
    Max,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSettings {
    pub gamma: f64,
    pub margin_threshold: f64,
    pub aggregate: Aggregate,
    pub ssim: SsimParams,
}

impl Default for ClassifierSettings {
    fn default() -> Self {
        ClassifierSettings {
            gamma: 1.0,
            margin_threshold: 0.05,
            aggregate: Aggregate::Mean,
            ssim: SsimParams::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationResult {
    pub scores: [f64; DIGITS],
    pub predicted: u8,
    pub runner_up: u8,
    pub margin: f64,
    pub uncertain: bool,
}

impl ClassificationResult {
    /// Argmax with the smallest digit winning ties.
    pub fn from_scores(scores: [f64; DIGITS], margin_threshold: f64) -> Self {
        let best = |skip: Option<usize>| {
            let mut pick: Option<usize> = None;
            for d in (0..DIGITS).filter(|&d| Some(d) != skip) {
                if pick.is_none_or(|p| scores[d] > scores[p]) {
                    pick = Some(d);
                }
            }
            pick.unwrap_or(0)
        };
        let predicted = best(None);
        let runner_up = best(Some(predicted));
        let margin = scores[predicted] - scores[runner_up];
        ClassificationResult {
            scores,
            predicted: predicted as u8,
            runner_up: runner_up as u8,
            margin,
            uncertain: margin < margin_threshold,
        }
    }
}

/// Comparand weights for one pool: 1 for fonts, and for exemplars either 1
/// or the discounted fuzzy weight.
fn comparand_weights(
    pool: &ExemplarPool,
    table: Option<&FuzzyWeightTable>,
    mode: AblationMode,
    gamma: f64,
) -> Result<Vec<f64>> {
    let mut weights = vec![1.0; pool.fonts.len()];
    if !mode.weighted() || pool.selected.is_empty() {
        weights.extend(std::iter::repeat(1.0).take(pool.selected.len()));
        return Ok(weights);
    }
    let missing = |i: usize| Error::Key {
        digit: pool.digit,
        source_index: pool.selected[i].source_index,
    };
    let table = table.ok_or_else(|| missing(0))?;
    for (i, exemplar) in pool.selected.iter().enumerate() {
        // tables are built in pool order; fall back to a lookup otherwise
        let weight = match table.exemplars.get(i) {
            Some(&idx) if idx == exemplar.source_index => table.weights[i],
            _ => table.weight_of(exemplar.source_index).map_err(|_| missing(i))?,
        };
        weights.push(discount(gamma, exemplar.round) * weight);
    }
    Ok(weights)
}

fn aggregate(values: impl Iterator<Item = f64>, how: Aggregate) -> f64 {
    match how {
        Aggregate::Mean => {
            let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
            sum / n as f64
        }
        Aggregate::Max => values.fold(f64::NEG_INFINITY, f64::max),
    }
}

struct DigitComparands {
    prepared: Vec<Prepared>,
    weights: Vec<f64>,
}

/// Pools and weights with all comparand moments precomputed.
pub struct Classifier {
    engine: Ssim,
    settings: ClassifierSettings,
    digits: Vec<DigitComparands>,
}

impl Classifier {
    /// `tables[d]` may be `None` when digit `d` selected nothing.
    pub fn new(
        pools: &[ExemplarPool],
        tables: &[Option<FuzzyWeightTable>],
        mode: AblationMode,
        settings: ClassifierSettings,
    ) -> Result<Self> {
        if pools.len() != DIGITS || tables.len() != DIGITS {
            return Err(Error::Config(format!(
                "need {DIGITS} pools and tables, got {} and {}",
                pools.len(),
                tables.len()
            )));
        }
        let engine = Ssim::new(settings.ssim)?;
        let digits = pools
            .iter()
            .zip(tables)
            .map(|(pool, table)| {
                if pool.is_empty() {
                    return Err(Error::EmptyPool { digit: pool.digit });
                }
                Ok(DigitComparands {
                    prepared: pool
                        .members()
                        .map(|img| engine.prepare(img))
                        .collect::<Result<_>>()?,
                    weights: comparand_weights(pool, table.as_ref(), mode, settings.gamma)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Classifier {
            engine,
            settings,
            digits,
        })
    }

    pub fn settings(&self) -> &ClassifierSettings {
        &self.settings
    }

    /// Multiplies every comparand weight, fonts included, by `k`.
    pub fn with_weight_scale(mut self, k: f64) -> Self {
        for digit in &mut self.digits {
            for w in &mut digit.weights {
                *w *= k;
            }
        }
        self
    }

    pub fn scores(&self, test: &GrayImage) -> Result<[f64; DIGITS]> {
        let probe = self.engine.prepare(test)?;
        let mut scores = [0.0; DIGITS];
        for (score, digit) in scores.iter_mut().zip(&self.digits) {
            let values = digit
                .prepared
                .iter()
                .zip(&digit.weights)
                .map(|(member, w)| Ok(self.engine.compare(&probe, member)? * w))
                .collect::<Result<Vec<f64>>>()?;
            *score = aggregate(values.into_iter(), self.settings.aggregate);
        }
        Ok(scores)
    }

    pub fn classify(&self, test: &GrayImage) -> Result<ClassificationResult> {
        Ok(ClassificationResult::from_scores(
            self.scores(test)?,
            self.settings.margin_threshold,
        ))
    }
}

/// Mean over comparands of SSIM times weight. Falls back to the fonts alone
/// when the pool selected nothing.
pub fn score_digit(
    test: &GrayImage,
    pool: &ExemplarPool,
    table: Option<&FuzzyWeightTable>,
    mode: AblationMode,
    gamma: f64,
    params: &SsimParams,
) -> Result<f64> {
    if pool.is_empty() {
        return Err(Error::EmptyPool { digit: pool.digit });
    }
    let engine = Ssim::new(*params)?;
    let probe = engine.prepare(test)?;
    let weights = comparand_weights(pool, table, mode, gamma)?;
    let values = pool
        .members()
        .zip(&weights)
        .map(|(member, w)| Ok(engine.compare(&probe, &engine.prepare(member)?)? * w))
        .collect::<Result<Vec<f64>>>()?;
    Ok(aggregate(values.into_iter(), Aggregate::Mean))
}

pub fn classify(
    test: &GrayImage,
    pools: &[ExemplarPool],
    tables: &[Option<FuzzyWeightTable>],
    mode: AblationMode,
    settings: ClassifierSettings,
) -> Result<ClassificationResult> {
    Classifier::new(pools, tables, mode, settings)?.classify(test)
}
