//! Round-based exemplar selection.
//!
//! Each digit starts with a pool holding only its font templates. In every
//! round, each remaining training candidate is scored by its mean SSIM
//! against the whole pool as it stood at the start of the round; candidates
//! scoring strictly above the threshold become exemplars and leave the
//! candidate set. An exemplar remembers its mean SSIM against the font
//! templates alone, which later drives its fuzzy weight.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imagery::{DatasetSplit, FontTemplate, GrayImage, LabeledImage, TemplateSet, DIGITS};
use crate::ssim::{Prepared, Ssim, SsimParams};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionConfig {
    pub threshold: f64,
    pub rounds: u32,
    pub ssim: SsimParams,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig {
            threshold: 0.40,
            rounds: 5,
            ssim: SsimParams::default(),
        }
    }
}

impl SelectionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::Config(format!(
                "selection threshold {} is not in (0, 1)",
                self.threshold
            )));
        }
        if self.rounds == 0 {
            return Err(Error::Config("at least one selection round is required".into()));
        }
        self.ssim.validate()
    }
}

/// Strict comparison: a score equal to the threshold is rejected.
#[inline]
pub fn crosses_threshold(score: f64, threshold: f64) -> bool {
    score > threshold
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Exemplar {
    pub image: GrayImage,
    pub digit: u8,
    /// Mean SSIM against the digit's font templates only.
    pub font_similarity: f64,
    /// Selection round, starting at 1. Round 0 is reserved for fonts.
    pub round: u32,
    /// Record index of the image in the source dataset.
    pub source_index: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExemplarPool {
    pub digit: u8,
    pub fonts: Vec<FontTemplate>,
    /// In selection order: by round, then by candidate order.
    pub selected: Vec<Exemplar>,
}

impl ExemplarPool {
    pub fn new(digit: u8, fonts: Vec<FontTemplate>) -> Self {
        ExemplarPool {
            digit,
            fonts,
            selected: Vec::new(),
        }
    }

    /// Fonts plus selected exemplars.
    pub fn len(&self) -> usize {
        self.fonts.len() + self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Members in scoring order: fonts first, then exemplars.
    pub fn members(&self) -> impl Iterator<Item = &GrayImage> {
        self.fonts
            .iter()
            .map(|f| &f.image)
            .chain(self.selected.iter().map(|e| &e.image))
    }

    /// Number of exemplars picked in each round `1..=rounds`.
    pub fn round_counts(&self, rounds: u32) -> Vec<usize> {
        (1..=rounds)
            .map(|r| self.selected.iter().filter(|e| e.round == r).count())
            .collect()
    }
}

/// Pool members with their moments computed once.
pub(crate) struct PreparedPool {
    fonts: Vec<Prepared>,
    selected: Vec<Prepared>,
}

impl PreparedPool {
    pub(crate) fn new(engine: &Ssim, pool: &ExemplarPool) -> Result<Self> {
        Ok(PreparedPool {
            fonts: pool
                .fonts
                .iter()
                .map(|f| engine.prepare(&f.image))
                .collect::<Result<_>>()?,
            selected: pool
                .selected
                .iter()
                .map(|e| engine.prepare(&e.image))
                .collect::<Result<_>>()?,
        })
    }

    fn mean_similarity(&self, engine: &Ssim, candidate: &Prepared, digit: u8) -> Result<f64> {
        let count = self.fonts.len() + self.selected.len();
        if count == 0 {
            return Err(Error::EmptyPool { digit });
        }
        let mut total = 0.0;
        for member in self.fonts.iter().chain(&self.selected) {
            total += engine.compare(candidate, member)?;
        }
        Ok(total / count as f64)
    }

    fn font_similarity(&self, engine: &Ssim, candidate: &Prepared, digit: u8) -> Result<f64> {
        if self.fonts.is_empty() {
            return Err(Error::EmptyPool { digit });
        }
        let mut total = 0.0;
        for font in &self.fonts {
            total += engine.compare(candidate, font)?;
        }
        Ok(total / self.fonts.len() as f64)
    }
}

/// Unweighted mean SSIM of `candidate` against every pool member.
pub fn mean_pool_similarity(
    candidate: &GrayImage,
    pool: &ExemplarPool,
    params: &SsimParams,
) -> Result<f64> {
    let engine = Ssim::new(*params)?;
    let prepared = PreparedPool::new(&engine, pool)?;
    prepared.mean_similarity(&engine, &engine.prepare(candidate)?, pool.digit)
}

/// Mean SSIM of `image` against the font templates alone.
pub fn font_similarity(image: &GrayImage, fonts: &[FontTemplate], params: &SsimParams, digit: u8) -> Result<f64> {
    let engine = Ssim::new(*params)?;
    let pool = ExemplarPool::new(digit, fonts.to_vec());
    let prepared = PreparedPool::new(&engine, &pool)?;
    prepared.font_similarity(&engine, &engine.prepare(image)?, digit)
}

/// Scores every candidate against the frozen pool. Returns the new exemplars
/// (tagged with `round`) and the rejected candidates, both in input order.
/// The pool itself is left untouched.
pub fn run_round(
    candidates: &[LabeledImage],
    pool: &ExemplarPool,
    cfg: &SelectionConfig,
    round: u32,
) -> Result<(Vec<Exemplar>, Vec<LabeledImage>)> {
    cfg.validate()?;
    if round == 0 || round > cfg.rounds {
        return Err(Error::Config(format!(
            "round {round} outside 1..={}",
            cfg.rounds
        )));
    }
    if let Some(stray) = candidates.iter().find(|c| c.label != pool.digit) {
        return Err(Error::Config(format!(
            "candidate {} is labelled {} but the pool is for digit {}",
            stray.index, stray.label, pool.digit
        )));
    }
    let engine = Ssim::new(cfg.ssim)?;
    let prepared = PreparedPool::new(&engine, pool)?;
    let verdicts = candidates
        .par_iter()
        .map(|candidate| -> Result<Option<f64>> {
            let image = engine.prepare(&candidate.image)?;
            let score = prepared.mean_similarity(&engine, &image, pool.digit)?;
            if crosses_threshold(score, cfg.threshold) {
                Ok(Some(prepared.font_similarity(&engine, &image, pool.digit)?))
            } else {
                Ok(None)
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let mut selected = Vec::new();
    let mut rejected = Vec::new();
    for (candidate, verdict) in candidates.iter().zip(verdicts) {
        match verdict {
            Some(font_similarity) => selected.push(Exemplar {
                image: candidate.image.clone(),
                digit: pool.digit,
                font_similarity,
                round,
                source_index: candidate.index,
            }),
            None => rejected.push(candidate.clone()),
        }
    }
    Ok((selected, rejected))
}

/// Runs all rounds for one digit. Rounds that select nothing do not stop the
/// loop.
pub fn train_digit(
    digit: u8,
    samples: &[LabeledImage],
    fonts: &[FontTemplate],
    cfg: &SelectionConfig,
) -> Result<ExemplarPool> {
    if fonts.is_empty() {
        return Err(Error::EmptyPool { digit });
    }
    let mut pool = ExemplarPool::new(digit, fonts.to_vec());
    let mut candidates = samples.to_vec();
    for round in 1..=cfg.rounds {
        let (picked, rest) = run_round(&candidates, &pool, cfg, round)?;
        pool.selected.extend(picked);
        candidates = rest;
    }
    Ok(pool)
}

/// Trains one pool per digit. Digits run in parallel.
pub fn train_all(
    split: &DatasetSplit,
    templates: &TemplateSet,
    cfg: &SelectionConfig,
) -> Result<Vec<ExemplarPool>> {
    if templates.per_digit.len() != DIGITS {
        return Err(Error::Config(format!(
            "templates cover {} digits, expected {DIGITS}",
            templates.per_digit.len()
        )));
    }
    if let Some(d) = templates.per_digit.iter().position(Vec::is_empty) {
        return Err(Error::Config(format!("no font templates for digit {d}")));
    }
    (0..DIGITS)
        .into_par_iter()
        .map(|d| {
            let samples = split.train.get(d).map(Vec::as_slice).unwrap_or(&[]);
            train_digit(d as u8, samples, templates.digit(d), cfg)
        })
        .collect()
}

/// A pool holding every training sample as a round-1 exemplar, for the
/// ablation modes that skip selection.
pub fn reference_pool(
    digit: u8,
    samples: &[LabeledImage],
    fonts: &[FontTemplate],
    params: &SsimParams,
) -> Result<ExemplarPool> {
    if fonts.is_empty() {
        return Err(Error::EmptyPool { digit });
    }
    let engine = Ssim::new(*params)?;
    let pool = ExemplarPool::new(digit, fonts.to_vec());
    let prepared = PreparedPool::new(&engine, &pool)?;
    let selected = samples
        .par_iter()
        .map(|s| {
            let image = engine.prepare(&s.image)?;
            Ok(Exemplar {
                image: s.image.clone(),
                digit,
                font_similarity: prepared.font_similarity(&engine, &image, digit)?,
                round: 1,
                source_index: s.index,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExemplarPool { selected, ..pool })
}
