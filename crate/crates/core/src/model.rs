//! The trained model document (`model.json`): the run configuration, its
//! fingerprint, and per digit the font templates, the selected exemplars and
//! the fuzzy weight table. Pixels are stored as base64 of the 784 raw bytes.

use std::fs;
use std::path::Path;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::fuzzy::FuzzyWeightTable;
use crate::imagery::{FontTemplate, GrayImage, DIGITS};
use crate::selection::{Exemplar, ExemplarPool};

#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub config: RunConfig,
    pub fingerprint: String,
    pub pools: Vec<ExemplarPool>,
    pub tables: Vec<Option<FuzzyWeightTable>>,
}

#[derive(Serialize, Deserialize)]
struct ModelDoc {
    fingerprint: String,
    config: RunConfig,
    digits: Vec<DigitDoc>,
}

#[derive(Serialize, Deserialize)]
struct DigitDoc {
    digit: u8,
    fonts: Vec<String>,
    font_pixels: Vec<String>,
    round_counts: Vec<usize>,
    exemplars: Vec<ExemplarDoc>,
    weights: Option<FuzzyWeightTable>,
}

#[derive(Serialize, Deserialize)]
struct ExemplarDoc {
    source_index: usize,
    round: u32,
    font_similarity: f64,
    pixels: String,
}

fn encode_pixels(image: &GrayImage) -> String {
    STANDARD.encode(image.pixels())
}

fn decode_pixels(text: &str) -> Result<GrayImage> {
    let bytes = STANDARD
        .decode(text)
        .map_err(|e| Error::Format(format!("bad base64 pixels: {e}")))?;
    GrayImage::from_pixels(bytes)
}

impl Model {
    pub fn new(config: RunConfig, pools: Vec<ExemplarPool>, tables: Vec<Option<FuzzyWeightTable>>) -> Self {
        Model {
            fingerprint: config.fingerprint(),
            config,
            pools,
            tables,
        }
    }

    pub fn to_json(&self) -> String {
        let rounds = self.config.selection.rounds;
        let doc = ModelDoc {
            fingerprint: self.fingerprint.clone(),
            config: self.config.clone(),
            digits: self
                .pools
                .iter()
                .zip(&self.tables)
                .map(|(pool, table)| DigitDoc {
                    digit: pool.digit,
                    fonts: pool.fonts.iter().map(|f| f.name.clone()).collect(),
                    font_pixels: pool.fonts.iter().map(|f| encode_pixels(&f.image)).collect(),
                    round_counts: pool.round_counts(rounds),
                    exemplars: pool
                        .selected
                        .iter()
                        .map(|e| ExemplarDoc {
                            source_index: e.source_index,
                            round: e.round,
                            font_similarity: e.font_similarity,
                            pixels: encode_pixels(&e.image),
                        })
                        .collect(),
                    weights: table.clone(),
                })
                .collect(),
        };
        let mut text = serde_json::to_string_pretty(&doc).expect("model serialises");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDoc = serde_json::from_str(text)?;
        if doc.digits.len() != DIGITS {
            return Err(Error::Format(format!(
                "model holds {} digits, expected {DIGITS}",
                doc.digits.len()
            )));
        }
        let mut pools = Vec::with_capacity(DIGITS);
        let mut tables = Vec::with_capacity(DIGITS);
        for (d, digit) in doc.digits.into_iter().enumerate() {
            if digit.digit as usize != d || digit.fonts.len() != digit.font_pixels.len() {
                return Err(Error::Format(format!("malformed entry for digit {d}")));
            }
            let fonts = digit
                .fonts
                .into_iter()
                .zip(&digit.font_pixels)
                .map(|(name, px)| {
                    Ok(FontTemplate {
                        name,
                        image: decode_pixels(px)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let selected = digit
                .exemplars
                .into_iter()
                .map(|e| {
                    Ok(Exemplar {
                        image: decode_pixels(&e.pixels)?,
                        digit: digit.digit,
                        font_similarity: e.font_similarity,
                        round: e.round,
                        source_index: e.source_index,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            pools.push(ExemplarPool {
                digit: digit.digit,
                fonts,
                selected,
            });
            tables.push(digit.weights);
        }
        Ok(Model {
            config: doc.config,
            fingerprint: doc.fingerprint,
            pools,
            tables,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// Fails unless the model was trained under `config`.
    pub fn check_fingerprint(&self, config: &RunConfig) -> Result<()> {
        let expected = config.fingerprint();
        if self.fingerprint != expected {
            return Err(Error::StaleModel {
                model: self.fingerprint.clone(),
                config: expected,
            });
        }
        Ok(())
    }
}
