//! Handwritten digit recognition by structural similarity against font
//! templates and self-selected exemplars, with fuzzy reward weighting.
//!
//! The pipeline: [`imagery`] loads IDX datasets and PGM templates and splits
//! the data; [`selection`] grows each digit's exemplar pool over several
//! thresholded rounds; [`fuzzy`] turns exemplar quality into reward weights;
//! [`classifier`] scores test images against the pools; [`eval`] runs the
//! four ablation modes.

pub mod classifier;
pub mod config;
pub mod error;
pub mod eval;
pub mod fuzzy;
pub mod imagery;
pub mod model;
pub mod pipeline;
pub mod selection;
pub mod ssim;

pub use classifier::{classify, score_digit, AblationMode, Aggregate, ClassificationResult, Classifier, ClassifierSettings};
pub use config::{LoadedConfig, RunConfig};
pub use error::{Error, Result};
pub use eval::{compare_modes, evaluate, EvalReport};
pub use fuzzy::{build_weight_table, discounted_total, effective_weight, fuzzy_weight, FuzzyWeightTable, RewardTrace};
pub use imagery::{DatasetSplit, GrayImage, LabeledImage};
pub use model::Model;
pub use selection::{mean_pool_similarity, run_round, train_all, train_digit, Exemplar, ExemplarPool, SelectionConfig};
pub use ssim::{compute_stats, ssim_global, ssim_windowed, ImageStats, SsimMode, SsimParams};
