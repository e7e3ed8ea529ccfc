//! Fuzzy reward weights and discounted reward accounting.
//!
//! An exemplar's reward weight is its font similarity mapped affinely from
//! the digit's `[sim_min, sim_max]` onto `[0.25, 0.75]`, so the weakest
//! exemplar still counts and the strongest never reaches the full weight
//! reserved for the font templates themselves.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::selection::{Exemplar, ExemplarPool};

pub const WEIGHT_LOW: f64 = 0.25;
pub const WEIGHT_HIGH: f64 = 0.75;

pub fn fuzzy_weight(sim: f64, sim_min: f64, sim_max: f64) -> Result<f64> {
    if !(sim_min <= sim && sim <= sim_max) {
        return Err(Error::Range {
            value: sim,
            min: sim_min,
            max: sim_max,
        });
    }
    if sim_max == sim_min {
        return Ok(0.5);
    }
    Ok(WEIGHT_LOW + (WEIGHT_HIGH - WEIGHT_LOW) * (sim - sim_min) / (sim_max - sim_min))
}

/// Per-digit weights, aligned with the pool's `selected` list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FuzzyWeightTable {
    pub digit: u8,
    pub sim_min: f64,
    pub sim_max: f64,
    /// `source_index` of each weighted exemplar, in pool order.
    pub exemplars: Vec<usize>,
    pub weights: Vec<f64>,
}

impl FuzzyWeightTable {
    pub fn weight_of(&self, source_index: usize) -> Result<f64> {
        self.exemplars
            .iter()
            .position(|&i| i == source_index)
            .map(|pos| self.weights[pos])
            .ok_or(Error::Key {
                digit: self.digit,
                source_index,
            })
    }

    /// Applies `f` to every weight. Used by ablations that rescale or
    /// override the learned weights.
    pub fn map_weights(&self, f: impl Fn(f64) -> f64) -> Self {
        FuzzyWeightTable {
            weights: self.weights.iter().map(|&w| f(w)).collect(),
            ..self.clone()
        }
    }
}

/// Min/max are taken over the selected exemplars only; fonts are excluded.
pub fn build_weight_table(pool: &ExemplarPool) -> Result<FuzzyWeightTable> {
    let sims = pool.selected.iter().map(|e| e.font_similarity);
    let sim_min = sims.clone().fold(f64::INFINITY, f64::min);
    let sim_max = sims.fold(f64::NEG_INFINITY, f64::max);
    if pool.selected.is_empty() {
        return Err(Error::EmptyPool { digit: pool.digit });
    }
    let weights = pool
        .selected
        .iter()
        .map(|e| fuzzy_weight(e.font_similarity, sim_min, sim_max))
        .collect::<Result<Vec<_>>>()?;
    Ok(FuzzyWeightTable {
        digit: pool.digit,
        sim_min,
        sim_max,
        exemplars: pool.selected.iter().map(|e| e.source_index).collect(),
        weights,
    })
}

/// `sum_t gamma^t * rewards[t]`, t from 0.
pub fn discounted_total(rewards: &[f64], gamma: f64) -> f64 {
    let mut total = 0.0;
    let mut factor = 1.0;
    for &r in rewards {
        total += factor * r;
        factor *= gamma;
    }
    total
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardTrace {
    pub gamma: f64,
    pub rewards: Vec<f64>,
    pub total: f64,
}

impl RewardTrace {
    pub fn new(gamma: f64) -> Self {
        RewardTrace {
            gamma,
            rewards: Vec::new(),
            total: 0.0,
        }
    }

    pub fn push(&mut self, reward: f64) {
        self.total += self.gamma.powi(self.rewards.len() as i32) * reward;
        self.rewards.push(reward);
    }

    /// Per-round reward trace for a digit: each round's reward is the summed
    /// fuzzy weight of the exemplars it selected.
    pub fn from_pool(pool: &ExemplarPool, table: &FuzzyWeightTable, rounds: u32, gamma: f64) -> Result<Self> {
        let mut trace = RewardTrace::new(gamma);
        for round in 1..=rounds {
            let mut reward = 0.0;
            for e in pool.selected.iter().filter(|e| e.round == round) {
                reward += table.weight_of(e.source_index)?;
            }
            trace.push(reward);
        }
        Ok(trace)
    }
}

/// `gamma^(round - 1)` times the exemplar's fuzzy weight.
pub fn effective_weight(exemplar: &Exemplar, table: &FuzzyWeightTable, gamma: f64) -> Result<f64> {
    let weight = table.weight_of(exemplar.source_index)?;
    Ok(discount(gamma, exemplar.round) * weight)
}

pub(crate) fn discount(gamma: f64, round: u32) -> f64 {
    gamma.powi(round.saturating_sub(1) as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imagery::{GrayImage, SIDE};
    use proptest::prelude::*;

    fn exemplar(source_index: usize, font_similarity: f64, round: u32) -> Exemplar {
        Exemplar {
            image: GrayImage::filled(SIDE, SIDE, 0),
            digit: 4,
            font_similarity,
            round,
            source_index,
        }
    }

    fn pool(sims: &[f64]) -> ExemplarPool {
        ExemplarPool {
            digit: 4,
            fonts: vec![],
            selected: sims.iter().enumerate().map(|(i, &s)| exemplar(i, s, 1)).collect(),
        }
    }

    #[test]
    fn worked_interval() {
        assert!((fuzzy_weight(0.32, 0.32, 0.36).unwrap() - 0.25).abs() < 1e-12);
        assert!((fuzzy_weight(0.36, 0.32, 0.36).unwrap() - 0.75).abs() < 1e-12);
        assert!((fuzzy_weight(0.34, 0.32, 0.36).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn degenerate_interval() {
        for s in [-0.3, 0.0, 0.42, 1.0] {
            assert_eq!(fuzzy_weight(s, s, s).unwrap(), 0.5);
        }
    }

    #[test]
    fn out_of_range() {
        assert!(matches!(fuzzy_weight(0.31, 0.32, 0.36), Err(Error::Range { .. })));
        assert!(matches!(fuzzy_weight(f64::NAN, 0.32, 0.36), Err(Error::Range { .. })));
    }

    #[test]
    fn table_from_worked_pool() {
        let t = build_weight_table(&pool(&[0.34, 0.32, 0.36])).unwrap();
        assert_eq!((t.sim_min, t.sim_max), (0.32, 0.36));
        let want = [0.5, 0.25, 0.75];
        for (w, e) in t.weights.iter().zip(want) {
            assert!((w - e).abs() < 1e-12);
        }
        assert!((t.weight_of(2).unwrap() - 0.75).abs() < 1e-12);
        assert!(matches!(t.weight_of(9), Err(Error::Key { digit: 4, source_index: 9 })));
    }

    #[test]
    fn single_exemplar_table() {
        let t = build_weight_table(&pool(&[0.47])).unwrap();
        assert_eq!(t.weights, vec![0.5]);
        assert!(matches!(build_weight_table(&pool(&[])), Err(Error::EmptyPool { digit: 4 })));
    }

    #[test]
    fn discounted_sums() {
        assert_eq!(discounted_total(&[1.0, 1.0, 1.0], 1.0), 3.0);
        assert_eq!(discounted_total(&[0.5], 0.3), 0.5);
        assert!((discounted_total(&[0.5, 0.5], 0.9) - 0.95).abs() < 1e-15);
        assert_eq!(discounted_total(&[0.0; 4], 0.7), 0.0);
        assert_eq!(discounted_total(&[], 0.7), 0.0);
    }

    #[test]
    fn trace_accumulates() {
        let mut trace = RewardTrace::new(0.9);
        for r in [0.5, 0.25, 1.0] {
            trace.push(r);
        }
        assert!((trace.total - discounted_total(&trace.rewards, 0.9)).abs() < 1e-12);
    }

    #[test]
    fn trace_from_pool_rounds() {
        let mut p = pool(&[0.32, 0.36]);
        p.selected[1].round = 2;
        let t = build_weight_table(&p).unwrap();
        let trace = RewardTrace::from_pool(&p, &t, 3, 0.5).unwrap();
        assert_eq!(trace.rewards, vec![0.25, 0.75, 0.0]);
        assert!((trace.total - (0.25 + 0.5 * 0.75)).abs() < 1e-15);
    }

    #[test]
    fn discounting_by_round() {
        let t = FuzzyWeightTable {
            digit: 4,
            sim_min: 0.0,
            sim_max: 1.0,
            exemplars: vec![7],
            weights: vec![0.5],
        };
        assert_eq!(effective_weight(&exemplar(7, 0.5, 4), &t, 1.0).unwrap(), 0.5);
        assert!((effective_weight(&exemplar(7, 0.5, 3), &t, 0.9).unwrap() - 0.405).abs() < 1e-15);
        assert_eq!(effective_weight(&exemplar(7, 0.5, 2), &t, 0.0).unwrap(), 0.0);
        assert_eq!(effective_weight(&exemplar(7, 0.5, 1), &t, 0.0).unwrap(), 0.5);
        assert!(effective_weight(&exemplar(8, 0.5, 1), &t, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn bounded_and_monotone(a in -1.0f64..1.0, b in -1.0f64..1.0, t in 0.0f64..1.0, u in 0.0f64..1.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let s = (lo + t * (hi - lo)).clamp(lo, hi);
            let r = (lo + u * (hi - lo)).clamp(lo, hi);
            let ws = fuzzy_weight(s, lo, hi).unwrap();
            let wr = fuzzy_weight(r, lo, hi).unwrap();
            prop_assert!((WEIGHT_LOW..=WEIGHT_HIGH).contains(&ws));
            if s <= r {
                prop_assert!(ws <= wr);
            }
        }

        #[test]
        fn midpoint_is_half(a in -1.0f64..1.0, width in 1e-6f64..1.0) {
            let w = fuzzy_weight(a + width / 2.0, a, a + width).unwrap();
            prop_assert!((w - 0.5).abs() < 1e-9);
        }

        #[test]
        fn discount_never_grows_with_round(gamma in 0.0f64..1.0, w in 0.25f64..0.75, round in 1u32..6) {
            let t = FuzzyWeightTable { digit: 0, sim_min: 0.0, sim_max: 1.0, exemplars: vec![0], weights: vec![w] };
            let now = effective_weight(&exemplar(0, 0.0, round), &t, gamma).unwrap();
            let later = effective_weight(&exemplar(0, 0.0, round + 1), &t, gamma).unwrap();
            prop_assert!(later <= now);
            let flat = effective_weight(&exemplar(0, 0.0, round), &t, 1.0).unwrap();
            prop_assert_eq!(flat, w);
        }
    }
}
