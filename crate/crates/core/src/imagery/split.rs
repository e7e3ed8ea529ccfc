use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{LabeledImage, DIGITS};
use crate::error::{Error, Result};

/// Per-digit train/test partition of a labelled dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct DatasetSplit {
    /// Indexed by digit.
    pub train: Vec<Vec<LabeledImage>>,
    /// Indexed by digit.
    pub test: Vec<Vec<LabeledImage>>,
    pub seed: u64,
}

impl DatasetSplit {
    pub fn empty(seed: u64) -> Self {
        DatasetSplit {
            train: vec![Vec::new(); DIGITS],
            test: vec![Vec::new(); DIGITS],
            seed,
        }
    }

    pub fn test_len(&self) -> usize {
        self.test.iter().map(Vec::len).sum()
    }

    pub fn train_len(&self) -> usize {
        self.train.iter().map(Vec::len).sum()
    }
}

/// Shuffles each digit's samples with its own ChaCha8 stream (stream id =
/// digit, key from `seed`), keeps the first `per_digit_cap`, and sends the
/// first `floor(ratio * n)` of those to train.
pub fn split_dataset(
    images: &[LabeledImage],
    ratio: f64,
    per_digit_cap: usize,
    seed: u64,
) -> Result<DatasetSplit> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::Config(format!("split ratio {ratio} is not in (0, 1)")));
    }
    if per_digit_cap == 0 {
        return Err(Error::Config("per-digit cap must be at least 1".into()));
    }
    let mut split = DatasetSplit::empty(seed);
    for digit in 0..DIGITS {
        let mut members: Vec<&LabeledImage> =
            images.iter().filter(|s| s.label as usize == digit).collect();
        if members.is_empty() {
            return Err(Error::EmptyClass(digit as u8));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(digit as u64);
        members.shuffle(&mut rng);
        members.truncate(per_digit_cap);
        let n_train = (ratio * members.len() as f64).floor() as usize;
        let (train, test) = members.split_at(n_train);
        split.train[digit] = train.iter().map(|&s| s.clone()).collect();
        split.test[digit] = test.iter().map(|&s| s.clone()).collect();
    }
    Ok(split)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imagery::{GrayImage, SIDE};
    use std::collections::HashSet;

    fn dataset(per_digit: usize) -> Vec<LabeledImage> {
        (0..per_digit * DIGITS)
            .map(|i| {
                let img = GrayImage::filled(SIDE, SIDE, (i % 251) as u8);
                LabeledImage::new(img, (i % DIGITS) as u8, i).unwrap()
            })
            .collect()
    }

    #[test]
    fn eighty_twenty() {
        let split = split_dataset(&dataset(10), 0.8, 1000, 3).unwrap();
        for d in 0..DIGITS {
            assert_eq!(split.train[d].len(), 8);
            assert_eq!(split.test[d].len(), 2);
        }
    }

    #[test]
    fn deterministic() {
        let data = dataset(30);
        let a = split_dataset(&data, 0.8, 1000, 11).unwrap();
        let b = split_dataset(&data, 0.8, 1000, 11).unwrap();
        assert_eq!(a, b);
        let c = split_dataset(&data, 0.8, 1000, 12).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn cap_draws_before_splitting() {
        let split = split_dataset(&dataset(10), 0.8, 5, 0).unwrap();
        for d in 0..DIGITS {
            assert_eq!(split.train[d].len() + split.test[d].len(), 5);
            assert_eq!(split.train[d].len(), 4);
        }
    }

    #[test]
    fn disjoint_and_labelled() {
        let split = split_dataset(&dataset(37), 0.67, 1000, 99).unwrap();
        for d in 0..DIGITS {
            let train: HashSet<usize> = split.train[d].iter().map(|s| s.index).collect();
            assert!(split.test[d].iter().all(|s| !train.contains(&s.index)));
            assert!(split.train[d].iter().chain(&split.test[d]).all(|s| s.label as usize == d));
            assert_eq!(split.train[d].len(), (0.67f64 * 37.0).floor() as usize);
        }
    }

    #[test]
    fn missing_digit() {
        let data: Vec<_> = dataset(3).into_iter().filter(|s| s.label != 6).collect();
        assert!(matches!(split_dataset(&data, 0.8, 10, 0), Err(Error::EmptyClass(6))));
    }

    #[test]
    fn bad_ratio_and_cap() {
        let data = dataset(3);
        assert!(split_dataset(&data, 1.0, 10, 0).is_err());
        assert!(split_dataset(&data, 0.0, 10, 0).is_err());
        assert!(split_dataset(&data, 0.5, 0, 0).is_err());
    }
}
