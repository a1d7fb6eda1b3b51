use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Entry, Interactions, RatingMatrix};
use crate::error::{Error, Result};

/// Disjoint train/test halves of one rating matrix, sharing its ids.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitPair {
    pub train: RatingMatrix,
    pub test: RatingMatrix,
    pub seed: u64,
    pub ratio: f64,
}

/// Number of a profile's ratings that go to training: `ratio * size`
/// rounded half up, kept within `1..=size-1` when the profile has at least
/// two ratings. A single rating always goes to training.
pub fn train_count(size: usize, ratio: f64) -> usize {
    match size {
        0 => 0,
        1 => 1,
        _ => {
            let rounded = (ratio * size as f64 + 0.5).floor() as usize;
            rounded.clamp(1, size - 1)
        }
    }
}

/// Per-user random holdout: each profile is shuffled with one seeded
/// generator (users visited in id order) and its first
/// [`train_count`] entries go to training.
pub fn split_per_user(matrix: &RatingMatrix, ratio: f64, seed: u64) -> Result<SplitPair> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::invalid(format!("split ratio {ratio} not in (0, 1)")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::with_capacity(matrix.nnz());
    let mut test = Vec::new();
    for user in 0..matrix.n_users() as u32 {
        let mut profile: Vec<Entry> = matrix.user_profile(user).to_vec();
        profile.shuffle(&mut rng);
        let n_train = train_count(profile.len(), ratio);
        test.extend_from_slice(&profile[n_train..]);
        profile.truncate(n_train);
        train.extend(profile);
    }
    let half = |entries| -> Result<RatingMatrix> {
        let data = Interactions::new(matrix.user_ids().clone(), matrix.item_ids().clone(), entries)?;
        RatingMatrix::new(data, matrix.scale().clone())
    };
    Ok(SplitPair {
        train: half(train)?,
        test: half(test)?,
        seed,
        ratio,
    })
}
