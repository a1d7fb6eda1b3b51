use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{keep_positions, positional};
use crate::ranking::{RecommendationSet, Scored};

/// A uniform K-subset of each list, kept in score order. Every user draws
/// from its own stream of the seeded generator.
pub(super) fn random(initial: &RecommendationSet, k: usize, seed: u64) -> Vec<Vec<Scored>> {
    initial
        .lists()
        .par_iter()
        .enumerate()
        .map(|(user, list)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(user as u64);
            let take = k.min(list.len());
            keep_positions(list, index::sample(&mut rng, list.len(), take).into_vec())
        })
        .collect()
}

/// The K lowest-scored items, lowest first.
pub(super) fn reverse(initial: &RecommendationSet, k: usize) -> Vec<Vec<Scored>> {
    initial
        .lists()
        .iter()
        .map(|list| positional(list.iter().rev().take(k).map(|s| s.item), k))
        .collect()
}
