//! xQuAD over a two-aspect model: head and tail items.

use rayon::prelude::*;

use super::{positional, RerankConfig, RerankContext};
use crate::ranking::{RecommendationSet, Scored};

/// Share of the user's training profile on tail items; 0.5 when the user
/// has no training ratings.
fn tail_preference(user: u32, context: RerankContext<'_>) -> f64 {
    let profile = context.train.user_profile(user);
    if profile.is_empty() {
        return 0.5;
    }
    let tail = profile.iter().filter(|e| context.segmentation.is_tail(e.item)).count();
    tail as f64 / profile.len() as f64
}

/// Scores min-max normalised into [0, 1]; all zero for a constant list.
fn normalise(list: &[Scored]) -> Vec<f64> {
    let max = list.iter().map(|s| s.score).fold(f64::NEG_INFINITY, f64::max);
    let min = list.iter().map(|s| s.score).fold(f64::INFINITY, f64::min);
    let range = max - min;
    list.iter()
        .map(|s| if range > 0.0 { (s.score - min) / range } else { 0.0 })
        .collect()
}

/// Greedy selection for one list; ties go to the earlier candidate.
pub fn select(list: &[Scored], k: usize, lambda: f64, p_tail: f64, is_tail: impl Fn(u32) -> bool) -> Vec<u32> {
    let relevance = normalise(list);
    let mut taken = vec![false; list.len()];
    let (mut head_covered, mut tail_covered) = (false, false);
    let mut out = Vec::with_capacity(k);
    for _ in 0..k.min(list.len()) {
        let mut best: Option<(usize, f64)> = None;
        for (pos, s) in list.iter().enumerate() {
            if taken[pos] {
                continue;
            }
            let diversity = if is_tail(s.item) {
                if tail_covered { 0.0 } else { p_tail }
            } else if head_covered {
                0.0
            } else {
                1.0 - p_tail
            };
            let value = (1.0 - lambda) * relevance[pos] + lambda * diversity;
            if best.is_none_or(|(_, b)| value > b) {
                best = Some((pos, value));
            }
        }
        let (pos, _) = best.expect("a candidate remains");
        taken[pos] = true;
        let item = list[pos].item;
        if is_tail(item) {
            tail_covered = true;
        } else {
            head_covered = true;
        }
        out.push(item);
    }
    out
}

pub(super) fn rerank(
    initial: &RecommendationSet,
    config: &RerankConfig,
    context: RerankContext<'_>,
) -> Vec<Vec<Scored>> {
    initial
        .lists()
        .par_iter()
        .enumerate()
        .map(|(user, list)| {
            let p_tail = tail_preference(user as u32, context);
            let chosen = select(list, config.k, config.lambda, p_tail, |i| {
                context.segmentation.is_tail(i)
            });
            positional(chosen, config.k)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn list(scores: &[f64]) -> Vec<Scored> {
        scores.iter().enumerate().map(|(i, &score)| Scored { item: i as u32, score }).collect()
    }

    #[test]
    fn lambda_zero_is_top_k() {
        let l = list(&[0.9, 0.8, 0.8, 0.3, 0.1]);
        assert_eq!(select(&l, 3, 0.0, 0.7, |i| i % 2 == 1), vec![0, 1, 2]);
    }

    #[test]
    fn full_weight_on_diversity_covers_both_aspects_first() {
        // items 3 and 4 are tail
        let l = list(&[0.9, 0.8, 0.7, 0.3, 0.1]);
        let out = select(&l, 2, 1.0, 0.6, |i| i >= 3);
        assert_eq!(out, vec![3, 0]);
    }
}
