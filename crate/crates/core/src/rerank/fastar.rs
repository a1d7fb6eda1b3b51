//! FA*IR ranked group fairness with tail items as the protected group.
//!
//! A prefix of length k passes when its protected count t satisfies
//! `BinomialCDF(t; k, p) > a_sig`, so the minimum is the smallest such t.
//! No multiple-testing adjustment of `a_sig` is applied.

use rayon::prelude::*;

use super::{positional, RerankConfig, RerankContext};
use crate::error::{Error, Result};
use crate::ranking::{RecommendationSet, Scored};

/// P(X <= t) for X ~ Binomial(k, p), summed in log space.
pub fn binomial_cdf(t: usize, k: usize, p: f64) -> f64 {
    if t >= k {
        return 1.0;
    }
    if p <= 0.0 {
        return 1.0;
    }
    if p >= 1.0 {
        return 0.0;
    }
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    let mut log_pmf = k as f64 * lq;
    let mut total = log_pmf.exp();
    for j in 0..t {
        log_pmf += ((k - j) as f64).ln() - ((j + 1) as f64).ln() + lp - lq;
        total += log_pmf.exp();
    }
    total.min(1.0)
}

/// `m[k]` is the least number of protected items a prefix of length `k`
/// must hold, for `k` in `0..=k_max`.
pub fn minimum_protected(k_max: usize, p: f64, significance: f64) -> Vec<usize> {
    (0..=k_max)
        .map(|k| {
            (0..=k)
                .find(|&t| binomial_cdf(t, k, p) > significance)
                .unwrap_or(k)
        })
        .collect()
}

/// Builds one list from two score-ordered queues. Returns the items and
/// whether the table could not be met.
fn build(list: &[Scored], k: usize, table: &[usize], is_tail: impl Fn(u32) -> bool) -> (Vec<u32>, bool) {
    let (protected, other): (Vec<&Scored>, Vec<&Scored>) = list.iter().partition(|s| is_tail(s.item));
    let (mut pi, mut oi) = (0, 0);
    let mut out = Vec::with_capacity(k);
    let mut count = 0;
    let mut short = false;
    for &required in &table[1..=k.min(list.len())] {
        let need = count < required;
        let take_protected = match (protected.get(pi), other.get(oi)) {
            (Some(_), _) if need => true,
            (Some(p), Some(o)) => p.score >= o.score,
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (None, None) => break,
        };
        if need && protected.get(pi).is_none() {
            short = true;
        }
        if take_protected {
            out.push(protected[pi].item);
            pi += 1;
            count += 1;
        } else {
            out.push(other[oi].item);
            oi += 1;
        }
    }
    (out, short)
}

pub(super) fn rerank(
    initial: &RecommendationSet,
    config: &RerankConfig,
    context: RerankContext<'_>,
) -> Result<(Vec<Vec<Scored>>, Vec<u32>)> {
    let p = config
        .protected_share
        .unwrap_or_else(|| context.segmentation.tail_share());
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid(format!(
            "protected share {p} must lie in (0, 1); the segmentation may have no tail"
        )));
    }
    let table = minimum_protected(config.k, p, config.significance);
    let built: Vec<(Vec<Scored>, bool)> = initial
        .lists()
        .par_iter()
        .map(|list| {
            let (items, short) = build(list, config.k, &table, |i| context.segmentation.is_tail(i));
            (positional(items, config.k), short)
        })
        .collect();
    let flagged = built
        .iter()
        .enumerate()
        .filter(|(_, (_, short))| *short)
        .map(|(u, _)| u as u32)
        .collect();
    Ok((built.into_iter().map(|(l, _)| l).collect(), flagged))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_matches_closed_forms() {
        assert!((binomial_cdf(0, 4, 0.5) - 1.0 / 16.0).abs() < 1e-12);
        assert!((binomial_cdf(1, 4, 0.5) - 5.0 / 16.0).abs() < 1e-12);
        assert!((binomial_cdf(2, 3, 0.2) - (1.0 - 0.008)).abs() < 1e-12);
    }

    #[test]
    fn table_for_k4_half_share() {
        // CDF(0;k,.5) = 1/2, 1/4, 1/8, 1/16; CDF(1;4,.5) = 5/16
        assert_eq!(minimum_protected(4, 0.5, 0.1), vec![0, 0, 0, 0, 1]);
    }

    #[test]
    fn protected_item_is_promoted_when_needed() {
        let list: Vec<Scored> = (0..6u32)
            .map(|i| Scored { item: i, score: 10.0 - i as f64 })
            .collect();
        // only item 5 is protected; require one protected item by position 2
        let table = vec![0, 0, 1, 1];
        let (out, short) = build(&list, 3, &table, |i| i == 5);
        assert_eq!(out, vec![0, 5, 1]);
        assert!(!short);
        let (_, short) = build(&list, 3, &table, |_| false);
        assert!(short);
    }
}
