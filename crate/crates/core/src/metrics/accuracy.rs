use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::compensated_sum;
use crate::data::Interactions;
use crate::error::{Error, Result};
use crate::ranking::RecommendationSet;

/// A per-user averaged accuracy value and how many users it covers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccuracyScore {
    pub value: f64,
    pub evaluated_users: usize,
    /// Users without held-out ratings, left out of the mean.
    pub excluded_users: usize,
}

fn per_user(
    recs: &RecommendationSet,
    test: &Interactions,
    metric: impl Fn(&[u32], &HashSet<u32>) -> f64,
) -> Result<AccuracyScore> {
    if test.n_users() < recs.n_users() {
        return Err(Error::invalid("test matrix has fewer users than the recommendation set"));
    }
    let mut values = Vec::with_capacity(recs.n_users());
    for user in 0..recs.n_users() as u32 {
        let held_out: HashSet<u32> = test.user_profile(user).iter().map(|e| e.item).collect();
        if held_out.is_empty() {
            continue;
        }
        let items: Vec<u32> = recs.list(user).iter().map(|s| s.item).collect();
        values.push(metric(&items, &held_out));
    }
    if values.is_empty() {
        return Err(Error::Undefined("no user has held-out ratings".into()));
    }
    let evaluated = values.len();
    Ok(AccuracyScore {
        value: compensated_sum(values) / evaluated as f64,
        evaluated_users: evaluated,
        excluded_users: recs.n_users() - evaluated,
    })
}

/// Mean over users of `|L_u ∩ test_u| / K`.
pub fn precision_at_k(recs: &RecommendationSet, test: &Interactions) -> Result<AccuracyScore> {
    let k = recs.k() as f64;
    per_user(recs, test, |items, held_out| {
        items.iter().filter(|i| held_out.contains(i)).count() as f64 / k
    })
}

/// Binary-relevance nDCG: hits discounted by `log2(position + 1)`,
/// normalised by the ideal DCG of `min(K, |test_u|)` hits.
pub fn ndcg_at_k(recs: &RecommendationSet, test: &Interactions) -> Result<AccuracyScore> {
    let k = recs.k();
    per_user(recs, test, |items, held_out| {
        let dcg: f64 = items
            .iter()
            .enumerate()
            .filter(|(_, i)| held_out.contains(i))
            .map(|(pos, _)| 1.0 / ((pos + 2) as f64).log2())
            .sum();
        let ideal: f64 = (0..k.min(held_out.len()))
            .map(|pos| 1.0 / ((pos + 2) as f64).log2())
            .sum();
        dcg / ideal
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{RatingMatrix, RatingScale};
    use crate::ranking::Scored;

    fn recs(k: usize, n_items: usize, lists: &[&[u32]]) -> RecommendationSet {
        RecommendationSet::new(
            k,
            n_items,
            lists
                .iter()
                .map(|l| l.iter().map(|&item| Scored { item, score: 0.0 }).collect())
                .collect(),
        )
        .unwrap()
    }

    fn test_matrix(n_users: usize, n_items: usize, pairs: &[(u32, u32)]) -> RatingMatrix {
        RatingMatrix::from_triples(
            n_users,
            n_items,
            pairs.iter().map(|&(u, i)| (u, i, 5.0)),
            RatingScale::integer(1, 5).unwrap(),
        )
        .unwrap()
    }

    // items: A=0, B=1, X=2
    #[test]
    fn precision_one_hit_of_two() {
        let r = recs(2, 3, &[&[0, 1]]);
        let t = test_matrix(1, 3, &[(0, 0), (0, 2)]);
        assert_eq!(precision_at_k(&r, &t).unwrap().value, 0.5);
    }

    #[test]
    fn precision_extremes_and_exclusion() {
        let r = recs(2, 4, &[&[0, 1], &[2, 3], &[0, 1]]);
        let t = test_matrix(3, 4, &[(0, 0), (0, 1), (0, 2), (1, 0)]);
        let p = precision_at_k(&r, &t).unwrap();
        assert_eq!(p.value, 0.5);
        assert_eq!(p.evaluated_users, 2);
        assert_eq!(p.excluded_users, 1);
        let miss = test_matrix(1, 4, &[(0, 3)]);
        assert_eq!(precision_at_k(&recs(2, 4, &[&[0, 1]]), &miss).unwrap().value, 0.0);
    }

    #[test]
    fn ndcg_hit_at_rank_two() {
        let r = recs(2, 2, &[&[0, 1]]);
        let t = test_matrix(1, 2, &[(0, 1)]);
        let v = ndcg_at_k(&r, &t).unwrap().value;
        assert!((v - 1.0 / 3f64.log2()).abs() < 1e-12);
        assert!((v - 0.6309).abs() < 1e-4);
    }

    #[test]
    fn ndcg_ideal_and_empty() {
        let r = recs(3, 5, &[&[0, 1, 4]]);
        let t = test_matrix(1, 5, &[(0, 0), (0, 1)]);
        assert!((ndcg_at_k(&r, &t).unwrap().value - 1.0).abs() < 1e-12);
        let none = test_matrix(1, 5, &[(0, 3)]);
        assert_eq!(ndcg_at_k(&r, &none).unwrap().value, 0.0);
        let empty = test_matrix(1, 5, &[]);
        assert!(ndcg_at_k(&r, &empty).is_err());
    }
}
