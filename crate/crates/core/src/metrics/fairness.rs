use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ranking::RecommendationSet;

/// Fraction of the reference items recommended at least `alpha` times
/// across all lists. With `restrict = None` the reference set is the whole
/// catalog (IA); passing the tail items gives LIA.
pub fn item_aggregate_diversity(
    recs: &RecommendationSet,
    alpha: u32,
    restrict: Option<&[u32]>,
) -> Result<f64> {
    if alpha == 0 {
        return Err(Error::invalid("alpha must be at least 1"));
    }
    let counts = recs.appearance_counts();
    let reached = |&i: &u32| counts[i as usize] >= alpha as u64;
    match restrict {
        None => {
            let hits = (0..counts.len() as u32).filter(reached).count();
            Ok(hits as f64 / counts.len() as f64)
        }
        Some([]) => Err(Error::Undefined("aggregate diversity over an empty item set".into())),
        Some(items) => Ok(items.iter().filter(|i| reached(i)).count() as f64 / items.len() as f64),
    }
}

/// Per-item share of all recommendation slots, `appearances / (|U| K)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExposureDistribution(pub Vec<f64>);

pub fn exposure(recs: &RecommendationSet) -> ExposureDistribution {
    let slots = (recs.n_users() * recs.k()) as f64;
    ExposureDistribution(
        recs.appearance_counts()
            .into_iter()
            .map(|c| if slots > 0.0 { c as f64 / slots } else { 0.0 })
            .collect(),
    )
}

/// Gini index of an exposure distribution over `m >= 2` items, with the
/// `1 / (m - 1)` normaliser and exposures indexed in ascending order.
pub fn gini_index(exposures: &[f64]) -> Result<f64> {
    let m = exposures.len();
    if m < 2 {
        return Err(Error::invalid("gini index needs at least two items"));
    }
    let mut sorted = exposures.to_vec();
    sorted.sort_by(f64::total_cmp);
    let sum: f64 = sorted
        .iter()
        .enumerate()
        .map(|(idx, &e)| (2.0 * (idx + 1) as f64 - m as f64 - 1.0) * e)
        .sum();
    Ok(sum / (m - 1) as f64)
}

/// `(Gini, EE = 1 - Gini)` of the recommendation exposure. Computed on the
/// integer appearance counts so that uniform and fully concentrated
/// exposure come out exact.
pub fn equality_of_exposure(recs: &RecommendationSet) -> Result<(f64, f64)> {
    let m = recs.n_items();
    if m < 2 {
        return Err(Error::invalid("equality of exposure needs at least two items"));
    }
    let slots = (recs.n_users() * recs.k()) as i128;
    if slots == 0 {
        return Err(Error::Undefined("no recommendation slots".into()));
    }
    let mut counts = recs.appearance_counts();
    counts.sort_unstable();
    let weighted: i128 = counts
        .iter()
        .enumerate()
        .map(|(idx, &c)| (2 * (idx as i128 + 1) - m as i128 - 1) * c as i128)
        .sum();
    let gini = weighted as f64 / ((m as i128 - 1) * slots) as f64;
    Ok((gini, 1.0 - gini))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ranking::Scored;
    use proptest::prelude::*;

    fn recs(k: usize, n_items: usize, lists: &[Vec<u32>]) -> RecommendationSet {
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

    #[test]
    fn aggregate_diversity_counts_appearances() {
        // A=0, B=1, C=2, D=3
        let r = recs(2, 4, &[vec![0, 1], vec![0, 2]]);
        assert_eq!(item_aggregate_diversity(&r, 1, None).unwrap(), 0.75);
        assert_eq!(item_aggregate_diversity(&r, 2, None).unwrap(), 0.25);
        assert_eq!(item_aggregate_diversity(&r, 1, Some(&[3])).unwrap(), 0.0);
        assert!(item_aggregate_diversity(&r, 1, Some(&[])).is_err());
        assert!(item_aggregate_diversity(&r, 0, None).is_err());
        let all = recs(2, 4, &[vec![0, 1], vec![2, 3]]);
        assert_eq!(item_aggregate_diversity(&all, 1, None).unwrap(), 1.0);
    }

    #[test]
    fn gini_worked_distribution() {
        let g = gini_index(&[0.0, 0.0, 0.5, 0.5]).unwrap();
        assert!((g - 2.0 / 3.0).abs() < 1e-12);
        let r = recs(1, 4, &[vec![2], vec![3]]);
        let (g, ee) = equality_of_exposure(&r).unwrap();
        assert!((g - 2.0 / 3.0).abs() < 1e-12);
        assert!((ee - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn gini_extremes() {
        for m in 2..=50usize {
            let uniform = recs(1, m, &(0..m as u32).map(|i| vec![i]).collect::<Vec<_>>());
            assert_eq!(equality_of_exposure(&uniform).unwrap(), (0.0, 1.0));
            let single = recs(1, m, &vec![vec![0]; 3]);
            assert_eq!(equality_of_exposure(&single).unwrap(), (1.0, 0.0));
            assert!(gini_index(&vec![1.0 / m as f64; m]).unwrap().abs() < 1e-12);
        }
        assert!(gini_index(&[1.0]).is_err());
    }

    proptest! {
        #[test]
        fn exposure_sums_to_one_and_gini_is_bounded(
            n_items in 2usize..10,
            lists in prop::collection::vec(prop::collection::btree_set(0u32..10, 3), 1..6),
        ) {
            let lists: Vec<Vec<u32>> = lists
                .into_iter()
                .map(|s| s.into_iter().map(|i| i % n_items as u32).collect::<std::collections::BTreeSet<_>>())
                .filter(|s| s.len() == 3.min(n_items))
                .map(|s| s.into_iter().collect())
                .collect();
            prop_assume!(!lists.is_empty());
            let k = 3.min(n_items);
            let r = recs(k, n_items, &lists);
            let e = exposure(&r);
            prop_assert!((e.0.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            let (g, ee) = equality_of_exposure(&r).unwrap();
            prop_assert!((0.0..=1.0).contains(&g));
            prop_assert!((ee - (1.0 - g)).abs() < 1e-12);
            prop_assert!((gini_index(&e.0).unwrap() - g).abs() < 1e-12);
            let ia1 = item_aggregate_diversity(&r, 1, None).unwrap();
            let ia2 = item_aggregate_diversity(&r, 2, None).unwrap();
            prop_assert!(ia2 <= ia1);
        }
    }
}
