use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{PercentileMatrix, RatingMatrix};

/// Percentile of `rating` within an ascending-sorted profile: the 1-based
/// position of its last occurrence, scaled by `100 / (len + 1)`.
///
/// ```
/// use multibias::bias::percentile_of;
/// let sorted = [1.0, 2.0, 2.0, 2.0, 2.0, 3.0, 3.0, 4.0, 5.0, 5.0];
/// assert!((percentile_of(2.0, &sorted) - 500.0 / 11.0).abs() < 1e-12);
/// ```
pub fn percentile_of(rating: f64, sorted: &[f64]) -> f64 {
    // number of values <= rating == index of the last occurrence (1-based)
    let position = sorted.partition_point(|&v| v <= rating);
    100.0 * position as f64 / (sorted.len() + 1) as f64
}

/// Maps every rating to its percentile within the item's profile.
pub fn percentile_transform(matrix: &RatingMatrix) -> PercentileMatrix {
    let data = matrix.interactions();
    let per_item: Vec<Vec<(usize, f64)>> = (0..data.n_items() as u32)
        .into_par_iter()
        .map(|item| {
            let indices = data.item_entry_indices(item);
            let mut sorted: Vec<f64> = indices.iter().map(|&k| data.entries()[k].value).collect();
            sorted.sort_by(f64::total_cmp);
            indices
                .iter()
                .map(|&k| (k, percentile_of(data.entries()[k].value, &sorted)))
                .collect()
        })
        .collect();
    let mut values = vec![0.0; data.nnz()];
    for (k, p) in per_item.into_iter().flatten() {
        values[k] = p;
    }
    PercentileMatrix::new(data.with_values(values), matrix.scale().clone())
}

/// Profile size and number of distinct rating values for one item.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileSummary {
    pub item: u32,
    pub size: usize,
    pub distinct: usize,
}

/// Per-item profile sizes, for spotting items whose percentiles are
/// degenerate (tiny or single-valued profiles).
pub fn profile_report(matrix: &RatingMatrix) -> Vec<ProfileSummary> {
    (0..matrix.n_items() as u32)
        .map(|item| {
            let mut values: Vec<f64> = matrix.item_profile(item).map(|e| e.value).collect();
            values.sort_by(f64::total_cmp);
            let size = values.len();
            values.dedup();
            ProfileSummary {
                item,
                size,
                distinct: values.len(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::RatingScale;
    use proptest::prelude::*;

    fn single_item(values: &[f64]) -> RatingMatrix {
        RatingMatrix::from_triples(
            values.len(),
            1,
            values.iter().enumerate().map(|(u, &v)| (u as u32, 0, v)),
            RatingScale::integer(1, 5).unwrap(),
        )
        .unwrap()
    }

    /// Counts positions directly: walk the sorted profile and remember the
    /// last index holding `rating`.
    fn oracle(rating: f64, profile: &[f64]) -> f64 {
        let mut sorted = profile.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut last = 0;
        for (idx, &v) in sorted.iter().enumerate() {
            if v == rating {
                last = idx + 1;
            }
        }
        100.0 * last as f64 / (profile.len() + 1) as f64
    }

    #[test]
    fn worked_profile() {
        let values = [1.0, 2.0, 2.0, 2.0, 2.0, 3.0, 3.0, 4.0, 5.0, 5.0];
        let p = percentile_transform(&single_item(&values));
        let got: Vec<f64> = p.entries().iter().map(|e| e.value).collect();
        assert!((got[1] - 45.454_545_454_545_45).abs() < 1e-9);
        assert_eq!(got[1], 100.0 * 5.0 / 11.0);
        assert_eq!(got[9], 100.0 * 10.0 / 11.0);
        assert_eq!(got[0], 100.0 / 11.0);
    }

    #[test]
    fn degenerate_profiles() {
        let p = percentile_transform(&single_item(&[4.0]));
        assert_eq!(p.entries()[0].value, 50.0);
        let p = percentile_transform(&single_item(&[3.0, 3.0, 3.0]));
        assert!(p.entries().iter().all(|e| e.value == 75.0));
        let report = profile_report(&single_item(&[3.0, 3.0, 3.0]));
        assert_eq!(report[0], ProfileSummary { item: 0, size: 3, distinct: 1 });
    }

    proptest! {
        #[test]
        fn matches_oracle_and_invariants(profile in prop::collection::vec(1u8..=5, 1..=12)) {
            let values: Vec<f64> = profile.iter().map(|&v| v as f64).collect();
            let m = single_item(&values);
            let p = percentile_transform(&m);
            prop_assert_eq!(p.nnz(), m.nnz());
            for (src, dst) in m.entries().iter().zip(p.entries()) {
                prop_assert_eq!((src.user, src.item), (dst.user, dst.item));
                prop_assert_eq!(dst.value, oracle(src.value, &values));
                prop_assert!(dst.value > 0.0 && dst.value < 100.0);
            }
            for a in m.entries() {
                for b in m.entries() {
                    let (pa, pb) = (p.get(a.user, 0).unwrap(), p.get(b.user, 0).unwrap());
                    if a.value < b.value { prop_assert!(pa < pb); }
                    if a.value == b.value { prop_assert_eq!(pa, pb); }
                }
            }
        }
    }
}
