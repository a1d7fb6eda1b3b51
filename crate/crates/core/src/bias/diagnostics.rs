use serde::{Deserialize, Serialize};

use super::segment::popularity_order;
use crate::data::RatingMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemStat {
    pub item: u32,
    pub count: usize,
    /// `None` for items without ratings.
    pub mean: Option<f64>,
}

/// Popularity concentration, rating-value distribution and per-item
/// popularity/mean pairs of one rating matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasDiagnostics {
    /// `(item fraction, cumulative rating fraction)` over items in
    /// popularity order, starting at `(0, 0)` and ending at `(1, 1)`.
    pub lorenz: Vec<(f64, f64)>,
    /// `(level, fraction of all ratings)` for every level of the scale.
    pub rating_histogram: Vec<(f64, f64)>,
    pub item_stats: Vec<ItemStat>,
}

pub fn diagnose(matrix: &RatingMatrix) -> Result<BiasDiagnostics> {
    if matrix.is_empty() {
        return Err(Error::Empty("cannot diagnose an empty matrix".into()));
    }
    let total = matrix.nnz() as f64;
    let m = matrix.n_items() as f64;

    let mut lorenz = Vec::with_capacity(matrix.n_items() + 1);
    lorenz.push((0.0, 0.0));
    let mut cumulative = 0usize;
    for (rank, item) in popularity_order(matrix).into_iter().enumerate() {
        cumulative += matrix.item_count(item);
        lorenz.push(((rank + 1) as f64 / m, cumulative as f64 / total));
    }

    let levels = matrix.scale().levels();
    let mut counts = vec![0usize; levels.len()];
    for e in matrix.entries() {
        let idx = levels
            .binary_search_by(|l| l.total_cmp(&e.value))
            .expect("ratings lie on the scale");
        counts[idx] += 1;
    }
    let rating_histogram = levels
        .iter()
        .zip(counts)
        .map(|(&l, c)| (l, c as f64 / total))
        .collect();

    let item_stats = (0..matrix.n_items() as u32)
        .map(|item| {
            let count = matrix.item_count(item);
            let mean = (count > 0)
                .then(|| matrix.item_profile(item).map(|e| e.value).sum::<f64>() / count as f64);
            ItemStat { item, count, mean }
        })
        .collect();

    Ok(BiasDiagnostics {
        lorenz,
        rating_histogram,
        item_stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::RatingScale;

    #[test]
    fn lorenz_point_for_skewed_counts() {
        let counts = [65usize, 20, 10, 5];
        let triples = counts
            .iter()
            .enumerate()
            .flat_map(|(i, &c)| (0..c).map(move |u| (u as u32, i as u32, 4.0)));
        let m = RatingMatrix::from_triples(65, 4, triples, RatingScale::integer(1, 5).unwrap())
            .unwrap();
        let d = diagnose(&m).unwrap();
        assert_eq!(d.lorenz[1].0, 0.25);
        assert!((d.lorenz[1].1 - 0.65).abs() < 1e-12);
        assert_eq!(*d.lorenz.last().unwrap(), (1.0, 1.0));
    }

    #[test]
    fn equal_counts_give_the_diagonal() {
        let triples = (0..4u32).flat_map(|i| (0..3u32).map(move |u| (u, i, 1.0)));
        let m = RatingMatrix::from_triples(3, 4, triples, RatingScale::integer(1, 5).unwrap())
            .unwrap();
        let d = diagnose(&m).unwrap();
        for &(x, y) in &d.lorenz {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn histogram_and_item_means() {
        let m = RatingMatrix::from_triples(
            3,
            3,
            [(0, 0, 5.0), (1, 0, 3.0), (2, 0, 4.0), (0, 1, 1.0)],
            RatingScale::integer(1, 5).unwrap(),
        )
        .unwrap();
        let d = diagnose(&m).unwrap();
        let sum: f64 = d.rating_histogram.iter().map(|(_, f)| f).sum();
        assert!((sum - 1.0).abs() < 1e-9);
        assert_eq!(d.rating_histogram[1], (2.0, 0.0));
        assert_eq!(d.item_stats[0].mean, Some(4.0));
        assert_eq!(d.item_stats[2].mean, None);
        assert!(d.lorenz.windows(2).all(|w| w[0].0 <= w[1].0 && w[0].1 <= w[1].1));
    }
}
