use serde::{Deserialize, Serialize};

use crate::data::Interactions;
use crate::error::{Error, Result};

/// Items ordered by rating count descending, ties by ascending id.
pub fn popularity_order(matrix: &Interactions) -> Vec<u32> {
    let counts = matrix.item_counts();
    let mut order: Vec<u32> = (0..matrix.n_items() as u32).collect();
    order.sort_by(|&a, &b| counts[b as usize].cmp(&counts[a as usize]).then(a.cmp(&b)));
    order
}

/// Head/tail partition of the catalog.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemSegmentation {
    /// Head items in popularity order.
    pub head: Vec<u32>,
    /// Tail items in popularity order.
    pub tail: Vec<u32>,
    /// Share of all ratings that fall on head items.
    pub coverage: f64,
    is_head: Vec<bool>,
}

impl ItemSegmentation {
    /// Builds a segmentation from an explicit head set.
    pub fn from_head(n_items: usize, head: &[u32], coverage: f64) -> Self {
        let mut is_head = vec![false; n_items];
        for &i in head {
            is_head[i as usize] = true;
        }
        let tail = (0..n_items as u32).filter(|&i| !is_head[i as usize]).collect();
        Self {
            head: head.to_vec(),
            tail,
            coverage,
            is_head,
        }
    }

    pub fn is_head(&self, item: u32) -> bool {
        self.is_head[item as usize]
    }

    pub fn is_tail(&self, item: u32) -> bool {
        !self.is_head(item)
    }

    pub fn n_items(&self) -> usize {
        self.is_head.len()
    }

    /// Fraction of the catalog that is tail.
    pub fn tail_share(&self) -> f64 {
        self.tail.len() as f64 / self.n_items().max(1) as f64
    }
}

/// The head is the shortest popularity-ordered prefix whose share of all
/// ratings reaches `target_fraction`; everything else is tail.
pub fn segment_head_tail(matrix: &Interactions, target_fraction: f64) -> Result<ItemSegmentation> {
    if !(target_fraction > 0.0 && target_fraction < 1.0) {
        return Err(Error::invalid(format!(
            "head fraction {target_fraction} not in (0, 1)"
        )));
    }
    if matrix.is_empty() {
        return Err(Error::Empty("cannot segment an empty matrix".into()));
    }
    let total = matrix.nnz() as f64;
    let needed = target_fraction * total - 1e-9;
    let order = popularity_order(matrix);
    let mut cumulative = 0usize;
    let mut head_len = 0;
    for &item in &order {
        cumulative += matrix.item_count(item);
        head_len += 1;
        if cumulative as f64 >= needed {
            break;
        }
    }
    Ok(ItemSegmentation::from_head(
        matrix.n_items(),
        &order[..head_len],
        cumulative as f64 / total,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{RatingMatrix, RatingScale};

    /// One user per rating; item `i` receives `counts[i]` ratings.
    pub(crate) fn with_counts(counts: &[usize]) -> RatingMatrix {
        let n_users = counts.iter().copied().max().unwrap_or(0);
        let triples = counts
            .iter()
            .enumerate()
            .flat_map(|(i, &c)| (0..c).map(move |u| (u as u32, i as u32, 5.0)));
        RatingMatrix::from_triples(n_users, counts.len(), triples, RatingScale::integer(1, 5).unwrap())
            .unwrap()
    }

    #[test]
    fn shortest_prefix_reaching_target() {
        let m = with_counts(&[50, 30, 10, 5, 5]);
        let s = segment_head_tail(&m, 0.2).unwrap();
        assert_eq!(s.head, vec![0]);
        assert_eq!(s.tail, vec![1, 2, 3, 4]);
        assert!((s.coverage - 0.5).abs() < 1e-12);
    }

    #[test]
    fn uniform_counts_take_first_in_tie_order() {
        let m = with_counts(&[10, 10, 10, 10, 10]);
        let s = segment_head_tail(&m, 0.2).unwrap();
        assert_eq!(s.head, vec![0]);
        assert!((s.coverage - 0.2).abs() < 1e-12);
    }

    #[test]
    fn single_item_is_all_head() {
        let m = with_counts(&[3]);
        let s = segment_head_tail(&m, 0.2).unwrap();
        assert_eq!(s.head, vec![0]);
        assert!(s.tail.is_empty());
    }

    #[test]
    fn popularity_order_breaks_ties_by_id() {
        let m = with_counts(&[2, 5, 2, 5]);
        assert_eq!(popularity_order(&m), vec![1, 3, 0, 2]);
    }

    #[test]
    fn head_is_prefix_and_partition_is_complete() {
        let m = with_counts(&[1, 9, 4, 4, 7, 0, 2]);
        for target in [0.05, 0.2, 0.5, 0.9] {
            let s = segment_head_tail(&m, target).unwrap();
            let order = popularity_order(&m);
            assert_eq!(&order[..s.head.len()], s.head.as_slice());
            assert_eq!(s.head.len() + s.tail.len(), m.n_items());
            assert!(s.head.iter().all(|&i| !s.tail.contains(&i)));
        }
    }

    #[test]
    fn bad_fraction() {
        let m = with_counts(&[1, 2]);
        assert!(segment_head_tail(&m, 0.0).is_err());
        assert!(segment_head_tail(&m, 1.0).is_err());
    }
}
