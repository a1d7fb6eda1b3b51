use super::segment::popularity_order;
use crate::data::RatingMatrix;
use crate::error::{Error, Result};

/// `ceil(beta * m)`, tolerant of floating noise in `beta * m`.
pub fn flipped_item_count(beta: f64, n_items: usize) -> usize {
    ((beta * n_items as f64 - 1e-9).ceil().max(0.0) as usize).min(n_items)
}

/// Replaces every maximum-scale rating on the `ceil(beta * m)` most popular
/// items with the minimum scale value. Rating counts are untouched.
pub fn flip_positivity(matrix: &RatingMatrix, beta: f64) -> Result<RatingMatrix> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::invalid(format!("beta {beta} not in (0, 1]")));
    }
    let n_flip = flipped_item_count(beta, matrix.n_items());
    let mut flipped = vec![false; matrix.n_items()];
    for item in popularity_order(matrix).into_iter().take(n_flip) {
        flipped[item as usize] = true;
    }
    let (hi, lo) = (matrix.scale().max_value(), matrix.scale().min_value());
    let data = matrix.interactions().map_values(|e| {
        if flipped[e.item as usize] && e.value == hi {
            lo
        } else {
            e.value
        }
    });
    RatingMatrix::new(data, matrix.scale().clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::RatingScale;

    fn scale() -> RatingScale {
        RatingScale::integer(1, 5).unwrap()
    }

    #[test]
    fn only_max_ratings_on_covered_items_flip() {
        // item 0 is most popular with {5,5,4,1}; item 1 has {5}
        let m = RatingMatrix::from_triples(
            4,
            2,
            [(0, 0, 5.0), (1, 0, 5.0), (2, 0, 4.0), (3, 0, 1.0), (0, 1, 5.0)],
            scale(),
        )
        .unwrap();
        let f = flip_positivity(&m, 0.5).unwrap();
        let item0: Vec<f64> = f.item_profile(0).map(|e| e.value).collect();
        assert_eq!(item0, vec![1.0, 1.0, 4.0, 1.0]);
        assert_eq!(f.get(0, 1), Some(5.0));
    }

    #[test]
    fn nothing_to_flip_is_identity() {
        let m = RatingMatrix::from_triples(2, 2, [(0, 0, 4.0), (1, 0, 3.0), (0, 1, 5.0)], scale())
            .unwrap();
        assert_eq!(flip_positivity(&m, 0.1).unwrap(), m);
    }

    #[test]
    fn full_flip() {
        let m = RatingMatrix::from_triples(2, 2, [(0, 0, 5.0), (1, 1, 5.0), (0, 1, 5.0)], scale())
            .unwrap();
        let f = flip_positivity(&m, 1.0).unwrap();
        assert!(f.entries().iter().all(|e| e.value == 1.0));
    }

    #[test]
    fn item_count_rounding() {
        assert_eq!(flipped_item_count(0.01, 300), 3);
        assert_eq!(flipped_item_count(0.07, 300), 21);
        assert_eq!(flipped_item_count(0.01, 10), 1);
        assert_eq!(flipped_item_count(1.0, 10), 10);
    }

    #[test]
    fn beta_out_of_range() {
        let m = RatingMatrix::from_triples(1, 1, [(0, 0, 5.0)], scale()).unwrap();
        assert!(flip_positivity(&m, 0.0).is_err());
        assert!(flip_positivity(&m, 1.5).is_err());
    }
}
