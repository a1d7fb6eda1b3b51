use super::{Entry, Interactions, RatingMatrix};
use crate::error::{Error, Result};

/// Repeatedly drops users with fewer than `min_user_ratings` ratings and
/// items with fewer than `min_item_ratings` until every survivor satisfies
/// both thresholds, then recompacts ids (the returned id maps are the remap
/// table).
pub fn filter_kcore(
    matrix: &RatingMatrix,
    min_user_ratings: usize,
    min_item_ratings: usize,
) -> Result<RatingMatrix> {
    if min_user_ratings == 0 || min_item_ratings == 0 {
        return Err(Error::invalid("k-core thresholds must be at least 1"));
    }
    let n_users = matrix.n_users();
    let n_items = matrix.n_items();
    let entries = matrix.entries();
    let mut alive = vec![true; entries.len()];
    let mut user_alive = vec![true; n_users];
    let mut item_alive = vec![true; n_items];

    loop {
        let mut user_count = vec![0usize; n_users];
        let mut item_count = vec![0usize; n_items];
        for (e, _) in entries.iter().zip(&alive).filter(|(_, &a)| a) {
            user_count[e.user as usize] += 1;
            item_count[e.item as usize] += 1;
        }
        let mut changed = false;
        for (u, flag) in user_alive.iter_mut().enumerate() {
            if *flag && user_count[u] < min_user_ratings {
                *flag = false;
                changed = true;
            }
        }
        for (i, flag) in item_alive.iter_mut().enumerate() {
            if *flag && item_count[i] < min_item_ratings {
                *flag = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        for (a, e) in alive.iter_mut().zip(entries) {
            *a = *a && user_alive[e.user as usize] && item_alive[e.item as usize];
        }
    }

    if !alive.iter().any(|&a| a) {
        return Err(Error::OverFiltered {
            min_user_ratings,
            min_item_ratings,
        });
    }

    let (user_ids, user_map) = matrix.user_ids().retain(&user_alive);
    let (item_ids, item_map) = matrix.item_ids().retain(&item_alive);
    let kept = entries
        .iter()
        .zip(&alive)
        .filter(|(_, &a)| a)
        .map(|(e, _)| Entry {
            user: user_map[e.user as usize].expect("surviving user"),
            item: item_map[e.item as usize].expect("surviving item"),
            value: e.value,
        })
        .collect();
    let data = Interactions::new(user_ids, item_ids, kept)?;
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
    fn threshold_one_is_identity() {
        let m = RatingMatrix::from_triples(2, 3, [(0, 0, 5.0), (1, 2, 3.0)], scale()).unwrap();
        // item 1 has no ratings and is dropped by any threshold
        let f = filter_kcore(&m, 1, 1).unwrap();
        assert_eq!(f.nnz(), 2);
        assert_eq!(f.n_items(), 2);
        let again = filter_kcore(&f, 1, 1).unwrap();
        assert_eq!(again, f);
    }

    #[test]
    fn removal_cascades_to_a_fixed_point() {
        // thresholds (2, 2)
        // u0: i0 i1       u1: i0 i1       u2: i1 i2
        // i2 has one rating -> dropped; u2 then has one rating -> dropped;
        // i1 keeps u0,u1 (2) -> stays. Survivors: u0,u1 x i0,i1.
        let m = RatingMatrix::from_triples(
            3,
            3,
            [
                (0, 0, 4.0),
                (0, 1, 3.0),
                (1, 0, 5.0),
                (1, 1, 2.0),
                (2, 1, 1.0),
                (2, 2, 5.0),
            ],
            scale(),
        )
        .unwrap();
        let f = filter_kcore(&m, 2, 2).unwrap();
        assert_eq!(f.n_users(), 2);
        assert_eq!(f.n_items(), 2);
        assert_eq!(f.nnz(), 4);
        assert_eq!(f.user_ids().external(1), "u1");
        assert_eq!(f.item_ids().external(1), "i1");
    }

    #[test]
    fn cascade_that_needs_several_rounds() {
        // thresholds (2, 2): i2 rated only by u2 -> u2 drops to one rating -> i1
        // loses u2 and falls to one rating -> u1 falls to one -> ... all gone
        let m = RatingMatrix::from_triples(
            3,
            3,
            [(0, 0, 4.0), (0, 1, 3.0), (1, 0, 5.0), (2, 1, 2.0), (2, 2, 1.0)],
            scale(),
        )
        .unwrap();
        assert!(matches!(
            filter_kcore(&m, 2, 2),
            Err(Error::OverFiltered { .. })
        ));
    }

    #[test]
    fn zero_threshold_rejected() {
        let m = RatingMatrix::from_triples(1, 1, [(0, 0, 5.0)], scale()).unwrap();
        assert!(filter_kcore(&m, 0, 1).is_err());
    }
}
