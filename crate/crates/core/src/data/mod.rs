//! Explicit-rating data: scales, sparse matrices, loading, k-core filtering
//! and per-user train/test splitting.
//!
//! Every matrix stores entries sorted by `(user, item)` together with a
//! column index so that both user profiles and item profiles can be walked
//! without copying. Internal ids are dense (`0..n_users`, `0..n_items`);
//! the original identifiers are kept in an [`IdMap`] sidecar.

mod filter;
mod io;
mod split;

use std::collections::HashMap;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use filter::filter_kcore;
pub use io::{load_ratings, read_ratings, write_interactions, write_remap, LoadOptions};
pub use split::{split_per_user, SplitPair};

/// The ordered set of admissible rating values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingScale {
    levels: Vec<f64>,
}

impl RatingScale {
    pub fn new(levels: Vec<f64>) -> Result<Self> {
        if levels.len() < 2 {
            return Err(Error::invalid("a rating scale needs at least two levels"));
        }
        if levels.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("rating levels must be finite"));
        }
        if levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("rating levels must be strictly increasing"));
        }
        Ok(Self { levels })
    }

    /// Integer levels `lo..=hi`.
    pub fn integer(lo: i32, hi: i32) -> Result<Self> {
        Self::new((lo..=hi).map(f64::from).collect())
    }

    /// The sorted set of distinct values that occur in `values`.
    pub fn infer(values: impl IntoIterator<Item = f64>) -> Result<Self> {
        let mut levels: Vec<f64> = values.into_iter().collect();
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        Self::new(levels)
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn min_value(&self) -> f64 {
        self.levels[0]
    }

    pub fn max_value(&self) -> f64 {
        self.levels[self.levels.len() - 1]
    }

    pub fn contains(&self, value: f64) -> bool {
        self.levels
            .binary_search_by(|l| l.total_cmp(&value))
            .is_ok()
    }
}

/// Bijection between external identifiers and dense internal ids.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IdMap {
    external: Vec<String>,
}

impl IdMap {
    pub fn new(external: Vec<String>) -> Self {
        Self { external }
    }

    /// `prefix0`, `prefix1`, ... for generated data.
    pub fn sequential(prefix: &str, n: usize) -> Self {
        Self::new((0..n).map(|i| format!("{prefix}{i}")).collect())
    }

    pub fn len(&self) -> usize {
        self.external.len()
    }

    pub fn is_empty(&self) -> bool {
        self.external.is_empty()
    }

    pub fn external(&self, internal: u32) -> &str {
        &self.external[internal as usize]
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &str)> {
        self.external
            .iter()
            .enumerate()
            .map(|(i, s)| (i as u32, s.as_str()))
    }

    pub fn lookup_table(&self) -> HashMap<&str, u32> {
        self.iter().map(|(i, s)| (s, i)).collect()
    }

    /// Keeps only the ids flagged in `keep`, returning the compacted map and
    /// the old-to-new translation.
    pub(crate) fn retain(&self, keep: &[bool]) -> (IdMap, Vec<Option<u32>>) {
        let mut next = 0u32;
        let mut translation = Vec::with_capacity(keep.len());
        let mut external = Vec::new();
        for (old, &k) in keep.iter().enumerate() {
            if k {
                translation.push(Some(next));
                external.push(self.external[old].clone());
                next += 1;
            } else {
                translation.push(None);
            }
        }
        (IdMap::new(external), translation)
    }
}

/// One observed `(user, item, value)` cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub user: u32,
    pub item: u32,
    pub value: f64,
}

/// Sparse user x item matrix of real values with row and column access.
#[derive(Debug, Clone, PartialEq)]
pub struct Interactions {
    n_users: usize,
    n_items: usize,
    entries: Vec<Entry>,
    user_ptr: Vec<usize>,
    item_ptr: Vec<usize>,
    item_index: Vec<usize>,
    user_ids: IdMap,
    item_ids: IdMap,
}

impl Interactions {
    /// Builds the matrix, sorting entries by `(user, item)`. Fails on
    /// out-of-range ids, non-finite values or repeated cells.
    pub fn new(
        user_ids: IdMap,
        item_ids: IdMap,
        mut entries: Vec<Entry>,
    ) -> Result<Self> {
        let n_users = user_ids.len();
        let n_items = item_ids.len();
        for e in &entries {
            if e.user as usize >= n_users || e.item as usize >= n_items {
                return Err(Error::invalid(format!(
                    "entry ({}, {}) outside a {n_users}x{n_items} matrix",
                    e.user, e.item
                )));
            }
            if !e.value.is_finite() {
                return Err(Error::invalid("non-finite value in matrix"));
            }
        }
        entries.sort_by_key(|e| (e.user, e.item));
        if let Some(w) = entries
            .windows(2)
            .find(|w| w[0].user == w[1].user && w[0].item == w[1].item)
        {
            return Err(Error::invalid(format!(
                "repeated cell ({}, {})",
                w[0].user, w[0].item
            )));
        }

        let mut user_ptr = vec![0usize; n_users + 1];
        let mut item_ptr = vec![0usize; n_items + 1];
        for e in &entries {
            user_ptr[e.user as usize + 1] += 1;
            item_ptr[e.item as usize + 1] += 1;
        }
        for u in 0..n_users {
            user_ptr[u + 1] += user_ptr[u];
        }
        for i in 0..n_items {
            item_ptr[i + 1] += item_ptr[i];
        }
        let mut fill = item_ptr.clone();
        let mut item_index = vec![0usize; entries.len()];
        for (idx, e) in entries.iter().enumerate() {
            let slot = &mut fill[e.item as usize];
            item_index[*slot] = idx;
            *slot += 1;
        }

        Ok(Self {
            n_users,
            n_items,
            entries,
            user_ptr,
            item_ptr,
            item_index,
            user_ids,
            item_ids,
        })
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn user_ids(&self) -> &IdMap {
        &self.user_ids
    }

    pub fn item_ids(&self) -> &IdMap {
        &self.item_ids
    }

    /// The user's ratings, ascending by item.
    pub fn user_profile(&self, user: u32) -> &[Entry] {
        let u = user as usize;
        &self.entries[self.user_ptr[u]..self.user_ptr[u + 1]]
    }

    /// The item's ratings, ascending by user.
    pub fn item_profile(&self, item: u32) -> impl ExactSizeIterator<Item = &Entry> + '_ {
        let i = item as usize;
        self.item_index[self.item_ptr[i]..self.item_ptr[i + 1]]
            .iter()
            .map(move |&idx| &self.entries[idx])
    }

    pub fn user_count(&self, user: u32) -> usize {
        let u = user as usize;
        self.user_ptr[u + 1] - self.user_ptr[u]
    }

    pub fn item_count(&self, item: u32) -> usize {
        let i = item as usize;
        self.item_ptr[i + 1] - self.item_ptr[i]
    }

    pub fn item_counts(&self) -> Vec<usize> {
        (0..self.n_items as u32).map(|i| self.item_count(i)).collect()
    }

    pub fn get(&self, user: u32, item: u32) -> Option<f64> {
        let profile = self.user_profile(user);
        profile
            .binary_search_by_key(&item, |e| e.item)
            .ok()
            .map(|idx| profile[idx].value)
    }

    pub fn global_mean(&self) -> f64 {
        if self.entries.is_empty() {
            return 0.0;
        }
        self.entries.iter().map(|e| e.value).sum::<f64>() / self.entries.len() as f64
    }

    /// Same sparsity pattern and ids, values replaced entry by entry.
    pub fn map_values(&self, mut f: impl FnMut(&Entry) -> f64) -> Self {
        let mut out = self.clone();
        for e in &mut out.entries {
            e.value = f(e);
        }
        out
    }

    /// Same sparsity pattern and ids, values taken from `values` in entry order.
    pub(crate) fn with_values(&self, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), self.entries.len());
        let mut out = self.clone();
        for (e, v) in out.entries.iter_mut().zip(values) {
            e.value = v;
        }
        out
    }

    /// Position of each entry in [`Interactions::entries`] grouped by item.
    pub(crate) fn item_entry_indices(&self, item: u32) -> &[usize] {
        let i = item as usize;
        &self.item_index[self.item_ptr[i]..self.item_ptr[i + 1]]
    }
}

/// Explicit ratings on a declared [`RatingScale`].
#[derive(Debug, Clone, PartialEq)]
pub struct RatingMatrix {
    data: Interactions,
    scale: RatingScale,
}

impl RatingMatrix {
    pub fn new(data: Interactions, scale: RatingScale) -> Result<Self> {
        if let Some(e) = data.entries().iter().find(|e| !scale.contains(e.value)) {
            return Err(Error::invalid(format!(
                "rating {} of user {} on item {} is not a level of the scale",
                e.value, e.user, e.item
            )));
        }
        Ok(Self { data, scale })
    }

    /// Builds a matrix from dense-id triples with generated external ids.
    pub fn from_triples(
        n_users: usize,
        n_items: usize,
        triples: impl IntoIterator<Item = (u32, u32, f64)>,
        scale: RatingScale,
    ) -> Result<Self> {
        let entries = triples
            .into_iter()
            .map(|(user, item, value)| Entry { user, item, value })
            .collect();
        let data = Interactions::new(
            IdMap::sequential("u", n_users),
            IdMap::sequential("i", n_items),
            entries,
        )?;
        Self::new(data, scale)
    }

    pub fn scale(&self) -> &RatingScale {
        &self.scale
    }

    pub fn interactions(&self) -> &Interactions {
        &self.data
    }

    pub fn into_interactions(self) -> Interactions {
        self.data
    }
}

impl Deref for RatingMatrix {
    type Target = Interactions;

    fn deref(&self) -> &Interactions {
        &self.data
    }
}

/// Per-item percentile values in `(0, 100)` with the sparsity pattern of the
/// rating matrix they were computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct PercentileMatrix {
    data: Interactions,
    source_scale: RatingScale,
}

impl PercentileMatrix {
    pub(crate) fn new(data: Interactions, source_scale: RatingScale) -> Self {
        Self { data, source_scale }
    }

    pub fn source_scale(&self) -> &RatingScale {
        &self.source_scale
    }

    pub fn interactions(&self) -> &Interactions {
        &self.data
    }
}

impl Deref for PercentileMatrix {
    type Target = Interactions;

    fn deref(&self) -> &Interactions {
        &self.data
    }
}

/// What kind of value a training matrix carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueKind {
    Rating,
    Percentile,
}

impl ValueKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ValueKind::Rating => "rating",
            ValueKind::Percentile => "percentile",
        }
    }
}

/// A borrowed training input: either raw ratings or percentile values.
#[derive(Debug, Clone, Copy)]
pub struct Feedback<'a> {
    pub matrix: &'a Interactions,
    pub kind: ValueKind,
}

impl<'a> From<&'a RatingMatrix> for Feedback<'a> {
    fn from(m: &'a RatingMatrix) -> Self {
        Feedback {
            matrix: m.interactions(),
            kind: ValueKind::Rating,
        }
    }
}

impl<'a> From<&'a PercentileMatrix> for Feedback<'a> {
    fn from(m: &'a PercentileMatrix) -> Self {
        Feedback {
            matrix: m.interactions(),
            kind: ValueKind::Percentile,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scale_rejects_bad_levels() {
        assert!(RatingScale::new(vec![1.0]).is_err());
        assert!(RatingScale::new(vec![1.0, 1.0]).is_err());
        assert!(RatingScale::new(vec![2.0, 1.0]).is_err());
        let s = RatingScale::integer(1, 5).unwrap();
        assert_eq!(s.min_value(), 1.0);
        assert_eq!(s.max_value(), 5.0);
        assert!(s.contains(3.0));
        assert!(!s.contains(3.5));
    }

    #[test]
    fn profiles_are_indexed_both_ways() {
        let m = RatingMatrix::from_triples(
            3,
            2,
            [(2, 0, 1.0), (0, 1, 5.0), (0, 0, 3.0), (1, 0, 4.0)],
            RatingScale::integer(1, 5).unwrap(),
        )
        .unwrap();
        let items: Vec<u32> = m.user_profile(0).iter().map(|e| e.item).collect();
        assert_eq!(items, vec![0, 1]);
        let users: Vec<u32> = m.item_profile(0).map(|e| e.user).collect();
        assert_eq!(users, vec![0, 1, 2]);
        assert_eq!(m.get(1, 0), Some(4.0));
        assert_eq!(m.get(1, 1), None);
        assert_eq!(m.item_counts(), vec![3, 1]);
    }

    #[test]
    fn repeated_cells_and_off_scale_values_are_rejected() {
        let scale = RatingScale::integer(1, 5).unwrap();
        assert!(RatingMatrix::from_triples(1, 1, [(0, 0, 1.0), (0, 0, 2.0)], scale.clone()).is_err());
        assert!(RatingMatrix::from_triples(1, 1, [(0, 0, 6.0)], scale.clone()).is_err());
        assert!(RatingMatrix::from_triples(1, 1, [(1, 0, 1.0)], scale).is_err());
    }
}
