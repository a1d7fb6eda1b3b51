//! Neighborhood models. UserKNN uses Pearson correlation over co-rated
//! items, ItemKNN cosine similarity over item columns; both shrink the raw
//! similarity by `n / (n + shrinkage)` where `n` is the support (co-rated
//! items, co-raters). Only positive similarities are kept.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Interactions;

/// `n / (n + shrinkage)` applied to a raw similarity.
pub fn shrink(similarity: f64, support: usize, shrinkage: f64) -> f64 {
    let n = support as f64;
    if n + shrinkage == 0.0 {
        return 0.0;
    }
    similarity * n / (n + shrinkage)
}

/// Pearson correlation of two equally long vectors; 0 when either is
/// constant.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    if a.is_empty() {
        return 0.0;
    }
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let mut num = 0.0;
    let (mut va, mut vb) = (0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        num += (x - ma) * (y - mb);
        va += (x - ma).powi(2);
        vb += (y - mb).powi(2);
    }
    if va <= 0.0 || vb <= 0.0 {
        return 0.0;
    }
    num / (va.sqrt() * vb.sqrt())
}

type Neighbors = Vec<Vec<(u32, f64)>>;

fn sort_neighbors(list: &mut [(u32, f64)]) {
    list.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
}

#[derive(Default, Clone, Copy)]
struct PairStats {
    n: usize,
    sx: f64,
    sy: f64,
    sxx: f64,
    syy: f64,
    sxy: f64,
}

impl PairStats {
    fn pearson(&self) -> f64 {
        let n = self.n as f64;
        if self.n == 0 {
            return 0.0;
        }
        let cov = self.sxy - self.sx * self.sy / n;
        let vx = self.sxx - self.sx * self.sx / n;
        let vy = self.syy - self.sy * self.sy / n;
        if vx <= 1e-12 || vy <= 1e-12 {
            return 0.0;
        }
        (cov / (vx.sqrt() * vy.sqrt())).clamp(-1.0, 1.0)
    }
}

/// Shrunk Pearson similarities between every pair of users, as sorted
/// positive neighbor lists (self excluded).
pub fn user_similarities(data: &Interactions, shrinkage: f64) -> Neighbors {
    (0..data.n_users() as u32)
        .into_par_iter()
        .map(|u| {
            let mut stats = vec![PairStats::default(); data.n_users()];
            for e in data.user_profile(u) {
                for other in data.item_profile(e.item) {
                    if other.user == u {
                        continue;
                    }
                    let s = &mut stats[other.user as usize];
                    s.n += 1;
                    s.sx += e.value;
                    s.sy += other.value;
                    s.sxx += e.value * e.value;
                    s.syy += other.value * other.value;
                    s.sxy += e.value * other.value;
                }
            }
            let mut list: Vec<(u32, f64)> = stats
                .iter()
                .enumerate()
                .filter(|(_, s)| s.n > 0)
                .map(|(v, s)| (v as u32, shrink(s.pearson(), s.n, shrinkage)))
                .filter(|&(_, sim)| sim > 0.0)
                .collect();
            sort_neighbors(&mut list);
            list
        })
        .collect()
}

/// Shrunk cosine similarities between item columns, as sorted positive
/// neighbor lists (self excluded).
pub fn item_similarities(data: &Interactions, shrinkage: f64) -> Neighbors {
    let norms: Vec<f64> = (0..data.n_items() as u32)
        .map(|i| data.item_profile(i).map(|e| e.value * e.value).sum::<f64>().sqrt())
        .collect();
    (0..data.n_items() as u32)
        .into_par_iter()
        .map(|i| {
            let mut dots = vec![0.0f64; data.n_items()];
            let mut support = vec![0usize; data.n_items()];
            for e in data.item_profile(i) {
                for other in data.user_profile(e.user) {
                    if other.item == i {
                        continue;
                    }
                    dots[other.item as usize] += e.value * other.value;
                    support[other.item as usize] += 1;
                }
            }
            let mut list: Vec<(u32, f64)> = (0..data.n_items())
                .filter(|&j| support[j] > 0 && norms[i as usize] > 0.0 && norms[j] > 0.0)
                .map(|j| {
                    let cos = dots[j] / (norms[i as usize] * norms[j]);
                    (j as u32, shrink(cos, support[j], shrinkage))
                })
                .filter(|&(_, sim)| sim > 0.0)
                .collect();
            sort_neighbors(&mut list);
            list
        })
        .collect()
}

fn profiles(data: &Interactions) -> Vec<Vec<(u32, f64)>> {
    (0..data.n_users() as u32)
        .map(|u| data.user_profile(u).iter().map(|e| (e.item, e.value)).collect())
        .collect()
}

fn user_means(data: &Interactions) -> Vec<f64> {
    let global = data.global_mean();
    (0..data.n_users() as u32)
        .map(|u| {
            let p = data.user_profile(u);
            if p.is_empty() {
                global
            } else {
                p.iter().map(|e| e.value).sum::<f64>() / p.len() as f64
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserKnnParams {
    pub neighbors: usize,
    pub means: Vec<f64>,
    pub similarities: Neighbors,
    pub profiles: Vec<Vec<(u32, f64)>>,
}

impl UserKnnParams {
    pub fn fit(data: &Interactions, neighbors: usize, shrinkage: f64) -> Self {
        Self {
            neighbors,
            means: user_means(data),
            similarities: user_similarities(data, shrinkage),
            profiles: profiles(data),
        }
    }

    /// Mean-centred aggregation over the `neighbors` most similar users
    /// who rated each item; the user's mean where no neighbor did.
    pub fn score_user(&self, user: u32, out: &mut [f64]) {
        let n_items = out.len();
        let mut num = vec![0.0; n_items];
        let mut den = vec![0.0; n_items];
        let mut used = vec![0usize; n_items];
        for &(v, sim) in &self.similarities[user as usize] {
            let mean_v = self.means[v as usize];
            for &(item, value) in &self.profiles[v as usize] {
                let i = item as usize;
                if used[i] < self.neighbors {
                    num[i] += sim * (value - mean_v);
                    den[i] += sim.abs();
                    used[i] += 1;
                }
            }
        }
        let mean_u = self.means[user as usize];
        for i in 0..n_items {
            out[i] = if den[i] > 0.0 { mean_u + num[i] / den[i] } else { mean_u };
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemKnnParams {
    pub neighbors: usize,
    /// Aggregate deviations from item means instead of raw values.
    pub centered: bool,
    pub means: Vec<f64>,
    pub item_means: Vec<f64>,
    pub similarities: Neighbors,
    pub profiles: Vec<Vec<(u32, f64)>>,
}

impl ItemKnnParams {
    pub fn fit(data: &Interactions, neighbors: usize, shrinkage: f64, centered: bool) -> Self {
        let global = data.global_mean();
        let item_means = (0..data.n_items() as u32)
            .map(|i| {
                let n = data.item_count(i);
                if n == 0 {
                    global
                } else {
                    data.item_profile(i).map(|e| e.value).sum::<f64>() / n as f64
                }
            })
            .collect();
        Self {
            neighbors,
            centered,
            means: user_means(data),
            item_means,
            similarities: item_similarities(data, shrinkage),
            profiles: profiles(data),
        }
    }

    /// Aggregates the user's values on the `neighbors` most similar items
    /// they rated, weighted by similarity. Plain: the weighted average,
    /// or the user's mean without rated neighbors. Centered: the item's
    /// mean plus the weighted average deviation of the neighbors from
    /// their own means.
    pub fn score_user(&self, user: u32, out: &mut [f64]) {
        let mut rated: Vec<Option<f64>> = vec![None; out.len()];
        for &(item, value) in &self.profiles[user as usize] {
            rated[item as usize] = Some(if self.centered {
                value - self.item_means[item as usize]
            } else {
                value
            });
        }
        let mean_u = self.means[user as usize];
        for (i, slot) in out.iter_mut().enumerate() {
            let (mut num, mut den) = (0.0, 0.0);
            let rated_neighbors = self.similarities[i]
                .iter()
                .filter_map(|&(j, sim)| rated[j as usize].map(|r| (sim, r)))
                .take(self.neighbors);
            for (sim, r) in rated_neighbors {
                num += sim * r;
                den += sim;
            }
            *slot = match (self.centered, den > 0.0) {
                (true, true) => self.item_means[i] + num / den,
                (true, false) => self.item_means[i],
                (false, true) => num / den,
                (false, false) => mean_u,
            };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Entry, IdMap};

    fn matrix(triples: &[(u32, u32, f64)], n_users: usize, n_items: usize) -> Interactions {
        Interactions::new(
            IdMap::sequential("u", n_users),
            IdMap::sequential("i", n_items),
            triples
                .iter()
                .map(|&(user, item, value)| Entry { user, item, value })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn identical_profiles_correlate_perfectly() {
        assert!((pearson(&[1.0, 3.0, 5.0], &[1.0, 3.0, 5.0]) - 1.0).abs() < 1e-12);
        let d = matrix(
            &[(0, 0, 1.0), (0, 1, 3.0), (0, 2, 5.0), (1, 0, 1.0), (1, 1, 3.0), (1, 2, 5.0)],
            2,
            3,
        );
        let sims = user_similarities(&d, 0.0);
        assert_eq!(sims[0].len(), 1);
        assert!((sims[0][0].1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn shrink_factor() {
        assert!((shrink(1.0, 10, 100.0) - 10.0 / 110.0).abs() < 1e-12);
        assert!((shrink(1.0, 10, 100.0) - 0.0909).abs() < 1e-4);
    }

    #[test]
    fn similarities_are_symmetric_and_exclude_self() {
        let d = matrix(
            &[
                (0, 0, 5.0),
                (0, 1, 3.0),
                (0, 2, 4.0),
                (1, 0, 4.0),
                (1, 1, 2.0),
                (1, 3, 5.0),
                (2, 1, 5.0),
                (2, 2, 1.0),
                (2, 3, 2.0),
                (3, 0, 3.0),
                (3, 2, 5.0),
                (3, 3, 4.0),
            ],
            4,
            4,
        );
        for sims in [user_similarities(&d, 5.0), item_similarities(&d, 5.0)] {
            for (a, list) in sims.iter().enumerate() {
                assert!(list.iter().all(|&(b, _)| b as usize != a));
                for &(b, s) in list {
                    let back = sims[b as usize].iter().find(|&&(x, _)| x as usize == a).unwrap().1;
                    assert!((back - s).abs() < 1e-12);
                }
            }
        }
    }
    #[test]
    fn item_knn_centering() {
        // items 0 and 1 share raters; user 2 rated only item 0, above its mean
        let d = matrix(
            &[(0, 0, 4.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 4.0), (2, 0, 5.0), (3, 2, 3.0)],
            4,
            3,
        );
        let centered = ItemKnnParams::fit(&d, 10, 0.0, true);
        let plain = ItemKnnParams::fit(&d, 10, 0.0, false);
        let (mut c, mut p) = (vec![0.0; 3], vec![0.0; 3]);
        centered.score_user(2, &mut c);
        plain.score_user(2, &mut p);
        // item 1: mean 3 plus item 0's deviation 5 - 11/3
        assert!((c[1] - (3.0 + 5.0 - 11.0 / 3.0)).abs() < 1e-12);
        assert!((p[1] - 5.0).abs() < 1e-12);
        // item 2 shares no rater with the others
        assert!(centered.similarities[2].is_empty());
        assert_eq!(c[2], 3.0);
        assert_eq!(p[2], 5.0);
    }
}
