//! The six rating-based recommenders, top-K list generation, checkpoints
//! and grid search.
//!
//! Every model trains on a [`Feedback`] (raw ratings or percentile values)
//! and scores any `(user, item)` pair. Users without training ratings and
//! items nobody rated in training get the model's fallback score: the
//! training mean for rating predictors, the mean fitted score over
//! observed cells for WRMF and ListRankMF.

pub mod biased_mf;
mod config;
mod factors;
mod grid;
pub mod knn;
pub mod listrank;
pub mod svdpp;
pub mod wrmf;

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Feedback, ValueKind};
use crate::error::{Error, Result};
use crate::ranking::{sort_ranked, RecommendationSet, Scored};

pub use config::{factorization_grid, neighborhood_grid, published_grid, Algorithm, ModelConfig};
pub use factors::Factors;
pub use grid::{grid_search, GridEntry, GridResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ModelParams {
    BiasedMf(biased_mf::BiasedMfParams),
    SvdPp(svdpp::SvdPpParams),
    Wrmf(wrmf::WrmfParams),
    ListRank(listrank::ListRankParams),
    UserKnn(knn::UserKnnParams),
    ItemKnn(knn::ItemKnnParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub config: ModelConfig,
    pub input: ValueKind,
    n_users: usize,
    n_items: usize,
    fallback_score: f64,
    /// Training items per user, ascending.
    seen: Vec<Vec<u32>>,
    cold_items: Vec<bool>,
    params: ModelParams,
    pub loss_trace: Vec<f64>,
}

pub fn train<'a>(config: &ModelConfig, data: impl Into<Feedback<'a>>) -> Result<TrainedModel> {
    let feedback = data.into();
    let matrix = feedback.matrix;
    config.validate()?;
    if matrix.is_empty() {
        return Err(Error::Empty("no training ratings".into()));
    }
    let (params, loss_trace) = match config.algorithm {
        Algorithm::BiasedMF => {
            let (p, t) = biased_mf::train(config, matrix)?;
            (ModelParams::BiasedMf(p), t)
        }
        Algorithm::SVDpp => {
            let (p, t) = svdpp::train(config, matrix)?;
            (ModelParams::SvdPp(p), t)
        }
        Algorithm::WRMF => {
            let (p, t) = wrmf::train(config, matrix)?;
            (ModelParams::Wrmf(p), t)
        }
        Algorithm::ListRankMF => {
            let (p, t) = listrank::train(config, matrix, feedback.kind)?;
            (ModelParams::ListRank(p), t)
        }
        Algorithm::UserKNN => (
            ModelParams::UserKnn(knn::UserKnnParams::fit(matrix, config.neighbors, config.shrinkage)),
            Vec::new(),
        ),
        Algorithm::ItemKNN => (
            ModelParams::ItemKnn(knn::ItemKnnParams::fit(
                matrix,
                config.neighbors,
                config.shrinkage,
                config.item_centering,
            )),
            Vec::new(),
        ),
    };

    let fallback_score = match &params {
        ModelParams::Wrmf(p) => mean_fitted(matrix.entries().iter().map(|e| p.predict(e.user, e.item))),
        ModelParams::ListRank(p) => {
            mean_fitted(matrix.entries().iter().map(|e| p.predict(e.user, e.item)))
        }
        _ => matrix.global_mean(),
    };
    let seen = (0..matrix.n_users() as u32)
        .map(|u| matrix.user_profile(u).iter().map(|e| e.item).collect())
        .collect();
    let cold_items = (0..matrix.n_items() as u32).map(|i| matrix.item_count(i) == 0).collect();
    Ok(TrainedModel {
        config: config.clone(),
        input: feedback.kind,
        n_users: matrix.n_users(),
        n_items: matrix.n_items(),
        fallback_score,
        seen,
        cold_items,
        params,
        loss_trace,
    })
}

fn mean_fitted(values: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = values.len().max(1) as f64;
    values.sum::<f64>() / n
}

const CHECKPOINT_FORMAT: &str = "multibias-model";
const CHECKPOINT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    format: String,
    version: u32,
    model: TrainedModel,
}

impl TrainedModel {
    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn fallback_score(&self) -> f64 {
        self.fallback_score
    }

    pub fn seen(&self, user: u32) -> &[u32] {
        &self.seen[user as usize]
    }

    /// Whether scoring this user falls back to the global score.
    pub fn is_cold_user(&self, user: u32) -> bool {
        self.seen[user as usize].is_empty()
    }

    /// Scores every item for one user into `out` (length `n_items`).
    pub fn score_user(&self, user: u32, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.n_items);
        if self.is_cold_user(user) {
            out.fill(self.fallback_score);
            return;
        }
        match &self.params {
            ModelParams::BiasedMf(p) => fill(out, |i| p.predict(user, i)),
            ModelParams::SvdPp(p) => fill(out, |i| p.predict(user, i)),
            ModelParams::Wrmf(p) => fill(out, |i| p.predict(user, i)),
            ModelParams::ListRank(p) => fill(out, |i| p.predict(user, i)),
            ModelParams::UserKnn(p) => p.score_user(user, out),
            ModelParams::ItemKnn(p) => p.score_user(user, out),
        }
        for (i, s) in out.iter_mut().enumerate() {
            if self.cold_items[i] {
                *s = self.fallback_score;
            }
        }
    }

    pub fn score(&self, user: u32, item: u32) -> f64 {
        let mut out = vec![0.0; self.n_items];
        self.score_user(user, &mut out);
        out[item as usize]
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let checkpoint = Checkpoint {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            model: self.clone(),
        };
        let text = serde_json::to_string(&checkpoint)?;
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let checkpoint: Checkpoint = serde_json::from_str(&text)?;
        if checkpoint.format != CHECKPOINT_FORMAT {
            return Err(Error::Config(format!("{} is not a model checkpoint", path.display())));
        }
        if checkpoint.version != CHECKPOINT_VERSION {
            return Err(Error::Config(format!(
                "unsupported checkpoint version {}",
                checkpoint.version
            )));
        }
        Ok(checkpoint.model)
    }
}

fn fill(out: &mut [f64], f: impl Fn(u32) -> f64) {
    for (i, s) in out.iter_mut().enumerate() {
        *s = f(i as u32);
    }
}

/// The `k` highest-scored items per user (ties by ascending id), skipping
/// training items when `exclude_train` is set. Lists are shorter than `k`
/// only when too few candidates remain.
pub fn recommend(model: &TrainedModel, k: usize, exclude_train: bool) -> Result<RecommendationSet> {
    if k == 0 {
        return Err(Error::invalid("list length must be positive"));
    }
    let lists: Result<Vec<Vec<Scored>>> = (0..model.n_users as u32)
        .into_par_iter()
        .map(|user| {
            let mut scores = vec![0.0; model.n_items];
            model.score_user(user, &mut scores);
            if let Some(bad) = scores.iter().position(|s| !s.is_finite()) {
                return Err(Error::invalid(format!(
                    "non-finite score for user {user}, item {bad}"
                )));
            }
            let seen = model.seen(user);
            let mut candidates: Vec<Scored> = scores
                .iter()
                .enumerate()
                .filter(|(i, _)| !exclude_train || seen.binary_search(&(*i as u32)).is_err())
                .map(|(i, &score)| Scored {
                    item: i as u32,
                    score,
                })
                .collect();
            if candidates.len() > k {
                candidates.select_nth_unstable_by(k, |a, b| {
                    b.score.total_cmp(&a.score).then(a.item.cmp(&b.item))
                });
                candidates.truncate(k);
            }
            sort_ranked(&mut candidates);
            Ok(candidates)
        })
        .collect();
    RecommendationSet::new(k, model.n_items, lists?)
}
