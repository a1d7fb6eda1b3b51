//! Post-processing rerankers: each turns per-user initial lists of length
//! N into final lists of length K drawn from the same candidates.
//!
//! Lists that keep the initial order (Random, DM) carry the original
//! scores. Lists whose order is decided by the method (Reverse, xQuAD,
//! FA*IR, FairMatch) carry positional scores `K - position` so that the
//! ranked-list invariant of non-increasing scores still holds.

mod dm;
mod fairmatch;
mod fastar;
pub mod flow;
mod naive;
mod xquad;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::bias::ItemSegmentation;
use crate::data::Interactions;
use crate::error::{Error, Result};
use crate::ranking::{RecommendationSet, Scored};

pub use dm::{exhaustive_assignment, solve_assignment, Assignment};
pub use fastar::{binomial_cdf, minimum_protected};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Method {
    DM,
    FASTAR,
    XQUAD,
    FAIRMATCH,
    RANDOM,
    REVERSE,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::DM,
        Method::FASTAR,
        Method::XQUAD,
        Method::FAIRMATCH,
        Method::RANDOM,
        Method::REVERSE,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::DM => "DM",
            Method::FASTAR => "FASTAR",
            Method::XQUAD => "XQUAD",
            Method::FAIRMATCH => "FAIRMATCH",
            Method::RANDOM => "RANDOM",
            Method::REVERSE => "REVERSE",
        }
    }

    /// Random and Reverse are reference points, not fairness methods.
    pub fn is_naive(self) -> bool {
        matches!(self, Method::RANDOM | Method::REVERSE)
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut wanted = s.replace(['*', '-', '_'], "");
        if wanted.eq_ignore_ascii_case("fair") {
            wanted = "FASTAR".into();
        }
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(&wanted))
            .ok_or_else(|| Error::invalid(format!("unknown reranker {s:?}")))
    }
}

/// Per-item capacity used by DM.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetExposure {
    /// `ceil(|U| K / #candidates)`.
    Uniform,
    Fixed(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RerankConfig {
    pub method: Method,
    pub k: usize,
    /// xQuAD relevance/diversity trade-off.
    pub lambda: f64,
    /// FA*IR target protected share; the catalog's tail share when unset.
    pub protected_share: Option<f64>,
    /// FA*IR significance level.
    pub significance: f64,
    /// FairMatch rounds.
    pub iterations: usize,
    pub target_exposure: TargetExposure,
    pub seed: u64,
}

impl Default for RerankConfig {
    fn default() -> Self {
        Self {
            method: Method::DM,
            k: 10,
            lambda: 0.5,
            protected_share: None,
            significance: 0.1,
            iterations: 5,
            target_exposure: TargetExposure::Uniform,
            seed: 0,
        }
    }
}

impl RerankConfig {
    pub fn new(method: Method, k: usize) -> Self {
        Self {
            method,
            k,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::invalid("K must be positive"));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::invalid("lambda must lie in [0, 1]"));
        }
        if let Some(p) = self.protected_share {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::invalid("protected share must lie in (0, 1)"));
            }
        }
        if !(self.significance > 0.0 && self.significance < 1.0) {
            return Err(Error::invalid("significance must lie in (0, 1)"));
        }
        if self.iterations == 0 {
            return Err(Error::invalid("FairMatch needs at least one iteration"));
        }
        if self.target_exposure == TargetExposure::Fixed(0) {
            return Err(Error::invalid("fixed target exposure must be positive"));
        }
        Ok(())
    }
}

/// What the rerankers may consult besides the initial lists.
#[derive(Debug, Clone, Copy)]
pub struct RerankContext<'a> {
    pub segmentation: &'a ItemSegmentation,
    pub train: &'a Interactions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reranked {
    pub recs: RecommendationSet,
    /// Users whose constraint could not be met: initial list shorter than
    /// K, or too few protected candidates for FA*IR.
    pub flagged_users: Vec<u32>,
    /// DM assignments that had to use the overflow arcs.
    pub overflow_units: usize,
}

pub fn rerank(
    initial: &RecommendationSet,
    config: &RerankConfig,
    context: RerankContext<'_>,
) -> Result<Reranked> {
    config.validate()?;
    if config.k > initial.k() {
        return Err(Error::invalid(format!(
            "K = {} exceeds the initial list length {}",
            config.k,
            initial.k()
        )));
    }
    if context.segmentation.n_items() != initial.n_items() {
        return Err(Error::invalid("segmentation and lists disagree on catalog size"));
    }
    let short: Vec<u32> = (0..initial.n_users() as u32)
        .filter(|&u| initial.list(u).len() < config.k)
        .collect();
    let (lists, mut flagged, overflow_units) = match config.method {
        Method::RANDOM => (naive::random(initial, config.k, config.seed), Vec::new(), 0),
        Method::REVERSE => (naive::reverse(initial, config.k), Vec::new(), 0),
        Method::XQUAD => (xquad::rerank(initial, config, context), Vec::new(), 0),
        Method::FASTAR => {
            let (lists, flagged) = fastar::rerank(initial, config, context)?;
            (lists, flagged, 0)
        }
        Method::DM => {
            let (lists, overflow) = dm::rerank(initial, config)?;
            (lists, Vec::new(), overflow)
        }
        Method::FAIRMATCH => (fairmatch::rerank(initial, config), Vec::new(), 0),
    };
    flagged.extend(short);
    flagged.sort_unstable();
    flagged.dedup();
    Ok(Reranked {
        recs: RecommendationSet::new(config.k, initial.n_items(), lists)?,
        flagged_users: flagged,
        overflow_units,
    })
}

/// [`rerank`] plus its wall-clock time in seconds.
pub fn run_timed(
    initial: &RecommendationSet,
    config: &RerankConfig,
    context: RerankContext<'_>,
) -> Result<(Reranked, f64)> {
    let start = Instant::now();
    let out = rerank(initial, config, context)?;
    Ok((out, start.elapsed().as_secs_f64()))
}

/// Scores `K - position` for a list in its final order.
fn positional(items: impl IntoIterator<Item = u32>, k: usize) -> Vec<Scored> {
    items
        .into_iter()
        .enumerate()
        .map(|(pos, item)| Scored {
            item,
            score: (k - pos) as f64,
        })
        .collect()
}

/// Keeps the chosen positions of a list in their original order.
fn keep_positions(list: &[Scored], mut positions: Vec<usize>) -> Vec<Scored> {
    positions.sort_unstable();
    positions.into_iter().map(|p| list[p]).collect()
}
