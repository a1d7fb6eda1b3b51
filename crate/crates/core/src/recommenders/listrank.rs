//! List-wise matrix factorization: for each user, the top-one probability
//! distribution (softmax) of the logistic predicted scores is fitted to the
//! softmax of the observed values by cross-entropy, with L2 penalties.
//! Trained by full-batch gradient descent.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::factors::{dot, Factors};
use super::ModelConfig;
use crate::data::{Interactions, ValueKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ListRankParams {
    pub users: Factors,
    pub items: Factors,
}

impl ListRankParams {
    pub fn predict(&self, user: u32, item: u32) -> f64 {
        logistic(dot(self.users.row(user), self.items.row(item)))
    }
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn softmax(values: &[f64]) -> Vec<f64> {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = values.iter().map(|v| (v - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Softmax targets are computed on values scaled into a bounded range.
pub fn target_value(value: f64, kind: ValueKind) -> f64 {
    match kind {
        ValueKind::Rating => value,
        ValueKind::Percentile => value / 100.0,
    }
}

pub fn objective(params: &ListRankParams, data: &Interactions, kind: ValueKind, reg: f64) -> f64 {
    let mut loss = 0.0;
    for u in 0..data.n_users() as u32 {
        let profile = data.user_profile(u);
        if profile.is_empty() {
            continue;
        }
        let targets: Vec<f64> = profile.iter().map(|e| target_value(e.value, kind)).collect();
        let scores: Vec<f64> = profile.iter().map(|e| params.predict(u, e.item)).collect();
        let (pt, ps) = (softmax(&targets), softmax(&scores));
        loss -= pt.iter().zip(&ps).map(|(t, s)| t * s.ln()).sum::<f64>();
    }
    loss + 0.5 * reg * (params.users.squared_norm() + params.items.squared_norm())
}

pub fn gradient(
    params: &ListRankParams,
    data: &Interactions,
    kind: ValueKind,
    reg: f64,
) -> ListRankParams {
    let dim = params.users.dim();
    let mut grad = ListRankParams {
        users: Factors::zeros(params.users.rows(), dim),
        items: Factors::zeros(params.items.rows(), dim),
    };
    for u in 0..data.n_users() as u32 {
        let profile = data.user_profile(u);
        if profile.is_empty() {
            continue;
        }
        let targets: Vec<f64> = profile.iter().map(|e| target_value(e.value, kind)).collect();
        let scores: Vec<f64> = profile.iter().map(|e| params.predict(u, e.item)).collect();
        let (pt, ps) = (softmax(&targets), softmax(&scores));
        for (k, e) in profile.iter().enumerate() {
            // d CE / d s_k = ps_k − pt_k ; d s_k / d x = s_k (1 − s_k)
            let g = (ps[k] - pt[k]) * scores[k] * (1.0 - scores[k]);
            let (pu, qi) = (params.users.row(u), params.items.row(e.item));
            for f in 0..dim {
                grad.users.row_mut(u)[f] += g * qi[f];
                grad.items.row_mut(e.item)[f] += g * pu[f];
            }
        }
    }
    for (g, p) in grad.users.as_mut_slice().iter_mut().zip(params.users.as_slice()) {
        *g += reg * p;
    }
    for (g, p) in grad.items.as_mut_slice().iter_mut().zip(params.items.as_slice()) {
        *g += reg * p;
    }
    grad
}

pub fn train(
    config: &ModelConfig,
    data: &Interactions,
    kind: ValueKind,
) -> Result<(ListRankParams, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut params = ListRankParams {
        users: Factors::random(data.n_users(), config.factors, &mut rng),
        items: Factors::random(data.n_items(), config.factors, &mut rng),
    };
    let (lr, reg) = (config.learning_rate, config.regularization);
    let mut trace = Vec::with_capacity(config.iterations);
    for iteration in 0..config.iterations {
        let grad = gradient(&params, data, kind, reg);
        for (p, g) in params.users.as_mut_slice().iter_mut().zip(grad.users.as_slice()) {
            *p -= lr * g;
        }
        for (p, g) in params.items.as_mut_slice().iter_mut().zip(grad.items.as_slice()) {
            *p -= lr * g;
        }
        let loss = objective(&params, data, kind, reg);
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss {
                algorithm: "ListRankMF".into(),
                iteration,
            });
        }
        trace.push(loss);
    }
    Ok((params, trace))
}
