//! Matrix factorization with user and item biases, trained by SGD on
//!
//! ```text
//! J = 1/2 Σ_(u,i) [ (v_ui − μ − b_u − b_i − p_u·q_i)² + λ (b_u² + b_i² + |p_u|² + |q_i|²) ]
//! ```
//!
//! with the global mean μ fixed to the training mean.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::factors::{dot, Factors};
use super::ModelConfig;
use crate::data::Interactions;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasedMfParams {
    pub global_mean: f64,
    pub user_bias: Vec<f64>,
    pub item_bias: Vec<f64>,
    pub users: Factors,
    pub items: Factors,
}

impl BiasedMfParams {
    pub fn init(n_users: usize, n_items: usize, factors: usize, global_mean: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self {
            global_mean,
            user_bias: vec![0.0; n_users],
            item_bias: vec![0.0; n_items],
            users: Factors::random(n_users, factors, &mut rng),
            items: Factors::random(n_items, factors, &mut rng),
        }
    }

    pub fn predict(&self, user: u32, item: u32) -> f64 {
        self.global_mean
            + self.user_bias[user as usize]
            + self.item_bias[item as usize]
            + dot(self.users.row(user), self.items.row(item))
    }

    fn zeros_like(&self) -> Self {
        Self {
            global_mean: 0.0,
            user_bias: vec![0.0; self.user_bias.len()],
            item_bias: vec![0.0; self.item_bias.len()],
            users: Factors::zeros(self.users.rows(), self.users.dim()),
            items: Factors::zeros(self.items.rows(), self.items.dim()),
        }
    }
}

pub fn objective(params: &BiasedMfParams, data: &Interactions, reg: f64) -> f64 {
    data.entries()
        .iter()
        .map(|e| {
            let err = e.value - params.predict(e.user, e.item);
            let (u, i) = (e.user as usize, e.item as usize);
            let penalty = params.user_bias[u].powi(2)
                + params.item_bias[i].powi(2)
                + dot(params.users.row(e.user), params.users.row(e.user))
                + dot(params.items.row(e.item), params.items.row(e.item));
            0.5 * (err * err + reg * penalty)
        })
        .sum()
}

/// Full-batch gradient of [`objective`]; `global_mean` of the result is 0.
pub fn gradient(params: &BiasedMfParams, data: &Interactions, reg: f64) -> BiasedMfParams {
    let mut grad = params.zeros_like();
    for e in data.entries() {
        let err = e.value - params.predict(e.user, e.item);
        let (u, i) = (e.user as usize, e.item as usize);
        grad.user_bias[u] += -err + reg * params.user_bias[u];
        grad.item_bias[i] += -err + reg * params.item_bias[i];
        let (p, q) = (params.users.row(e.user), params.items.row(e.item));
        for (g, (&pf, &qf)) in grad.users.row_mut(e.user).iter_mut().zip(p.iter().zip(q)) {
            *g += -err * qf + reg * pf;
        }
        for (g, (&pf, &qf)) in grad.items.row_mut(e.item).iter_mut().zip(p.iter().zip(q)) {
            *g += -err * pf + reg * qf;
        }
    }
    grad
}

pub fn train(config: &ModelConfig, data: &Interactions) -> Result<(BiasedMfParams, Vec<f64>)> {
    let mut params = BiasedMfParams::init(
        data.n_users(),
        data.n_items(),
        config.factors,
        data.global_mean(),
        config.seed,
    );
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(1));
    let mut order: Vec<usize> = (0..data.nnz()).collect();
    let (lr, reg) = (config.learning_rate, config.regularization);
    let mut trace = Vec::with_capacity(config.iterations);
    let dim = config.factors;

    for iteration in 0..config.iterations {
        order.shuffle(&mut rng);
        for &idx in &order {
            let e = data.entries()[idx];
            let err = e.value - params.predict(e.user, e.item);
            let (u, i) = (e.user as usize, e.item as usize);
            params.user_bias[u] -= lr * (-err + reg * params.user_bias[u]);
            params.item_bias[i] -= lr * (-err + reg * params.item_bias[i]);
            for f in 0..dim {
                let pf = params.users.row(e.user)[f];
                let qf = params.items.row(e.item)[f];
                params.users.row_mut(e.user)[f] -= lr * (-err * qf + reg * pf);
                params.items.row_mut(e.item)[f] -= lr * (-err * pf + reg * qf);
            }
        }
        let loss = objective(&params, data, reg);
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss {
                algorithm: "BiasedMF".into(),
                iteration,
            });
        }
        trace.push(loss);
    }
    Ok((params, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Entry, IdMap};

    fn small() -> Interactions {
        let entries = (0..5u32)
            .flat_map(|u| (0..5u32).filter(move |i| (u + i) % 3 != 0).map(move |i| (u, i)))
            .map(|(user, item)| Entry {
                user,
                item,
                value: 1.0 + ((user * 7 + item * 3) % 5) as f64,
            })
            .collect();
        Interactions::new(IdMap::sequential("u", 5), IdMap::sequential("i", 5), entries).unwrap()
    }

    #[test]
    fn loss_trends_down() {
        let data = small();
        let config = ModelConfig {
            factors: 3,
            iterations: 60,
            learning_rate: 0.02,
            ..ModelConfig::default()
        };
        let (_, trace) = train(&config, &data).unwrap();
        assert!(trace.last().unwrap() < &(trace[0] * 0.8), "{trace:?}");
    }

    #[test]
    fn divergence_is_reported() {
        let data = small();
        let config = ModelConfig {
            factors: 3,
            iterations: 50,
            learning_rate: 50.0,
            ..ModelConfig::default()
        };
        assert!(matches!(train(&config, &data), Err(Error::NonFiniteLoss { .. })));
    }
}
