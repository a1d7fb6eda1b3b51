use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::factors::{dot, Factors};
use super::ModelConfig;
use crate::data::Interactions;
use crate::error::{Error, Result};

/// BiasedMF whose user vector is augmented by the normalised sum of
/// implicit item factors over the user's training items.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvdPpParams {
    pub global_mean: f64,
    pub user_bias: Vec<f64>,
    pub item_bias: Vec<f64>,
    pub users: Factors,
    pub items: Factors,
    pub implicit: Factors,
    /// `p_u + |N(u)|^-1/2 Σ_{j∈N(u)} y_j`, refreshed after training.
    pub effective_users: Factors,
}

impl SvdPpParams {
    pub fn predict(&self, user: u32, item: u32) -> f64 {
        self.global_mean
            + self.user_bias[user as usize]
            + self.item_bias[item as usize]
            + dot(self.effective_users.row(user), self.items.row(item))
    }

    fn effective_user(&self, data: &Interactions, user: u32, out: &mut [f64]) {
        out.copy_from_slice(self.users.row(user));
        let profile = data.user_profile(user);
        if profile.is_empty() {
            return;
        }
        let norm = 1.0 / (profile.len() as f64).sqrt();
        for e in profile {
            for (o, y) in out.iter_mut().zip(self.implicit.row(e.item)) {
                *o += norm * y;
            }
        }
    }

    fn refresh(&mut self, data: &Interactions) {
        let dim = self.users.dim();
        let mut z = vec![0.0; dim];
        for u in 0..data.n_users() as u32 {
            self.effective_user(data, u, &mut z);
            self.effective_users.row_mut(u).copy_from_slice(&z);
        }
    }
}

fn objective(params: &SvdPpParams, data: &Interactions, reg: f64) -> f64 {
    let err: f64 = data
        .entries()
        .iter()
        .map(|e| (e.value - params.predict(e.user, e.item)).powi(2))
        .sum();
    let penalty = params.user_bias.iter().map(|b| b * b).sum::<f64>()
        + params.item_bias.iter().map(|b| b * b).sum::<f64>()
        + params.users.squared_norm()
        + params.items.squared_norm()
        + params.implicit.squared_norm();
    0.5 * (err + reg * penalty)
}

pub fn train(config: &ModelConfig, data: &Interactions) -> Result<(SvdPpParams, Vec<f64>)> {
    let (n, m, dim) = (data.n_users(), data.n_items(), config.factors);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut params = SvdPpParams {
        global_mean: data.global_mean(),
        user_bias: vec![0.0; n],
        item_bias: vec![0.0; m],
        users: Factors::random(n, dim, &mut rng),
        items: Factors::random(m, dim, &mut rng),
        implicit: Factors::random(m, dim, &mut rng),
        effective_users: Factors::zeros(n, dim),
    };
    let (lr, reg) = (config.learning_rate, config.regularization);
    let mut users: Vec<u32> = (0..n as u32).collect();
    let mut z = vec![0.0; dim];
    let mut implicit_grad = vec![0.0; dim];
    let mut trace = Vec::with_capacity(config.iterations);

    for iteration in 0..config.iterations {
        users.shuffle(&mut rng);
        for &u in &users {
            let mut profile = data.user_profile(u).to_vec();
            if profile.is_empty() {
                continue;
            }
            profile.shuffle(&mut rng);
            let norm = 1.0 / (profile.len() as f64).sqrt();
            params.effective_user(data, u, &mut z);
            implicit_grad.fill(0.0);
            for e in &profile {
                let i = e.item;
                let pred = params.global_mean
                    + params.user_bias[u as usize]
                    + params.item_bias[i as usize]
                    + dot(&z, params.items.row(i));
                let err = e.value - pred;
                params.user_bias[u as usize] += lr * (err - reg * params.user_bias[u as usize]);
                params.item_bias[i as usize] += lr * (err - reg * params.item_bias[i as usize]);
                for f in 0..dim {
                    let pf = params.users.row(u)[f];
                    let qf = params.items.row(i)[f];
                    let step_p = lr * (err * qf - reg * pf);
                    params.users.row_mut(u)[f] += step_p;
                    z[f] += step_p;
                    params.items.row_mut(i)[f] += lr * (err * z[f] - reg * qf);
                    implicit_grad[f] += err * norm * qf;
                }
            }
            // implicit factors: one averaged step per user visit
            let scale = 1.0 / profile.len() as f64;
            for e in &profile {
                for (y, g) in params.implicit.row_mut(e.item).iter_mut().zip(&implicit_grad) {
                    *y += lr * (g * scale - reg * *y);
                }
            }
        }
        params.refresh(data);
        let loss = objective(&params, data, reg);
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss {
                algorithm: "SVDpp".into(),
                iteration,
            });
        }
        trace.push(loss);
    }
    params.refresh(data);
    Ok((params, trace))
}
