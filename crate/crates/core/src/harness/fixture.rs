//! Synthetic rating data with popularity, positivity and multifactorial
//! bias that can be tuned one knob at a time.
//!
//! Item popularity follows a power law over a random item order. Each
//! user rates a profile drawn without replacement with probability
//! proportional to `popularity * exp(selection_affinity * affinity)`,
//! where affinity is the dot product of latent user and item factors.
//! The latent rating is
//!
//! ```text
//! positivity + coupling * z_pop(i) + quality(i) + affinity(u, i) + noise
//! ```
//!
//! rounded and clamped to the integer scale, so popular items collect
//! both more ratings and higher ones.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::data::{RatingMatrix, RatingScale};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FixtureConfig {
    pub n_users: usize,
    pub n_items: usize,
    pub min_profile: usize,
    pub max_profile: usize,
    /// Exponent of the power-law popularity weights.
    pub popularity_exponent: f64,
    /// Mean of the latent rating before rounding.
    pub positivity: f64,
    /// How strongly standardised log-popularity raises the latent rating.
    pub coupling: f64,
    /// Spread of popularity-independent item quality.
    pub quality_spread: f64,
    pub factors: usize,
    pub factor_scale: f64,
    pub selection_affinity: f64,
    pub noise: f64,
    pub scale_min: i32,
    pub scale_max: i32,
    pub seed: u64,
}

impl Default for FixtureConfig {
    fn default() -> Self {
        Self {
            n_users: 500,
            n_items: 300,
            min_profile: 20,
            max_profile: 60,
            popularity_exponent: 1.0,
            positivity: 3.5,
            coupling: 0.55,
            quality_spread: 0.3,
            factors: 5,
            factor_scale: 0.5,
            selection_affinity: 1.0,
            noise: 0.5,
            scale_min: 1,
            scale_max: 5,
            seed: 7,
        }
    }
}

impl FixtureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_users == 0 || self.n_items < 2 {
            return Err(Error::Config("fixture needs users and at least two items".into()));
        }
        if self.min_profile == 0 || self.min_profile > self.max_profile || self.max_profile > self.n_items {
            return Err(Error::Config(
                "fixture profile sizes must satisfy 1 <= min <= max <= n_items".into(),
            ));
        }
        if self.scale_min >= self.scale_max {
            return Err(Error::Config("fixture scale_min must be below scale_max".into()));
        }
        for (name, v) in [
            ("popularity_exponent", self.popularity_exponent),
            ("quality_spread", self.quality_spread),
            ("factor_scale", self.factor_scale),
            ("noise", self.noise),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!("fixture {name} must be finite and non-negative")));
            }
        }
        if !self.positivity.is_finite() || !self.coupling.is_finite() || !self.selection_affinity.is_finite() {
            return Err(Error::Config("fixture parameters must be finite".into()));
        }
        Ok(())
    }
}

fn normal(sd: f64) -> Normal<f64> {
    Normal::new(0.0, sd).expect("finite non-negative sd")
}

pub fn generate(config: &FixtureConfig) -> Result<RatingMatrix> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let (n, m, d) = (config.n_users, config.n_items, config.factors);

    // popularity rank of each item, in random order over ids
    let ranks = index::sample(&mut rng, m, m).into_vec();
    let weights: Vec<f64> = ranks
        .iter()
        .map(|&r| (r as f64 + 1.0).powf(-config.popularity_exponent))
        .collect();
    let logs: Vec<f64> = weights.iter().map(|w| w.ln()).collect();
    let mean = logs.iter().sum::<f64>() / m as f64;
    let sd = (logs.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / m as f64).sqrt();
    let z_pop: Vec<f64> = logs
        .iter()
        .map(|l| if sd > 0.0 { (l - mean) / sd } else { 0.0 })
        .collect();

    let quality_dist = normal(config.quality_spread);
    let quality: Vec<f64> = (0..m).map(|_| quality_dist.sample(&mut rng)).collect();
    let factor_dist = normal(config.factor_scale);
    let users: Vec<f64> = (0..n * d).map(|_| factor_dist.sample(&mut rng)).collect();
    let items: Vec<f64> = (0..m * d).map(|_| factor_dist.sample(&mut rng)).collect();
    let noise = normal(config.noise);
    let (lo, hi) = (config.scale_min as f64, config.scale_max as f64);

    let mut triples = Vec::new();
    let mut affinity = vec![0.0; m];
    for u in 0..n {
        let pu = &users[u * d..(u + 1) * d];
        for (i, a) in affinity.iter_mut().enumerate() {
            *a = pu.iter().zip(&items[i * d..(i + 1) * d]).map(|(x, y)| x * y).sum();
        }
        let size = rng.random_range(config.min_profile..=config.max_profile);
        let chosen = index::sample_weighted(
            &mut rng,
            m,
            |i| weights[i] * (config.selection_affinity * affinity[i]).exp(),
            size,
        )
        .map_err(|e| Error::Config(format!("fixture sampling failed: {e}")))?;
        let mut chosen = chosen.into_vec();
        chosen.sort_unstable();
        for i in chosen {
            let latent = config.positivity
                + config.coupling * z_pop[i]
                + quality[i]
                + affinity[i]
                + noise.sample(&mut rng);
            triples.push((u as u32, i as u32, latent.round().clamp(lo, hi)));
        }
    }
    let scale = RatingScale::integer(config.scale_min, config.scale_max)?;
    RatingMatrix::from_triples(n, m, triples, scale)
}
