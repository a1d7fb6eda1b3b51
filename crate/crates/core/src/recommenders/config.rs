use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    BiasedMF,
    SVDpp,
    WRMF,
    ListRankMF,
    UserKNN,
    ItemKNN,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::BiasedMF,
        Algorithm::SVDpp,
        Algorithm::WRMF,
        Algorithm::ListRankMF,
        Algorithm::UserKNN,
        Algorithm::ItemKNN,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::BiasedMF => "BiasedMF",
            Algorithm::SVDpp => "SVDpp",
            Algorithm::WRMF => "WRMF",
            Algorithm::ListRankMF => "ListRankMF",
            Algorithm::UserKNN => "UserKNN",
            Algorithm::ItemKNN => "ItemKNN",
        }
    }

    pub fn is_neighborhood(self) -> bool {
        matches!(self, Algorithm::UserKNN | Algorithm::ItemKNN)
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid(format!("unknown algorithm {s:?}")))
    }
}

/// Hyperparameters for any of the six models. Fields that do not apply to
/// the chosen algorithm are carried along unchanged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    pub algorithm: Algorithm,
    pub factors: usize,
    pub iterations: usize,
    pub learning_rate: f64,
    pub regularization: f64,
    pub neighbors: usize,
    pub shrinkage: f64,
    pub confidence_alpha: f64,
    /// ItemKNN aggregates deviations from item means.
    pub item_centering: bool,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::BiasedMF,
            factors: 30,
            iterations: 30,
            learning_rate: 0.01,
            regularization: 0.01,
            neighbors: 50,
            shrinkage: 100.0,
            confidence_alpha: 1.0,
            item_centering: true,
            seed: 0,
        }
    }
}

impl ModelConfig {
    pub fn new(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.factors == 0 || self.iterations == 0 || self.neighbors == 0 {
            return Err(Error::invalid("factors, iterations and neighbors must be at least 1"));
        }
        for (name, v) in [
            ("learning_rate", self.learning_rate),
            ("regularization", self.regularization),
            ("shrinkage", self.shrinkage),
            ("confidence_alpha", self.confidence_alpha),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(format!("{name} must be finite and non-negative")));
            }
        }
        Ok(())
    }

    /// Short label of the fields that matter for the algorithm.
    pub fn describe(&self) -> String {
        if self.algorithm.is_neighborhood() {
            format!(
                "{} neighbors={} shrinkage={}",
                self.algorithm, self.neighbors, self.shrinkage
            )
        } else {
            format!(
                "{} factors={} iterations={} lr={} reg={}",
                self.algorithm, self.factors, self.iterations, self.learning_rate, self.regularization
            )
        }
    }
}

/// Shrinkage {50, 100, 200} x neighbors {10, 20, 30, 50, 70, 100, 200}.
pub fn neighborhood_grid(base: &ModelConfig) -> Vec<ModelConfig> {
    let mut grid = Vec::new();
    for shrinkage in [50.0, 100.0, 200.0] {
        for neighbors in [10, 20, 30, 50, 70, 100, 200] {
            grid.push(ModelConfig {
                shrinkage,
                neighbors,
                ..base.clone()
            });
        }
    }
    grid
}

/// Factors {30, 50, 100, 200} x iterations {30, 50, 100, 150, 200} x
/// learning rate {0.0001, 0.001, 0.01}.
pub fn factorization_grid(base: &ModelConfig) -> Vec<ModelConfig> {
    let mut grid = Vec::new();
    for factors in [30, 50, 100, 200] {
        for iterations in [30, 50, 100, 150, 200] {
            for learning_rate in [0.0001, 0.001, 0.01] {
                grid.push(ModelConfig {
                    factors,
                    iterations,
                    learning_rate,
                    ..base.clone()
                });
            }
        }
    }
    grid
}

/// The published grid for the algorithm of `base`.
pub fn published_grid(base: &ModelConfig) -> Vec<ModelConfig> {
    if base.algorithm.is_neighborhood() {
        neighborhood_grid(base)
    } else {
        factorization_grid(base)
    }
}
