use rand::Rng;
use serde::{Deserialize, Serialize};

/// Row-major dense matrix of latent factors, one row per user or item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Factors {
    dim: usize,
    data: Vec<f64>,
}

impl Factors {
    pub fn zeros(rows: usize, dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; rows * dim],
        }
    }

    /// Entries uniform in `±1/sqrt(dim)`.
    pub fn random(rows: usize, dim: usize, rng: &mut impl Rng) -> Self {
        let bound = 1.0 / (dim as f64).sqrt();
        Self {
            dim,
            data: (0..rows * dim).map(|_| rng.random_range(-bound..bound)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn row(&self, r: u32) -> &[f64] {
        let start = r as usize * self.dim;
        &self.data[start..start + self.dim]
    }

    pub fn row_mut(&mut self, r: u32) -> &mut [f64] {
        let start = r as usize * self.dim;
        &mut self.data[start..start + self.dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn squared_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
