//! Weighted matrix factorization by alternating least squares.
//!
//! Every cell is a training target: observed cells have preference 1 and
//! confidence `1 + alpha * v_ui`, unobserved cells preference 0 and
//! confidence 1. Minimises
//!
//! ```text
//! Σ_(u,i) c_ui (p_ui − x_u·y_i)² + λ (Σ|x_u|² + Σ|y_i|²)
//! ```

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::factors::{dot, Factors};
use super::ModelConfig;
use crate::data::{Entry, Interactions};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WrmfParams {
    pub users: Factors,
    pub items: Factors,
}

impl WrmfParams {
    pub fn predict(&self, user: u32, item: u32) -> f64 {
        dot(self.users.row(user), self.items.row(item))
    }
}

fn gram(f: &Factors) -> DMatrix<f64> {
    let dim = f.dim();
    let m = DMatrix::from_row_slice(f.rows(), dim, f.as_slice());
    m.transpose() * m
}

/// The weighted squared-error objective, evaluated without visiting the
/// unobserved cells one by one.
pub fn objective(params: &WrmfParams, data: &Interactions, alpha: f64, reg: f64) -> f64 {
    let xtx = gram(&params.users);
    let yty = gram(&params.items);
    // Σ over all cells of (x_u·y_i)² = trace(XᵀX YᵀY)
    let all_cells = (xtx.component_mul(&yty)).sum();
    let observed: f64 = data
        .entries()
        .iter()
        .map(|e| {
            let s = params.predict(e.user, e.item);
            let c = 1.0 + alpha * e.value;
            c * (1.0 - s).powi(2) - s * s
        })
        .sum();
    all_cells + observed + reg * (params.users.squared_norm() + params.items.squared_norm())
}

/// Solves every row of `target` with `fixed` held constant. `profile(r)`
/// yields the observed entries of row `r` with the column index in
/// `other`.
fn solve_side<'a, F>(
    target: &mut Factors,
    fixed: &Factors,
    alpha: f64,
    reg: f64,
    profile: F,
) -> Result<()>
where
    F: Fn(u32) -> Vec<(u32, f64)> + Sync + 'a,
{
    let dim = fixed.dim();
    let base = gram(fixed) + DMatrix::<f64>::identity(dim, dim) * reg;
    let rows: Vec<Option<Vec<f64>>> = (0..target.rows() as u32)
        .into_par_iter()
        .map(|r| {
            let observed = profile(r);
            let mut a = base.clone();
            let mut b = DVector::<f64>::zeros(dim);
            for &(col, value) in &observed {
                let c = 1.0 + alpha * value;
                let y = DVector::from_column_slice(fixed.row(col));
                a += (&y * y.transpose()) * (c - 1.0);
                b += y * c;
            }
            if observed.is_empty() {
                return Some(vec![0.0; dim]);
            }
            a.cholesky().map(|ch| ch.solve(&b).as_slice().to_vec())
        })
        .collect();
    for (r, row) in rows.into_iter().enumerate() {
        let row = row.ok_or_else(|| {
            Error::invalid("WRMF normal equations are not positive definite; raise regularization")
        })?;
        target.row_mut(r as u32).copy_from_slice(&row);
    }
    Ok(())
}

fn user_side(data: &Interactions, u: u32) -> Vec<(u32, f64)> {
    data.user_profile(u).iter().map(|e| (e.item, e.value)).collect()
}

fn item_side(data: &Interactions, i: u32) -> Vec<(u32, f64)> {
    data.item_profile(i).map(|e: &Entry| (e.user, e.value)).collect()
}

/// Trains the model; the trace holds the objective at initialisation and
/// after every full alternation.
pub fn train(config: &ModelConfig, data: &Interactions) -> Result<(WrmfParams, Vec<f64>)> {
    if data.entries().iter().any(|e| 1.0 + config.confidence_alpha * e.value < 0.0) {
        return Err(Error::invalid("WRMF confidence must be non-negative"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let dim = config.factors;
    let mut params = WrmfParams {
        users: Factors::random(data.n_users(), dim, &mut rng),
        items: Factors::random(data.n_items(), dim, &mut rng),
    };
    let (alpha, reg) = (config.confidence_alpha, config.regularization.max(1e-9));
    let mut trace = vec![objective(&params, data, alpha, reg)];
    for iteration in 0..config.iterations {
        solve_side(&mut params.users, &params.items, alpha, reg, |u| user_side(data, u))?;
        solve_side(&mut params.items, &params.users, alpha, reg, |i| item_side(data, i))?;
        let loss = objective(&params, data, alpha, reg);
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss {
                algorithm: "WRMF".into(),
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
    use crate::data::IdMap;

    fn data() -> Interactions {
        let entries = (0..6u32)
            .flat_map(|u| (0..7u32).filter(move |i| (u * 3 + i) % 4 == 0).map(move |i| (u, i)))
            .map(|(user, item)| Entry {
                user,
                item,
                value: 1.0 + ((user + item) % 5) as f64,
            })
            .collect();
        Interactions::new(IdMap::sequential("u", 6), IdMap::sequential("i", 7), entries).unwrap()
    }

    /// Brute-force objective over every cell.
    fn dense_objective(p: &WrmfParams, data: &Interactions, alpha: f64, reg: f64) -> f64 {
        let mut total = 0.0;
        for u in 0..data.n_users() as u32 {
            for i in 0..data.n_items() as u32 {
                let s = p.predict(u, i);
                let (pref, c) = match data.get(u, i) {
                    Some(v) => (1.0, 1.0 + alpha * v),
                    None => (0.0, 1.0),
                };
                total += c * (pref - s).powi(2);
            }
        }
        total + reg * (p.users.squared_norm() + p.items.squared_norm())
    }

    #[test]
    fn fast_objective_matches_dense_sum() {
        let d = data();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p = WrmfParams {
            users: Factors::random(6, 3, &mut rng),
            items: Factors::random(7, 3, &mut rng),
        };
        let fast = objective(&p, &d, 2.0, 0.1);
        let slow = dense_objective(&p, &d, 2.0, 0.1);
        assert!((fast - slow).abs() < 1e-9 * slow.abs().max(1.0));
    }

    #[test]
    fn alternations_never_increase_the_objective() {
        let d = data();
        let config = ModelConfig {
            algorithm: super::super::Algorithm::WRMF,
            factors: 3,
            iterations: 20,
            regularization: 0.1,
            ..ModelConfig::default()
        };
        let (_, trace) = train(&config, &d).unwrap();
        for w in trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-9 * w[0].abs(), "{trace:?}");
        }
    }
}
