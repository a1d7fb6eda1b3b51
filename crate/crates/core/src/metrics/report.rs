use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{equality_of_exposure, item_aggregate_diversity, ndcg_at_k, precision_at_k};
use crate::bias::ItemSegmentation;
use crate::data::Interactions;
use crate::error::{Error, Result};
use crate::ranking::RecommendationSet;

/// What produced a report row.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportLabels {
    pub pipeline: String,
    pub algorithm: String,
    pub input: String,
    /// Initial list length for reranked pipelines.
    pub n: Option<usize>,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub labels: ReportLabels,
    pub precision: f64,
    pub ndcg: f64,
    /// IA keyed by the appearance threshold alpha.
    pub ia: BTreeMap<u32, f64>,
    /// LIA keyed by alpha.
    pub lia: BTreeMap<u32, f64>,
    pub gini: f64,
    pub ee: f64,
    pub evaluated_users: usize,
    pub excluded_users: usize,
    pub runtime_seconds: Option<f64>,
}

impl MetricReport {
    /// Flat `(metric name, value)` pairs in a fixed order; runtime last.
    pub fn values(&self) -> Vec<(String, f64)> {
        let mut out = vec![
            ("precision".to_string(), self.precision),
            ("ndcg".to_string(), self.ndcg),
        ];
        out.extend(self.ia.iter().map(|(a, v)| (format!("ia@{a}"), *v)));
        out.extend(self.lia.iter().map(|(a, v)| (format!("lia@{a}"), *v)));
        out.push(("gini".to_string(), self.gini));
        out.push(("ee".to_string(), self.ee));
        if let Some(t) = self.runtime_seconds {
            out.push(("runtime_seconds".to_string(), t));
        }
        out
    }

    /// Looks up a metric by the names used in [`MetricReport::values`].
    pub fn get(&self, metric: &str) -> Option<f64> {
        self.values()
            .into_iter()
            .find(|(name, _)| name == metric)
            .map(|(_, v)| v)
    }
}

/// Evaluates one recommendation set against held-out ratings.
pub fn evaluate(
    recs: &RecommendationSet,
    test: &Interactions,
    segmentation: &ItemSegmentation,
    alphas: &[u32],
    labels: ReportLabels,
) -> Result<MetricReport> {
    let precision = precision_at_k(recs, test)?;
    let ndcg = ndcg_at_k(recs, test)?;
    let mut ia = BTreeMap::new();
    let mut lia = BTreeMap::new();
    for &alpha in alphas {
        ia.insert(alpha, item_aggregate_diversity(recs, alpha, None)?);
        lia.insert(alpha, item_aggregate_diversity(recs, alpha, Some(&segmentation.tail))?);
    }
    let (gini, ee) = equality_of_exposure(recs)?;
    Ok(MetricReport {
        labels,
        precision: precision.value,
        ndcg: ndcg.value,
        ia,
        lia,
        gini,
        ee,
        evaluated_users: precision.evaluated_users,
        excluded_users: precision.excluded_users,
        runtime_seconds: None,
    })
}

/// `(utility_a - utility_b) / utility_b * 100`.
pub fn relative_gain(utility_a: f64, utility_b: f64) -> Result<f64> {
    if utility_b == 0.0 {
        return Err(Error::Undefined("relative gain over a zero baseline".into()));
    }
    Ok((utility_a - utility_b) / utility_b * 100.0)
}

/// Gain for lower-is-better quantities such as runtime: the percentage of
/// the baseline's cost that `cost_a` saves.
pub fn time_saved(cost_a: f64, cost_b: f64) -> Result<f64> {
    relative_gain(cost_a, cost_b).map(|g| -g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gain_values() {
        assert_eq!(relative_gain(0.3, 0.3).unwrap(), 0.0);
        assert!((relative_gain(0.2, 0.1).unwrap() - 100.0).abs() < 1e-12);
        assert!(relative_gain(0.2, 0.0).is_err());
        assert!((time_saved(1.0, 4.0).unwrap() - 75.0).abs() < 1e-12);
    }
}
