//! Accuracy (precision, nDCG) and exposure-fairness (IA, LIA, Gini, EE)
//! metrics over a [`RecommendationSet`](crate::ranking::RecommendationSet),
//! plus the relative gain used to compare pipelines.

mod accuracy;
mod fairness;
mod report;

pub use accuracy::{ndcg_at_k, precision_at_k, AccuracyScore};
pub use fairness::{
    equality_of_exposure, exposure, gini_index, item_aggregate_diversity, ExposureDistribution,
};
pub use report::{evaluate, relative_gain, time_saved, MetricReport, ReportLabels};

/// Neumaier-compensated sum, so that the order of accumulation does not
/// change results beyond rounding of the final value.
pub(crate) fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

#[cfg(test)]
mod tests {
    use super::compensated_sum;

    #[test]
    fn compensated_sum_is_order_insensitive() {
        let values: Vec<f64> = (0..1000).map(|i| 1.0 / (i as f64 + 1.0)).collect();
        let forward = compensated_sum(values.iter().copied());
        let backward = compensated_sum(values.iter().rev().copied());
        assert!((forward - backward).abs() < 1e-14);
    }
}
