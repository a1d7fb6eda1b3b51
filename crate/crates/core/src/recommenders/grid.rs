use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{recommend, train, ModelConfig};
use crate::bias::ItemSegmentation;
use crate::data::{Feedback, Interactions};
use crate::error::{Error, Result};
use crate::metrics::{evaluate, MetricReport, ReportLabels};

/// One grid point: its report, or why it failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridEntry {
    pub config: ModelConfig,
    pub report: Option<MetricReport>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub objective: String,
    pub best_index: usize,
    pub entries: Vec<GridEntry>,
}

impl GridResult {
    pub fn best_config(&self) -> &ModelConfig {
        &self.entries[self.best_index].config
    }

    pub fn best_report(&self) -> &MetricReport {
        self.entries[self.best_index]
            .report
            .as_ref()
            .expect("best entry has a report")
    }

    pub fn failures(&self) -> usize {
        self.entries.iter().filter(|e| e.error.is_some()).count()
    }
}

/// Trains and evaluates every config, keeping the one with the highest
/// `objective` (a [`MetricReport::values`] name); ties go to the earlier
/// config. Configs that fail to train are recorded and skipped.
#[allow(clippy::too_many_arguments)]
pub fn grid_search(
    grid: &[ModelConfig],
    train_data: Feedback<'_>,
    test: &Interactions,
    segmentation: &ItemSegmentation,
    k: usize,
    alphas: &[u32],
    objective: &str,
    pipeline: &str,
) -> Result<GridResult> {
    if grid.is_empty() {
        return Err(Error::invalid("empty hyperparameter grid"));
    }
    let entries: Vec<GridEntry> = grid
        .par_iter()
        .map(|config| {
            let run = || -> Result<MetricReport> {
                let model = train(config, train_data)?;
                let recs = recommend(&model, k, true)?;
                let labels = ReportLabels {
                    pipeline: pipeline.to_string(),
                    algorithm: config.algorithm.to_string(),
                    input: train_data.kind.as_str().to_string(),
                    n: None,
                    k,
                };
                let report = evaluate(&recs, test, segmentation, alphas, labels)?;
                if report.get(objective).is_none() {
                    return Err(Error::invalid(format!("unknown objective metric {objective:?}")));
                }
                Ok(report)
            };
            match run() {
                Ok(report) => GridEntry {
                    config: config.clone(),
                    report: Some(report),
                    error: None,
                },
                Err(e) => {
                    log::warn!("{} failed: {e}", config.describe());
                    GridEntry {
                        config: config.clone(),
                        report: None,
                        error: Some(e.to_string()),
                    }
                }
            }
        })
        .collect();

    let mut best: Option<(usize, f64)> = None;
    for (i, entry) in entries.iter().enumerate() {
        if let Some(v) = entry.report.as_ref().and_then(|r| r.get(objective)) {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((i, v));
            }
        }
    }
    let Some((best_index, _)) = best else {
        return Err(Error::invalid(format!(
            "every grid config failed; first error: {}",
            entries[0].error.as_deref().unwrap_or("none")
        )));
    };
    Ok(GridResult {
        objective: objective.to_string(),
        best_index,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bias::segment_head_tail;
    use crate::data::{split_per_user, RatingMatrix, RatingScale};
    use crate::recommenders::Algorithm;

    #[test]
    fn single_config_and_failures() {
        let triples = (0..20u32).flat_map(|u| {
            (0..15u32)
                .filter(move |i| (u * 7 + i * 3) % 4 != 0)
                .map(move |i| (u, i, (1 + (u + i) % 5) as f64))
        });
        let data =
            RatingMatrix::from_triples(20, 15, triples, RatingScale::integer(1, 5).unwrap()).unwrap();
        let split = split_per_user(&data, 0.8, 3).unwrap();
        let seg = segment_head_tail(&split.train, 0.2).unwrap();
        let one = vec![ModelConfig::new(Algorithm::ItemKNN)];
        let r = grid_search(&one, (&split.train).into(), &split.test, &seg, 3, &[1], "ndcg", "t")
            .unwrap();
        assert_eq!(r.best_index, 0);
        assert_eq!(r.best_config(), &one[0]);

        let mut bad = ModelConfig::new(Algorithm::UserKNN);
        bad.neighbors = 0;
        let grid = vec![bad, ModelConfig::new(Algorithm::UserKNN)];
        let r = grid_search(&grid, (&split.train).into(), &split.test, &seg, 3, &[1], "ndcg", "t")
            .unwrap();
        assert_eq!(r.failures(), 1);
        assert_eq!(r.best_index, 1);
        assert!(grid_search(&grid[..1], (&split.train).into(), &split.test, &seg, 3, &[1], "ndcg", "t")
            .is_err());
    }
}
