use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ComparisonSpec, InputTransform, RerankerStudySpec, SimulationSpec, StudyConfig};
use super::pipeline::{evaluate_set, fit, labels, prepare, Prepared, TrainInput};
use super::stats::spearman;
use crate::bias::flipped_item_count;
use crate::error::{Error, Result};
use crate::metrics::{relative_gain, time_saved, MetricReport};
use crate::recommenders::{recommend, Algorithm, ModelConfig};
use crate::rerank::{run_timed, Method, RerankConfig, RerankContext};

/// Where every number in a report comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub crate_version: String,
    pub dataset_sha256: String,
    pub n_users: usize,
    pub n_items: usize,
    pub n_ratings: usize,
    pub head_items: usize,
    pub split_seed: u64,
    pub model_seed: u64,
    pub config: StudyConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub beta: f64,
    pub flipped_items: usize,
    /// Training ratings changed by the flip.
    pub flipped_ratings: usize,
    pub report: MetricReport,
}

/// Rank correlation of β with the two headline metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTrend {
    pub beta_ee: Option<f64>,
    pub beta_precision: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub algorithm: Algorithm,
    pub rating_config: ModelConfig,
    pub percentile_config: ModelConfig,
    pub rating: MetricReport,
    pub percentile: MetricReport,
    /// Relative gain of percentile over rating per metric; `None` over a
    /// zero baseline.
    pub gains: BTreeMap<String, Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RerankCell {
    /// `None` for the plain top-K baseline.
    pub method: Option<Method>,
    pub report: MetricReport,
    pub flagged_users: usize,
    pub overflow_units: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainRow {
    pub method: Method,
    pub metric: String,
    pub percentile_n: usize,
    pub rating_n: usize,
    pub percentile_value: f64,
    pub rating_value: f64,
    /// Relative gain, or time saved for runtime.
    pub gain: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub name: String,
    pub provenance: Provenance,
    pub simulation: Vec<SweepRow>,
    pub simulation_trend: Option<SweepTrend>,
    pub comparison: Vec<ComparisonRow>,
    pub reranker: Vec<RerankCell>,
    pub gains: Vec<GainRow>,
    /// False when some stage failed and the tables hold partial results.
    pub complete: bool,
    pub failures: Vec<String>,
}

/// One row of the flat results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub pipeline: String,
    pub algorithm: String,
    pub input: String,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    #[serde(rename = "K")]
    pub k: usize,
    pub metric: String,
    pub value: f64,
}

impl StudyReport {
    fn new(config: &StudyConfig, prepared: &Prepared) -> Self {
        Self {
            name: config.name.clone(),
            provenance: Provenance {
                crate_version: env!("CARGO_PKG_VERSION").into(),
                dataset_sha256: prepared.dataset_hash.clone(),
                n_users: prepared.dataset.n_users(),
                n_items: prepared.dataset.n_items(),
                n_ratings: prepared.dataset.nnz(),
                head_items: prepared.segmentation.head.len(),
                split_seed: config.pipeline.split_seed,
                model_seed: config.pipeline.model.seed,
                config: config.clone(),
            },
            simulation: Vec::new(),
            simulation_trend: None,
            comparison: Vec::new(),
            reranker: Vec::new(),
            gains: Vec::new(),
            complete: true,
            failures: Vec::new(),
        }
    }

    fn fail(&mut self, stage: &str, error: &Error) {
        log::error!("{stage} failed: {error}");
        self.complete = false;
        self.failures.push(format!("{stage}: {error}"));
    }

    /// Every metric report in the study, in table order.
    pub fn metric_reports(&self) -> Vec<&MetricReport> {
        let mut out: Vec<&MetricReport> = self.simulation.iter().map(|r| &r.report).collect();
        for row in &self.comparison {
            out.push(&row.rating);
            out.push(&row.percentile);
        }
        out.extend(self.reranker.iter().map(|c| &c.report));
        out
    }

    pub fn rows(&self) -> Vec<ResultRow> {
        self.metric_reports()
            .into_iter()
            .flat_map(|report| {
                report.values().into_iter().map(move |(metric, value)| ResultRow {
                    pipeline: report.labels.pipeline.clone(),
                    algorithm: report.labels.algorithm.clone(),
                    input: report.labels.input.clone(),
                    n: report.labels.n,
                    k: report.labels.k,
                    metric,
                    value,
                })
            })
            .collect()
    }
}

/// Runs every study section present in the config. Stage failures are
/// recorded in the report, which then holds partial results.
pub fn run_study(config: &StudyConfig) -> Result<StudyReport> {
    config.validate()?;
    let prepared = prepare(&config.pipeline)?;
    let mut report = StudyReport::new(config, &prepared);
    if let Some(sim) = &config.simulation {
        run_simulation_sweep(config, sim, &prepared, &mut report);
    }
    if let Some(cmp) = &config.comparison {
        run_comparison(config, cmp, &prepared, &mut report);
    }
    if let Some(rr) = &config.reranker_study {
        run_reranker_study(config, rr, &prepared, &mut report);
    }
    Ok(report)
}

fn sweep_row(config: &StudyConfig, prepared: &Prepared, beta: f64) -> Result<SweepRow> {
    let spec = &config.pipeline;
    let train = &prepared.split.train;
    let input = TrainInput::build(train, InputTransform::Flip(beta))?;
    let TrainInput::Rating(flipped) = &input else {
        unreachable!("a flip yields ratings")
    };
    let flipped_ratings = train
        .entries()
        .iter()
        .zip(flipped.entries())
        .filter(|(a, b)| a.value != b.value)
        .count();
    let label = InputTransform::Flip(beta).label();
    let (model_config, model) = fit(prepared, spec, &input, spec.model.algorithm, "simulation")?;
    let recs = recommend(&model, spec.k, true)?;
    let report = evaluate_set(prepared, spec, &recs, labels("simulation", &model_config, &label, None, spec.k))?;
    Ok(SweepRow {
        beta,
        flipped_items: flipped_item_count(beta, train.n_items()),
        flipped_ratings,
        report,
    })
}

/// Flips the training data at every β, retrains and evaluates. The first
/// failing β ends the sweep; earlier rows are kept.
pub fn run_simulation_sweep(
    config: &StudyConfig,
    sim: &SimulationSpec,
    prepared: &Prepared,
    report: &mut StudyReport,
) {
    let results: Vec<Result<SweepRow>> = sim
        .betas
        .par_iter()
        .map(|&beta| sweep_row(config, prepared, beta))
        .collect();
    for (beta, result) in sim.betas.iter().zip(results) {
        match result {
            Ok(row) => report.simulation.push(row),
            Err(e) => {
                report.fail(&format!("simulation beta={beta}"), &e);
                break;
            }
        }
    }
    let betas: Vec<f64> = report.simulation.iter().map(|r| r.beta).collect();
    let column = |f: fn(&MetricReport) -> f64| -> Vec<f64> {
        report.simulation.iter().map(|r| f(&r.report)).collect()
    };
    report.simulation_trend = Some(SweepTrend {
        beta_ee: spearman(&betas, &column(|r| r.ee)),
        beta_precision: spearman(&betas, &column(|r| r.precision)),
    });
}

/// Per-metric relative gain of `a` over `b`.
pub fn metric_gains(a: &MetricReport, b: &MetricReport) -> BTreeMap<String, Option<f64>> {
    a.values()
        .into_iter()
        .filter_map(|(name, va)| {
            let vb = b.get(&name)?;
            let gain = if name == "runtime_seconds" {
                time_saved(va, vb)
            } else {
                relative_gain(va, vb)
            };
            Some((name, gain.ok()))
        })
        .collect()
}

fn comparison_row(config: &StudyConfig, prepared: &Prepared, algorithm: Algorithm) -> Result<ComparisonRow> {
    let spec = &config.pipeline;
    let arm = |transform: InputTransform| -> Result<(ModelConfig, MetricReport)> {
        let input = TrainInput::build(&prepared.split.train, transform)?;
        let (model_config, model) = fit(prepared, spec, &input, algorithm, "comparison")?;
        let recs = recommend(&model, spec.k, true)?;
        let label = labels("comparison", &model_config, &transform.label(), None, spec.k);
        Ok((model_config, evaluate_set(prepared, spec, &recs, label)?))
    };
    let (rating_config, rating) = arm(InputTransform::Raw)?;
    let (percentile_config, percentile) = arm(InputTransform::Percentile)?;
    Ok(ComparisonRow {
        algorithm,
        gains: metric_gains(&percentile, &rating),
        rating_config,
        percentile_config,
        rating,
        percentile,
    })
}

/// Raw ratings against percentile values for each algorithm, each arm
/// with its own grid search.
pub fn run_comparison(
    config: &StudyConfig,
    cmp: &ComparisonSpec,
    prepared: &Prepared,
    report: &mut StudyReport,
) {
    let results: Vec<Result<ComparisonRow>> = cmp
        .algorithms
        .par_iter()
        .map(|&algorithm| comparison_row(config, prepared, algorithm))
        .collect();
    for (algorithm, result) in cmp.algorithms.iter().zip(results) {
        match result {
            Ok(row) => report.comparison.push(row),
            Err(e) => report.fail(&format!("comparison {algorithm}"), &e),
        }
    }
}

fn reranker_cells(
    config: &StudyConfig,
    rr: &RerankerStudySpec,
    prepared: &Prepared,
    transform: InputTransform,
    cells: &mut Vec<RerankCell>,
) -> Result<()> {
    let spec = &config.pipeline;
    let input = TrainInput::build(&prepared.split.train, transform)?;
    let input_label = transform.label();
    let (model_config, model) = fit(prepared, spec, &input, spec.model.algorithm, "baseline")?;
    let baseline = recommend(&model, spec.k, true)?;
    cells.push(RerankCell {
        method: None,
        report: evaluate_set(
            prepared,
            spec,
            &baseline,
            labels("baseline", &model_config, &input_label, None, spec.k),
        )?,
        flagged_users: 0,
        overflow_units: 0,
    });
    let context = RerankContext {
        segmentation: &prepared.segmentation,
        train: &prepared.split.train,
    };
    for &n in &rr.ns {
        let initial = recommend(&model, n, true)?;
        for &method in &rr.methods {
            let rerank_config = RerankConfig {
                method,
                k: spec.k,
                ..rr.base.clone()
            };
            let (out, seconds) = run_timed(&initial, &rerank_config, context)?;
            let mut report = evaluate_set(
                prepared,
                spec,
                &out.recs,
                labels(method.name(), &model_config, &input_label, Some(n), spec.k),
            )?;
            report.runtime_seconds = Some(seconds);
            cells.push(RerankCell {
                method: Some(method),
                report,
                flagged_users: out.flagged_users.len(),
                overflow_units: out.overflow_units,
            });
        }
    }
    Ok(())
}

/// Baseline plus every (input, N, method) cell, then the gain of
/// percentile input at the smallest N over rating input at the largest.
/// Cells run one after another so the rerank timings do not compete for
/// cores.
pub fn run_reranker_study(
    config: &StudyConfig,
    rr: &RerankerStudySpec,
    prepared: &Prepared,
    report: &mut StudyReport,
) {
    for transform in [InputTransform::Raw, InputTransform::Percentile] {
        let mut cells = Vec::new();
        let result = reranker_cells(config, rr, prepared, transform, &mut cells);
        report.reranker.extend(cells);
        if let Err(e) = result {
            report.fail(&format!("reranker study ({})", transform.label()), &e);
        }
    }
    let (Some(&n_min), Some(&n_max)) = (rr.ns.iter().min(), rr.ns.iter().max()) else {
        return;
    };
    let find = |input: &str, n: usize, method: Method| {
        report
            .reranker
            .iter()
            .find(|c| c.method == Some(method) && c.report.labels.input == input && c.report.labels.n == Some(n))
    };
    let mut gains = Vec::new();
    for &method in &rr.methods {
        let (Some(p), Some(r)) = (find("percentile", n_min, method), find("rating", n_max, method)) else {
            continue;
        };
        for (metric, gain) in metric_gains(&p.report, &r.report) {
            gains.push(GainRow {
                method,
                percentile_n: n_min,
                rating_n: n_max,
                percentile_value: p.report.get(&metric).unwrap_or(f64::NAN),
                rating_value: r.report.get(&metric).unwrap_or(f64::NAN),
                metric,
                gain,
            });
        }
    }
    report.gains = gains;
}
