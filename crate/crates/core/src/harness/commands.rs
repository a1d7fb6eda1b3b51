//! One library function per CLI subcommand. Each reads the config
//! document, writes its files into `out` and returns what it wrote.

use std::fs::{self, File};
use std::path::{Path, PathBuf};

use super::config::{InputTransform, SimulationSpec, StudyConfig};
use super::output::{write_diagnostics, write_report, RESULTS_HEADER};
use super::pipeline::{evaluate_set, fit, labels, load_dataset, prepare, TrainInput};
use super::studies::{run_study, StudyReport};
use crate::bias::{diagnose as diagnose_matrix, profile_report};
use crate::data::{write_interactions, write_remap};
use crate::error::{Error, Result};
use crate::metrics::MetricReport;
use crate::ranking::RecommendationSet;
use crate::recommenders::{recommend as top_n, TrainedModel};
use crate::rerank::{run_timed, RerankContext};

const TAB: u8 = b'\t';

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Loads and filters the dataset; writes it with its remap tables.
pub fn ingest(config: &StudyConfig, out: &Path) -> Result<Vec<PathBuf>> {
    create_dir(out)?;
    let data = load_dataset(&config.pipeline.dataset)?;
    let paths = [out.join("ratings.tsv"), out.join("user_remap.tsv"), out.join("item_remap.tsv")];
    write_interactions(&data, &paths[0], TAB)?;
    write_remap(data.user_ids(), &paths[1], TAB)?;
    write_remap(data.item_ids(), &paths[2], TAB)?;
    log::info!("{} users, {} items, {} ratings", data.n_users(), data.n_items(), data.nnz());
    Ok(paths.to_vec())
}

/// Bias diagnostics of the full dataset, the per-item profile sizes and
/// the head/tail segmentation of the training split.
pub fn diagnose(config: &StudyConfig, out: &Path) -> Result<Vec<PathBuf>> {
    create_dir(out)?;
    let prepared = prepare(&config.pipeline)?;
    let data = &prepared.dataset;
    let mut written = write_diagnostics(&diagnose_matrix(data)?, out, |i| data.item_ids().external(i).to_string())?;

    let sizes = out.join("profile_sizes.csv");
    let mut w = csv::Writer::from_path(&sizes)?;
    w.write_record(["item", "size", "distinct"])?;
    for p in profile_report(data) {
        w.serialize((data.item_ids().external(p.item), p.size, p.distinct))?;
    }
    w.flush().map_err(|e| Error::io(&sizes, e))?;
    written.push(sizes);

    let seg = out.join("segmentation.json");
    let s = &prepared.segmentation;
    let doc = serde_json::json!({
        "head_fraction": config.pipeline.head_fraction,
        "coverage": s.coverage,
        "head": s.head.iter().map(|&i| data.item_ids().external(i)).collect::<Vec<_>>(),
        "tail_items": s.tail.len(),
    });
    fs::write(&seg, serde_json::to_string_pretty(&doc)?).map_err(|e| Error::io(&seg, e))?;
    written.push(seg);
    Ok(written)
}

/// Writes the split and the transformed training half.
pub fn transform(config: &StudyConfig, out: &Path) -> Result<Vec<PathBuf>> {
    create_dir(out)?;
    let prepared = prepare(&config.pipeline)?;
    let mut written = vec![out.join("train.tsv"), out.join("test.tsv")];
    write_interactions(&prepared.split.train, &written[0], TAB)?;
    write_interactions(&prepared.split.test, &written[1], TAB)?;
    let input = config.pipeline.input;
    if input != InputTransform::Raw {
        let transformed = TrainInput::build(&prepared.split.train, input)?;
        let name = match input {
            InputTransform::Percentile => "train_percentile.tsv",
            _ => "train_flipped.tsv",
        };
        let path = out.join(name);
        write_interactions(transformed.feedback().matrix, &path, TAB)?;
        written.push(path);
    }
    Ok(written)
}

/// The β sweep alone, with the default β list when the config has none.
pub fn simulate(config: &StudyConfig, out: &Path) -> Result<StudyReport> {
    let mut config = config.clone();
    config.simulation.get_or_insert_with(SimulationSpec::default);
    config.comparison = None;
    config.reranker_study = None;
    let report = run_study(&config)?;
    write_report(&report, out)?;
    Ok(report)
}

/// Trains the pipeline's model (grid-searched when configured) and saves
/// a checkpoint.
pub fn train(config: &StudyConfig, out: &Path) -> Result<PathBuf> {
    create_dir(out)?;
    let spec = &config.pipeline;
    let prepared = prepare(spec)?;
    let input = TrainInput::build(&prepared.split.train, spec.input)?;
    let (_, model) = fit(&prepared, spec, &input, spec.model.algorithm, "train")?;
    let path = out.join("model.json");
    model.save(&path)?;
    Ok(path)
}

/// Top-N lists (N = the pipeline's `n`, else `k`) from a checkpoint.
pub fn recommend(config: &StudyConfig, out: &Path, model_path: &Path) -> Result<PathBuf> {
    create_dir(out)?;
    let prepared = prepare(&config.pipeline)?;
    let model = TrainedModel::load(model_path)?;
    let train = &prepared.split.train;
    if model.n_users() != train.n_users() || model.n_items() != train.n_items() {
        return Err(Error::Config("checkpoint does not match the configured dataset".into()));
    }
    let len = config.pipeline.n.unwrap_or(config.pipeline.k);
    let recs = top_n(&model, len, true)?;
    let path = out.join("recommendations.txt");
    recs.write(&path, train.user_ids(), train.item_ids())?;
    Ok(path)
}

fn read_recs(path: &Path, config: &StudyConfig, k: Option<usize>) -> Result<(super::pipeline::Prepared, RecommendationSet)> {
    let prepared = prepare(&config.pipeline)?;
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let train = &prepared.split.train;
    let recs = RecommendationSet::read(file, train.user_ids(), train.item_ids(), k)?;
    Ok((prepared, recs))
}

/// Reranks initial lists with the pipeline's reranker.
pub fn rerank(config: &StudyConfig, out: &Path, initial_path: &Path) -> Result<Vec<PathBuf>> {
    create_dir(out)?;
    let reranker = config
        .pipeline
        .reranker
        .as_ref()
        .ok_or_else(|| Error::Config("pipeline has no reranker".into()))?;
    let (prepared, initial) = read_recs(initial_path, config, config.pipeline.n)?;
    let context = RerankContext {
        segmentation: &prepared.segmentation,
        train: &prepared.split.train,
    };
    let (result, seconds) = run_timed(&initial, reranker, context)?;
    if !result.flagged_users.is_empty() {
        log::warn!("{} users could not meet the reranker constraints", result.flagged_users.len());
    }
    let train = &prepared.split.train;
    let lists = out.join("reranked.txt");
    result.recs.write(&lists, train.user_ids(), train.item_ids())?;
    let timing = out.join("timing.csv");
    let mut w = csv::Writer::from_path(&timing)?;
    w.write_record(["input", "N", "method", "runtime_seconds"])?;
    w.serialize((config.pipeline.input.label(), initial.k(), reranker.method.name(), seconds))?;
    w.flush().map_err(|e| Error::io(&timing, e))?;
    Ok(vec![lists, timing])
}

/// Evaluates a list file against the test split.
pub fn evaluate(config: &StudyConfig, out: &Path, recs_path: &Path) -> Result<MetricReport> {
    create_dir(out)?;
    let spec = &config.pipeline;
    let (prepared, recs) = read_recs(recs_path, config, Some(spec.k))?;
    let pipeline = spec.reranker.as_ref().map(|r| r.method.name()).unwrap_or("baseline");
    let n = spec.reranker.as_ref().and(spec.n);
    let report = evaluate_set(&prepared, spec, &recs, labels(pipeline, &spec.model, &spec.input.label(), n, spec.k))?;
    let path = out.join("results.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(RESULTS_HEADER)?;
    for (metric, value) in report.values() {
        let l = &report.labels;
        w.serialize((&l.pipeline, &l.algorithm, &l.input, n.map(|x| x.to_string()).unwrap_or_default(), l.k, metric, value))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    let json = out.join("report.json");
    fs::write(&json, serde_json::to_string_pretty(&report)?).map_err(|e| Error::io(&json, e))?;
    Ok(report)
}

/// Every study section in the config plus the dataset diagnostics.
pub fn study(config: &StudyConfig, out: &Path) -> Result<StudyReport> {
    let report = run_study(config)?;
    write_report(&report, out)?;
    let data = load_dataset(&config.pipeline.dataset)?;
    write_diagnostics(&diagnose_matrix(&data)?, out, |i| data.item_ids().external(i).to_string())?;
    Ok(report)
}
