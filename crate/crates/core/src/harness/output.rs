//! Report tables and plot-data files.

use std::fs::{self, File};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::studies::StudyReport;
use crate::bias::BiasDiagnostics;
use crate::error::{Error, Result};

pub const RESULTS_HEADER: [&str; 7] = ["pipeline", "algorithm", "input", "N", "K", "metric", "value"];

fn writer(dir: &Path, name: &str) -> Result<(csv::Writer<File>, PathBuf)> {
    let path = dir.join(name);
    let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
    Ok((csv::Writer::from_writer(file), path))
}

fn finish(mut w: csv::Writer<File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn write_rows<S: Serialize>(dir: &Path, name: &str, header: &[&str], rows: impl IntoIterator<Item = S>) -> Result<PathBuf> {
    let (mut w, path) = writer(dir, name)?;
    w.write_record(header)?;
    for row in rows {
        w.serialize(row)?;
    }
    finish(w, &path)?;
    Ok(path)
}

/// `lorenz.csv`, `rating_hist.csv` and `item_stats.csv`.
pub fn write_diagnostics(d: &BiasDiagnostics, dir: &Path, item_name: impl Fn(u32) -> String) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let lorenz = write_rows(dir, "lorenz.csv", &["item_fraction", "rating_fraction"], &d.lorenz)?;
    let hist = write_rows(dir, "rating_hist.csv", &["rating", "fraction"], &d.rating_histogram)?;
    let stats = write_rows(
        dir,
        "item_stats.csv",
        &["item", "count", "mean_rating"],
        d.item_stats.iter().map(|s| (item_name(s.item), s.count, opt(s.mean))),
    )?;
    Ok(vec![lorenz, hist, stats])
}

/// Writes the results table, the JSON report and whichever plot files the
/// study produced. Returns the written paths.
pub fn write_report(report: &StudyReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    written.push(write_rows(
        dir,
        "results.csv",
        &RESULTS_HEADER,
        report.rows().into_iter().map(|r| (r.pipeline, r.algorithm, r.input, opt(r.n), r.k, r.metric, r.value)),
    )?);

    let json_path = dir.join("report.json");
    fs::write(&json_path, serde_json::to_string_pretty(report)?).map_err(|e| Error::io(&json_path, e))?;
    written.push(json_path);

    if !report.simulation.is_empty() {
        let alphas: Vec<u32> = report.simulation[0].report.ia.keys().copied().collect();
        let (mut w, path) = writer(dir, "beta_sweep.csv")?;
        let mut header: Vec<String> = ["beta", "flipped_items", "flipped_ratings", "precision", "ndcg", "gini", "ee"]
            .map(String::from)
            .to_vec();
        header.extend(alphas.iter().map(|a| format!("ia@{a}")));
        header.extend(alphas.iter().map(|a| format!("lia@{a}")));
        w.write_record(&header)?;
        for row in &report.simulation {
            let r = &row.report;
            let mut record = vec![
                row.beta.to_string(),
                row.flipped_items.to_string(),
                row.flipped_ratings.to_string(),
                r.precision.to_string(),
                r.ndcg.to_string(),
                r.gini.to_string(),
                r.ee.to_string(),
            ];
            record.extend(alphas.iter().map(|a| opt(r.ia.get(a))));
            record.extend(alphas.iter().map(|a| opt(r.lia.get(a))));
            w.write_record(&record)?;
        }
        finish(w, &path)?;
        written.push(path);
    }

    if !report.comparison.is_empty() {
        let rows = report.comparison.iter().flat_map(|row| {
            row.gains.iter().map(move |(metric, gain)| {
                (
                    row.algorithm.name(),
                    metric.clone(),
                    row.rating.get(metric).unwrap_or(f64::NAN),
                    row.percentile.get(metric).unwrap_or(f64::NAN),
                    opt(*gain),
                )
            })
        });
        written.push(write_rows(
            dir,
            "comparison.csv",
            &["algorithm", "metric", "rating", "percentile", "gain_percent"],
            rows,
        )?);
    }

    if !report.reranker.is_empty() {
        let method = |m: Option<crate::rerank::Method>| m.map(|m| m.name()).unwrap_or("NONE");
        let alpha = report.reranker[0].report.ia.keys().next().copied().unwrap_or(1);
        written.push(write_rows(
            dir,
            "scatter_ndcg_ia.csv",
            &["input", "N", "method", "alpha", "ndcg", "ia"],
            report.reranker.iter().map(|c| {
                let r = &c.report;
                (r.labels.input.clone(), opt(r.labels.n), method(c.method), alpha, r.ndcg, opt(r.ia.get(&alpha)))
            }),
        )?);
        written.push(write_rows(
            dir,
            "scatter_ndcg_ee.csv",
            &["input", "N", "method", "ndcg", "ee"],
            report.reranker.iter().map(|c| {
                let r = &c.report;
                (r.labels.input.clone(), opt(r.labels.n), method(c.method), r.ndcg, r.ee)
            }),
        )?);
        written.push(write_rows(
            dir,
            "timing.csv",
            &["input", "N", "method", "runtime_seconds"],
            report.reranker.iter().filter_map(|c| {
                let r = &c.report;
                Some((r.labels.input.clone(), opt(r.labels.n), c.method?.name(), r.runtime_seconds?))
            }),
        )?);
        written.push(write_rows(
            dir,
            "gains.csv",
            &["method", "metric", "percentile_N", "rating_N", "percentile", "rating", "gain_percent"],
            report.gains.iter().map(|g| {
                (
                    g.method.name(),
                    g.metric.clone(),
                    g.percentile_n,
                    g.rating_n,
                    g.percentile_value,
                    g.rating_value,
                    opt(g.gain),
                )
            }),
        )?);
    }
    Ok(written)
}
