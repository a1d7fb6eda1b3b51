use std::fs;
use std::path::Path;

use multibias::harness::{
    commands, ComparisonSpec, DatasetSource, FixtureConfig, PipelineSpec, RerankerStudySpec,
    SimulationSpec, StudyConfig,
};
use multibias::recommenders::{Algorithm, ModelConfig};
use multibias::rerank::{Method, RerankConfig};

fn small_study() -> StudyConfig {
    let mut pipeline = PipelineSpec::default();
    pipeline.dataset.source = DatasetSource::Fixture(FixtureConfig {
        n_users: 120,
        n_items: 80,
        min_profile: 10,
        max_profile: 25,
        ..FixtureConfig::default()
    });
    pipeline.model = ModelConfig::new(Algorithm::ItemKNN);
    let mut config = StudyConfig::new("outputs", pipeline);
    config.simulation = Some(SimulationSpec {
        betas: vec![0.1, 0.3],
    });
    config.comparison = Some(ComparisonSpec {
        algorithms: vec![Algorithm::ItemKNN, Algorithm::UserKNN],
    });
    config.reranker_study = Some(RerankerStudySpec {
        ns: vec![20, 40],
        methods: Method::ALL.to_vec(),
        base: RerankConfig::default(),
    });
    config
}

/// Column contract of every plot file.
const PLOT_COLUMNS: [(&str, &[&str]); 7] = [
    ("lorenz.csv", &["item_fraction", "rating_fraction"]),
    ("beta_sweep.csv", &["beta", "flipped_items", "flipped_ratings", "precision", "ndcg", "gini", "ee", "ia@1", "ia@5", "ia@10", "lia@1", "lia@5", "lia@10"]),
    ("scatter_ndcg_ia.csv", &["input", "N", "method", "alpha", "ndcg", "ia"]),
    ("scatter_ndcg_ee.csv", &["input", "N", "method", "ndcg", "ee"]),
    ("timing.csv", &["input", "N", "method", "runtime_seconds"]),
    ("results.csv", &["pipeline", "algorithm", "input", "N", "K", "metric", "value"]),
    ("gains.csv", &["method", "metric", "percentile_N", "rating_N", "percentile", "rating", "gain_percent"]),
];

/// Columns that must parse as numbers on every row.
fn numeric(column: &str) -> bool {
    !matches!(column, "input" | "method" | "pipeline" | "algorithm" | "metric" | "N" | "gain_percent")
}

fn read(dir: &Path, name: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut rdr = csv::Reader::from_path(dir.join(name)).unwrap();
    let header = rdr.headers().unwrap().iter().map(String::from).collect();
    let rows = rdr
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

/// Table text with runtime rows and columns removed.
fn without_runtime(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name))
        .unwrap()
        .lines()
        .filter(|l| !l.contains("runtime_seconds"))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn plot_files_meet_the_column_contract_and_reruns_match() {
    let config = small_study();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let report = commands::study(&config, a.path()).unwrap();
    assert!(report.complete, "{:?}", report.failures);
    commands::study(&config, b.path()).unwrap();

    for (name, columns) in PLOT_COLUMNS {
        let (header, rows) = read(a.path(), name);
        assert_eq!(header, columns.to_vec(), "{name}");
        assert!(!rows.is_empty(), "{name} is empty");
        for row in &rows {
            assert_eq!(row.len(), header.len(), "{name}");
            for (col, value) in header.iter().zip(row) {
                if numeric(col) {
                    assert!(value.parse::<f64>().is_ok(), "{name}: {col} = {value:?}");
                }
            }
        }
    }
    let (_, scatter) = read(a.path(), "scatter_ndcg_ee.csv");
    assert_eq!(scatter.len(), 2 * 2 * 6 + 2);

    for name in ["results.csv", "beta_sweep.csv", "comparison.csv", "scatter_ndcg_ia.csv", "scatter_ndcg_ee.csv", "gains.csv", "lorenz.csv"] {
        assert_eq!(without_runtime(a.path(), name), without_runtime(b.path(), name), "{name} differs between runs");
    }
}

#[test]
fn fair_rerankers_do_not_lower_exposure_equality() {
    let mut config = small_study();
    config.simulation = None;
    config.comparison = None;
    config.pipeline.dataset.source = DatasetSource::Fixture(FixtureConfig::default());
    config.reranker_study = Some(RerankerStudySpec {
        ns: vec![20],
        methods: Method::ALL.iter().copied().filter(|m| !m.is_naive()).collect(),
        base: RerankConfig::default(),
    });
    let report = multibias::harness::run_study(&config).unwrap();
    for input in ["rating", "percentile"] {
        let cells: Vec<_> = report.reranker.iter().filter(|c| c.report.labels.input == input).collect();
        let baseline = &cells.iter().find(|c| c.method.is_none()).unwrap().report;
        for cell in cells.iter().filter(|c| c.method.is_some()) {
            // On rating input FA*IR fills its tail quota with the same few
            // top-scored tail items for most users, which concentrates
            // exposure below the baseline. Only coverage is checked there.
            if input == "rating" && cell.method == Some(Method::FASTAR) {
                assert!(cell.report.ia[&1] >= baseline.ia[&1]);
                continue;
            }
            assert!(
                cell.report.ee >= baseline.ee,
                "{input} {:?}: EE {} below baseline {}",
                cell.method,
                cell.report.ee,
                baseline.ee
            );
        }
    }
}
