use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::fixture::FixtureConfig;
use crate::data::RatingScale;
use crate::error::{Error, Result};
use crate::recommenders::{published_grid, Algorithm, ModelConfig};
use crate::rerank::{Method, RerankConfig};

/// Version of the config document schema this build reads.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DatasetSource {
    File {
        path: PathBuf,
        #[serde(default = "default_delimiter")]
        delimiter: char,
        #[serde(default)]
        has_header: bool,
        /// Admissible rating levels; inferred from the data when absent.
        #[serde(default)]
        scale: Option<Vec<f64>>,
    },
    Fixture(FixtureConfig),
}

fn default_delimiter() -> char {
    '\t'
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub source: DatasetSource,
    #[serde(default = "one")]
    pub min_user_ratings: usize,
    #[serde(default = "one")]
    pub min_item_ratings: usize,
}

fn one() -> usize {
    1
}

impl Default for DatasetSpec {
    fn default() -> Self {
        Self {
            source: DatasetSource::Fixture(FixtureConfig::default()),
            min_user_ratings: 1,
            min_item_ratings: 1,
        }
    }
}

impl DatasetSpec {
    pub fn scale(&self) -> Result<Option<RatingScale>> {
        match &self.source {
            DatasetSource::File { scale: Some(levels), .. } => Ok(Some(RatingScale::new(levels.clone())?)),
            _ => Ok(None),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputTransform {
    Raw,
    Percentile,
    Flip(f64),
}

impl InputTransform {
    pub fn label(&self) -> String {
        match self {
            InputTransform::Raw => "rating".into(),
            InputTransform::Percentile => "percentile".into(),
            InputTransform::Flip(beta) => format!("flip({beta})"),
        }
    }
}

/// Which configs a grid search covers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridChoice {
    /// The published grid around the pipeline's model config.
    Published,
    Explicit(Vec<ModelConfig>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineSpec {
    pub dataset: DatasetSpec,
    pub split_ratio: f64,
    pub split_seed: u64,
    /// Rating share that defines the head.
    pub head_fraction: f64,
    pub input: InputTransform,
    pub model: ModelConfig,
    /// Grid search instead of the single `model` config.
    pub grid: Option<GridChoice>,
    /// Metric the grid search maximises.
    pub objective: String,
    /// Initial list length handed to a reranker.
    pub n: Option<usize>,
    pub k: usize,
    pub reranker: Option<RerankConfig>,
    /// Appearance thresholds for IA and LIA.
    pub alphas: Vec<u32>,
}

impl Default for PipelineSpec {
    fn default() -> Self {
        Self {
            dataset: DatasetSpec::default(),
            split_ratio: 0.8,
            split_seed: 42,
            head_fraction: 0.2,
            input: InputTransform::Raw,
            model: ModelConfig::default(),
            grid: None,
            objective: "ndcg".into(),
            n: None,
            k: 10,
            reranker: None,
            alphas: vec![1, 5, 10],
        }
    }
}

impl PipelineSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return Err(Error::Config("split_ratio must lie in (0, 1)".into()));
        }
        if !(self.head_fraction > 0.0 && self.head_fraction < 1.0) {
            return Err(Error::Config("head_fraction must lie in (0, 1)".into()));
        }
        if self.k == 0 {
            return Err(Error::Config("k must be positive".into()));
        }
        if self.alphas.is_empty() || self.alphas.contains(&0) {
            return Err(Error::Config("alphas must be a non-empty list of positive counts".into()));
        }
        if self.dataset.min_user_ratings == 0 || self.dataset.min_item_ratings == 0 {
            return Err(Error::Config("filter thresholds must be at least 1".into()));
        }
        if let InputTransform::Flip(beta) = self.input {
            if !(beta > 0.0 && beta <= 1.0) {
                return Err(Error::Config(format!("flip beta {beta} not in (0, 1]")));
            }
        }
        if let Some(r) = &self.reranker {
            let n = self.n.ok_or_else(|| Error::Config("a reranker needs an initial list length n".into()))?;
            if r.k != self.k || self.k > n {
                return Err(Error::Config("reranker k must equal k and not exceed n".into()));
            }
            r.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        if let Some(GridChoice::Explicit(grid)) = &self.grid {
            if grid.is_empty() {
                return Err(Error::Config("explicit grid is empty".into()));
            }
        }
        self.model.validate().map_err(|e| Error::Config(e.to_string()))
    }

    /// The configs to search for `algorithm`, seeded like `self.model`.
    pub fn grid_for(&self, algorithm: Algorithm) -> Vec<ModelConfig> {
        let base = ModelConfig {
            algorithm,
            ..self.model.clone()
        };
        match &self.grid {
            None => vec![base],
            Some(GridChoice::Published) => published_grid(&base),
            Some(GridChoice::Explicit(grid)) => grid
                .iter()
                .map(|c| ModelConfig {
                    algorithm,
                    ..c.clone()
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimulationSpec {
    pub betas: Vec<f64>,
}

impl Default for SimulationSpec {
    fn default() -> Self {
        Self {
            betas: vec![
                0.01, 0.03, 0.05, 0.07, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45, 0.50,
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonSpec {
    pub algorithms: Vec<Algorithm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RerankerStudySpec {
    pub ns: Vec<usize>,
    pub methods: Vec<Method>,
    /// Parameters shared by every cell; `method` and `k` are overridden.
    pub base: RerankConfig,
}

impl Default for RerankerStudySpec {
    fn default() -> Self {
        Self {
            ns: vec![20, 50, 100],
            methods: Method::ALL.to_vec(),
            base: RerankConfig::default(),
        }
    }
}

/// One config document: a pipeline plus any of the three studies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub version: u32,
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub pipeline: PipelineSpec,
    #[serde(default)]
    pub simulation: Option<SimulationSpec>,
    #[serde(default)]
    pub comparison: Option<ComparisonSpec>,
    #[serde(default)]
    pub reranker_study: Option<RerankerStudySpec>,
}

impl StudyConfig {
    pub fn new(name: &str, pipeline: PipelineSpec) -> Self {
        Self {
            version: SCHEMA_VERSION,
            name: name.into(),
            pipeline,
            simulation: None,
            comparison: None,
            reranker_study: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: StudyConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Uses one seed for the split, the model and every reranker. The
    /// fixture seed is left alone so the data stay the same.
    pub fn override_seed(&mut self, seed: u64) {
        self.pipeline.split_seed = seed;
        self.pipeline.model.seed = seed;
        if let Some(GridChoice::Explicit(grid)) = &mut self.pipeline.grid {
            for c in grid {
                c.seed = seed;
            }
        }
        if let Some(r) = &mut self.pipeline.reranker {
            r.seed = seed;
        }
        if let Some(study) = &mut self.reranker_study {
            study.base.seed = seed;
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "config schema version {} is not supported (expected {SCHEMA_VERSION})",
                self.version
            )));
        }
        self.pipeline.validate()?;
        if let DatasetSource::Fixture(f) = &self.pipeline.dataset.source {
            f.validate()?;
        }
        if let Some(sim) = &self.simulation {
            if sim.betas.is_empty() || sim.betas.iter().any(|&b| !(b > 0.0 && b <= 1.0)) {
                return Err(Error::Config("betas must be a non-empty list in (0, 1]".into()));
            }
            if self.pipeline.reranker.is_some() {
                return Err(Error::Config("the simulation sweep takes no reranker".into()));
            }
        }
        if let Some(c) = &self.comparison {
            if c.algorithms.is_empty() {
                return Err(Error::Config("comparison needs at least one algorithm".into()));
            }
        }
        if let Some(r) = &self.reranker_study {
            if r.ns.is_empty() || r.methods.is_empty() {
                return Err(Error::Config("reranker study needs list sizes and methods".into()));
            }
            if r.ns.iter().any(|&n| n < self.pipeline.k) {
                return Err(Error::Config("every initial list size must be at least k".into()));
            }
            let mut base = r.base.clone();
            base.k = self.pipeline.k;
            base.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        Ok(())
    }
}
