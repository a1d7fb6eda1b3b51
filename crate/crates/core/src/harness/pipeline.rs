use sha2::{Digest, Sha256};

use super::config::{DatasetSource, DatasetSpec, InputTransform, PipelineSpec};
use super::fixture;
use crate::bias::{flip_positivity, percentile_transform, segment_head_tail, ItemSegmentation};
use crate::data::{
    filter_kcore, load_ratings, split_per_user, Feedback, LoadOptions, PercentileMatrix,
    RatingMatrix, SplitPair,
};
use crate::error::{Error, Result};
use crate::metrics::{evaluate, MetricReport, ReportLabels};
use crate::ranking::RecommendationSet;
use crate::recommenders::{grid_search, recommend, train, Algorithm, ModelConfig, TrainedModel};

/// Loads (or generates) the dataset and applies the k-core filter.
pub fn load_dataset(spec: &DatasetSpec) -> Result<RatingMatrix> {
    let matrix = match &spec.source {
        DatasetSource::File {
            path,
            delimiter,
            has_header,
            ..
        } => {
            if !delimiter.is_ascii() {
                return Err(Error::Config(format!("delimiter {delimiter:?} is not ASCII")));
            }
            let options = LoadOptions {
                delimiter: *delimiter as u8,
                has_header: *has_header,
                scale: spec.scale()?,
            };
            load_ratings(path, &options)?
        }
        DatasetSource::Fixture(config) => fixture::generate(config)?,
    };
    if spec.min_user_ratings > 1 || spec.min_item_ratings > 1 {
        filter_kcore(&matrix, spec.min_user_ratings, spec.min_item_ratings)
    } else {
        Ok(matrix)
    }
}

/// SHA-256 over the matrix in its external-id line format.
pub fn dataset_hash(matrix: &RatingMatrix) -> String {
    let mut hasher = Sha256::new();
    for e in matrix.entries() {
        let line = format!(
            "{}\t{}\t{}\n",
            matrix.user_ids().external(e.user),
            matrix.item_ids().external(e.item),
            e.value
        );
        hasher.update(line.as_bytes());
    }
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// The dataset, its split and the head/tail segmentation of the training
/// half: everything that every pipeline over one config shares.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub dataset: RatingMatrix,
    pub dataset_hash: String,
    pub split: SplitPair,
    pub segmentation: ItemSegmentation,
}

pub fn prepare(spec: &PipelineSpec) -> Result<Prepared> {
    spec.validate()?;
    let dataset = load_dataset(&spec.dataset)?;
    let dataset_hash = dataset_hash(&dataset);
    let split = split_per_user(&dataset, spec.split_ratio, spec.split_seed)?;
    let segmentation = segment_head_tail(&split.train, spec.head_fraction)?;
    Ok(Prepared {
        dataset,
        dataset_hash,
        split,
        segmentation,
    })
}

/// Training data after the input transform.
#[derive(Debug, Clone)]
pub enum TrainInput {
    Rating(RatingMatrix),
    Percentile(PercentileMatrix),
}

impl TrainInput {
    pub fn build(train: &RatingMatrix, transform: InputTransform) -> Result<Self> {
        Ok(match transform {
            InputTransform::Raw => TrainInput::Rating(train.clone()),
            InputTransform::Percentile => TrainInput::Percentile(percentile_transform(train)),
            InputTransform::Flip(beta) => TrainInput::Rating(flip_positivity(train, beta)?),
        })
    }

    pub fn feedback(&self) -> Feedback<'_> {
        match self {
            TrainInput::Rating(m) => m.into(),
            TrainInput::Percentile(m) => m.into(),
        }
    }
}

/// Trains `algorithm` on `input`, grid-searching when the pipeline asks for
/// it. Returns the chosen config and the trained model.
pub fn fit(
    prepared: &Prepared,
    spec: &PipelineSpec,
    input: &TrainInput,
    algorithm: Algorithm,
    pipeline: &str,
) -> Result<(ModelConfig, TrainedModel)> {
    let grid = spec.grid_for(algorithm);
    let config = if grid.len() == 1 {
        grid.into_iter().next().expect("one config")
    } else {
        let result = grid_search(
            &grid,
            input.feedback(),
            &prepared.split.test,
            &prepared.segmentation,
            spec.k,
            &spec.alphas,
            &spec.objective,
            pipeline,
        )?;
        log::info!(
            "{pipeline}: best of {} configs is {} ({} failed)",
            result.entries.len(),
            result.best_config().describe(),
            result.failures()
        );
        result.best_config().clone()
    };
    let model = train(&config, input.feedback())?;
    Ok((config, model))
}

pub fn labels(pipeline: &str, model: &ModelConfig, input: &str, n: Option<usize>, k: usize) -> ReportLabels {
    ReportLabels {
        pipeline: pipeline.into(),
        algorithm: model.algorithm.to_string(),
        input: input.into(),
        n,
        k,
    }
}

/// Evaluates a top-K set of the prepared split.
pub fn evaluate_set(
    prepared: &Prepared,
    spec: &PipelineSpec,
    recs: &RecommendationSet,
    labels: ReportLabels,
) -> Result<MetricReport> {
    evaluate(recs, &prepared.split.test, &prepared.segmentation, &spec.alphas, labels)
}

/// Trains the pipeline model on its input and evaluates the top-K lists.
pub fn run_pipeline(spec: &PipelineSpec) -> Result<(Prepared, TrainedModel, MetricReport)> {
    let prepared = prepare(spec)?;
    let input = TrainInput::build(&prepared.split.train, spec.input)?;
    let (config, model) = fit(&prepared, spec, &input, spec.model.algorithm, "single")?;
    let recs = recommend(&model, spec.k, true)?;
    let label = labels("single", &config, &spec.input.label(), None, spec.k);
    let report = evaluate_set(&prepared, spec, &recs, label)?;
    Ok((prepared, model, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::fixture::FixtureConfig;

    #[test]
    fn hash_changes_with_content() {
        let spec = DatasetSpec {
            source: DatasetSource::Fixture(FixtureConfig { n_users: 30, n_items: 40, max_profile: 30, ..FixtureConfig::default() }),
            ..DatasetSpec::default()
        };
        let a = load_dataset(&spec).unwrap();
        assert_eq!(dataset_hash(&a), dataset_hash(&load_dataset(&spec).unwrap()));
        let flipped = flip_positivity(&a, 0.5).unwrap();
        assert_ne!(dataset_hash(&a), dataset_hash(&flipped));
        assert_eq!(dataset_hash(&a).len(), 64);
    }
}
