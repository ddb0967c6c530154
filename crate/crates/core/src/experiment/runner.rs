use std::collections::BTreeSet;

use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use super::{encode_dataset, EmptyPolicy, EncodedDataset, ExperimentConfig, ExperimentError, Freeze, MetricsReport};
use crate::corpus::{EmbeddingTable, ImageDataset, PairDataset};
use crate::nn::{
    fit, predict, Checkpoint, CheckpointMeta, CnnModel, EngineRng, EpochRecord, Shape3, Tensor4, TrainConfig,
    Validation,
};

/// Mixed into the run seed for the training-loop generator, so that weight
/// initialization and shuffling draw from different streams.
const FIT_STREAM: u64 = 0x5851_f42d_4c95_7f2d;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    pub history: Vec<EpochRecord>,
    pub best_epoch: Option<usize>,
    pub train_examples: usize,
    /// Training records left out because their image was empty.
    pub skipped_empty: usize,
    pub frozen_params: usize,
    pub trainable_params: usize,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub checkpoint: Checkpoint,
    pub summary: RunSummary,
}

fn distinct_labels(labels: &[usize]) -> usize {
    labels.iter().collect::<BTreeSet<_>>().len()
}

fn input_shape(cfg: &ExperimentConfig) -> Shape3 {
    Shape3::new(1, cfg.input.height, cfg.input.width)
}

fn fit_encoded(
    model: CnnModel<f32>,
    x: &Tensor4<f32>,
    labels: &[usize],
    validation: Option<(&Tensor4<f32>, &[usize])>,
    cfg: &ExperimentConfig,
    dataset_tag: &str,
    skipped_empty: usize,
) -> Result<RunOutcome, ExperimentError> {
    if labels.iter().any(|&l| l >= model.num_classes()) {
        return Err(ExperimentError::Data(format!(
            "labels exceed the model's {} classes",
            model.num_classes()
        )));
    }
    let (frozen_params, trainable_params) = model.frozen_split();
    let train = TrainConfig {
        seed: cfg.train.seed ^ FIT_STREAM,
        ..cfg.train
    };
    let val = validation
        .filter(|(vx, _)| vx.batch() > 0)
        .map(|(x, labels)| Validation { x, labels });
    let out = fit(model, x, labels, &train, val)?;
    let meta = CheckpointMeta {
        seed: cfg.train.seed,
        epochs: cfg.train.epochs,
        dataset_tag: dataset_tag.to_string(),
        config: Some(serde_json::to_value(cfg).expect("config serializes")),
    };
    Ok(RunOutcome {
        checkpoint: Checkpoint::new(out.model, meta),
        summary: RunSummary {
            history: out.history,
            best_epoch: out.best_epoch,
            train_examples: labels.len(),
            skipped_empty,
            frozen_params,
            trainable_params,
        },
    })
}

fn encode_training(
    train: &PairDataset,
    table: &EmbeddingTable,
    cfg: &ExperimentConfig,
) -> Result<EncodedDataset, ExperimentError> {
    if train.is_empty() {
        return Err(ExperimentError::Data("training set is empty".into()));
    }
    if distinct_labels(&train.labels()) < 2 {
        return Err(ExperimentError::Data("training set needs at least two classes".into()));
    }
    let enc = encode_dataset(train, table, cfg, EmptyPolicy::Skip)?;
    if enc.is_empty() {
        return Err(ExperimentError::Data(
            "every training record produced an empty image (no word found in the embeddings)".into(),
        ));
    }
    Ok(enc)
}

/// Trains a fresh network on D2I images of `train`. With a validation set
/// the returned checkpoint holds the best-on-validation epoch.
pub fn train_experiment(
    cfg: &ExperimentConfig,
    train: &PairDataset,
    table: &EmbeddingTable,
    validation: Option<&PairDataset>,
    dataset_tag: &str,
) -> Result<RunOutcome, ExperimentError> {
    cfg.validate()?;
    let enc = encode_training(train, table, cfg)?;
    let val = validation
        .map(|v| encode_dataset(v, table, cfg, EmptyPolicy::Skip))
        .transpose()?;
    let mut rng = EngineRng::seed_from_u64(cfg.train.seed);
    let model = CnnModel::new(input_shape(cfg), &cfg.model.layers(train.num_classes()), &mut rng)?;
    fit_encoded(
        model,
        &enc.x,
        &enc.labels,
        val.as_ref().map(|v| (&v.x, &v.labels[..])),
        cfg,
        dataset_tag,
        enc.empty_records.len(),
    )
}

pub fn image_tensor(images: &ImageDataset) -> Result<Tensor4<f32>, ExperimentError> {
    Ok(Tensor4::from_vec(
        [images.len(), 1, images.height, images.width],
        images.pixels.clone(),
    )?)
}

/// Trains a fresh network on an image dataset such as MNIST. The input
/// geometry in `cfg` must match the images.
pub fn train_images(
    cfg: &ExperimentConfig,
    train: &ImageDataset,
    validation: Option<&ImageDataset>,
    dataset_tag: &str,
) -> Result<RunOutcome, ExperimentError> {
    cfg.validate()?;
    if (cfg.input.height, cfg.input.width) != (train.height, train.width) {
        return Err(ExperimentError::Config(format!(
            "input geometry {}x{} does not match {}x{} images",
            cfg.input.height, cfg.input.width, train.height, train.width
        )));
    }
    if distinct_labels(&train.labels) < 2 {
        return Err(ExperimentError::Data("training set needs at least two classes".into()));
    }
    let classes = train.labels.iter().max().map_or(0, |m| m + 1);
    let x = image_tensor(train)?;
    let val = validation.map(image_tensor).transpose()?;
    let mut rng = EngineRng::seed_from_u64(cfg.train.seed);
    let model = CnnModel::new(input_shape(cfg), &cfg.model.layers(classes), &mut rng)?;
    fit_encoded(
        model,
        &x,
        &train.labels,
        val.as_ref().zip(validation).map(|(x, v)| (x, &v.labels[..])),
        cfg,
        dataset_tag,
        0,
    )
}

fn check_geometry(model: &CnnModel<f32>, cfg: &ExperimentConfig) -> Result<(), ExperimentError> {
    let want = input_shape(cfg);
    if model.input_shape() != want {
        let have = model.input_shape();
        return Err(ExperimentError::Config(format!(
            "model expects {}x{}x{} inputs but the configuration produces {}x{}x{}",
            have.channels, have.height, have.width, want.channels, want.height, want.width
        )));
    }
    Ok(())
}

/// Scores every record; records with an empty image are scored on a blank
/// image and counted in `empty_records`.
pub fn evaluate(
    model: &CnnModel<f32>,
    ds: &PairDataset,
    table: &EmbeddingTable,
    cfg: &ExperimentConfig,
) -> Result<MetricsReport, ExperimentError> {
    check_geometry(model, cfg)?;
    if let Some(r) = ds.records.iter().find(|r| r.label >= model.num_classes()) {
        return Err(ExperimentError::Data(format!(
            "label {} in group {} exceeds the model's {} classes",
            r.label,
            r.group_id,
            model.num_classes()
        )));
    }
    let enc = encode_dataset(ds, table, cfg, EmptyPolicy::ZeroImage)?;
    if enc.is_empty() {
        return Err(ExperimentError::Data("evaluation set is empty".into()));
    }
    let probs = predict(model, &enc.x)?;
    let mut report = MetricsReport::from_probabilities(probs.data(), model.num_classes(), &enc.labels, &enc.groups);
    report.empty_records = enc.empty_records.len();
    Ok(report)
}

/// Accuracy-centred report for an image dataset; there are no groups, so
/// MRR is absent.
pub fn evaluate_images(model: &CnnModel<f32>, images: &ImageDataset) -> Result<MetricsReport, ExperimentError> {
    let x = image_tensor(images)?;
    let probs = predict(model, &x)?;
    let groups = vec![String::new(); images.len()];
    let mut report = MetricsReport::from_probabilities(probs.data(), model.num_classes(), &images.labels, &groups);
    report.mrr = None;
    report.groups.clear();
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct TransferOutcome {
    pub run: RunOutcome,
    pub metrics: MetricsReport,
}

/// Takes a trained network, gives it a fresh classifier head for the new
/// task and fine-tunes it. With `Freeze::ConvFrozen` only the dense layers
/// learn.
pub fn transfer_finetune(
    source: &Checkpoint,
    train: &PairDataset,
    test: &PairDataset,
    table: &EmbeddingTable,
    cfg: &ExperimentConfig,
    dataset_tag: &str,
) -> Result<TransferOutcome, ExperimentError> {
    cfg.validate()?;
    check_geometry(&source.model, cfg)?;
    let enc = encode_training(train, table, cfg)?;
    let mut model = source.model.clone();
    let mut rng = EngineRng::seed_from_u64(cfg.train.seed);
    model.replace_head(train.num_classes(), &mut rng)?;
    let freeze = cfg.transfer.as_ref().map_or(Freeze::ConvFrozen, |t| t.freeze);
    if freeze == Freeze::ConvFrozen {
        model.freeze_convolutions();
    }
    let run = fit_encoded(
        model,
        &enc.x,
        &enc.labels,
        None,
        cfg,
        dataset_tag,
        enc.empty_records.len(),
    )?;
    let metrics = evaluate(&run.checkpoint.model, test, table, cfg)?;
    Ok(TransferOutcome { run, metrics })
}
