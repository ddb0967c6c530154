use d2i_core::corpus::{EmbeddingTable, PairDataset, PairRecord};
use d2i_core::experiment::{
    evaluate, synthetic_corpus, train_experiment, train_test_split, transfer_finetune, ExperimentConfig,
    ExperimentError, Freeze, SyntheticCorpusConfig, TransferConfig,
};
use d2i_core::nn::{Checkpoint, LayerSpec, OptimizerConfig};

fn small_config() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.d2i.k = 5;
    cfg.input.height = 16;
    cfg.input.width = 10;
    cfg.model.conv1_channels = 8;
    cfg.model.conv2_channels = 16;
    cfg.model.dense_units = 64;
    cfg.train.epochs = 8;
    cfg
}

fn small_corpus(documents: usize) -> (EmbeddingTable, PairDataset) {
    let c = synthetic_corpus(&SyntheticCorpusConfig {
        documents,
        ..SyntheticCorpusConfig::default()
    });
    (c.table, c.dataset)
}

fn conv_params(ck: &Checkpoint) -> Vec<(Vec<u32>, Vec<u32>)> {
    let specs = ck.model.specs();
    (0..specs.len())
        .filter(|&i| matches!(specs[i], LayerSpec::Conv2d { .. }))
        .map(|i| {
            let p = ck.model.params(i).unwrap();
            (
                p.weight.iter().map(|v| v.to_bits()).collect(),
                p.bias.iter().map(|v| v.to_bits()).collect(),
            )
        })
        .collect()
}

#[test]
fn separable_corpus_is_learned() {
    let (table, ds) = small_corpus(400);
    let mut cfg = ExperimentConfig::default();
    cfg.input.height = 32;
    cfg.input.width = 32;
    let out = train_experiment(&cfg, &ds, &table, None, "synthetic").unwrap();
    let last = out.summary.history.last().unwrap();
    assert!(last.train_accuracy >= 0.99, "{:?}", out.summary.history);
    let report = evaluate(&out.checkpoint.model, &ds, &table, &cfg).unwrap();
    assert!(report.accuracy >= 0.99, "{}", report.to_text());
}

#[test]
fn same_seed_same_bytes() {
    let (table, ds) = small_corpus(120);
    let mut cfg = small_config();
    cfg.train.epochs = 2;
    let a = train_experiment(&cfg, &ds, &table, None, "t").unwrap();
    let b = train_experiment(&cfg, &ds, &table, None, "t").unwrap();
    assert_eq!(a.summary.history, b.summary.history);
    assert_eq!(a.checkpoint.to_bytes(), b.checkpoint.to_bytes());
    cfg.train.seed = 1;
    let c = train_experiment(&cfg, &ds, &table, None, "t").unwrap();
    assert_ne!(a.checkpoint.to_bytes(), c.checkpoint.to_bytes());
}

#[test]
fn zero_learning_rate_changes_nothing() {
    let (table, ds) = small_corpus(60);
    let mut cfg = small_config();
    cfg.model.dropout = 0.0;
    cfg.train.epochs = 2;
    cfg.train.batch_size = 60;
    cfg.train.optimizer = OptimizerConfig::adam(0.0);
    let out = train_experiment(&cfg, &ds, &table, None, "t").unwrap();
    cfg.train.epochs = 0;
    let init = train_experiment(&cfg, &ds, &table, None, "t").unwrap();
    for i in 0..out.checkpoint.model.num_layers() {
        assert_eq!(out.checkpoint.model.params(i), init.checkpoint.model.params(i));
    }
    let h = &out.summary.history;
    // batches are reshuffled, so only the summation order differs
    assert!((h[0].loss - h[1].loss).abs() <= 1e-12 * h[0].loss);
}

#[test]
fn validation_keeps_best_epoch_and_config_is_embedded() {
    let (table, ds) = small_corpus(200);
    let (train, val) = train_test_split(&ds, 0.25, 2);
    let mut cfg = small_config();
    cfg.train.epochs = 3;
    let out = train_experiment(&cfg, &train, &table, Some(&val), "syn").unwrap();
    let best = out.summary.best_epoch.unwrap();
    let best_acc = out.summary.history[best - 1].validation_accuracy.unwrap();
    assert!(out
        .summary
        .history
        .iter()
        .all(|r| r.validation_accuracy.unwrap() <= best_acc));
    let meta = &out.checkpoint.meta;
    assert_eq!(meta.dataset_tag, "syn");
    assert_eq!(meta.config.as_ref().unwrap()["d2i"]["k"], 5);
}

#[test]
fn data_errors() {
    let table = EmbeddingTable::from_entries(2, [("a", vec![1.0, 0.0])]).unwrap();
    let rec = |label, text: &str| PairRecord {
        group_id: "g".into(),
        label,
        text_a: text.into(),
        text_b: None,
    };
    let cfg = small_config();
    let unknown = PairDataset {
        records: vec![rec(0, "x y"), rec(1, "z")],
    };
    assert!(matches!(
        train_experiment(&cfg, &unknown, &table, None, "t"),
        Err(ExperimentError::Data(_))
    ));
    let one_class = PairDataset {
        records: vec![rec(0, "a a"), rec(0, "a")],
    };
    assert!(matches!(
        train_experiment(&cfg, &one_class, &table, None, "t"),
        Err(ExperimentError::Data(_))
    ));
}

#[test]
fn transfer_freezes_convolutions() {
    let (table, ds) = small_corpus(160);
    let mut cfg = small_config();
    cfg.train.epochs = 1;
    let source = train_experiment(&cfg, &ds, &table, None, "source").unwrap().checkpoint;

    cfg.transfer = Some(TransferConfig::default());
    cfg.train.seed = 3;
    let (train, test) = train_test_split(&ds, 0.25, 5);
    let tuned = transfer_finetune(&source, &train, &test, &table, &cfg, "target").unwrap();
    assert_eq!(conv_params(&source), conv_params(&tuned.run.checkpoint));
    assert!(tuned.run.summary.frozen_params > 0);
    let dense = |ck: &Checkpoint| ck.model.params(6).unwrap().weight.clone();
    assert_ne!(dense(&source), dense(&tuned.run.checkpoint));

    cfg.transfer = Some(TransferConfig {
        freeze: Freeze::None,
        ..TransferConfig::default()
    });
    let free = transfer_finetune(&source, &train, &test, &table, &cfg, "target").unwrap();
    assert_eq!(free.run.summary.frozen_params, 0);
    assert_ne!(conv_params(&source), conv_params(&free.run.checkpoint));

    let mut zero = cfg.clone();
    zero.train.epochs = 0;
    let untouched = transfer_finetune(&source, &train, &test, &table, &zero, "target").unwrap();
    assert_eq!(conv_params(&source), conv_params(&untouched.run.checkpoint));

    let mut other = cfg.clone();
    other.input.height = 12;
    assert!(matches!(
        transfer_finetune(&source, &train, &test, &table, &other, "target"),
        Err(ExperimentError::Config(_))
    ));
}
