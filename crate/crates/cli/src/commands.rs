use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use d2i_core::corpus::{
    load_embeddings, load_mnist_files, load_pair_tsv, EmbeddingTable, ImageDataset, PairDataset, PairRecord,
};
use d2i_core::experiment::{
    encode_example, evaluate, evaluate_images, record_id, train_experiment, train_images, transfer_finetune,
    ExperimentConfig, ExperimentError, RunOutcome,
};
use d2i_core::glove::{run_bound_lab, BoundLabConfig};
use d2i_core::nn::Checkpoint;
use d2i_core::transform::{export_pgm, resize, D2IImage};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::error::CliError;
use crate::manifest::{Manifest, Output, TOOL};
use crate::{
    BoundArgs, BoundaryArg, ConfigArgs, EvalArgs, ExportArgs, FreezeArg, MnistArgs, NormalizeArg, PairArg, TextArgs,
    TrainArgs, TransferArgs, TransformArgs,
};

const CHECKPOINT_FILE: &str = "checkpoint.d2i";

/// Reads a JSON document; the manifest of an earlier run yields its
/// `config` section.
fn read_config_json(path: &Path) -> Result<Value, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    if value.get("tool").and_then(Value::as_str) == Some(TOOL) {
        return value
            .get("config")
            .cloned()
            .ok_or_else(|| CliError::Usage(format!("{}: manifest has no config", path.display())));
    }
    Ok(value)
}

fn from_value<T: DeserializeOwned>(value: Value, origin: &str) -> Result<T, CliError> {
    serde_json::from_value(value).map_err(|e| CliError::Usage(format!("{origin}: {e}")))
}

fn flag_overrides(args: &ConfigArgs) -> Vec<(&'static str, String)> {
    let mut out = Vec::new();
    if let Some(k) = args.k {
        out.push(("d2i.k", k.to_string()));
    }
    if let Some(b) = args.boundary {
        let v = match b {
            BoundaryArg::Zero => "zero_pad",
            BoundaryArg::Circular => "circular",
        };
        out.push(("d2i.boundary", v.to_string()));
    }
    if let Some(n) = args.normalize {
        let v = match n {
            NormalizeArg::None => "none",
            NormalizeArg::Standardize => "per_image_standardize",
            NormalizeArg::Cosine => "cosine",
        };
        out.push(("d2i.normalize", v.to_string()));
    }
    if let Some(p) = args.pair {
        let v = match p {
            PairArg::Concat => "concat",
            PairArg::Single => "single",
        };
        out.push(("pair_encoding", v.to_string()));
    }
    if let Some(s) = args.seed {
        out.push(("train.seed", s.to_string()));
    }
    if let Some(e) = args.epochs {
        out.push(("train.epochs", e.to_string()));
    }
    out
}

fn apply_sets(cfg: &mut ExperimentConfig, sets: &[String]) -> Result<(), CliError> {
    for s in sets {
        let (key, value) = s
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got `{s}`")))?;
        cfg.set(key.trim(), value.trim())?;
    }
    Ok(())
}

/// Base configuration, then `--config`, then the dedicated flags, then
/// `--set` entries.
fn resolve_config(base: ExperimentConfig, args: &ConfigArgs) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &args.config {
        Some(path) => {
            let cfg: ExperimentConfig = from_value(read_config_json(path)?, &path.display().to_string())?;
            cfg.validate()?;
            cfg
        }
        None => base,
    };
    for (key, value) in flag_overrides(args) {
        cfg.set(key, &value)?;
    }
    apply_sets(&mut cfg, &args.sets)?;
    Ok(cfg)
}

fn config_value(cfg: &impl Serialize) -> Value {
    serde_json::to_value(cfg).expect("config serializes")
}

fn required<'a>(path: &'a Option<PathBuf>, flag: &str) -> Result<&'a PathBuf, CliError> {
    path.as_ref()
        .ok_or_else(|| CliError::Usage(format!("{flag} is required")))
}

struct TextData {
    table: EmbeddingTable,
    dataset: PairDataset,
    tag: String,
}

fn file_tag(path: &Path) -> String {
    path.file_name()
        .map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
}

fn load_text(args: &TextArgs, manifest: &mut Manifest) -> Result<TextData, CliError> {
    let emb = required(&args.embeddings, "--embeddings")?;
    let input = required(&args.input, "--input")?;
    manifest.input("embeddings", emb)?;
    manifest.input("input", input)?;
    Ok(TextData {
        table: load_embeddings(emb)?,
        dataset: load_pair_tsv(input)?,
        tag: file_tag(input),
    })
}

fn load_images(args: &MnistArgs, manifest: &mut Manifest) -> Result<Option<(ImageDataset, String)>, CliError> {
    let (Some(images), Some(labels)) = (&args.mnist_images, &args.mnist_labels) else {
        return Ok(None);
    };
    manifest.input("mnist_images", images)?;
    manifest.input("mnist_labels", labels)?;
    let mut data = load_mnist_files(images, labels)?;
    let mut tag = file_tag(images);
    if let Some(n) = args.limit {
        data = data.take(n);
        tag = format!("{tag}[..{n}]");
    }
    Ok(Some((data, tag)))
}

/// Writes the checkpoint and run summary, then prints one line per epoch.
fn write_run(out: &mut Output, run: &RunOutcome) -> Result<(), CliError> {
    out.write(CHECKPOINT_FILE, &run.checkpoint.to_bytes())?;
    out.write_json("history.json", &run.summary)?;
    for r in &run.summary.history {
        let val = r
            .validation_accuracy
            .map_or_else(String::new, |v| format!("  validation accuracy {v:.4}"));
        println!(
            "epoch {:>3}  loss {:.5}  train accuracy {:.4}{val}",
            r.epoch, r.loss, r.train_accuracy
        );
    }
    Ok(())
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn record_image(
    record: &PairRecord,
    index: usize,
    table: &EmbeddingTable,
    cfg: &ExperimentConfig,
    resized: bool,
) -> Result<Option<D2IImage>, CliError> {
    match encode_example(record, &record_id(index, record), table, &cfg.d2i, cfg.pair_encoding) {
        Ok(img) if resized => Ok(Some(resize(&img, cfg.input.height, cfg.input.width, cfg.input.resize)?)),
        Ok(img) => Ok(Some(img)),
        Err(ExperimentError::EmptyImage { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

pub fn transform(args: TransformArgs) -> Result<(), CliError> {
    let cfg = resolve_config(ExperimentConfig::default(), &args.config)?;
    let mut manifest = Manifest::new("transform", config_value(&cfg), cfg.train.seed);
    manifest.k = Some(cfg.d2i.k);
    let data = load_text(&args.text, &mut manifest)?;
    let mut out = Output::create(&args.out_dir)?;

    let mut index = String::from("record\tgroup\tlabel\tfile\trows\tcols\n");
    let mut empty = Vec::new();
    for (i, r) in data.dataset.records.iter().enumerate() {
        match record_image(r, i, &data.table, &cfg, args.resized)? {
            Some(img) => {
                let name = format!("{i:06}_{}.pgm", sanitize(&r.group_id));
                out.write(&name, &export_pgm(&img)?)?;
                let _ = writeln!(
                    index,
                    "{i}\t{}\t{}\t{name}\t{}\t{}",
                    r.group_id, r.label, img.rows, img.cols
                );
            }
            None => {
                let _ = writeln!(index, "{i}\t{}\t{}\t-\t0\t0", r.group_id, r.label);
                empty.push(i);
            }
        }
    }
    out.write("index.tsv", index.as_bytes())?;
    eprintln!(
        "k={}: wrote {} images, {} records had no known word",
        cfg.d2i.k,
        data.dataset.len() - empty.len(),
        empty.len()
    );
    manifest.note("records", data.dataset.len());
    manifest.note("empty_records", &empty);
    manifest.write(&out)?;
    Ok(())
}

pub fn train(args: TrainArgs) -> Result<(), CliError> {
    let mut cfg = resolve_config(ExperimentConfig::default(), &args.config)?;
    let mut manifest = Manifest::new("train", Value::Null, cfg.train.seed);
    let run = if let Some((images, tag)) = load_images(&args.mnist, &mut manifest)? {
        if args.text.input.is_some() || args.validation.is_some() {
            return Err(CliError::Usage(
                "--input/--validation cannot be combined with --mnist-images".into(),
            ));
        }
        cfg.input.height = images.height;
        cfg.input.width = images.width;
        manifest.config = config_value(&cfg);
        eprintln!(
            "training on {} images of {}x{}",
            images.len(),
            images.height,
            images.width
        );
        train_images(&cfg, &images, None, &tag)?
    } else {
        manifest.config = config_value(&cfg);
        manifest.k = Some(cfg.d2i.k);
        let data = load_text(&args.text, &mut manifest)?;
        let validation = match &args.validation {
            Some(p) => {
                manifest.input("validation", p)?;
                Some(load_pair_tsv(p)?)
            }
            None => None,
        };
        eprintln!("k={}: training on {} records", cfg.d2i.k, data.dataset.len());
        train_experiment(&cfg, &data.dataset, &data.table, validation.as_ref(), &data.tag)?
    };
    let mut out = Output::create(&args.out_dir)?;
    write_run(&mut out, &run)?;
    manifest.note("skipped_empty", run.summary.skipped_empty);
    manifest.note("best_epoch", run.summary.best_epoch);
    manifest.write(&out)?;
    Ok(())
}

fn load_checkpoint(path: &Path, manifest: &mut Manifest) -> Result<Checkpoint, CliError> {
    manifest.input("checkpoint", path)?;
    Ok(Checkpoint::load(path)?)
}

pub fn eval(args: EvalArgs) -> Result<(), CliError> {
    let mut manifest = Manifest::new("eval", Value::Null, 0);
    let ck = load_checkpoint(&args.checkpoint, &mut manifest)?;
    let base = match &ck.meta.config {
        Some(v) => from_value(v.clone(), "checkpoint configuration")?,
        None => ExperimentConfig::default(),
    };
    let cfg = resolve_config(base, &args.config)?;
    manifest.seed = cfg.train.seed;
    manifest.config = config_value(&cfg);

    let report = if let Some((images, _)) = load_images(&args.mnist, &mut manifest)? {
        evaluate_images(&ck.model, &images)?
    } else {
        manifest.k = Some(cfg.d2i.k);
        let data = load_text(&args.text, &mut manifest)?;
        evaluate(&ck.model, &data.dataset, &data.table, &cfg)?
    };
    let mut out = Output::create(&args.out_dir)?;
    out.write("metrics.json", (report.to_json() + "\n").as_bytes())?;
    out.write("metrics.txt", report.to_text().as_bytes())?;
    print!("{}", report.to_text());
    manifest.write(&out)?;
    Ok(())
}

pub fn transfer(args: TransferArgs) -> Result<(), CliError> {
    let mut cfg = resolve_config(ExperimentConfig::transfer_preset(), &args.config)?;
    if let Some(path) = &args.checkpoint {
        cfg.set(
            "transfer.checkpoint",
            &Value::String(path.display().to_string()).to_string(),
        )?;
    }
    if let Some(f) = args.freeze {
        let v = match f {
            FreezeArg::Conv => "conv_frozen",
            FreezeArg::None => "none",
        };
        cfg.set("transfer.freeze", v)?;
    }
    let source_path = cfg
        .transfer
        .as_ref()
        .and_then(|t| t.checkpoint.clone())
        .ok_or_else(|| CliError::Usage("--checkpoint (transfer.checkpoint) is required".into()))?;

    let mut manifest = Manifest::new("transfer", config_value(&cfg), cfg.train.seed);
    manifest.k = Some(cfg.d2i.k);
    let source = load_checkpoint(&source_path, &mut manifest)?;
    let data = load_text(&args.text, &mut manifest)?;
    manifest.input("test", &args.test)?;
    let test = load_pair_tsv(&args.test)?;

    eprintln!(
        "k={}: fine-tuning {} on {} records",
        cfg.d2i.k,
        source_path.display(),
        data.dataset.len()
    );
    let outcome = transfer_finetune(&source, &data.dataset, &test, &data.table, &cfg, &data.tag)?;
    let mut out = Output::create(&args.out_dir)?;
    write_run(&mut out, &outcome.run)?;
    out.write("metrics.json", (outcome.metrics.to_json() + "\n").as_bytes())?;
    out.write("metrics.txt", outcome.metrics.to_text().as_bytes())?;
    print!("{}", outcome.metrics.to_text());
    manifest.note("frozen_params", outcome.run.summary.frozen_params);
    manifest.note("trainable_params", outcome.run.summary.trainable_params);
    manifest.write(&out)?;
    Ok(())
}

pub fn verify_bound(args: BoundArgs) -> Result<(), CliError> {
    let mut cfg = match &args.config {
        Some(path) => from_value(read_config_json(path)?, &path.display().to_string())?,
        None => BoundLabConfig::default(),
    };
    if let Some(v) = args.vocab {
        cfg.corpus.vocab = v;
    }
    if let Some(t) = args.tokens {
        cfg.corpus.tokens = t;
    }
    if let Some(w) = args.window {
        cfg.window = w;
    }
    if let Some(s) = args.seed {
        cfg.corpus.seed = s;
        cfg.glove.seed = s;
    }
    if let Some(d) = args.dim {
        cfg.glove.dim = d;
    }
    if let Some(e) = args.epochs {
        cfg.glove.epochs = e;
    }
    if let Some(lr) = args.lr {
        cfg.glove.lr = lr;
    }
    let outcome = run_bound_lab(&cfg)?;
    let mut text = format!(
        "glove loss {:.6e} -> {:.6e} (reduction {:.4})\n",
        outcome.initial_loss, outcome.final_loss, outcome.loss_reduction
    );
    text.push_str(&outcome.report.to_text());
    if let Some(dir) = &args.out_dir {
        let mut out = Output::create(dir)?;
        out.write_json("report.json", &outcome)?;
        out.write("report.txt", text.as_bytes())?;
        let mut manifest = Manifest::new("verify-bound", config_value(&cfg), cfg.corpus.seed);
        manifest.note("loss_reduction", outcome.loss_reduction);
        manifest.write(&out)?;
    }
    let summary_end = text.find("\n\n").map_or(text.len(), |i| i + 1);
    print!("{}", &text[..summary_end]);
    Ok(())
}

pub fn export_image(args: ExportArgs) -> Result<(), CliError> {
    let cfg = resolve_config(ExperimentConfig::default(), &args.config)?;
    let mut manifest = Manifest::new("export-image", config_value(&cfg), cfg.train.seed);
    manifest.k = Some(cfg.d2i.k);
    let emb = required(&args.text.embeddings, "--embeddings")?;
    manifest.input("embeddings", emb)?;
    let table = load_embeddings(emb)?;
    let (record, index, name) = match (&args.raw_text, args.record) {
        (Some(t), _) => {
            manifest.note("text", t);
            let r = PairRecord {
                group_id: "text".into(),
                label: 0,
                text_a: t.clone(),
                text_b: None,
            };
            (r, 0, "text.pgm".to_string())
        }
        (None, rec) => {
            let input = required(&args.text.input, "--input or --text")?;
            manifest.input("input", input)?;
            let ds = load_pair_tsv(input)?;
            let i = rec.unwrap_or(0);
            let r = ds
                .records
                .get(i)
                .cloned()
                .ok_or_else(|| CliError::Usage(format!("--record {i} is out of range ({} records)", ds.len())))?;
            (r, i, format!("record-{i}.pgm"))
        }
    };
    let img = record_image(&record, index, &table, &cfg, args.resized)?.ok_or_else(|| {
        CliError::Data(format!(
            "record {} has no word in the embeddings, so its image is empty",
            record_id(index, &record)
        ))
    })?;
    let mut out = Output::create(&args.out_dir)?;
    let path = out.write(&name, &export_pgm(&img)?)?;
    println!("{} ({}x{})", path.display(), img.rows, img.cols);
    manifest.write(&out)?;
    Ok(())
}
