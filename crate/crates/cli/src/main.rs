//! `d2i`: transform documents into D2I images, train and evaluate CNNs on
//! them, fine-tune pretrained networks and run the GloVe bound lab.

mod commands;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "d2i", version, about = "Document-to-image text classification toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write one PGM image per record of a pair TSV file
    Transform(TransformArgs),
    /// Train a network on D2I images of a pair TSV file, or on MNIST
    Train(TrainArgs),
    /// Score a checkpoint on a pair TSV file or on MNIST
    Eval(EvalArgs),
    /// Fine-tune a pretrained checkpoint on a new text task
    Transfer(TransferArgs),
    /// Train a miniature GloVe on a seeded corpus and check the LLE bound
    VerifyBound(BoundArgs),
    /// Export the image of a single record or text as PGM
    ExportImage(ExportArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BoundaryArg {
    Zero,
    Circular,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum NormalizeArg {
    None,
    Standardize,
    Cosine,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PairArg {
    Concat,
    Single,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FreezeArg {
    Conv,
    None,
}

/// Flags that override keys of the experiment configuration.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// JSON experiment configuration, or the manifest of an earlier run
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Half-window size, d2i.k (default 25)
    #[arg(long, value_name = "INT")]
    pub k: Option<usize>,
    /// d2i.boundary
    #[arg(long, value_enum)]
    pub boundary: Option<BoundaryArg>,
    /// d2i.normalize
    #[arg(long, value_enum)]
    pub normalize: Option<NormalizeArg>,
    /// pair_encoding
    #[arg(long, value_enum)]
    pub pair: Option<PairArg>,
    /// train.seed
    #[arg(long, value_name = "INT")]
    pub seed: Option<u64>,
    /// train.epochs
    #[arg(long, value_name = "INT")]
    pub epochs: Option<usize>,
    /// Any other key, e.g. `--set train.batch_size=64`; may repeat
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub sets: Vec<String>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct TextArgs {
    /// Embedding file: one word followed by its vector per line
    #[arg(long, value_name = "PATH")]
    pub embeddings: Option<PathBuf>,
    /// Pair TSV: group_id, label, text_a and an optional text_b
    #[arg(long, value_name = "PATH")]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct MnistArgs {
    /// IDX image file; switches the command to image mode
    #[arg(long, value_name = "PATH", requires = "mnist_labels")]
    pub mnist_images: Option<PathBuf>,
    /// IDX label file
    #[arg(long, value_name = "PATH", requires = "mnist_images")]
    pub mnist_labels: Option<PathBuf>,
    /// Use only the first N images
    #[arg(long, value_name = "N")]
    pub limit: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    #[command(flatten)]
    pub text: TextArgs,
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Also resize every image to input.height x input.width
    #[arg(long)]
    pub resized: bool,
    #[arg(long, value_name = "PATH")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub text: TextArgs,
    #[command(flatten)]
    pub mnist: MnistArgs,
    /// Validation TSV; the best epoch on it is kept
    #[arg(long, value_name = "PATH")]
    pub validation: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long, value_name = "PATH")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long, value_name = "PATH")]
    pub checkpoint: PathBuf,
    #[command(flatten)]
    pub text: TextArgs,
    #[command(flatten)]
    pub mnist: MnistArgs,
    /// Defaults to the configuration stored in the checkpoint
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long, value_name = "PATH")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct TransferArgs {
    /// Source checkpoint, transfer.checkpoint
    #[arg(long, value_name = "PATH")]
    pub checkpoint: Option<PathBuf>,
    #[command(flatten)]
    pub text: TextArgs,
    /// Held-out TSV scored after fine-tuning
    #[arg(long, value_name = "PATH")]
    pub test: PathBuf,
    /// transfer.freeze
    #[arg(long, value_enum)]
    pub freeze: Option<FreezeArg>,
    /// Starts from k = 14 on a 28 x 28 input
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long, value_name = "PATH")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    /// JSON bound-lab configuration, or the manifest of an earlier run
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// corpus.vocab
    #[arg(long, value_name = "INT")]
    pub vocab: Option<usize>,
    /// corpus.tokens
    #[arg(long, value_name = "INT")]
    pub tokens: Option<usize>,
    /// window
    #[arg(long, value_name = "INT")]
    pub window: Option<usize>,
    /// corpus.seed and glove.seed
    #[arg(long, value_name = "INT")]
    pub seed: Option<u64>,
    /// glove.dim
    #[arg(long, value_name = "INT")]
    pub dim: Option<usize>,
    /// glove.epochs
    #[arg(long, value_name = "INT")]
    pub epochs: Option<usize>,
    /// glove.lr
    #[arg(long, value_name = "FLOAT")]
    pub lr: Option<f64>,
    /// Write the reports here; without it only the summary is printed
    #[arg(long, value_name = "PATH")]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[command(flatten)]
    pub text: TextArgs,
    /// Record index within --input
    #[arg(long, value_name = "N", conflicts_with = "raw_text")]
    pub record: Option<usize>,
    /// Text to transform instead of a record
    #[arg(long = "text", value_name = "TEXT")]
    pub raw_text: Option<String>,
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Resize to input.height x input.width, as the network sees it
    #[arg(long)]
    pub resized: bool,
    #[arg(long, value_name = "PATH")]
    pub out_dir: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            if e.kind() == ErrorKind::UnknownArgument {
                eprintln!("\n{}", Cli::command().render_long_help());
            }
            return ExitCode::from(u8::from(usage));
        }
    };
    let result = match cli.command {
        Command::Transform(a) => commands::transform(a),
        Command::Train(a) => commands::train(a),
        Command::Eval(a) => commands::eval(a),
        Command::Transfer(a) => commands::transfer(a),
        Command::VerifyBound(a) => commands::verify_bound(a),
        Command::ExportImage(a) => commands::export_image(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
