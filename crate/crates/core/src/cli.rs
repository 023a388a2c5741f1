//! The `aggrnet` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or format error, 3 numerical
//! failure (non-finite loss).

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::embeddings::{
    build_aggression_embeddings, build_trigram_embeddings, compose_glove_plus_plus, load_pretrained,
    train_skipgram, EmbeddingMatrix, EmbeddingSource, SkipgramConfig,
};
use crate::error::{Error, Result};
use crate::io::{
    load_dataset, load_embeddings, load_model, merge_datasets, save_embeddings, save_model, write_atomic,
    write_dataset, Dataset, LabeledExample,
};
use crate::model::{build_model, preset, FeatureSource, Preset};
use crate::preprocess::{build_vocab, CleanText, Cleaner, EmojiRanges, Stopwords, TextPipeline, Vocab};
use crate::rng::Rng;
use crate::train::{
    encode_dataset, evaluate, export_features, predict, stratified_holdout, train, TrainConfig,
};

pub const DEFAULT_SEED: u64 = 42;
pub const TRAIN_LOG_FILE: &str = "train_log.tsv";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "aggrnet", version, about = "Capsule-network and CNN ensembles for aggression classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct TextArtifacts {
    /// Stopword list, one word per line (default: bundled English list).
    #[arg(long)]
    stopwords: Option<PathBuf>,
    /// Emoji code-point ranges, `START-END` hex per line (default: bundled).
    #[arg(long)]
    emoji_ranges: Option<PathBuf>,
}

impl TextArtifacts {
    fn cleaner(&self) -> Result<Cleaner> {
        let stopwords = match &self.stopwords {
            Some(p) => Stopwords::from_file(p)?,
            None => Stopwords::english(),
        };
        let emoji = match &self.emoji_ranges {
            Some(p) => EmojiRanges::from_file(p)?,
            None => EmojiRanges::bundled(),
        };
        Ok(Cleaner::new(stopwords, emoji))
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum EmbeddingMode {
    #[value(name = "glove++")]
    GlovePlusPlus,
    Aggression,
    Trigram,
}

impl From<EmbeddingMode> for EmbeddingSource {
    fn from(m: EmbeddingMode) -> Self {
        match m {
            EmbeddingMode::GlovePlusPlus => EmbeddingSource::GlovePlusPlus,
            EmbeddingMode::Aggression => EmbeddingSource::Aggression,
            EmbeddingMode::Trigram => EmbeddingSource::Trigram,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Clean the text column of a dataset CSV.
    Preprocess {
        /// Input CSV (`id,text,label`).
        #[arg(long = "in")]
        input: PathBuf,
        /// Output CSV with cleaned, space-joined tokens.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        text: TextArtifacts,
    },
    /// Train one embedding table and save it with its vocabulary.
    TrainEmbeddings {
        #[arg(long, value_enum)]
        mode: EmbeddingMode,
        /// Labelled corpus CSV.
        #[arg(long)]
        corpus: PathBuf,
        /// Extra corpus CSV merged after `--corpus`.
        #[arg(long)]
        augmented: Option<PathBuf>,
        /// Pretrained GloVe text file (glove++ only).
        #[arg(long, required_if_eq("mode", "glove++"))]
        glove: Option<PathBuf>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Vector width; glove++ uses the pretrained width instead.
        #[arg(long, default_value_t = 100)]
        dim: usize,
        #[arg(long, default_value_t = 5)]
        epochs: usize,
        #[arg(long, default_value_t = 1)]
        min_count: usize,
        #[arg(long, default_value_t = 5)]
        window: usize,
        #[arg(long, default_value_t = 5)]
        negatives: usize,
        #[command(flatten)]
        text: TextArtifacts,
    },
    /// Train an ensemble preset.
    Train {
        #[arg(long)]
        preset: Preset,
        /// Training CSV.
        #[arg(long)]
        train: PathBuf,
        /// Augmented CSV appended to the training data.
        #[arg(long)]
        augmented: Option<PathBuf>,
        /// Directory with one subdirectory per embedding source
        /// (`glove++`, `aggression`, `trigram`).
        #[arg(long)]
        embeddings_dir: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 10)]
        epochs: usize,
        #[arg(long, default_value_t = 64)]
        batch_size: usize,
        #[arg(long, default_value_t = 1e-3)]
        lr: f64,
        #[arg(long)]
        seed: Option<u64>,
        /// Dev CSV scored after every epoch.
        #[arg(long, conflicts_with = "holdout")]
        dev: Option<PathBuf>,
        /// Hold out a stratified 10% of the training data as the dev set.
        #[arg(long)]
        holdout: bool,
        /// Stop after this many epochs without dev improvement and keep the
        /// best weights. Requires a dev set (`--dev` or `--holdout`, which
        /// is implied when neither is given).
        #[arg(long)]
        patience: Option<usize>,
        /// Override the convolution filter count of every subnetwork.
        #[arg(long)]
        filters: Option<usize>,
        /// Disable per-epoch shuffling.
        #[arg(long)]
        no_shuffle: bool,
        #[command(flatten)]
        text: TextArtifacts,
    },
    /// Score a model on a labelled CSV.
    Eval {
        #[arg(long)]
        model_dir: PathBuf,
        #[arg(long)]
        test: PathBuf,
        /// Where to write the full report (TOML).
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Classify raw text.
    Predict {
        #[arg(long)]
        model_dir: PathBuf,
        /// A single text.
        #[arg(long, conflicts_with = "file", required_unless_present = "file")]
        text: Option<String>,
        /// A file with one text per line.
        #[arg(long)]
        file: Option<PathBuf>,
    },
    /// Write per-example activations as TSV.
    ExportFeatures {
        #[arg(long)]
        model_dir: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// `1..N` for one subnetwork, `merged`, or `head`.
        #[arg(long)]
        subnetwork: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Numerical(_) => EXIT_NUMERICAL,
        Error::Config(_) => EXIT_USAGE,
        _ => EXIT_DATA,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_with(args: impl IntoIterator<Item = impl Into<OsString> + Clone>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run() -> i32 {
    run_with(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr())
}

fn announce_seed(seed: Option<u64>, err: &mut dyn Write) -> u64 {
    let seed = seed.unwrap_or(DEFAULT_SEED);
    let _ = writeln!(err, "seed: {seed}");
    seed
}

fn load_corpus(main: &Path, extra: Option<&Path>) -> Result<Dataset> {
    let data = load_dataset(main)?;
    match extra {
        Some(p) => Ok(merge_datasets(&data, &load_dataset(p)?)),
        None => Ok(data),
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes())
        .map_err(|e| Error::io(Path::new("<stdout>"), e))
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    match command {
        Command::Preprocess { input, out: dest, text } => {
            let cleaner = text.cleaner()?;
            let data = load_dataset(&input)?;
            let cleaned = Dataset::new(
                data.iter()
                    .map(|e| LabeledExample {
                        text: cleaner.clean(&e.text).joined(),
                        ..e.clone()
                    })
                    .collect(),
            );
            write_dataset(&dest, &cleaned)?;
            emit(out, &format!("wrote {} examples to {}\n", cleaned.len(), dest.display()))
        }
        Command::TrainEmbeddings {
            mode,
            corpus,
            augmented,
            glove,
            out: dest,
            seed,
            dim,
            epochs,
            min_count,
            window,
            negatives,
            text,
        } => {
            let seed = announce_seed(seed, err);
            let cleaner = text.cleaner()?;
            let data = load_corpus(&corpus, augmented.as_deref())?;
            let mut cfg = SkipgramConfig {
                dim,
                window,
                negative_samples: negatives,
                epochs,
                learning_rate: SkipgramConfig::default().learning_rate,
                min_count,
                seed,
            };
            let cleaned: Vec<CleanText> = data.iter().map(|e| cleaner.clean(&e.text)).collect();
            let (matrix, vocab) = match mode {
                EmbeddingMode::GlovePlusPlus => {
                    let glove = glove.ok_or_else(|| Error::Config("--glove is required for glove++".into()))?;
                    let vocab = build_vocab(&cleaned, min_count);
                    let pretrained = load_pretrained(&glove, &vocab)?;
                    if let Some(d) = pretrained.dim {
                        cfg.dim = d;
                    }
                    let sentences: Vec<Vec<String>> = cleaned.into_iter().map(|c| c.tokens).collect();
                    let trained = train_skipgram(&sentences, &cfg)?;
                    log::info!(
                        "glove++: {} of {} tokens pretrained",
                        pretrained.len(),
                        vocab.len().saturating_sub(2)
                    );
                    (compose_glove_plus_plus(&vocab, &pretrained, &trained.vectors)?, vocab)
                }
                EmbeddingMode::Aggression => {
                    let vocab = build_vocab(&cleaned, min_count);
                    (build_aggression_embeddings(&data, &cleaner, &vocab, &cfg)?, vocab)
                }
                EmbeddingMode::Trigram => {
                    let (vocab, m) = build_trigram_embeddings(&cleaned, &cfg)?;
                    (m, vocab)
                }
            };
            save_embeddings(&matrix, &vocab, &dest)?;
            emit(
                out,
                &format!(
                    "{}: {} x {} written to {}\n",
                    EmbeddingSource::from(mode),
                    matrix.rows(),
                    matrix.dim(),
                    dest.display()
                ),
            )
        }
        Command::Train {
            preset: which,
            train: train_path,
            augmented,
            embeddings_dir,
            out_dir,
            epochs,
            batch_size,
            lr,
            seed,
            dev,
            holdout,
            patience,
            filters,
            no_shuffle,
            text,
        } => {
            let seed = announce_seed(seed, err);
            let mut config = preset(which).with_seed(seed);
            if let Some(f) = filters {
                config = config.with_filters(f);
            }
            config.validate()?;

            let mut tables: BTreeMap<EmbeddingSource, EmbeddingMatrix> = BTreeMap::new();
            let mut word_vocab: Option<Vocab> = None;
            let mut trigram_vocab: Option<Vocab> = None;
            for source in config.sources() {
                let dir = embeddings_dir.join(source.as_str());
                let (matrix, vocab) = load_embeddings(&dir)?;
                if matrix.source != source {
                    return Err(Error::IncompatibleArtifacts(format!(
                        "{} holds {} embeddings, expected {source}",
                        dir.display(),
                        matrix.source
                    )));
                }
                let slot = match source {
                    EmbeddingSource::Trigram => &mut trigram_vocab,
                    _ => &mut word_vocab,
                };
                match slot {
                    Some(existing) if *existing != vocab => {
                        return Err(Error::IncompatibleArtifacts(format!(
                            "{} uses a different word vocabulary from the other word embeddings",
                            dir.display()
                        )))
                    }
                    Some(_) => {}
                    None => *slot = Some(vocab),
                }
                tables.insert(source, matrix);
            }
            let word_vocab = word_vocab.ok_or_else(|| {
                Error::Config(format!("preset {which} has no word-level embedding source"))
            })?;
            let pipeline = TextPipeline::new(text.cleaner()?, word_vocab, trigram_vocab).with_max_len(config.max_len);

            let data = load_corpus(&train_path, augmented.as_deref())?;
            let counts = data.class_counts();
            log::info!(
                "training on {} examples (CAG {}, NAG {}, OAG {})",
                data.len(),
                counts[0],
                counts[1],
                counts[2]
            );
            let mut examples = encode_dataset(&data, &pipeline);
            let dev_set = if let Some(p) = &dev {
                Some(encode_dataset(&load_dataset(p)?, &pipeline))
            } else if holdout || patience.is_some() {
                let (t, d) = stratified_holdout(&examples, |e| e.label, crate::train::trainer::HOLDOUT_FRACTION, seed);
                if t.is_empty() || d.is_empty() {
                    return Err(Error::InsufficientData("too few examples to hold out a dev set".into()));
                }
                examples = t;
                Some(d)
            } else {
                None
            };

            let cfg = TrainConfig {
                batch_size,
                epochs,
                lr,
                seed,
                shuffle: !no_shuffle,
                early_stop_patience: patience,
                ..TrainConfig::default()
            };
            let mut model = build_model(&config, &tables, &mut Rng::new(seed))?;
            let log = train(&mut model, &examples, &cfg, dev_set.as_deref())?;
            model.artifact_hashes = Some(pipeline.hashes());
            save_model(&model, &pipeline, &out_dir)?;
            write_atomic(&out_dir.join(TRAIN_LOG_FILE), log.to_tsv().as_bytes())?;
            let last = log.epochs.last().expect("at least one epoch");
            emit(
                out,
                &format!(
                    "trained {which} for {} epochs, final loss {:.6}; model written to {}\n",
                    log.epochs.len(),
                    last.loss,
                    out_dir.display()
                ),
            )
        }
        Command::Eval { model_dir, test, report } => {
            let (model, pipeline) = load_model(&model_dir)?;
            let data = load_dataset(&test)?;
            let r = evaluate(&model, &pipeline, &data)?;
            if let Some(path) = report {
                write_atomic(&path, r.to_toml()?.as_bytes())?;
            }
            emit(out, &format!("weighted_f1={}\n", r.weighted_f1))
        }
        Command::Predict { model_dir, text, file } => {
            let (model, pipeline) = load_model(&model_dir)?;
            let texts: Vec<String> = match (text, file) {
                (Some(t), _) => vec![t],
                (None, Some(p)) => std::fs::read_to_string(&p)
                    .map_err(|e| Error::io(&p, e))?
                    .lines()
                    .map(str::to_string)
                    .collect(),
                (None, None) => return Err(Error::Config("one of --text or --file is required".into())),
            };
            let mut lines = String::new();
            for p in predict(&model, &pipeline, &texts)? {
                let [c, n, o] = p.probabilities;
                lines.push_str(&format!("{}\t{c}\t{n}\t{o}\n", p.class));
            }
            emit(out, &lines)
        }
        Command::ExportFeatures {
            model_dir,
            data,
            subnetwork,
            out: dest,
        } => {
            let (model, pipeline) = load_model(&model_dir)?;
            let which = parse_feature_source(&subnetwork, model.subnetworks().len())?;
            let table = export_features(&model, &pipeline, &load_dataset(&data)?, which)?;
            write_atomic(&dest, table.to_tsv().as_bytes())?;
            emit(
                out,
                &format!("{} rows x {} features written to {}\n", table.rows.len(), table.width(), dest.display()),
            )
        }
    }
}

/// `1..=n` (1-based), `merged`, or `head`.
fn parse_feature_source(s: &str, n: usize) -> Result<FeatureSource> {
    match s.to_ascii_lowercase().as_str() {
        "merged" => Ok(FeatureSource::Merged),
        "head" => Ok(FeatureSource::Head),
        other => match other.parse::<usize>() {
            Ok(i) if (1..=n).contains(&i) => Ok(FeatureSource::Subnetwork(i - 1)),
            _ => Err(Error::InvalidInput(format!(
                "--subnetwork {s:?}: expected 1..={n}, merged or head"
            ))),
        },
    }
}
