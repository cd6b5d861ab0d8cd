//! `mglab`: train SkipGram, FastText-style and morpheme embeddings and run the
//! evaluation battery over them.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use mglab_core::eval::{self, AnalogyDataset, SimilarityColumns, SimilarityDataset};
use mglab_core::tagger::{self, FrozenEmbeddings, TaggedCorpus, TaggerConfig, TaggerParams};
use mglab_core::xmap::{self, BilingualDictionary};
use mglab_core::{segment, train, EmbeddingModel, MorphLexicon, SegmentationStrategy, TextCorpus, TrainConfig};

#[derive(Parser, Debug)]
#[command(
    name = "mglab",
    version,
    about = "Subword and morpheme skip-gram embeddings with an evaluation battery"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train an embedding model and write an MGLAB1 checkpoint.
    Train(TrainArgs),
    /// Spearman correlation on a word-similarity dataset.
    EvalSim(EvalSimArgs),
    /// 3CosAdd accuracy on a Google- or BATS-format analogy dataset.
    EvalAnalogy(EvalAnalogyArgs),
    /// Supervised cross-lingual mapping with precision@k.
    Map(MapArgs),
    /// Train a window tagger over frozen embeddings.
    TagTrain(TagTrainArgs),
    /// Token accuracy of a trained tagger.
    TagEval(TagEvalArgs),
    /// Similarity and analogy scores of several models in one table.
    Compare(CompareArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ModelKind {
    Sg,
    Ft,
    Morph,
}

#[derive(Args, Debug, Serialize)]
struct TrainArgs {
    #[arg(long, value_enum)]
    model: ModelKind,
    /// Corpus files, read in order.
    #[arg(long, required = true, num_args = 1..)]
    corpus: Vec<PathBuf>,
    /// Morpheme lexicon (`word<TAB>morph1 morph2 ...`), required for morph.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    #[arg(long, default_value_t = segment::DEFAULT_MIN_N)]
    min_n: usize,
    #[arg(long, default_value_t = segment::DEFAULT_MAX_N)]
    max_n: usize,
    #[arg(long, default_value_t = segment::DEFAULT_BUCKETS)]
    buckets: u64,
    #[arg(long, default_value_t = 300)]
    dim: usize,
    #[arg(long, default_value_t = 5)]
    window: usize,
    #[arg(long, default_value_t = 5)]
    negatives: usize,
    #[arg(long, default_value_t = 5)]
    epochs: usize,
    #[arg(long, default_value_t = 0.05)]
    lr: f64,
    #[arg(long, default_value_t = 1e-4)]
    subsample: f64,
    #[arg(long, default_value_t = 5)]
    min_count: u64,
    #[arg(long, default_value_t = 100_000)]
    max_vocab: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value_t = train::DEFAULT_TABLE_LEN)]
    table_len: usize,
    #[arg(long, default_value_t = 100_000)]
    log_every: u64,
    /// Continue training this checkpoint instead of starting fresh.
    #[arg(long)]
    resume: Option<PathBuf>,
    /// Checkpoint output path.
    #[arg(long)]
    out: PathBuf,
    /// Also export composed vectors in word2vec text format.
    #[arg(long)]
    vectors: Option<PathBuf>,
    /// Also dump the vocabulary as `word<TAB>count` lines.
    #[arg(long)]
    vocab_out: Option<PathBuf>,
    /// Training report (JSON).
    #[arg(long)]
    report: Option<PathBuf>,
}

impl TrainArgs {
    fn train_config(&self) -> TrainConfig {
        TrainConfig {
            dim: self.dim,
            window: self.window,
            negatives: self.negatives,
            epochs: self.epochs,
            lr0: self.lr,
            subsample: self.subsample,
            min_count: self.min_count,
            max_vocab: self.max_vocab,
            seed: self.seed,
            workers: self.workers,
            table_len: self.table_len,
            log_every: self.log_every,
        }
    }

    fn strategy(&self) -> Result<SegmentationStrategy> {
        Ok(match self.model {
            ModelKind::Sg => SegmentationStrategy::Whole,
            ModelKind::Ft => SegmentationStrategy::char_ngrams(self.min_n, self.max_n, self.buckets)?,
            ModelKind::Morph => {
                let path = self
                    .lexicon
                    .as_ref()
                    .ok_or_else(|| Usage("--model morph requires --lexicon <PATH>".into()))?;
                SegmentationStrategy::Morphemes(MorphLexicon::load(path)?)
            }
        })
    }
}

#[derive(Args, Debug, Serialize)]
struct ReportArg {
    /// Also write the report to this file.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct SimColumns {
    #[arg(long, default_value_t = 0)]
    word1_col: usize,
    #[arg(long, default_value_t = 1)]
    word2_col: usize,
    #[arg(long, default_value_t = 3)]
    score_col: usize,
    /// The first line is data, not a header.
    #[arg(long)]
    no_header: bool,
}

impl SimColumns {
    fn columns(&self) -> SimilarityColumns {
        SimilarityColumns {
            word1: self.word1_col,
            word2: self.word2_col,
            score: self.score_col,
            skip_header: !self.no_header,
        }
    }
}

#[derive(Args, Debug, Serialize)]
struct EvalSimArgs {
    /// Checkpoint or word2vec text file.
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    dataset: PathBuf,
    #[command(flatten)]
    columns: SimColumns,
    #[command(flatten)]
    report: ReportArg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum AnalogyFormat {
    Google,
    Bats,
}

#[derive(Args, Debug, Serialize)]
struct EvalAnalogyArgs {
    #[arg(long)]
    model: PathBuf,
    /// Google-format file, or a BATS file or directory.
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, value_enum, default_value_t = AnalogyFormat::Google)]
    format: AnalogyFormat,
    #[command(flatten)]
    report: ReportArg,
}

#[derive(Args, Debug, Serialize)]
struct MapArgs {
    /// Source-language vectors (checkpoint or word2vec text).
    #[arg(long)]
    source: PathBuf,
    #[arg(long)]
    target: PathBuf,
    #[arg(long)]
    train_dict: PathBuf,
    #[arg(long)]
    test_dict: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "1,10")]
    k: Vec<usize>,
    #[command(flatten)]
    report: ReportArg,
}

#[derive(Args, Debug, Serialize)]
struct TagTrainArgs {
    #[arg(long)]
    embeddings: PathBuf,
    /// CoNLL training file.
    #[arg(long)]
    train: PathBuf,
    /// 1 = POS, 2 = chunk.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    label_column: u8,
    #[arg(long, default_value_t = 5)]
    window: usize,
    #[arg(long, default_value_t = 128)]
    hidden: usize,
    #[arg(long, default_value_t = 10)]
    epochs: usize,
    #[arg(long, default_value_t = 0.01)]
    lr: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Tagger parameters output (JSON).
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    report: ReportArg,
}

#[derive(Args, Debug, Serialize)]
struct TagEvalArgs {
    #[arg(long)]
    embeddings: PathBuf,
    #[arg(long)]
    params: PathBuf,
    /// CoNLL evaluation file.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    label_column: u8,
    #[command(flatten)]
    report: ReportArg,
}

#[derive(Args, Debug, Serialize)]
struct CompareArgs {
    #[arg(long, required = true, num_args = 1..)]
    models: Vec<PathBuf>,
    #[arg(long)]
    similarity: Option<PathBuf>,
    #[command(flatten)]
    columns: SimColumns,
    #[arg(long)]
    analogy: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = AnalogyFormat::Google)]
    analogy_format: AnalogyFormat,
    #[command(flatten)]
    report: ReportArg,
}

/// Invalid invocation; exits with status 2.
#[derive(Debug)]
struct Usage(String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Usage>().is_some() {
        return 2;
    }
    match err.downcast_ref::<mglab_core::Error>() {
        Some(mglab_core::Error::Config(_)) => 2,
        Some(mglab_core::Error::Io { source, .. }) if source.kind() == io::ErrorKind::NotFound => 2,
        _ => 1,
    }
}

fn log_config<T: Serialize>(command: &str, args: &T) {
    let json = serde_json::to_string(args).unwrap_or_else(|e| format!("<unserializable: {e}>"));
    log::info!("command={command} config={json}");
}

fn emit(text: &str, report: &ReportArg) -> Result<()> {
    io::stdout().write_all(text.as_bytes())?;
    if let Some(path) = &report.report {
        fs::write(path, text).with_context(|| format!("writing report {}", path.display()))?;
    }
    Ok(())
}

fn require_file(path: &Path, flag: &str) -> Result<()> {
    if !path.exists() {
        return Err(Usage(format!("{flag}: {} does not exist", path.display())).into());
    }
    Ok(())
}

fn load_model(path: &Path, flag: &str) -> Result<EmbeddingModel<f32>> {
    require_file(path, flag)?;
    Ok(EmbeddingModel::<f32>::load_any(path)?)
}

fn load_analogy(path: &Path, format: AnalogyFormat) -> Result<AnalogyDataset> {
    Ok(match format {
        AnalogyFormat::Google => AnalogyDataset::load_google(path)?,
        AnalogyFormat::Bats => AnalogyDataset::load_bats(path)?,
    })
}

fn run_train(args: &TrainArgs) -> Result<()> {
    log_config("train", args);
    for path in &args.corpus {
        require_file(path, "--corpus")?;
    }
    let config = args.train_config();
    config.validate()?;
    let strategy = args.strategy()?;
    let corpus = TextCorpus::from_files(&args.corpus)?;
    let (model, report) = match &args.resume {
        Some(path) => {
            let mut model = load_model(path, "--resume")?;
            if model.strategy() != &strategy {
                return Err(Usage(format!(
                    "--resume checkpoint uses the {} strategy, not the requested one",
                    model.strategy().kind()
                ))
                .into());
            }
            let sentences = corpus.encode(model.vocab());
            let report = train::train_model(&mut model, &sentences, &config)?;
            (model, report)
        }
        None => train::train::<f32>(&corpus, strategy, &config)?,
    };
    model.save_checkpoint(&args.out)?;
    if let Some(path) = &args.vectors {
        model.save_text(path)?;
    }
    if let Some(path) = &args.vocab_out {
        let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        model.vocab().write_counts(io::BufWriter::new(file))?;
    }
    #[derive(Serialize)]
    struct Output<'a> {
        model: ModelKind,
        checkpoint: &'a Path,
        config: &'a TrainConfig,
        #[serde(flatten)]
        report: &'a train::TrainReport,
    }
    let json = serde_json::to_string_pretty(&Output {
        model: args.model,
        checkpoint: &args.out,
        config: &config,
        report: &report,
    })?;
    if let Some(path) = &args.report {
        fs::write(path, json + "\n").with_context(|| format!("writing report {}", path.display()))?;
    }
    println!(
        "model\t{}\nvocab\t{}\nsteps\t{}\ninitial_loss\t{:.6}\nfinal_loss\t{:.6}\ncheckpoint\t{}",
        model.strategy().kind(),
        report.vocab_size,
        report.steps,
        report.initial_loss_ema,
        report.final_loss_ema,
        args.out.display()
    );
    Ok(())
}

fn run_eval_sim(args: &EvalSimArgs) -> Result<()> {
    log_config("eval-sim", args);
    let model = load_model(&args.model, "--model")?;
    require_file(&args.dataset, "--dataset")?;
    let dataset = SimilarityDataset::load(&args.dataset, args.columns.columns())?;
    let report = eval::eval_similarity(&model, &dataset)?;
    emit(&report.to_string(), &args.report)
}

fn run_eval_analogy(args: &EvalAnalogyArgs) -> Result<()> {
    log_config("eval-analogy", args);
    let model = load_model(&args.model, "--model")?;
    require_file(&args.dataset, "--dataset")?;
    let dataset = load_analogy(&args.dataset, args.format)?;
    let report = eval::eval_analogy(&model, &dataset)?;
    emit(&report.to_string(), &args.report)
}

fn run_map(args: &MapArgs) -> Result<()> {
    log_config("map", args);
    let source = load_model(&args.source, "--source")?;
    let target = load_model(&args.target, "--target")?;
    require_file(&args.train_dict, "--train-dict")?;
    require_file(&args.test_dict, "--test-dict")?;
    let train = BilingualDictionary::load(&args.train_dict)?;
    let test = BilingualDictionary::load(&args.test_dict)?;
    let result = xmap::eval_mapping(&source, &target, &train, &test, &args.k)?;
    emit(&result.to_string(), &args.report)
}

fn run_tag_train(args: &TagTrainArgs) -> Result<()> {
    log_config("tag-train", args);
    let model = load_model(&args.embeddings, "--embeddings")?;
    require_file(&args.train, "--train")?;
    let corpus = TaggedCorpus::load_conll(&args.train, args.label_column as usize)?;
    let embeddings = FrozenEmbeddings::from_model(&model);
    let config = TaggerConfig {
        window: args.window,
        hidden: args.hidden,
        epochs: args.epochs,
        lr: args.lr,
        seed: args.seed,
    };
    let (params, report) = tagger::train_tagger(&corpus, &embeddings, &config)?;
    let json = serde_json::to_string(&params)?;
    fs::write(&args.out, json).with_context(|| format!("writing {}", args.out.display()))?;
    let eval = tagger::evaluate_tagger(&params, &corpus, &embeddings)?;
    let text = format!(
        "labels\t{}\nepochs\t{}\nfinal_loss\t{:.6}\ntrain_accuracy\t{:.6}\ntokens\t{}\n",
        params.labels.len(),
        report.epoch_mean_loss.len(),
        report.epoch_mean_loss.last().copied().unwrap_or(f64::NAN),
        eval.accuracy,
        eval.tokens
    );
    emit(&text, &args.report)
}

fn run_tag_eval(args: &TagEvalArgs) -> Result<()> {
    log_config("tag-eval", args);
    let model = load_model(&args.embeddings, "--embeddings")?;
    require_file(&args.params, "--params")?;
    require_file(&args.data, "--data")?;
    let params: TaggerParams = serde_json::from_slice(&fs::read(&args.params)?)
        .with_context(|| format!("parsing tagger parameters {}", args.params.display()))?;
    let corpus = TaggedCorpus::load_conll(&args.data, args.label_column as usize)?;
    let embeddings = FrozenEmbeddings::from_model(&model);
    let eval = tagger::evaluate_tagger(&params, &corpus, &embeddings)?;
    let text = format!(
        "accuracy\t{:.6}\ncorrect\t{}\ntokens\t{}\nunseen_gold\t{}\n",
        eval.accuracy, eval.correct, eval.tokens, eval.unseen_gold
    );
    emit(&text, &args.report)
}

fn run_compare(args: &CompareArgs) -> Result<()> {
    log_config("compare", args);
    if args.similarity.is_none() && args.analogy.is_none() {
        return Err(Usage("compare needs --similarity and/or --analogy".into()).into());
    }
    let similarity = match &args.similarity {
        Some(p) => {
            require_file(p, "--similarity")?;
            Some(SimilarityDataset::load(p, args.columns.columns())?)
        }
        None => None,
    };
    let analogy = match &args.analogy {
        Some(p) => {
            require_file(p, "--analogy")?;
            Some(load_analogy(p, args.analogy_format)?)
        }
        None => None,
    };
    let mut text = String::from("model\tkind\trho\tsim_used\tsim_oov\tanalogy_micro\tanalogy_attempted\tanalogy_oov\n");
    for path in &args.models {
        let model = load_model(path, "--models")?;
        let mut row = vec![path.display().to_string(), model.strategy().kind().to_owned()];
        match &similarity {
            Some(d) => {
                let r = eval::eval_similarity(&model, d)?;
                row.extend([format!("{:.6}", r.rho), r.used.to_string(), r.oov.to_string()]);
            }
            None => row.extend(["-".into(), "-".into(), "-".into()]),
        }
        match &analogy {
            Some(d) => {
                let r = eval::eval_analogy(&model, d)?;
                row.extend([format!("{:.6}", r.micro), r.attempted.to_string(), r.oov.to_string()]);
            }
            None => row.extend(["-".into(), "-".into(), "-".into()]),
        }
        text.push_str(&row.join("\t"));
        text.push('\n');
    }
    emit(&text, &args.report)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Train(a) => run_train(a),
        Command::EvalSim(a) => run_eval_sim(a),
        Command::EvalAnalogy(a) => run_eval_analogy(a),
        Command::Map(a) => run_map(a),
        Command::TagTrain(a) => run_tag_train(a),
        Command::TagEval(a) => run_tag_eval(a),
        Command::Compare(a) => run_compare(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
