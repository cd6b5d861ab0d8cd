//! Skip-gram with negative sampling over composed subword vectors.
//!
//! For a center word with subword rows `S` and composed vector
//! `h = sum_{s in S} v_s`, the loss of one (center, context) pair with
//! negatives `n_1..n_k` is
//!
//! ```text
//! L = -log sigmoid(h . u_context) - sum_i log sigmoid(-h . u_{n_i})
//! ```
//!
//! where `u` are output rows. Multi-worker training mutates both matrices
//! without locks; results are only reproducible with a single worker.

use std::marker::PhantomData;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::corpus::{keep_probability, TextCorpus, Vocabulary};
use crate::error::{Error, Result};
use crate::model::{dot, EmbeddingModel, Matrix, Scalar};
use crate::segment::SegmentationStrategy;

pub const DEFAULT_TABLE_LEN: usize = 10_000_000;
pub const NOISE_EXPONENT: f64 = 0.75;
const LR_FLOOR: f64 = 1e-4;
const EMA_DECAY: f64 = 0.999;
const MAX_RESAMPLE: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrainConfig {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub lr0: f64,
    pub subsample: f64,
    pub min_count: u64,
    pub max_vocab: usize,
    pub seed: u64,
    pub workers: usize,
    pub table_len: usize,
    pub log_every: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: crate::model::DEFAULT_DIM,
            window: 5,
            negatives: 5,
            epochs: 5,
            lr0: 0.05,
            subsample: crate::corpus::DEFAULT_SUBSAMPLE,
            min_count: crate::corpus::DEFAULT_MIN_COUNT,
            max_vocab: crate::corpus::DEFAULT_MAX_VOCAB,
            seed: 1,
            workers: 1,
            table_len: DEFAULT_TABLE_LEN,
            log_every: 100_000,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::Config(msg.to_owned()));
        if self.dim == 0 {
            return fail("dim must be at least 1");
        }
        if self.window == 0 {
            return fail("window must be at least 1");
        }
        if self.negatives == 0 {
            return fail("negatives must be at least 1");
        }
        if self.epochs == 0 {
            return fail("epochs must be at least 1");
        }
        if !(self.lr0 > 0.0 && self.lr0.is_finite()) {
            return fail("lr0 must be positive");
        }
        if !(self.subsample >= 0.0 && self.subsample.is_finite()) {
            return fail("subsample threshold must be non-negative (0 disables)");
        }
        if self.min_count == 0 || self.max_vocab == 0 {
            return fail("min_count and max_vocab must be at least 1");
        }
        if self.workers == 0 {
            return fail("workers must be at least 1");
        }
        if self.table_len == 0 || self.log_every == 0 {
            return fail("table_len and log_every must be at least 1");
        }
        Ok(())
    }
}

/// Unigram noise distribution raised to an exponent, as a lookup table.
#[derive(Clone, Debug)]
pub struct NegativeTable {
    entries: Vec<u32>,
}

impl NegativeTable {
    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> u32 {
        self.entries[rng.random_range(0..self.entries.len())]
    }
}

/// Fills the table in id order: word `i` ends at `round(len * C_i)` where
/// `C_i` is the cumulative share of `count^exponent` up to and including `i`.
pub fn build_negative_table(vocab: &Vocabulary, exponent: f64, table_len: usize) -> Result<NegativeTable> {
    if vocab.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    if table_len < vocab.len() {
        return Err(Error::Config(format!(
            "negative table length {table_len} is smaller than the vocabulary ({})",
            vocab.len()
        )));
    }
    let weights: Vec<f64> = vocab.counts().iter().map(|&c| (c as f64).powf(exponent)).collect();
    let total: f64 = weights.iter().sum();
    let mut entries = Vec::with_capacity(table_len);
    let mut cumulative = 0.0;
    for (id, w) in weights.iter().enumerate() {
        cumulative += w;
        let end = if id + 1 == weights.len() {
            table_len
        } else {
            ((cumulative / total) * table_len as f64).round() as usize
        };
        while entries.len() < end.min(table_len) {
            entries.push(id as u32);
        }
    }
    Ok(NegativeTable { entries })
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `-log sigmoid(x)`, stable for large `|x|`.
pub fn neg_log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        (-x).exp().ln_1p()
    } else {
        -x + x.exp().ln_1p()
    }
}

/// Loss of one positive pair and its negatives, evaluated through
/// [`EmbeddingModel::score`].
pub fn sgns_loss<F: Scalar>(model: &EmbeddingModel<F>, center: &str, context: &str, negatives: &[&str]) -> Result<f64> {
    let to_f64 = |x: F| x.to_f64().expect("finite");
    let mut loss = neg_log_sigmoid(to_f64(model.score(center, context)?));
    for neg in negatives {
        loss += neg_log_sigmoid(-to_f64(model.score(center, neg)?));
    }
    Ok(loss)
}

/// One SGD step on a (center, context, negatives) triple. Returns the loss
/// before the update.
pub fn sgns_step<F: Scalar>(
    model: &mut EmbeddingModel<F>,
    center: &str,
    context: &str,
    negatives: &[&str],
    lr: F,
) -> Result<F> {
    let vocab = model.vocab();
    let center = vocab.require(center)?;
    let context = vocab.require(context)?;
    let negatives = negatives.iter().map(|n| vocab.require(n)).collect::<Result<Vec<_>>>()?;
    Ok(sgns_step_ids(model, center, context, &negatives, lr))
}

/// Id-based [`sgns_step`].
pub fn sgns_step_ids<F: Scalar>(
    model: &mut EmbeddingModel<F>,
    center: u32,
    context: u32,
    negatives: &[u32],
    lr: F,
) -> F {
    let rows = model.subword_rows(center).to_vec();
    let mut scratch = Scratch::new(model.dim());
    let (input, output) = model.matrices_mut();
    let (input, output) = (SharedRows::new(input), SharedRows::new(output));
    // SAFETY: exclusive borrow of both matrices for the duration of the call
    unsafe { sgns_kernel(&input, &output, &rows, context, negatives, lr, &mut scratch) }
}

struct Scratch<F> {
    hidden: Vec<F>,
    grad: Vec<F>,
    coeffs: Vec<F>,
}

impl<F: Scalar> Scratch<F> {
    fn new(dim: usize) -> Self {
        Scratch {
            hidden: vec![F::zero(); dim],
            grad: vec![F::zero(); dim],
            coeffs: Vec::new(),
        }
    }
}

/// Row view over a matrix that several workers may mutate concurrently.
struct SharedRows<'a, F> {
    ptr: *mut F,
    rows: usize,
    cols: usize,
    _borrow: PhantomData<&'a mut Matrix<F>>,
}

unsafe impl<F: Send> Send for SharedRows<'_, F> {}
unsafe impl<F: Send> Sync for SharedRows<'_, F> {}

impl<'a, F: Scalar> SharedRows<'a, F> {
    fn new(matrix: &'a mut Matrix<F>) -> Self {
        SharedRows {
            rows: matrix.rows(),
            cols: matrix.cols(),
            ptr: matrix.as_mut_slice().as_mut_ptr(),
            _borrow: PhantomData,
        }
    }

    /// # Safety
    /// No live mutable reference to the same row on this thread. Other
    /// threads may race (hogwild).
    unsafe fn row(&self, i: usize) -> &[F] {
        assert!(i < self.rows);
        std::slice::from_raw_parts(self.ptr.add(i * self.cols), self.cols)
    }

    /// # Safety
    /// No other live reference to the same row on this thread.
    #[allow(clippy::mut_from_ref)]
    unsafe fn row_mut(&self, i: usize) -> &mut [F] {
        assert!(i < self.rows);
        std::slice::from_raw_parts_mut(self.ptr.add(i * self.cols), self.cols)
    }
}

/// Scores all targets against the pre-update composed vector, then applies
/// the output updates and finally the accumulated input gradient to every
/// subword row.
///
/// # Safety
/// See [`SharedRows`].
unsafe fn sgns_kernel<F: Scalar>(
    input: &SharedRows<F>,
    output: &SharedRows<F>,
    rows: &[u32],
    context: u32,
    negatives: &[u32],
    lr: F,
    scratch: &mut Scratch<F>,
) -> F {
    let Scratch { hidden, grad, coeffs } = scratch;
    hidden.iter_mut().for_each(|x| *x = F::zero());
    for &r in rows {
        for (h, &v) in hidden.iter_mut().zip(input.row(r as usize)) {
            *h += v;
        }
    }
    grad.iter_mut().for_each(|x| *x = F::zero());
    coeffs.clear();
    let mut loss = 0.0;
    let targets = std::iter::once((context, true)).chain(negatives.iter().map(|&n| (n, false)));
    for (word, positive) in targets.clone() {
        let out = output.row(word as usize);
        let score = dot(hidden, out).to_f64().unwrap_or(f64::NAN);
        let g = if positive {
            loss += neg_log_sigmoid(score);
            sigmoid(score) - 1.0
        } else {
            loss += neg_log_sigmoid(-score);
            sigmoid(score)
        };
        let g = F::from_f64(g).unwrap_or_else(F::nan);
        for (acc, &u) in grad.iter_mut().zip(out) {
            *acc += g * u;
        }
        coeffs.push(g);
    }
    for ((word, _), &g) in targets.zip(coeffs.iter()) {
        let step = lr * g;
        for (u, &h) in output.row_mut(word as usize).iter_mut().zip(hidden.iter()) {
            *u -= step * h;
        }
    }
    for &r in rows {
        for (v, &g) in input.row_mut(r as usize).iter_mut().zip(grad.iter()) {
            *v -= lr * g;
        }
    }
    F::from_f64(loss).unwrap_or_else(F::nan)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TracePoint {
    pub step: u64,
    pub lr: f64,
    pub loss_ema: f64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct TrainReport {
    pub steps: u64,
    pub vocab_size: usize,
    pub raw_tokens: u64,
    pub retained_tokens: u64,
    /// Loss EMA after the first step (the EMA is seeded with that loss).
    pub initial_loss_ema: f64,
    pub final_loss_ema: f64,
    /// Mean per-step loss within each tenth of training progress.
    pub decile_mean_loss: Vec<f64>,
    /// Logged points of the first worker, every `log_every` steps.
    pub trace: Vec<TracePoint>,
}

/// Builds the vocabulary, initializes a model and trains it.
pub fn train<F: Scalar>(
    corpus: &TextCorpus,
    strategy: SegmentationStrategy,
    config: &TrainConfig,
) -> Result<(EmbeddingModel<F>, TrainReport)> {
    config.validate()?;
    let (vocab, stats) = corpus.build_vocab(config.min_count, config.max_vocab)?;
    if vocab.is_empty() {
        return Err(Error::EmptyCorpus(format!(
            "no word reaches min_count={} in {} raw tokens",
            config.min_count, stats.raw_token_count
        )));
    }
    log::info!(
        "vocabulary: {} words ({} distinct before cap), {} of {} tokens retained",
        vocab.len(),
        stats.distinct_before_cap,
        stats.retained_token_count,
        stats.raw_token_count
    );
    let sentences = corpus.encode(&vocab);
    let mut model = EmbeddingModel::new(vocab, strategy, config.dim, config.seed)?;
    let mut report = train_model(&mut model, &sentences, config)?;
    report.raw_tokens = stats.raw_token_count;
    Ok((model, report))
}

/// Continues training an existing model on id-encoded sentences.
pub fn train_model<F: Scalar>(
    model: &mut EmbeddingModel<F>,
    sentences: &[Vec<u32>],
    config: &TrainConfig,
) -> Result<TrainReport> {
    config.validate()?;
    let vocab = model.vocab().clone();
    let token_count: u64 = sentences.iter().map(|s| s.len() as u64).sum();
    if token_count == 0 {
        return Err(Error::EmptyCorpus("no in-vocabulary tokens to train on".into()));
    }
    let table = build_negative_table(&vocab, NOISE_EXPONENT, config.table_len.max(vocab.len()))?;
    let keep: Vec<f64> = vocab
        .counts()
        .iter()
        .map(|&c| {
            if config.subsample > 0.0 && c > 0 {
                keep_probability(c, vocab.total_tokens().max(c), config.subsample)
            } else {
                1.0
            }
        })
        .collect();
    let subwords = model.segmenter().clone();
    let dim = model.dim();

    let shared = Shared {
        processed: AtomicU64::new(0),
        abort: AtomicBool::new(false),
        total: token_count * config.epochs as u64,
        table: &table,
        keep: &keep,
        subwords: &subwords,
        config,
    };

    let (input, output) = model.matrices_mut();
    let (input, output) = (SharedRows::new(input), SharedRows::new(output));
    let workers = config.workers.min(sentences.len()).max(1);
    let chunk = sentences.len().div_ceil(workers);

    let results: Vec<Result<WorkerStats>> = if workers == 1 {
        vec![run_worker(0, sentences, &shared, &input, &output, dim)]
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = sentences
                .chunks(chunk)
                .enumerate()
                .map(|(w, part)| {
                    let (shared, input, output) = (&shared, &input, &output);
                    scope.spawn(move || run_worker(w, part, shared, input, output, dim))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("training worker panicked"))
                .collect()
        })
    };

    let mut report = TrainReport {
        vocab_size: vocab.len(),
        retained_tokens: vocab.total_tokens(),
        ..TrainReport::default()
    };
    let mut decile_sum = [0.0; 10];
    let mut decile_n = [0u64; 10];
    let mut emas = Vec::new();
    for result in results {
        let stats = result?;
        report.steps += stats.steps;
        if stats.steps > 0 {
            emas.push((stats.initial_ema, stats.ema));
        }
        for d in 0..10 {
            decile_sum[d] += stats.decile_sum[d];
            decile_n[d] += stats.decile_n[d];
        }
        if stats.worker == 0 {
            report.trace = stats.trace;
        }
    }
    if !emas.is_empty() {
        report.initial_loss_ema = emas.iter().map(|e| e.0).sum::<f64>() / emas.len() as f64;
        report.final_loss_ema = emas.iter().map(|e| e.1).sum::<f64>() / emas.len() as f64;
    }
    report.decile_mean_loss = decile_sum
        .iter()
        .zip(decile_n)
        .map(|(s, n)| if n > 0 { s / n as f64 } else { f64::NAN })
        .collect();
    log::info!(
        "trained {} steps, loss ema {:.6} -> {:.6}",
        report.steps,
        report.initial_loss_ema,
        report.final_loss_ema
    );
    Ok(report)
}

struct Shared<'a> {
    processed: AtomicU64,
    abort: AtomicBool,
    total: u64,
    table: &'a NegativeTable,
    keep: &'a [f64],
    subwords: &'a crate::segment::Segmenter,
    config: &'a TrainConfig,
}

impl Shared<'_> {
    fn learning_rate(&self, processed: u64) -> f64 {
        let progress = processed as f64 / self.total as f64;
        self.config.lr0 * (1.0 - progress).max(LR_FLOOR)
    }
}

struct WorkerStats {
    worker: usize,
    steps: u64,
    initial_ema: f64,
    ema: f64,
    decile_sum: [f64; 10],
    decile_n: [u64; 10],
    trace: Vec<TracePoint>,
}

/// Per-worker seed, distinct from the initialization seed.
fn worker_seed(seed: u64, worker: usize) -> u64 {
    seed ^ 0x9E37_79B9_7F4A_7C15u64.wrapping_mul(worker as u64 + 1)
}

fn run_worker<F: Scalar>(
    worker: usize,
    sentences: &[Vec<u32>],
    shared: &Shared,
    input: &SharedRows<F>,
    output: &SharedRows<F>,
    dim: usize,
) -> Result<WorkerStats> {
    let config = shared.config;
    let mut rng = ChaCha8Rng::seed_from_u64(worker_seed(config.seed, worker));
    let mut scratch = Scratch::new(dim);
    let mut kept = Vec::new();
    let mut negatives = Vec::with_capacity(config.negatives);
    let mut stats = WorkerStats {
        worker,
        steps: 0,
        initial_ema: f64::NAN,
        ema: f64::NAN,
        decile_sum: [0.0; 10],
        decile_n: [0; 10],
        trace: Vec::new(),
    };

    for _epoch in 0..config.epochs {
        for sentence in sentences {
            if shared.abort.load(Ordering::Relaxed) {
                return Ok(stats);
            }
            let processed = shared.processed.load(Ordering::Relaxed);
            let lr = shared.learning_rate(processed);
            let lr_f = F::from_f64_lossy(lr);
            let decile = ((processed as f64 / shared.total as f64) * 10.0).min(9.0) as usize;

            kept.clear();
            for &id in sentence {
                let p = shared.keep[id as usize];
                if p >= 1.0 || rng.random::<f64>() < p {
                    kept.push(id);
                }
            }

            for (pos, &center) in kept.iter().enumerate() {
                let span = rng.random_range(1..=config.window);
                let lo = pos.saturating_sub(span);
                let hi = (pos + span).min(kept.len() - 1);
                let rows = shared.subwords.rows(center);
                for (ctx_pos, &context) in kept.iter().enumerate().take(hi + 1).skip(lo) {
                    if ctx_pos == pos {
                        continue;
                    }
                    negatives.clear();
                    for _ in 0..config.negatives {
                        for _ in 0..MAX_RESAMPLE {
                            let w = shared.table.sample(&mut rng);
                            if w != context {
                                negatives.push(w);
                                break;
                            }
                        }
                    }
                    // SAFETY: hogwild contract; rows of one matrix are only
                    // borrowed one at a time within this thread
                    let loss = unsafe { sgns_kernel(input, output, rows, context, &negatives, lr_f, &mut scratch) };
                    let loss = loss.to_f64().unwrap_or(f64::NAN);
                    if !loss.is_finite() {
                        shared.abort.store(true, Ordering::Relaxed);
                        return Err(Error::Diverged {
                            step: stats.steps,
                            detail: format!("non-finite loss for center id {center}, context id {context}, lr {lr}"),
                        });
                    }
                    stats.steps += 1;
                    if stats.steps == 1 {
                        stats.initial_ema = loss;
                        stats.ema = loss;
                    } else {
                        stats.ema = EMA_DECAY * stats.ema + (1.0 - EMA_DECAY) * loss;
                    }
                    stats.decile_sum[decile] += loss;
                    stats.decile_n[decile] += 1;
                    if worker == 0 && stats.steps.is_multiple_of(config.log_every) {
                        log::info!("step={} lr={:.6} loss={:.6}", stats.steps, lr, stats.ema);
                        stats.trace.push(TracePoint {
                            step: stats.steps,
                            lr,
                            loss_ema: stats.ema,
                        });
                    }
                }
            }
            shared.processed.fetch_add(sentence.len() as u64, Ordering::Relaxed);
        }
    }
    Ok(stats)
}
