//! Window-based sequence labeling over frozen word embeddings.
//!
//! A convolution with a single filter bank over the token sequence, evaluated
//! at one position, is the same as an affine map over the concatenated
//! window of embeddings. The tagger is therefore
//!
//! ```text
//! x      = [e(i - w/2) ... e(i + w/2)]       window of embeddings
//! hidden = tanh(W1^T x + b1)
//! logits = W2^T hidden + b2
//! ```
//!
//! trained per token with softmax cross-entropy. Positions outside the
//! sentence use a learned pad vector, unknown tokens a learned unk vector.

use std::fs;
use std::path::Path;

use indexmap::IndexSet;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{decode_utf8, Vocabulary};
use crate::error::{Error, Result};
use crate::model::{EmbeddingModel, Scalar};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaggedSentence {
    pub tokens: Vec<String>,
    pub labels: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TaggedCorpus {
    pub sentences: Vec<TaggedSentence>,
    /// Labels in order of first appearance.
    pub labels: IndexSet<String>,
}

impl TaggedCorpus {
    /// Reads CoNLL columns (`token POS chunk`), blank lines between
    /// sentences. `label_column` selects the label (1 = POS, 2 = chunk).
    pub fn parse_conll(text: &str, label_column: usize, context: &str) -> Result<Self> {
        if label_column == 0 {
            return Err(Error::Config("label column 0 is the token column".into()));
        }
        let mut corpus = TaggedCorpus::default();
        let mut current = TaggedSentence {
            tokens: Vec::new(),
            labels: Vec::new(),
        };
        let flush = |current: &mut TaggedSentence, corpus: &mut TaggedCorpus| {
            if !current.tokens.is_empty() {
                corpus.sentences.push(std::mem::replace(
                    current,
                    TaggedSentence {
                        tokens: Vec::new(),
                        labels: Vec::new(),
                    },
                ));
            }
        };
        for (i, line) in text.lines().enumerate() {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() {
                flush(&mut current, &mut corpus);
                continue;
            }
            let Some(label) = fields.get(label_column) else {
                return Err(Error::parse(
                    context,
                    i + 1,
                    format!("expected at least {} columns", label_column + 1),
                ));
            };
            corpus.labels.insert((*label).to_owned());
            current.tokens.push(fields[0].to_owned());
            current.labels.push((*label).to_owned());
        }
        flush(&mut current, &mut corpus);
        Ok(corpus)
    }

    pub fn load_conll(path: impl AsRef<Path>, label_column: usize) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let context = path.display().to_string();
        Self::parse_conll(decode_utf8(&bytes, &context)?, label_column, &context)
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(|s| s.tokens.len()).sum()
    }
}

/// Composed word vectors, fixed for the lifetime of a tagger.
#[derive(Clone, Debug, PartialEq)]
pub struct FrozenEmbeddings {
    vocab: Vocabulary,
    dim: usize,
    data: Vec<f64>,
}

impl FrozenEmbeddings {
    pub fn from_model<F: Scalar>(model: &EmbeddingModel<F>) -> Self {
        let composed = model.composed_matrix();
        FrozenEmbeddings {
            vocab: model.vocab().clone(),
            dim: model.dim(),
            data: composed
                .as_slice()
                .iter()
                .map(|x| x.to_f64().unwrap_or(f64::NAN))
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        let id = self.vocab.id(word)? as usize;
        Some(&self.data[id * self.dim..(id + 1) * self.dim])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TaggerConfig {
    pub window: usize,
    pub hidden: usize,
    pub epochs: usize,
    pub lr: f64,
    pub seed: u64,
}

impl Default for TaggerConfig {
    fn default() -> Self {
        TaggerConfig {
            window: 5,
            hidden: 128,
            epochs: 10,
            lr: 0.01,
            seed: 1,
        }
    }
}

impl TaggerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window.is_multiple_of(2) {
            return Err(Error::Config(format!("window must be odd, got {}", self.window)));
        }
        if self.hidden == 0 {
            return Err(Error::Config("hidden width must be positive".into()));
        }
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return Err(Error::Config("learning rate must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaggerParams {
    pub window: usize,
    pub dim: usize,
    pub hidden: usize,
    pub labels: Vec<String>,
    /// `(window * dim) x hidden`, row-major.
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    /// `hidden x labels`, row-major.
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
    pub pad: Vec<f64>,
    pub unk: Vec<f64>,
}

impl TaggerParams {
    pub fn zeros(window: usize, dim: usize, hidden: usize, labels: Vec<String>) -> Self {
        let n_labels = labels.len();
        TaggerParams {
            window,
            dim,
            hidden,
            labels,
            w1: vec![0.0; window * dim * hidden],
            b1: vec![0.0; hidden],
            w2: vec![0.0; hidden * n_labels],
            b2: vec![0.0; n_labels],
            pad: vec![0.0; dim],
            unk: vec![0.0; dim],
        }
    }

    /// Glorot-uniform weights, zero biases, small random pad/unk vectors.
    pub fn init(config: &TaggerConfig, dim: usize, labels: Vec<String>, seed: u64) -> Self {
        let mut p = Self::zeros(config.window, dim, config.hidden, labels);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let input = p.input_width();
        let b1 = (6.0 / (input + p.hidden) as f64).sqrt();
        let b2 = (6.0 / (p.hidden + p.labels.len()) as f64).sqrt();
        p.w1.iter_mut().for_each(|x| *x = rng.random_range(-b1..b1));
        p.w2.iter_mut().for_each(|x| *x = rng.random_range(-b2..b2));
        p.pad.iter_mut().for_each(|x| *x = rng.random_range(-0.01..0.01));
        p.unk.iter_mut().for_each(|x| *x = rng.random_range(-0.01..0.01));
        p
    }

    pub fn input_width(&self) -> usize {
        self.window * self.dim
    }

    pub fn label_count(&self) -> usize {
        self.labels.len()
    }

    pub fn label_id(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    fn all_finite(&self) -> bool {
        [&self.w1, &self.b1, &self.w2, &self.b2, &self.pad, &self.unk]
            .iter()
            .all(|v| v.iter().all(|x| x.is_finite()))
    }

    fn buffers_mut(&mut self) -> [&mut Vec<f64>; 6] {
        [
            &mut self.w1,
            &mut self.b1,
            &mut self.w2,
            &mut self.b2,
            &mut self.pad,
            &mut self.unk,
        ]
    }
}

/// Source of each window slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    Word,
    Pad,
    Unk,
}

/// Concatenated embeddings of positions `i - w/2 ..= i + w/2`.
pub fn encode_window<S: AsRef<str>>(
    sentence: &[S],
    position: usize,
    embeddings: &FrozenEmbeddings,
    params: &TaggerParams,
) -> (Vec<f64>, Vec<Slot>) {
    let half = params.window / 2;
    let mut x = Vec::with_capacity(params.input_width());
    let mut slots = Vec::with_capacity(params.window);
    for offset in 0..params.window {
        let pos = (position + offset).checked_sub(half).filter(|&p| p < sentence.len());
        let (vector, slot) = match pos {
            None => (params.pad.as_slice(), Slot::Pad),
            Some(p) => match embeddings.get(sentence[p].as_ref()) {
                Some(v) => (v, Slot::Word),
                None => (params.unk.as_slice(), Slot::Unk),
            },
        };
        x.extend_from_slice(vector);
        slots.push(slot);
    }
    (x, slots)
}

pub struct Forward {
    pub hidden: Vec<f64>,
    pub logits: Vec<f64>,
}

pub fn forward(x: &[f64], params: &TaggerParams) -> Forward {
    let (h, l) = (params.hidden, params.label_count());
    let mut hidden = params.b1.clone();
    for (i, &xi) in x.iter().enumerate() {
        if xi == 0.0 {
            continue;
        }
        let row = &params.w1[i * h..(i + 1) * h];
        for (acc, &w) in hidden.iter_mut().zip(row) {
            *acc += xi * w;
        }
    }
    hidden.iter_mut().for_each(|a| *a = a.tanh());
    let mut logits = params.b2.clone();
    for (j, &a) in hidden.iter().enumerate() {
        let row = &params.w2[j * l..(j + 1) * l];
        for (acc, &w) in logits.iter_mut().zip(row) {
            *acc += a * w;
        }
    }
    Forward { hidden, logits }
}

/// Index of the largest logit; the lowest index wins ties.
pub fn argmax(logits: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in logits.iter().enumerate().skip(1) {
        if v > logits[best] {
            best = i;
        }
    }
    best
}

/// Softmax cross-entropy of `gold` under `logits`.
pub fn cross_entropy(logits: &[f64], gold: usize) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|&z| (z - max).exp()).sum::<f64>().ln();
    lse - logits[gold]
}

/// Gradient buffers shaped like [`TaggerParams`].
#[derive(Clone, Debug, PartialEq)]
pub struct TaggerGrads {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
    pub pad: Vec<f64>,
    pub unk: Vec<f64>,
}

impl TaggerGrads {
    pub fn for_params(p: &TaggerParams) -> Self {
        TaggerGrads {
            w1: vec![0.0; p.w1.len()],
            b1: vec![0.0; p.b1.len()],
            w2: vec![0.0; p.w2.len()],
            b2: vec![0.0; p.b2.len()],
            pad: vec![0.0; p.pad.len()],
            unk: vec![0.0; p.unk.len()],
        }
    }

    fn buffers(&self) -> [&Vec<f64>; 6] {
        [&self.w1, &self.b1, &self.w2, &self.b2, &self.pad, &self.unk]
    }
}

/// Cross-entropy loss of one window and its gradient with respect to every
/// parameter, written into `grads` (overwritten, not accumulated).
pub fn backward(x: &[f64], slots: &[Slot], gold: usize, params: &TaggerParams, grads: &mut TaggerGrads) -> f64 {
    let (h, l, dim) = (params.hidden, params.label_count(), params.dim);
    let fwd = forward(x, params);
    let loss = cross_entropy(&fwd.logits, gold);

    let max = fwd.logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut dlogits: Vec<f64> = fwd.logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: f64 = dlogits.iter().sum();
    dlogits.iter_mut().for_each(|p| *p /= sum);
    dlogits[gold] -= 1.0;

    grads.b2.copy_from_slice(&dlogits);
    let mut dz = vec![0.0; h];
    for (j, dz_j) in dz.iter_mut().enumerate() {
        let a = fwd.hidden[j];
        let w_row = &params.w2[j * l..(j + 1) * l];
        let g_row = &mut grads.w2[j * l..(j + 1) * l];
        let mut da = 0.0;
        for k in 0..l {
            g_row[k] = a * dlogits[k];
            da += w_row[k] * dlogits[k];
        }
        *dz_j = da * (1.0 - a * a);
    }
    grads.b1.copy_from_slice(&dz);

    grads.pad.iter_mut().for_each(|g| *g = 0.0);
    grads.unk.iter_mut().for_each(|g| *g = 0.0);
    for (i, &xi) in x.iter().enumerate() {
        let w_row = &params.w1[i * h..(i + 1) * h];
        let g_row = &mut grads.w1[i * h..(i + 1) * h];
        let mut dx = 0.0;
        for j in 0..h {
            g_row[j] = xi * dz[j];
            dx += w_row[j] * dz[j];
        }
        match slots[i / dim] {
            Slot::Word => {}
            Slot::Pad => grads.pad[i % dim] += dx,
            Slot::Unk => grads.unk[i % dim] += dx,
        }
    }
    loss
}

fn apply(params: &mut TaggerParams, grads: &TaggerGrads, lr: f64) {
    for (p, g) in params.buffers_mut().into_iter().zip(grads.buffers()) {
        for (pi, gi) in p.iter_mut().zip(g) {
            *pi -= lr * gi;
        }
    }
}

/// Label id predicted for one position.
pub fn predict<S: AsRef<str>>(
    sentence: &[S],
    position: usize,
    embeddings: &FrozenEmbeddings,
    params: &TaggerParams,
) -> usize {
    let (x, _) = encode_window(sentence, position, embeddings, params);
    argmax(&forward(&x, params).logits)
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct TaggerTrainReport {
    pub epoch_mean_loss: Vec<f64>,
    pub tokens_per_epoch: usize,
}

/// Per-token SGD with a fixed learning rate; sentence order is reshuffled
/// each epoch. Embeddings are never modified.
pub fn train_tagger(
    corpus: &TaggedCorpus,
    embeddings: &FrozenEmbeddings,
    config: &TaggerConfig,
) -> Result<(TaggerParams, TaggerTrainReport)> {
    config.validate()?;
    if corpus.sentences.is_empty() {
        return Err(Error::EmptyCorpus("tagging corpus has no sentences".into()));
    }
    let labels: Vec<String> = corpus.labels.iter().cloned().collect();
    let mut params = TaggerParams::init(config, embeddings.dim(), labels, config.seed);
    let report = continue_training(&mut params, corpus, embeddings, config)?;
    Ok((params, report))
}

/// Runs `config.epochs` further epochs on existing parameters.
pub fn continue_training(
    params: &mut TaggerParams,
    corpus: &TaggedCorpus,
    embeddings: &FrozenEmbeddings,
    config: &TaggerConfig,
) -> Result<TaggerTrainReport> {
    config.validate()?;
    if params.dim != embeddings.dim() {
        return Err(Error::Config(format!(
            "tagger expects {}-dimensional embeddings, got {}",
            params.dim,
            embeddings.dim()
        )));
    }
    let gold: Vec<Vec<usize>> = corpus
        .sentences
        .iter()
        .map(|s| {
            s.labels
                .iter()
                .map(|l| {
                    params
                        .label_id(l)
                        .ok_or_else(|| Error::Config(format!("label {l:?} unknown to the tagger")))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(1));
    let mut order: Vec<usize> = (0..corpus.sentences.len()).collect();
    let mut grads = TaggerGrads::for_params(params);
    let mut report = TaggerTrainReport {
        tokens_per_epoch: corpus.token_count(),
        ..Default::default()
    };
    let mut step = 0u64;
    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for &s in &order {
            let sentence = &corpus.sentences[s].tokens;
            for (pos, &label) in gold[s].iter().enumerate() {
                let (x, slots) = encode_window(sentence, pos, embeddings, params);
                let loss = backward(&x, &slots, label, params, &mut grads);
                if !loss.is_finite() {
                    return Err(Error::Diverged {
                        step,
                        detail: format!("non-finite tagger loss in epoch {epoch}, sentence {s}, position {pos}"),
                    });
                }
                apply(params, &grads, config.lr);
                total += loss;
                step += 1;
            }
        }
        let mean = total / report.tokens_per_epoch.max(1) as f64;
        log::info!("tagger epoch={} loss={:.6}", epoch + 1, mean);
        report.epoch_mean_loss.push(mean);
    }
    if !params.all_finite() {
        return Err(Error::Diverged {
            step,
            detail: "non-finite tagger parameters".into(),
        });
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TaggerEval {
    pub accuracy: f64,
    pub correct: usize,
    pub tokens: usize,
    pub unseen_gold: usize,
}

/// Token accuracy. Gold labels the tagger has never seen count as errors.
pub fn evaluate_tagger(
    params: &TaggerParams,
    corpus: &TaggedCorpus,
    embeddings: &FrozenEmbeddings,
) -> Result<TaggerEval> {
    let tokens = corpus.token_count();
    if tokens == 0 {
        return Err(Error::Evaluation("tagging corpus is empty".into()));
    }
    let mut correct = 0;
    let mut unseen_gold = 0;
    for sentence in &corpus.sentences {
        for (pos, label) in sentence.labels.iter().enumerate() {
            match params.label_id(label) {
                Some(gold) => {
                    if predict(&sentence.tokens, pos, embeddings, params) == gold {
                        correct += 1;
                    }
                }
                None => unseen_gold += 1,
            }
        }
    }
    Ok(TaggerEval {
        accuracy: correct as f64 / tokens as f64,
        correct,
        tokens,
        unseen_gold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Matrix;
    use crate::segment::SegmentationStrategy;

    fn embeddings(words: &[(&str, &[f64])]) -> FrozenEmbeddings {
        let dim = words[0].1.len();
        let vocab = Vocabulary::from_entries(words.iter().map(|(w, _)| (*w, 1))).unwrap();
        let data = words.iter().flat_map(|(_, v)| v.iter().copied()).collect();
        let model = EmbeddingModel::<f64>::from_parts(
            vocab,
            SegmentationStrategy::Whole,
            Matrix::from_vec(words.len(), dim, data),
            Matrix::zeros(words.len(), dim),
        )
        .unwrap();
        FrozenEmbeddings::from_model(&model)
    }

    #[test]
    fn conll_reading() {
        let text = "Confidence NN B-NP\nin IN B-PP\n\n\nthe DT B-NP\npound NN I-NP\n";
        let pos = TaggedCorpus::parse_conll(text, 1, "c.txt").unwrap();
        assert_eq!(pos.sentences.len(), 2);
        assert_eq!(pos.labels.iter().collect::<Vec<_>>(), ["NN", "IN", "DT"]);
        let chunk = TaggedCorpus::parse_conll(text, 2, "c.txt").unwrap();
        assert_eq!(chunk.sentences[1].labels, ["B-NP", "I-NP"]);
        let err = TaggedCorpus::parse_conll("a NN\n", 2, "c.txt").unwrap_err();
        assert!(err.to_string().starts_with("c.txt:1:"));
    }

    #[test]
    fn window_padding() {
        let emb = embeddings(&[("a", &[1.0, 2.0]), ("b", &[3.0, 4.0])]);
        let mut params = TaggerParams::zeros(1, 2, 2, vec!["X".into()]);
        params.pad = vec![-1.0, -1.0];
        params.unk = vec![9.0, 9.0];
        let (x, _) = encode_window(&["a", "b"], 1, &emb, &params);
        assert_eq!(x, [3.0, 4.0]);

        params.window = 5;
        let (x, slots) = encode_window(&["a", "zz", "b"], 0, &emb, &params);
        assert_eq!(x, [-1.0, -1.0, -1.0, -1.0, 1.0, 2.0, 9.0, 9.0, 3.0, 4.0]);
        assert_eq!(slots, [Slot::Pad, Slot::Pad, Slot::Word, Slot::Unk, Slot::Word]);

        let (_, slots) = encode_window(&["a"], 0, &emb, &params);
        assert_eq!(slots, [Slot::Pad, Slot::Pad, Slot::Word, Slot::Pad, Slot::Pad]);
    }

    #[test]
    fn zero_params_give_uniform_loss() {
        let params = TaggerParams::zeros(3, 2, 4, vec!["A".into(), "B".into(), "C".into()]);
        let x = vec![0.3; 6];
        let fwd = forward(&x, &params);
        assert_eq!(fwd.logits, [0.0; 3]);
        assert!((cross_entropy(&fwd.logits, 1) - 3f64.ln()).abs() < 1e-12);
        assert_eq!(argmax(&fwd.logits), 0);
    }

    #[test]
    fn single_unit_logit() {
        let mut params = TaggerParams::zeros(1, 1, 1, vec!["A".into()]);
        params.w2 = vec![1.0];
        assert_eq!(forward(&[0.0], &params).logits, [0.0]);
    }

    #[test]
    fn argmax_shift_invariant() {
        let logits = [0.2, 1.5, -3.0, 1.5];
        let shifted: Vec<f64> = logits.iter().map(|z| z + 7.25).collect();
        assert_eq!(argmax(&logits), 1);
        assert_eq!(argmax(&shifted), 1);
    }

    fn toy_corpus() -> TaggedCorpus {
        let text = "cat N\nruns V\n\ndog N\nsleeps V\n\ncat N\nsleeps V\n\ndog N\nruns V\n";
        TaggedCorpus::parse_conll(text, 1, "toy").unwrap()
    }

    fn toy_embeddings() -> FrozenEmbeddings {
        embeddings(&[
            ("cat", &[1.0, 0.1]),
            ("dog", &[0.9, -0.1]),
            ("runs", &[-1.0, 0.2]),
            ("sleeps", &[-0.8, -0.2]),
        ])
    }

    #[test]
    fn separable_toy_set_is_learned() {
        let corpus = toy_corpus();
        let emb = toy_embeddings();
        let config = TaggerConfig {
            window: 1,
            hidden: 4,
            epochs: 50,
            lr: 0.1,
            seed: 3,
        };
        let (params, report) = train_tagger(&corpus, &emb, &config).unwrap();
        assert!(report.epoch_mean_loss.last() < report.epoch_mean_loss.first());
        let eval = evaluate_tagger(&params, &corpus, &emb).unwrap();
        assert_eq!(eval.accuracy, 1.0);
    }

    #[test]
    fn zero_lr_keeps_params() {
        let corpus = toy_corpus();
        let emb = toy_embeddings();
        let config = TaggerConfig {
            window: 3,
            hidden: 4,
            epochs: 2,
            lr: 0.0,
            seed: 3,
        };
        let (params, _) = train_tagger(&corpus, &emb, &config).unwrap();
        let fresh = TaggerParams::init(&config, 2, corpus.labels.iter().cloned().collect(), 3);
        assert_eq!(params, fresh);
    }

    #[test]
    fn training_is_reproducible() {
        let corpus = toy_corpus();
        let emb = toy_embeddings();
        let config = TaggerConfig {
            window: 3,
            hidden: 6,
            epochs: 5,
            lr: 0.05,
            seed: 11,
        };
        let (a, _) = train_tagger(&corpus, &emb, &config).unwrap();
        let (b, _) = train_tagger(&corpus, &emb, &config).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn majority_baseline_and_unseen_labels() {
        let corpus = TaggedCorpus::parse_conll("a N\nb N\nc V\nd Q\n", 1, "t").unwrap();
        let emb = embeddings(&[("a", &[1.0])]);
        let mut params = TaggerParams::zeros(1, 1, 1, vec!["N".into(), "V".into()]);
        params.b2 = vec![1.0, 0.0];
        let eval = evaluate_tagger(&params, &corpus, &emb).unwrap();
        assert_eq!(eval.correct, 2);
        assert_eq!(eval.unseen_gold, 1);
        assert_eq!(eval.accuracy, 0.5);
        let empty = TaggedCorpus::default();
        assert!(evaluate_tagger(&params, &empty, &emb).is_err());
    }

    #[test]
    fn even_window_rejected() {
        let config = TaggerConfig {
            window: 4,
            ..TaggerConfig::default()
        };
        assert!(train_tagger(&toy_corpus(), &toy_embeddings(), &config).is_err());
    }
}
