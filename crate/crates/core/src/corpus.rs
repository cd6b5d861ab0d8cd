//! Text ingestion, vocabulary construction and frequent-word subsampling.
//!
//! Lines are independent token sequences: context windows never cross a
//! newline. Tokens are maximal runs of non-whitespace characters with no case
//! folding or punctuation stripping.

use std::collections::HashMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use indexmap::IndexMap;

use crate::error::{Error, Result};

pub const DEFAULT_MAX_VOCAB: usize = 100_000;
pub const DEFAULT_MIN_COUNT: u64 = 5;
pub const DEFAULT_SUBSAMPLE: f64 = 1e-4;

/// Splits text on Unicode whitespace.
pub fn tokenize(text: &str) -> Vec<&str> {
    text.split_whitespace().collect()
}

/// Validates `bytes` as UTF-8, naming the first bad byte offset on failure.
pub fn decode_utf8<'a>(bytes: &'a [u8], context: &str) -> Result<&'a str> {
    std::str::from_utf8(bytes).map_err(|e| Error::Utf8 {
        context: context.to_owned(),
        offset: e.valid_up_to(),
    })
}

/// Token id mapping with occurrence counts.
///
/// Ids are dense, words are ordered by descending count with ties broken by
/// first occurrence in the stream.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, u32>,
    total_tokens: u64,
}

impl Vocabulary {
    /// Builds a vocabulary from entries in the given order.
    ///
    /// Fails on duplicate words.
    pub fn from_entries<I, S>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, u64)>,
        S: Into<String>,
    {
        let mut vocab = Vocabulary::default();
        for (word, count) in entries {
            let word = word.into();
            let id = vocab.words.len() as u32;
            if vocab.index.insert(word.clone(), id).is_some() {
                return Err(Error::Config(format!("duplicate vocabulary entry {word:?}")));
            }
            vocab.words.push(word);
            vocab.counts.push(count);
            vocab.total_tokens += count;
        }
        Ok(vocab)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn id(&self, word: &str) -> Option<u32> {
        self.index.get(word).copied()
    }

    /// Like [`Vocabulary::id`], failing with an out-of-vocabulary error.
    pub fn require(&self, word: &str) -> Result<u32> {
        self.id(word).ok_or_else(|| Error::OutOfVocabulary(word.to_owned()))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn word(&self, id: u32) -> &str {
        &self.words[id as usize]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn count(&self, id: u32) -> u64 {
        self.counts[id as usize]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Sum of retained counts.
    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    /// Writes one `word<TAB>count` line per entry in id order.
    pub fn write_counts<W: Write>(&self, mut writer: W) -> io::Result<()> {
        for (word, count) in self.words.iter().zip(&self.counts) {
            writeln!(writer, "{word}\t{count}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CorpusStats {
    pub raw_token_count: u64,
    pub retained_token_count: u64,
    pub distinct_before_cap: usize,
}

/// Counts tokens in first-occurrence order.
#[derive(Debug, Default)]
pub struct VocabBuilder {
    counts: IndexMap<String, u64>,
    raw_tokens: u64,
}

impl VocabBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, token: &str) {
        self.raw_tokens += 1;
        match self.counts.get_mut(token) {
            Some(c) => *c += 1,
            None => {
                self.counts.insert(token.to_owned(), 1);
            }
        }
    }

    pub fn extend<I, S>(&mut self, tokens: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        for token in tokens {
            self.push(token.as_ref());
        }
    }

    /// Drops words below `min_count`, then keeps the `max_vocab` most frequent.
    pub fn build(self, min_count: u64, max_vocab: usize) -> Result<(Vocabulary, CorpusStats)> {
        if min_count < 1 {
            return Err(Error::Config("min_count must be at least 1".into()));
        }
        if max_vocab < 1 {
            return Err(Error::Config("max_vocab must be at least 1".into()));
        }
        let mut survivors: Vec<(String, u64)> = self.counts.into_iter().filter(|&(_, c)| c >= min_count).collect();
        let distinct_before_cap = survivors.len();
        // stable: equal counts keep first-occurrence order
        survivors.sort_by_key(|e| std::cmp::Reverse(e.1));
        survivors.truncate(max_vocab);
        if survivors.is_empty() && self.raw_tokens > 0 {
            log::warn!(
                "no word reached min_count={min_count}; vocabulary is empty ({} raw tokens)",
                self.raw_tokens
            );
        }
        let vocab = Vocabulary::from_entries(survivors)?;
        let stats = CorpusStats {
            raw_token_count: self.raw_tokens,
            retained_token_count: vocab.total_tokens(),
            distinct_before_cap,
        };
        Ok((vocab, stats))
    }
}

/// Builds a vocabulary from a token stream.
pub fn build_vocab<I, S>(tokens: I, min_count: u64, max_vocab: usize) -> Result<Vocabulary>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut builder = VocabBuilder::new();
    builder.extend(tokens);
    builder.build(min_count, max_vocab).map(|(v, _)| v)
}

/// Probability of keeping one occurrence of a word with relative frequency
/// `word_freq / total` under threshold `t`: `min(1, sqrt(t/f) + t/f)`.
pub fn keep_probability(word_freq: u64, total: u64, t: f64) -> f64 {
    debug_assert!(word_freq > 0 && word_freq <= total && t > 0.0);
    let ratio = t / (word_freq as f64 / total as f64);
    (ratio.sqrt() + ratio).min(1.0)
}

/// Raw UTF-8 text from one or more sources, kept in argument order.
#[derive(Clone, Debug, Default)]
pub struct TextCorpus {
    texts: Vec<String>,
    sources: Vec<PathBuf>,
}

impl TextCorpus {
    pub fn from_files<P: AsRef<Path>>(paths: &[P]) -> Result<Self> {
        let mut corpus = TextCorpus::default();
        for path in paths {
            let path = path.as_ref();
            let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
            decode_utf8(&bytes, &path.display().to_string())?;
            // validated above
            corpus.texts.push(String::from_utf8(bytes).expect("validated UTF-8"));
            corpus.sources.push(path.to_owned());
        }
        Ok(corpus)
    }

    pub fn from_text(text: impl Into<String>) -> Self {
        TextCorpus {
            texts: vec![text.into()],
            sources: vec![PathBuf::from("<memory>")],
        }
    }

    pub fn sources(&self) -> &[PathBuf] {
        &self.sources
    }

    /// Lines across all sources, as token sequences. Empty lines are skipped.
    pub fn sentences(&self) -> impl Iterator<Item = Vec<&str>> + '_ {
        self.texts
            .iter()
            .flat_map(|t| t.lines())
            .map(tokenize)
            .filter(|s| !s.is_empty())
    }

    pub fn build_vocab(&self, min_count: u64, max_vocab: usize) -> Result<(Vocabulary, CorpusStats)> {
        let mut builder = VocabBuilder::new();
        for sentence in self.sentences() {
            builder.extend(sentence);
        }
        builder.build(min_count, max_vocab)
    }

    /// Maps every line to in-vocabulary ids, dropping unknown tokens.
    /// Lines left empty are dropped.
    pub fn encode(&self, vocab: &Vocabulary) -> Vec<Vec<u32>> {
        self.sentences()
            .map(|s| s.into_iter().filter_map(|w| vocab.id(w)).collect::<Vec<_>>())
            .filter(|s| !s.is_empty())
            .collect()
    }
}
