//! Word segmentation into subword units.
//!
//! Every strategy maps an in-vocabulary word to rows of the input matrix. The
//! first `V` rows belong to whole words; n-gram buckets or morphemes occupy
//! the rows after them.

use std::fs;
use std::path::Path;

use indexmap::{IndexMap, IndexSet};

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};

pub const DEFAULT_MIN_N: usize = 3;
pub const DEFAULT_MAX_N: usize = 6;
pub const DEFAULT_BUCKETS: u64 = 2_000_000;

const BOW: char = '<';
const EOW: char = '>';

const FNV_OFFSET: u32 = 2_166_136_261;
const FNV_PRIME: u32 = 16_777_619;

/// 32-bit FNV-1a.
pub fn fnv1a_32(bytes: &[u8]) -> u32 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, &b| (h ^ b as u32).wrapping_mul(FNV_PRIME))
}

/// Bucket of a subword unit: FNV-1a over its UTF-8 bytes modulo `buckets`.
pub fn hash_subword(unit: &str, buckets: u64) -> u64 {
    assert!(buckets >= 1, "bucket count must be positive");
    fnv1a_32(unit.as_bytes()) as u64 % buckets
}

/// Character n-grams of `<word>` with lengths `min_n..=max_n`, counted in
/// code points. Grouped by length, shortest first, left to right within a
/// length.
pub fn char_ngrams(word: &str, min_n: usize, max_n: usize) -> Vec<String> {
    let wrapped: Vec<char> = std::iter::once(BOW)
        .chain(word.chars())
        .chain(std::iter::once(EOW))
        .collect();
    let mut grams = Vec::new();
    for n in min_n..=max_n.min(wrapped.len()) {
        for window in wrapped.windows(n) {
            grams.push(window.iter().collect());
        }
    }
    grams
}

/// Morpheme segmentations supplied by an external tool.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MorphLexicon {
    entries: IndexMap<String, Vec<String>>,
    morphemes: IndexSet<String>,
}

impl MorphLexicon {
    /// Builds a lexicon from `(word, morphemes)` pairs. Later duplicates of a
    /// word replace earlier ones; repeated morphemes within one word are
    /// dropped.
    pub fn from_entries<I, W, M>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (W, M)>,
        W: Into<String>,
        M: IntoIterator,
        M::Item: Into<String>,
    {
        let mut map = IndexMap::new();
        for (word, morphs) in entries {
            let word = word.into();
            let mut unique: Vec<String> = Vec::new();
            for m in morphs {
                let m = m.into();
                if !unique.contains(&m) {
                    unique.push(m);
                }
            }
            if unique.is_empty() {
                return Err(Error::Config(format!("lexicon entry {word:?} has no morphemes")));
            }
            map.insert(word, unique);
        }
        Ok(Self::from_map(map))
    }

    fn from_map(entries: IndexMap<String, Vec<String>>) -> Self {
        let morphemes = entries.values().flatten().cloned().collect();
        MorphLexicon { entries, morphemes }
    }

    /// Parses `word<TAB>morph1 morph2 ...` lines. Malformed lines are skipped
    /// and returned as errors alongside the lexicon.
    pub fn parse(text: &str, context: &str) -> (Self, Vec<Error>) {
        let mut entries: IndexMap<String, Vec<String>> = IndexMap::new();
        let mut issues = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let lineno = lineno + 1;
            if line.trim().is_empty() {
                continue;
            }
            let Some((word, morphs)) = line.split_once('\t') else {
                issues.push(Error::parse(context, lineno, "expected word<TAB>morphemes"));
                continue;
            };
            let word = word.trim();
            let mut unique: Vec<String> = Vec::new();
            for m in morphs.split_whitespace() {
                if !unique.iter().any(|u| u == m) {
                    unique.push(m.to_owned());
                }
            }
            if word.is_empty() || unique.is_empty() {
                issues.push(Error::parse(context, lineno, "empty word or morpheme list"));
                continue;
            }
            entries.insert(word.to_owned(), unique);
        }
        (Self::from_map(entries), issues)
    }

    /// Loads a lexicon file, logging and skipping malformed lines.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let context = path.display().to_string();
        let text = crate::corpus::decode_utf8(&bytes, &context)?;
        let (lexicon, issues) = Self::parse(text, &context);
        for issue in &issues {
            log::warn!("skipping lexicon line: {issue}");
        }
        Ok(lexicon)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&[String]> {
        self.entries.get(word).map(Vec::as_slice)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &[String])> {
        self.entries.iter().map(|(w, m)| (w.as_str(), m.as_slice()))
    }

    /// Number of distinct morphemes, i.e. extra input rows.
    pub fn morpheme_count(&self) -> usize {
        self.morphemes.len()
    }

    /// Dense id of a morpheme in order of first appearance in the lexicon.
    pub fn morpheme_id(&self, morpheme: &str) -> Option<usize> {
        self.morphemes.get_index_of(morpheme)
    }

    pub fn morpheme(&self, id: usize) -> Option<&str> {
        self.morphemes.get_index(id).map(String::as_str)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SegmentationStrategy {
    /// Each word is its own unit (SkipGram).
    Whole,
    /// The word plus its hashed character n-grams (FastText-style).
    CharNgrams { min_n: usize, max_n: usize, buckets: u64 },
    /// The word plus its lexicon morphemes (MorphGram).
    Morphemes(MorphLexicon),
}

impl SegmentationStrategy {
    pub fn char_ngrams(min_n: usize, max_n: usize, buckets: u64) -> Result<Self> {
        if min_n < 1 || min_n > max_n {
            return Err(Error::Config(format!(
                "n-gram range must satisfy 1 <= min_n <= max_n, got {min_n}..{max_n}"
            )));
        }
        if buckets < 1 {
            return Err(Error::Config("bucket count must be at least 1".into()));
        }
        Ok(SegmentationStrategy::CharNgrams { min_n, max_n, buckets })
    }

    /// Input rows beyond the `V` whole-word rows.
    pub fn extra_rows(&self) -> usize {
        match self {
            SegmentationStrategy::Whole => 0,
            SegmentationStrategy::CharNgrams { buckets, .. } => *buckets as usize,
            SegmentationStrategy::Morphemes(lex) => lex.morpheme_count(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            SegmentationStrategy::Whole => "sg",
            SegmentationStrategy::CharNgrams { .. } => "ft",
            SegmentationStrategy::Morphemes(_) => "morph",
        }
    }
}

/// Input rows making up one word, with a readable label per row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubwordSet {
    pub indices: Vec<usize>,
    pub display: Vec<String>,
}

impl SubwordSet {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Segments an in-vocabulary word.
pub fn segment(word: &str, strategy: &SegmentationStrategy, vocab: &Vocabulary) -> Result<SubwordSet> {
    let id = vocab.require(word)? as usize;
    let offset = vocab.len();
    let mut set = SubwordSet {
        indices: vec![id],
        display: vec![word.to_owned()],
    };
    match strategy {
        SegmentationStrategy::Whole => {}
        SegmentationStrategy::CharNgrams { min_n, max_n, buckets } => {
            for gram in char_ngrams(word, *min_n, *max_n) {
                set.indices.push(offset + hash_subword(&gram, *buckets) as usize);
                set.display.push(gram);
            }
        }
        SegmentationStrategy::Morphemes(lexicon) => {
            if let Some(morphs) = lexicon.get(word) {
                for m in morphs {
                    let mid = lexicon.morpheme_id(m).expect("lexicon morpheme is indexed");
                    set.indices.push(offset + mid);
                    set.display.push(m.clone());
                }
            }
        }
    }
    Ok(set)
}

/// Precomputed subword rows for every vocabulary word.
#[derive(Clone, Debug)]
pub struct Segmenter {
    offsets: Vec<usize>,
    rows: Vec<u32>,
}

impl Segmenter {
    pub fn new(strategy: &SegmentationStrategy, vocab: &Vocabulary) -> Self {
        let mut offsets = Vec::with_capacity(vocab.len() + 1);
        let mut rows = Vec::new();
        offsets.push(0);
        for word in vocab.words() {
            let set = segment(word, strategy, vocab).expect("vocabulary word");
            rows.extend(set.indices.iter().map(|&i| i as u32));
            offsets.push(rows.len());
        }
        Segmenter { offsets, rows }
    }

    pub fn rows(&self, id: u32) -> &[u32] {
        let id = id as usize;
        &self.rows[self.offsets[id]..self.offsets[id + 1]]
    }
}
