//! Skip-gram embeddings over whole words, character n-grams or morphemes,
//! with similarity, analogy, cross-lingual mapping and tagging evaluations.

pub mod corpus;
pub mod error;
pub mod eval;
pub mod model;
pub mod segment;
pub mod tagger;
pub mod train;
pub mod xmap;

pub use corpus::{build_vocab, keep_probability, tokenize, CorpusStats, TextCorpus, Vocabulary};
pub use error::{Error, Result};
pub use model::{EmbeddingModel, Matrix, Scalar};
pub use segment::{char_ngrams, hash_subword, segment, MorphLexicon, SegmentationStrategy, SubwordSet};
pub use train::{build_negative_table, sgns_loss, sgns_step, train, NegativeTable, TrainConfig, TrainReport};
