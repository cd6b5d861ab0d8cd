//! Embedding matrices, word composition and persistence.
//!
//! The input matrix holds one row per vocabulary word followed by the extra
//! subword rows of the segmentation strategy. The output matrix holds one
//! context row per vocabulary word. A word's vector is the plain sum of its
//! subword rows.

use std::fmt::{Debug, Display};
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use num_traits::{Float, FromPrimitive, NumAssign};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::segment::{MorphLexicon, SegmentationStrategy, Segmenter};

pub const DEFAULT_DIM: usize = 300;
pub const CHECKPOINT_MAGIC: &[u8; 6] = b"MGLAB1";

/// Floating-point element type of the embedding matrices.
pub trait Scalar:
    Float + FromPrimitive + NumAssign + FromStr + Display + Debug + Default + Send + Sync + 'static
{
    /// Width in bytes, recorded in checkpoints.
    const WIDTH: u8;

    fn write_le<W: Write>(self, writer: &mut W) -> io::Result<()>;
    fn read_le<R: Read>(reader: &mut R) -> io::Result<Self>;

    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).expect("finite conversion")
    }
}

impl Scalar for f32 {
    const WIDTH: u8 = 4;

    fn write_le<W: Write>(self, writer: &mut W) -> io::Result<()> {
        writer.write_f32::<LittleEndian>(self)
    }

    fn read_le<R: Read>(reader: &mut R) -> io::Result<Self> {
        reader.read_f32::<LittleEndian>()
    }
}

impl Scalar for f64 {
    const WIDTH: u8 = 8;

    fn write_le<W: Write>(self, writer: &mut W) -> io::Result<()> {
        writer.write_f64::<LittleEndian>(self)
    }

    fn read_le<R: Read>(reader: &mut R) -> io::Result<Self> {
        reader.read_f64::<LittleEndian>()
    }
}

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<F> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: Scalar> Matrix<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![F::zero(); rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<F>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [F] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[F] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [F] {
        &mut self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

pub fn dot<F: Scalar>(a: &[F], b: &[F]) -> F {
    a.iter().zip(b).fold(F::zero(), |acc, (&x, &y)| acc + x * y)
}

#[derive(Clone, Debug)]
pub struct EmbeddingModel<F = f32> {
    dim: usize,
    input: Matrix<F>,
    output: Matrix<F>,
    vocab: Vocabulary,
    strategy: SegmentationStrategy,
    segmenter: Segmenter,
}

impl<F: Scalar> EmbeddingModel<F> {
    /// Fresh model: input rows uniform in `[-1/(2 dim), 1/(2 dim)]`, output
    /// rows zero.
    pub fn new(vocab: Vocabulary, strategy: SegmentationStrategy, dim: usize, seed: u64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("dim must be positive".into()));
        }
        let rows = vocab.len() + strategy.extra_rows();
        let bound = 1.0 / (2.0 * dim as f64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..rows * dim)
            .map(|_| F::from_f64_lossy(rng.random_range(-bound..=bound)))
            .collect();
        let input = Matrix::from_vec(rows, dim, data);
        let output = Matrix::zeros(vocab.len(), dim);
        Ok(Self::assemble(vocab, strategy, input, output))
    }

    /// Assembles a model from explicit matrices, checking shapes and
    /// finiteness.
    pub fn from_parts(
        vocab: Vocabulary,
        strategy: SegmentationStrategy,
        input: Matrix<F>,
        output: Matrix<F>,
    ) -> Result<Self> {
        let dim = input.cols();
        let expected_rows = vocab.len() + strategy.extra_rows();
        if dim == 0 {
            return Err(Error::Config("dim must be positive".into()));
        }
        if input.rows() != expected_rows || output.rows() != vocab.len() || output.cols() != dim {
            return Err(Error::Config(format!(
                "matrix shapes {}x{} / {}x{} do not match vocabulary {} + {} extra rows",
                input.rows(),
                input.cols(),
                output.rows(),
                output.cols(),
                vocab.len(),
                strategy.extra_rows()
            )));
        }
        if !input.is_finite() || !output.is_finite() {
            return Err(Error::Config("non-finite matrix entries".into()));
        }
        Ok(Self::assemble(vocab, strategy, input, output))
    }

    fn assemble(vocab: Vocabulary, strategy: SegmentationStrategy, input: Matrix<F>, output: Matrix<F>) -> Self {
        let segmenter = Segmenter::new(&strategy, &vocab);
        EmbeddingModel {
            dim: input.cols(),
            input,
            output,
            vocab,
            strategy,
            segmenter,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn strategy(&self) -> &SegmentationStrategy {
        &self.strategy
    }

    pub fn input(&self) -> &Matrix<F> {
        &self.input
    }

    pub fn output(&self) -> &Matrix<F> {
        &self.output
    }

    pub fn input_mut(&mut self) -> &mut Matrix<F> {
        &mut self.input
    }

    pub fn output_mut(&mut self) -> &mut Matrix<F> {
        &mut self.output
    }

    pub(crate) fn matrices_mut(&mut self) -> (&mut Matrix<F>, &mut Matrix<F>) {
        (&mut self.input, &mut self.output)
    }

    pub fn segmenter(&self) -> &Segmenter {
        &self.segmenter
    }

    /// Input rows of a word id.
    pub fn subword_rows(&self, id: u32) -> &[u32] {
        self.segmenter.rows(id)
    }

    /// Sum of the word's subword rows into `out`.
    pub fn compose_into(&self, id: u32, out: &mut [F]) {
        out.iter_mut().for_each(|x| *x = F::zero());
        for &row in self.segmenter.rows(id) {
            for (o, &v) in out.iter_mut().zip(self.input.row(row as usize)) {
                *o += v;
            }
        }
    }

    pub fn compose_id(&self, id: u32) -> Vec<F> {
        let mut out = vec![F::zero(); self.dim];
        self.compose_into(id, &mut out);
        out
    }

    pub fn compose(&self, word: &str) -> Result<Vec<F>> {
        Ok(self.compose_id(self.vocab.require(word)?))
    }

    /// `compose(center) . output[context]`.
    pub fn score(&self, center: &str, context: &str) -> Result<F> {
        let h = self.compose(center)?;
        let ctx = self.vocab.require(context)?;
        Ok(dot(&h, self.output.row(ctx as usize)))
    }

    /// Composed vectors of the whole vocabulary, one row per word id.
    pub fn composed_matrix(&self) -> Matrix<F> {
        let mut m = Matrix::zeros(self.vocab.len(), self.dim);
        for id in 0..self.vocab.len() {
            let mut row = vec![F::zero(); self.dim];
            self.compose_into(id as u32, &mut row);
            m.row_mut(id).copy_from_slice(&row);
        }
        m
    }

    /// Writes composed vectors in word2vec text format.
    pub fn write_text<W: Write>(&self, mut writer: W) -> io::Result<()> {
        writeln!(writer, "{} {}", self.vocab.len(), self.dim)?;
        let mut buf = vec![F::zero(); self.dim];
        let mut line = String::new();
        for (id, word) in self.vocab.words().iter().enumerate() {
            self.compose_into(id as u32, &mut buf);
            line.clear();
            line.push_str(word);
            for x in &buf {
                line.push(' ');
                line.push_str(&format_sig6(x.to_f64().unwrap_or(f64::NAN)));
            }
            writeln!(writer, "{line}")?;
        }
        writer.flush()
    }

    pub fn save_text(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_text(BufWriter::new(file)).map_err(|e| Error::io(path, e))
    }

    /// Reads word2vec text vectors into a whole-word model. Counts are
    /// unknown and set to 1; output rows are zero.
    pub fn read_text<R: BufRead>(reader: R, context: &str) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let (n, dim) = loop {
            let Some((i, line)) = lines.next() else {
                return Err(Error::parse(context, 1, "missing header"));
            };
            let line = line.map_err(|e| Error::io(context, e))?;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            let parsed = match fields.as_slice() {
                [n, d] => n.parse::<usize>().ok().zip(d.parse::<usize>().ok()),
                _ => None,
            };
            match parsed {
                Some((n, d)) if d > 0 => break (n, d),
                _ => return Err(Error::parse(context, i + 1, "header must be `<count> <dim>`")),
            }
        };
        let mut words = Vec::with_capacity(n);
        let mut data = Vec::with_capacity(n * dim);
        for (i, line) in lines {
            let line = line.map_err(|e| Error::io(context, e))?;
            let mut fields = line.split_whitespace();
            let Some(word) = fields.next() else { continue };
            let before = data.len();
            for field in fields {
                let value = field
                    .parse::<F>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::parse(context, i + 1, format!("bad number {field:?}")))?;
                data.push(value);
            }
            if data.len() - before != dim {
                return Err(Error::parse(
                    context,
                    i + 1,
                    format!("expected {dim} values, found {}", data.len() - before),
                ));
            }
            words.push((word.to_owned(), 1u64));
        }
        if words.len() != n {
            return Err(Error::parse(
                context,
                words.len() + 1,
                format!("header announces {n} words, found {}", words.len()),
            ));
        }
        let vocab = Vocabulary::from_entries(words)?;
        let input = Matrix::from_vec(n, dim, data);
        let output = Matrix::zeros(n, dim);
        Self::from_parts(vocab, SegmentationStrategy::Whole, input, output)
    }

    pub fn load_text(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_text(BufReader::new(file), &path.display().to_string())
    }

    /// Writes the native checkpoint: both matrices, the strategy and the
    /// vocabulary.
    pub fn write_checkpoint<W: Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(CHECKPOINT_MAGIC)?;
        w.write_u8(F::WIDTH)?;
        w.write_u32::<LittleEndian>(self.dim as u32)?;
        match &self.strategy {
            SegmentationStrategy::Whole => w.write_u8(0)?,
            SegmentationStrategy::CharNgrams { min_n, max_n, buckets } => {
                w.write_u8(1)?;
                w.write_u32::<LittleEndian>(*min_n as u32)?;
                w.write_u32::<LittleEndian>(*max_n as u32)?;
                w.write_u64::<LittleEndian>(*buckets)?;
            }
            SegmentationStrategy::Morphemes(lex) => {
                w.write_u8(2)?;
                w.write_u64::<LittleEndian>(lex.len() as u64)?;
                for (word, morphs) in lex.entries() {
                    write_str(&mut w, word)?;
                    w.write_u32::<LittleEndian>(morphs.len() as u32)?;
                    for m in morphs {
                        write_str(&mut w, m)?;
                    }
                }
            }
        }
        w.write_u64::<LittleEndian>(self.vocab.len() as u64)?;
        for (word, &count) in self.vocab.words().iter().zip(self.vocab.counts()) {
            write_str(&mut w, word)?;
            w.write_u64::<LittleEndian>(count)?;
        }
        for m in [&self.input, &self.output] {
            w.write_u64::<LittleEndian>(m.rows() as u64)?;
            for &x in m.as_slice() {
                x.write_le(&mut w)?;
            }
        }
        w.flush()
    }

    pub fn save_checkpoint(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_checkpoint(BufWriter::new(file))
            .map_err(|e| Error::io(path, e))
    }

    pub fn read_checkpoint<R: Read>(mut r: R) -> Result<Self> {
        let fmt = |e: io::Error| Error::Format(e.to_string());
        let mut magic = [0u8; 6];
        r.read_exact(&mut magic).map_err(fmt)?;
        if &magic != CHECKPOINT_MAGIC {
            return Err(Error::Format("missing MGLAB1 magic".into()));
        }
        let width = r.read_u8().map_err(fmt)?;
        if width != F::WIDTH {
            return Err(Error::Format(format!(
                "checkpoint stores {width}-byte floats, expected {}",
                F::WIDTH
            )));
        }
        let dim = r.read_u32::<LittleEndian>().map_err(fmt)? as usize;
        let strategy = match r.read_u8().map_err(fmt)? {
            0 => SegmentationStrategy::Whole,
            1 => {
                let min_n = r.read_u32::<LittleEndian>().map_err(fmt)? as usize;
                let max_n = r.read_u32::<LittleEndian>().map_err(fmt)? as usize;
                let buckets = r.read_u64::<LittleEndian>().map_err(fmt)?;
                SegmentationStrategy::char_ngrams(min_n, max_n, buckets)?
            }
            2 => {
                let n = r.read_u64::<LittleEndian>().map_err(fmt)?;
                let mut entries = Vec::new();
                for _ in 0..n {
                    let word = read_str(&mut r).map_err(fmt)?;
                    let k = r.read_u32::<LittleEndian>().map_err(fmt)?;
                    let morphs = (0..k)
                        .map(|_| read_str(&mut r))
                        .collect::<io::Result<Vec<_>>>()
                        .map_err(fmt)?;
                    entries.push((word, morphs));
                }
                SegmentationStrategy::Morphemes(MorphLexicon::from_entries(entries)?)
            }
            tag => return Err(Error::Format(format!("unknown strategy tag {tag}"))),
        };
        let n = r.read_u64::<LittleEndian>().map_err(fmt)?;
        let mut entries = Vec::new();
        for _ in 0..n {
            let word = read_str(&mut r).map_err(fmt)?;
            let count = r.read_u64::<LittleEndian>().map_err(fmt)?;
            entries.push((word, count));
        }
        let vocab = Vocabulary::from_entries(entries)?;
        let read_matrix = |r: &mut R| -> Result<Matrix<F>> {
            let rows = r.read_u64::<LittleEndian>().map_err(fmt)? as usize;
            let data = (0..rows * dim)
                .map(|_| F::read_le(r))
                .collect::<io::Result<Vec<_>>>()
                .map_err(fmt)?;
            Ok(Matrix::from_vec(rows, dim, data))
        };
        let input = read_matrix(&mut r)?;
        let output = read_matrix(&mut r)?;
        Self::from_parts(vocab, strategy, input, output)
    }

    pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_checkpoint(BufReader::new(file))
    }

    /// Loads a native checkpoint or, failing the magic check, word2vec text.
    pub fn load_any(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut head = [0u8; 6];
        let n = file.read(&mut head).map_err(|e| Error::io(path, e))?;
        if n == head.len() && &head == CHECKPOINT_MAGIC {
            Self::load_checkpoint(path)
        } else {
            Self::load_text(path)
        }
    }
}

fn write_str<W: Write>(w: &mut W, s: &str) -> io::Result<()> {
    w.write_u32::<LittleEndian>(s.len() as u32)?;
    w.write_all(s.as_bytes())
}

fn read_str<R: Read>(r: &mut R) -> io::Result<String> {
    let len = r.read_u32::<LittleEndian>()? as usize;
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf)?;
    String::from_utf8(buf).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
}

/// Formats with six significant digits, `%g` style: fixed notation for
/// exponents in `-4..6`, scientific otherwise, trailing zeros dropped.
pub fn format_sig6(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    let mut out = if (-4..6).contains(&exp) {
        format!("{:.*}", (5 - exp) as usize, x)
    } else {
        mantissa.to_owned()
    };
    if out.contains('.') {
        let trimmed = out.trim_end_matches('0').trim_end_matches('.').len();
        out.truncate(trimmed);
    }
    if !(-4..6).contains(&exp) {
        out.push_str(&format!("e{exp}"));
    }
    out
}
