//! Supervised cross-lingual mapping.
//!
//! Both embedding spaces go through a normalization chain (unit length,
//! mean centering, unit length), an orthogonal map is fitted on a seed
//! dictionary by Procrustes, and test words are translated by cosine
//! nearest-neighbor retrieval in the target space.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use indexmap::IndexMap;
use nalgebra::DMatrix;
use serde::Serialize;

use crate::corpus::decode_utf8;
use crate::error::{Error, Result};
use crate::model::{EmbeddingModel, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NormStep {
    /// Scale every row to Euclidean norm 1.
    Unit,
    /// Subtract the column means.
    Center,
}

pub const DEFAULT_CHAIN: [NormStep; 3] = [NormStep::Unit, NormStep::Center, NormStep::Unit];

/// Applies `steps` in order to the rows of `m`. `words` names rows in
/// errors.
pub fn normalize(m: &mut DMatrix<f64>, steps: &[NormStep], words: &[String]) -> Result<()> {
    for step in steps {
        match step {
            NormStep::Unit => {
                for (i, mut row) in m.row_iter_mut().enumerate() {
                    let norm = row.norm();
                    if norm == 0.0 {
                        let word = words.get(i).cloned().unwrap_or_else(|| format!("row {i}"));
                        return Err(Error::ZeroVector(word));
                    }
                    row /= norm;
                }
            }
            NormStep::Center => {
                if m.nrows() == 0 {
                    continue;
                }
                let mean = m.row_mean();
                for mut row in m.row_iter_mut() {
                    row -= &mean;
                }
            }
        }
    }
    Ok(())
}

/// Orthogonal `W` minimizing `||X W - Y||_F`: `W = U V^T` for the SVD
/// `X^T Y = U S V^T`. Rows of `x` and `y` are paired.
pub fn procrustes(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if x.shape() != y.shape() {
        return Err(Error::Config(format!(
            "procrustes needs equal shapes, got {:?} and {:?}",
            x.shape(),
            y.shape()
        )));
    }
    let cross = x.transpose() * y;
    let svd = cross.svd(true, true);
    let max = svd.singular_values.max();
    let min = svd.singular_values.min();
    if min <= max * 1e-12 {
        log::warn!("cross-covariance is rank deficient (singular values {min:e}..{max:e}); the map is not unique");
    }
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    Ok(u * v_t)
}

/// Word translation pairs, possibly with several targets per source.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BilingualDictionary {
    pub entries: Vec<(String, String)>,
}

impl BilingualDictionary {
    pub fn parse(text: &str, context: &str) -> (Self, Vec<Error>) {
        let mut dict = BilingualDictionary::default();
        let mut issues = Vec::new();
        for (i, line) in text.lines().enumerate() {
            match line.split_whitespace().collect::<Vec<_>>().as_slice() {
                [] => {}
                [src, tgt] => dict.entries.push(((*src).to_owned(), (*tgt).to_owned())),
                _ => issues.push(Error::parse(context, i + 1, "expected `source target`")),
            }
        }
        (dict, issues)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let context = path.display().to_string();
        let (dict, issues) = Self::parse(decode_utf8(&bytes, &context)?, &context);
        for issue in issues {
            log::warn!("skipping dictionary line: {issue}");
        }
        Ok(dict)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct MappingCoverage {
    pub train_pairs_used: usize,
    pub train_pairs_oov: usize,
    pub test_sources_used: usize,
    pub test_pairs_oov: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct MappingResult {
    #[serde(skip)]
    pub transform: DMatrix<f64>,
    pub normalization: Vec<NormStep>,
    pub coverage: MappingCoverage,
    /// `(k, precision@k)` in the requested order.
    pub precision: Vec<(usize, f64)>,
    /// `||W^T W - I||_F`.
    pub orthogonality_error: f64,
}

impl MappingResult {
    pub fn precision_at(&self, k: usize) -> Option<f64> {
        self.precision.iter().find(|(kk, _)| *kk == k).map(|(_, p)| *p)
    }
}

impl fmt::Display for MappingResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let chain: Vec<&str> = self
            .normalization
            .iter()
            .map(|s| match s {
                NormStep::Unit => "unit",
                NormStep::Center => "center",
            })
            .collect();
        writeln!(f, "normalization\t{}", chain.join(","))?;
        writeln!(f, "train_pairs_used\t{}", self.coverage.train_pairs_used)?;
        writeln!(f, "train_pairs_oov\t{}", self.coverage.train_pairs_oov)?;
        writeln!(f, "test_sources_used\t{}", self.coverage.test_sources_used)?;
        writeln!(f, "test_pairs_oov\t{}", self.coverage.test_pairs_oov)?;
        writeln!(f, "orthogonality_error\t{:e}", self.orthogonality_error)?;
        for (k, p) in &self.precision {
            writeln!(f, "p@{k}\t{p:.6}")?;
        }
        Ok(())
    }
}

fn normalized_space<F: Scalar>(model: &EmbeddingModel<F>) -> Result<DMatrix<f64>> {
    let composed = model.composed_matrix();
    let mut m = DMatrix::from_row_iterator(
        composed.rows(),
        composed.cols(),
        composed.as_slice().iter().map(|x| x.to_f64().unwrap_or(f64::NAN)),
    );
    normalize(&mut m, &DEFAULT_CHAIN, model.vocab().words())?;
    Ok(m)
}

/// Fits the map on `train` and reports precision@k on the distinct source
/// words of `test`. A source counts as correct at `k` when any of its gold
/// targets is among the `k` nearest target words.
pub fn eval_mapping<F: Scalar, G: Scalar>(
    source: &EmbeddingModel<F>,
    target: &EmbeddingModel<G>,
    train: &BilingualDictionary,
    test: &BilingualDictionary,
    ks: &[usize],
) -> Result<MappingResult> {
    if ks.is_empty() || ks.contains(&0) {
        return Err(Error::Config("k values must be positive".into()));
    }
    if source.dim() != target.dim() {
        return Err(Error::Config(format!(
            "source dim {} differs from target dim {}",
            source.dim(),
            target.dim()
        )));
    }
    let (sv, tv) = (source.vocab(), target.vocab());
    let xs = normalized_space(source)?;
    let ys = normalized_space(target)?;
    let mut coverage = MappingCoverage::default();

    let pairs: Vec<(usize, usize)> = train
        .entries
        .iter()
        .filter_map(|(s, t)| {
            let found = sv.id(s).zip(tv.id(t));
            if found.is_none() {
                coverage.train_pairs_oov += 1;
            }
            found.map(|(s, t)| (s as usize, t as usize))
        })
        .collect();
    coverage.train_pairs_used = pairs.len();
    if pairs.is_empty() {
        return Err(Error::Insufficient {
            task: "mapping (train)",
            usable: 0,
            oov: coverage.train_pairs_oov,
        });
    }
    let x = DMatrix::from_fn(pairs.len(), xs.ncols(), |i, j| xs[(pairs[i].0, j)]);
    let y = DMatrix::from_fn(pairs.len(), ys.ncols(), |i, j| ys[(pairs[i].1, j)]);
    let w = procrustes(&x, &y)?;

    // gold targets per distinct source, in first-appearance order
    let mut gold: IndexMap<usize, Vec<usize>> = IndexMap::new();
    for (s, t) in &test.entries {
        match sv.id(s).zip(tv.id(t)) {
            Some((s, t)) => gold.entry(s as usize).or_default().push(t as usize),
            None => coverage.test_pairs_oov += 1,
        }
    }
    coverage.test_sources_used = gold.len();
    if gold.is_empty() {
        return Err(Error::Insufficient {
            task: "mapping (test)",
            usable: 0,
            oov: coverage.test_pairs_oov,
        });
    }
    let sources: Vec<usize> = gold.keys().copied().collect();
    let queries = DMatrix::from_fn(sources.len(), xs.ncols(), |i, j| xs[(sources[i], j)]) * &w;
    // rows of ys are unit length; scaling the query does not change ranks
    let sims = &ys * queries.transpose();

    let mut hits: BTreeMap<usize, usize> = ks.iter().map(|&k| (k, 0)).collect();
    for (col, targets) in gold.values().enumerate() {
        let column = sims.column(col);
        // best gold similarity; its rank is the number of words that beat
        // it, with lower ids winning ties
        let (best_id, best_sim) = targets
            .iter()
            .map(|&t| (t, column[t]))
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
            .expect("non-empty gold set");
        let rank = column
            .iter()
            .enumerate()
            .filter(|&(id, &s)| s > best_sim || (s == best_sim && id < best_id))
            .count();
        for (&k, h) in hits.iter_mut() {
            if rank < k {
                *h += 1;
            }
        }
    }
    let n = sources.len() as f64;
    let precision = ks.iter().map(|k| (*k, hits[k] as f64 / n)).collect();
    let ortho = (w.transpose() * &w - DMatrix::identity(w.ncols(), w.ncols())).norm();
    Ok(MappingResult {
        transform: w,
        normalization: DEFAULT_CHAIN.to_vec(),
        coverage,
        precision,
        orthogonality_error: ortho,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_step() {
        let mut m = DMatrix::from_row_slice(1, 2, &[3.0, 4.0]);
        normalize(&mut m, &[NormStep::Unit], &[]).unwrap();
        assert!((m[(0, 0)] - 0.6).abs() < 1e-15 && (m[(0, 1)] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn center_with_zero_mean_is_identity() {
        let mut m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, -1.0, 0.0]);
        let before = m.clone();
        normalize(&mut m, &[NormStep::Center], &[]).unwrap();
        assert_eq!(m, before);
    }

    #[test]
    fn zero_row_names_word() {
        let mut m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let words = vec!["a".to_owned(), "hollow".to_owned()];
        match normalize(&mut m, &DEFAULT_CHAIN, &words) {
            Err(Error::ZeroVector(w)) => assert_eq!(w, "hollow"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn one_dimensional_sign_flip() {
        let x = DMatrix::from_row_slice(2, 1, &[1.0, 2.0]);
        let y = DMatrix::from_row_slice(2, 1, &[-1.0, -2.0]);
        let w = procrustes(&x, &y).unwrap();
        assert!((w[(0, 0)] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn identity_when_spaces_agree() {
        let x = DMatrix::from_fn(10, 3, |i, j| ((i * 3 + j) as f64 * 0.71).sin());
        let w = procrustes(&x, &x).unwrap();
        assert!((w - DMatrix::identity(3, 3)).norm() < 1e-8);
    }

    #[test]
    fn dictionary_parsing() {
        let (d, issues) = BilingualDictionary::parse("кот cat\nкот tomcat\n\nbroken\n", "d.txt");
        assert_eq!(d.entries.len(), 2);
        assert_eq!(issues.len(), 1);
    }
}
