//! Intrinsic evaluation: Spearman correlation on word-similarity pairs and
//! 3CosAdd analogy accuracy. Items touching out-of-vocabulary words are
//! excluded and counted.

use std::fmt;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::corpus::decode_utf8;
use crate::error::{Error, Result};
use crate::model::{EmbeddingModel, Scalar};

/// Ranks starting at 1; tied values share the mean of their rank span.
pub fn fractional_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && xs[order[end]] == xs[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)
}

/// Spearman's rank correlation: Pearson correlation of fractional ranks.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::Evaluation(format!(
            "spearman needs equal lengths, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::Evaluation("spearman needs at least two observations".into()));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::Evaluation("spearman input contains non-finite values".into()));
    }
    let constant = |v: &[f64]| v.iter().all(|&x| x == v[0]);
    if constant(xs) || constant(ys) {
        return Err(Error::Evaluation("correlation undefined for a constant list".into()));
    }
    Ok(pearson(&fractional_ranks(xs), &fractional_ranks(ys)))
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

fn composed_f64<F: Scalar>(model: &EmbeddingModel<F>, id: u32) -> Vec<f64> {
    model
        .compose_id(id)
        .into_iter()
        .map(|x| x.to_f64().unwrap_or(f64::NAN))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimilarityPair {
    pub word1: String,
    pub word2: String,
    pub score: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SimilarityDataset {
    pub pairs: Vec<SimilarityPair>,
}

/// Column layout of a similarity TSV. Defaults follow SimLex-999.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SimilarityColumns {
    pub word1: usize,
    pub word2: usize,
    pub score: usize,
    pub skip_header: bool,
}

impl Default for SimilarityColumns {
    fn default() -> Self {
        SimilarityColumns {
            word1: 0,
            word2: 1,
            score: 3,
            skip_header: true,
        }
    }
}

impl SimilarityDataset {
    /// Parses tab-separated rows; malformed rows are returned as errors and
    /// skipped.
    pub fn parse(text: &str, columns: SimilarityColumns, context: &str) -> (Self, Vec<Error>) {
        let mut dataset = SimilarityDataset::default();
        let mut issues = Vec::new();
        let skip = usize::from(columns.skip_header);
        for (i, line) in text.lines().enumerate().skip(skip) {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
            let get = |c: usize| fields.get(c).copied().filter(|f| !f.is_empty());
            let parsed = match (get(columns.word1), get(columns.word2), get(columns.score)) {
                (Some(a), Some(b), Some(s)) => s.parse::<f64>().ok().filter(|s| s.is_finite()).map(|s| (a, b, s)),
                _ => None,
            };
            match parsed {
                Some((a, b, score)) => dataset.pairs.push(SimilarityPair {
                    word1: a.to_owned(),
                    word2: b.to_owned(),
                    score,
                }),
                None => issues.push(Error::parse(
                    context,
                    i + 1,
                    "expected word1, word2 and a numeric score",
                )),
            }
        }
        (dataset, issues)
    }

    pub fn load(path: impl AsRef<Path>, columns: SimilarityColumns) -> Result<Self> {
        let (text, context) = read_text(path.as_ref())?;
        let (dataset, issues) = Self::parse(&text, columns, &context);
        for issue in issues {
            log::warn!("skipping similarity row: {issue}");
        }
        Ok(dataset)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimilarityReport {
    pub rho: f64,
    pub used: usize,
    pub oov: usize,
}

impl fmt::Display for SimilarityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "rho\t{:.6}", self.rho)?;
        writeln!(f, "used\t{}", self.used)?;
        writeln!(f, "oov\t{}", self.oov)
    }
}

/// Spearman correlation between human scores and cosine similarity of
/// composed vectors.
pub fn eval_similarity<F: Scalar>(model: &EmbeddingModel<F>, dataset: &SimilarityDataset) -> Result<SimilarityReport> {
    if dataset.pairs.is_empty() {
        return Err(Error::Evaluation("similarity dataset is empty".into()));
    }
    let vocab = model.vocab();
    let mut human = Vec::new();
    let mut predicted = Vec::new();
    let mut oov = 0;
    for pair in &dataset.pairs {
        match (vocab.id(&pair.word1), vocab.id(&pair.word2)) {
            (Some(a), Some(b)) => {
                human.push(pair.score);
                predicted.push(cosine(&composed_f64(model, a), &composed_f64(model, b)));
            }
            _ => oov += 1,
        }
    }
    if human.len() < 2 {
        return Err(Error::Insufficient {
            task: "similarity",
            usable: human.len(),
            oov,
        });
    }
    Ok(SimilarityReport {
        rho: spearman(&human, &predicted)?,
        used: human.len(),
        oov,
    })
}

/// `a : b :: c : ?` with every acceptable answer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quadruple {
    pub a: String,
    pub b: String,
    pub c: String,
    pub answers: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnalogyCategory {
    pub name: String,
    pub quadruples: Vec<Quadruple>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AnalogyDataset {
    pub categories: Vec<AnalogyCategory>,
}

impl AnalogyDataset {
    pub fn len(&self) -> usize {
        self.categories.iter().map(|c| c.quadruples.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn category_mut(&mut self, name: &str) -> &mut AnalogyCategory {
        let pos = match self.categories.iter().position(|c| c.name == name) {
            Some(pos) => pos,
            None => {
                self.categories.push(AnalogyCategory {
                    name: name.to_owned(),
                    quadruples: Vec::new(),
                });
                self.categories.len() - 1
            }
        };
        &mut self.categories[pos]
    }

    /// Google format: `: name` starts a category, other lines hold four
    /// words. Lines before any header go to category `default`; a repeated
    /// header continues the earlier category.
    pub fn parse_google(text: &str, context: &str) -> (Self, Vec<Error>) {
        let mut dataset = AnalogyDataset::default();
        let mut issues = Vec::new();
        let mut current = String::from("default");
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix(':') {
                current = name.trim().to_owned();
                dataset.category_mut(&current);
                continue;
            }
            match line.split_whitespace().collect::<Vec<_>>().as_slice() {
                [a, b, c, d] => dataset.category_mut(&current).quadruples.push(Quadruple {
                    a: (*a).to_owned(),
                    b: (*b).to_owned(),
                    c: (*c).to_owned(),
                    answers: vec![(*d).to_owned()],
                }),
                _ => issues.push(Error::parse(context, i + 1, "expected four words")),
            }
        }
        dataset.categories.retain(|c| !c.quadruples.is_empty());
        (dataset, issues)
    }

    pub fn load_google(path: impl AsRef<Path>) -> Result<Self> {
        let (text, context) = read_text(path.as_ref())?;
        let (dataset, issues) = Self::parse_google(&text, &context);
        for issue in issues {
            log::warn!("skipping analogy line: {issue}");
        }
        Ok(dataset)
    }

    /// One BATS category: lines `word<TAB>answer1/answer2/...`. Every ordered
    /// pair of distinct lines `(i, j)` yields `word_i : first answer of i ::
    /// word_j : answers of j`.
    pub fn parse_bats_category(name: &str, text: &str, context: &str) -> (AnalogyCategory, Vec<Error>) {
        let mut pairs: Vec<(String, Vec<String>)> = Vec::new();
        let mut issues = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let parsed = line.split_once('\t').and_then(|(word, answers)| {
                let word = word.trim();
                let answers: Vec<String> = answers
                    .trim()
                    .split('/')
                    .map(str::trim)
                    .filter(|a| !a.is_empty())
                    .map(str::to_owned)
                    .collect();
                (!word.is_empty() && !answers.is_empty()).then(|| (word.to_owned(), answers))
            });
            match parsed {
                Some(p) => pairs.push(p),
                None => issues.push(Error::parse(context, i + 1, "expected word<TAB>answer[/answer...]")),
            }
        }
        let mut quadruples = Vec::with_capacity(pairs.len() * pairs.len().saturating_sub(1));
        for (i, (a, a_answers)) in pairs.iter().enumerate() {
            for (j, (c, c_answers)) in pairs.iter().enumerate() {
                if i == j {
                    continue;
                }
                quadruples.push(Quadruple {
                    a: a.clone(),
                    b: a_answers[0].clone(),
                    c: c.clone(),
                    answers: c_answers.clone(),
                });
            }
        }
        let category = AnalogyCategory {
            name: name.to_owned(),
            quadruples,
        };
        (category, issues)
    }

    /// Loads one BATS file, or every `.txt` file of a directory tree in
    /// path order, one category per file named after its stem.
    pub fn load_bats(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut files = Vec::new();
        collect_bats_files(path, &mut files)?;
        files.sort();
        let mut dataset = AnalogyDataset::default();
        for file in files {
            let (text, context) = read_text(&file)?;
            let name = file
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| context.clone());
            let (category, issues) = Self::parse_bats_category(&name, &text, &context);
            for issue in issues {
                log::warn!("skipping BATS line: {issue}");
            }
            dataset.category_mut(&name).quadruples.extend(category.quadruples);
        }
        Ok(dataset)
    }
}

fn collect_bats_files(path: &Path, out: &mut Vec<std::path::PathBuf>) -> Result<()> {
    let meta = fs::metadata(path).map_err(|e| Error::io(path, e))?;
    if meta.is_file() {
        out.push(path.to_owned());
        return Ok(());
    }
    for entry in fs::read_dir(path).map_err(|e| Error::io(path, e))? {
        let entry = entry.map_err(|e| Error::io(path, e))?;
        let p = entry.path();
        if p.is_dir() {
            collect_bats_files(&p, out)?;
        } else if p.extension().is_some_and(|e| e == "txt") {
            out.push(p);
        }
    }
    Ok(())
}

fn read_text(path: &Path) -> Result<(String, String)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let context = path.display().to_string();
    let text = decode_utf8(&bytes, &context)?.to_owned();
    Ok((text, context))
}

/// Exhaustive 3CosAdd search over length-normalized composed vectors.
pub struct AnalogySolver<'a, F> {
    model: &'a EmbeddingModel<F>,
    unit: Vec<f64>,
    dim: usize,
}

impl<'a, F: Scalar> AnalogySolver<'a, F> {
    pub fn new(model: &'a EmbeddingModel<F>) -> Self {
        let dim = model.dim();
        let mut unit = Vec::with_capacity(model.vocab().len() * dim);
        for id in 0..model.vocab().len() as u32 {
            let mut v = composed_f64(model, id);
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                v.iter_mut().for_each(|x| *x /= norm);
            }
            unit.extend(v);
        }
        AnalogySolver { model, unit, dim }
    }

    fn row(&self, id: u32) -> &[f64] {
        let id = id as usize;
        &self.unit[id * self.dim..(id + 1) * self.dim]
    }

    /// Word id maximizing `cos(v, b - a + c)` outside `{a, b, c}`; the lowest
    /// id wins ties. `None` when an input is out of vocabulary.
    pub fn solve_ids(&self, a: u32, b: u32, c: u32) -> Option<u32> {
        let query: Vec<f64> = (0..self.dim)
            .map(|k| self.row(b)[k] - self.row(a)[k] + self.row(c)[k])
            .collect();
        let norm = query.iter().map(|x| x * x).sum::<f64>().sqrt();
        let scale = if norm > 0.0 { 1.0 / norm } else { 0.0 };
        let mut best: Option<(u32, f64)> = None;
        for id in 0..self.model.vocab().len() as u32 {
            if id == a || id == b || id == c {
                continue;
            }
            let sim: f64 = self.row(id).iter().zip(&query).map(|(x, q)| x * q).sum::<f64>() * scale;
            if best.is_none_or(|(_, s)| sim > s) {
                best = Some((id, sim));
            }
        }
        best.map(|(id, _)| id)
    }

    pub fn solve(&self, a: &str, b: &str, c: &str) -> Option<&'a str> {
        let vocab = self.model.vocab();
        let id = self.solve_ids(vocab.id(a)?, vocab.id(b)?, vocab.id(c)?)?;
        Some(vocab.word(id))
    }
}

/// Solves a single analogy; `None` signals an out-of-vocabulary input.
pub fn solve_analogy<'a, F: Scalar>(model: &'a EmbeddingModel<F>, a: &str, b: &str, c: &str) -> Option<&'a str> {
    AnalogySolver::new(model).solve(a, b, c)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CategoryResult {
    pub category: String,
    pub correct: usize,
    pub attempted: usize,
    pub oov: usize,
}

impl CategoryResult {
    pub fn accuracy(&self) -> f64 {
        if self.attempted == 0 {
            f64::NAN
        } else {
            self.correct as f64 / self.attempted as f64
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalogyReport {
    pub categories: Vec<CategoryResult>,
    /// Pooled over all attempted quadruples.
    pub micro: f64,
    /// Mean over categories with at least one attempted quadruple.
    pub macro_avg: f64,
    pub attempted: usize,
    pub oov: usize,
}

impl fmt::Display for AnalogyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "category\taccuracy\tattempted\toov")?;
        for c in &self.categories {
            writeln!(f, "{}\t{:.6}\t{}\t{}", c.category, c.accuracy(), c.attempted, c.oov)?;
        }
        writeln!(f, "micro\t{:.6}\t{}\t{}", self.micro, self.attempted, self.oov)?;
        writeln!(f, "macro\t{:.6}\t{}\t{}", self.macro_avg, self.attempted, self.oov)
    }
}

/// 3CosAdd accuracy. A quadruple is excluded when `a`, `b` or `c` is out of
/// vocabulary or none of its answers is in vocabulary.
pub fn eval_analogy<F: Scalar>(model: &EmbeddingModel<F>, dataset: &AnalogyDataset) -> Result<AnalogyReport> {
    if dataset.is_empty() {
        return Err(Error::Evaluation("analogy dataset is empty".into()));
    }
    let solver = AnalogySolver::new(model);
    let vocab = model.vocab();
    let mut categories = Vec::new();
    for category in &dataset.categories {
        let mut result = CategoryResult {
            category: category.name.clone(),
            correct: 0,
            attempted: 0,
            oov: 0,
        };
        for q in &category.quadruples {
            let answers: Vec<u32> = q.answers.iter().filter_map(|w| vocab.id(w)).collect();
            let ids = (vocab.id(&q.a), vocab.id(&q.b), vocab.id(&q.c));
            let (Some(a), Some(b), Some(c)) = ids else {
                result.oov += 1;
                continue;
            };
            if answers.is_empty() {
                result.oov += 1;
                continue;
            }
            result.attempted += 1;
            if solver.solve_ids(a, b, c).is_some_and(|p| answers.contains(&p)) {
                result.correct += 1;
            }
        }
        categories.push(result);
    }
    let attempted: usize = categories.iter().map(|c| c.attempted).sum();
    let oov: usize = categories.iter().map(|c| c.oov).sum();
    if attempted == 0 {
        return Err(Error::Insufficient {
            task: "analogy",
            usable: 0,
            oov,
        });
    }
    let correct: usize = categories.iter().map(|c| c.correct).sum();
    let scored: Vec<f64> = categories
        .iter()
        .filter(|c| c.attempted > 0)
        .map(CategoryResult::accuracy)
        .collect();
    Ok(AnalogyReport {
        micro: correct as f64 / attempted as f64,
        macro_avg: scored.iter().sum::<f64>() / scored.len() as f64,
        categories,
        attempted,
        oov,
    })
}
