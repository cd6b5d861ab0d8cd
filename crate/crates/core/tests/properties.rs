use mglab_core::eval::{self, AnalogyDataset};
use mglab_core::tagger::{self, FrozenEmbeddings, TaggedCorpus, TaggerConfig};
use mglab_core::train::{sgns_loss, sgns_step, sigmoid};
use mglab_core::xmap::{self, BilingualDictionary};
use mglab_core::{EmbeddingModel, Matrix, SegmentationStrategy, Vocabulary};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.random_range(f64::EPSILON..1.0);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn random_orthogonal(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<f64> {
    DMatrix::from_fn(d, d, |_, _| gaussian(rng)).qr().q()
}

fn whole_model(names: &[String], m: &DMatrix<f64>) -> EmbeddingModel<f64> {
    let vocab = Vocabulary::from_entries(names.iter().map(|w| (w.clone(), 1))).unwrap();
    let data = (0..m.nrows())
        .flat_map(|i| (0..m.ncols()).map(move |j| m[(i, j)]))
        .collect();
    EmbeddingModel::from_parts(
        vocab,
        SegmentationStrategy::Whole,
        Matrix::from_vec(m.nrows(), m.ncols(), data),
        Matrix::zeros(m.nrows(), m.ncols()),
    )
    .unwrap()
}

fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

#[test]
fn procrustes_beats_random_rotations() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (n, d) = (60, 6);
    let x = DMatrix::from_fn(n, d, |_, _| gaussian(&mut rng));
    let noise = DMatrix::from_fn(n, d, |_, _| 0.3 * gaussian(&mut rng));
    let y = &x * random_orthogonal(&mut rng, d) + noise;
    let w = xmap::procrustes(&x, &y).unwrap();
    let best = (&x * &w - &y).norm();
    for _ in 0..1000 {
        let q = random_orthogonal(&mut rng, d);
        assert!(best <= (&x * q - &y).norm() + 1e-12);
    }
}

/// Noisy rotated copies so precision is neither 0 nor 1.
fn noisy_pair(
    seed: u64,
    n: usize,
    d: usize,
    noise: f64,
) -> (EmbeddingModel<f64>, EmbeddingModel<f64>, Vec<String>, Vec<String>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = DMatrix::from_fn(n, d, |_, _| gaussian(&mut rng));
    let e = DMatrix::from_fn(n, d, |_, _| noise * gaussian(&mut rng));
    let y = &x * random_orthogonal(&mut rng, d) + e;
    let (src, tgt) = (names("s", n), names("t", n));
    (whole_model(&src, &x), whole_model(&tgt, &y), src, tgt)
}

fn dictionary(src: &[String], tgt: &[String], range: std::ops::Range<usize>) -> BilingualDictionary {
    BilingualDictionary {
        entries: range.map(|i| (src[i].clone(), tgt[i].clone())).collect(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn precision_is_monotone_in_k(seed in any::<u64>(), noise in 0.1f64..2.0) {
        let (s, t, src, tgt) = noisy_pair(seed, 80, 8, noise);
        let train = dictionary(&src, &tgt, 0..50);
        let test = dictionary(&src, &tgt, 50..80);
        let ks = [1, 2, 5, 10, 20, 80];
        let result = xmap::eval_mapping(&s, &t, &train, &test, &ks).unwrap();
        let ps: Vec<f64> = result.precision.iter().map(|&(_, p)| p).collect();
        prop_assert!(ps.windows(2).all(|w| w[0] <= w[1]), "{ps:?}");
        prop_assert_eq!(*ps.last().unwrap(), 1.0);
    }

    #[test]
    fn mapping_ignores_dictionary_order(seed in any::<u64>()) {
        let (s, t, src, tgt) = noisy_pair(seed, 60, 6, 0.5);
        let train = dictionary(&src, &tgt, 0..40);
        let test = dictionary(&src, &tgt, 40..60);
        let mut shuffled = train.clone();
        shuffled.entries.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 1));
        let mut test_shuffled = test.clone();
        test_shuffled.entries.reverse();
        let a = xmap::eval_mapping(&s, &t, &train, &test, &[1, 5]).unwrap();
        let b = xmap::eval_mapping(&s, &t, &shuffled, &test_shuffled, &[1, 5]).unwrap();
        prop_assert_eq!(a.precision, b.precision);
        prop_assert!((a.transform - b.transform).norm() < 1e-9);
    }

    #[test]
    fn analogy_accuracy_ignores_row_rescaling(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = 30;
        let m = DMatrix::from_fn(v, 5, |_, _| gaussian(&mut rng));
        let mut scaled = m.clone();
        for i in 0..v {
            let factor = rng.random_range(0.1..10.0);
            scaled.row_mut(i).scale_mut(factor);
        }
        let ws = names("w", v);
        let mut text = String::from(": random\n");
        for _ in 0..40 {
            let q: Vec<&str> = (0..4).map(|_| ws[rng.random_range(0..v)].as_str()).collect();
            text.push_str(&q.join(" "));
            text.push('\n');
        }
        let (dataset, issues) = AnalogyDataset::parse_google(&text, "random");
        prop_assert!(issues.is_empty());
        let a = eval::eval_analogy(&whole_model(&ws, &m), &dataset).unwrap();
        let b = eval::eval_analogy(&whole_model(&ws, &scaled), &dataset).unwrap();
        prop_assert_eq!(a.micro, b.micro);
        prop_assert_eq!(a.attempted, b.attempted);
    }

    #[test]
    fn sgns_step_lowers_loss_for_small_lr(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ws = names("w", 6);
        let m = DMatrix::from_fn(6, 4, |_, _| 0.5 * gaussian(&mut rng));
        let mut model = whole_model(&ws, &m);
        for v in model.output_mut().as_mut_slice() {
            *v = 0.5 * gaussian(&mut rng);
        }
        let negs = ["w3", "w4"];
        let before = sgns_loss(&model, "w0", "w1", &negs).unwrap();
        sgns_step(&mut model, "w0", "w1", &negs, 1e-3).unwrap();
        let after = sgns_loss(&model, "w0", "w1", &negs).unwrap();
        prop_assert!(after <= before);
    }
}

/// Textbook word2vec update with pre-update scores, written out directly.
fn reference_skipgram_step(v: &mut [Vec<f64>], u: &mut [Vec<f64>], t: usize, c: usize, negs: &[usize], lr: f64) {
    let h = v[t].clone();
    let mut neu1e = vec![0.0; h.len()];
    let targets: Vec<(usize, bool)> = std::iter::once((c, true))
        .chain(negs.iter().map(|&n| (n, false)))
        .collect();
    let mut gs = Vec::new();
    for &(j, positive) in &targets {
        let mut score = 0.0;
        for k in 0..h.len() {
            score += h[k] * u[j][k];
        }
        let g = if positive { sigmoid(score) - 1.0 } else { sigmoid(score) };
        for k in 0..h.len() {
            neu1e[k] += g * u[j][k];
        }
        gs.push(g);
    }
    for (&(j, _), &g) in targets.iter().zip(&gs) {
        for k in 0..h.len() {
            u[j][k] -= lr * g * h[k];
        }
    }
    for k in 0..h.len() {
        v[t][k] -= lr * neu1e[k];
    }
}

#[test]
fn whole_strategy_matches_plain_skipgram_trace() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (n, d) = (12, 5);
    let ws = names("w", n);
    let m = DMatrix::from_fn(n, d, |_, _| 0.3 * gaussian(&mut rng));
    let mut model = whole_model(&ws, &m);
    for x in model.output_mut().as_mut_slice() {
        *x = 0.3 * gaussian(&mut rng);
    }
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| model.input().row(i).to_vec()).collect();
    let mut u: Vec<Vec<f64>> = (0..n).map(|i| model.output().row(i).to_vec()).collect();
    for _ in 0..500 {
        let t = rng.random_range(0..n);
        let c = rng.random_range(0..n);
        let negs: Vec<usize> = (0..3).map(|_| rng.random_range(0..n)).collect();
        let neg_words: Vec<&str> = negs.iter().map(|&i| ws[i].as_str()).collect();
        sgns_step(&mut model, &ws[t], &ws[c], &neg_words, 0.05).unwrap();
        reference_skipgram_step(&mut v, &mut u, t, c, &negs, 0.05);
    }
    for i in 0..n {
        assert_eq!(model.input().row(i), v[i].as_slice());
        assert_eq!(model.output().row(i), u[i].as_slice());
    }
}

#[test]
fn tagger_training_leaves_embeddings_untouched_and_learns() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let ws = names("w", 20);
    let m = DMatrix::from_fn(20, 6, |_, _| gaussian(&mut rng));
    let model = whole_model(&ws, &m);
    let embeddings = FrozenEmbeddings::from_model(&model);
    let before = embeddings.as_slice().to_vec();

    // label depends only on the word id parity, so the task is learnable
    let mut text = String::new();
    for _ in 0..200 {
        for _ in 0..rng.random_range(3..8) {
            let i = rng.random_range(0..20);
            text.push_str(&format!("{} {}\n", ws[i], if i % 2 == 0 { "EVEN" } else { "ODD" }));
        }
        text.push('\n');
    }
    let corpus = TaggedCorpus::parse_conll(&text, 1, "toy").unwrap();
    let config = TaggerConfig {
        window: 3,
        hidden: 16,
        epochs: 5,
        lr: 0.05,
        seed: 3,
    };
    let (params, report) = tagger::train_tagger(&corpus, &embeddings, &config).unwrap();
    assert_eq!(embeddings.as_slice(), before.as_slice());
    assert!(report.epoch_mean_loss.last() < report.epoch_mean_loss.first());
    let result = tagger::evaluate_tagger(&params, &corpus, &embeddings).unwrap();
    assert!(result.accuracy > 0.95, "accuracy {}", result.accuracy);
}
