use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/data")
        .join(name)
}

fn mglab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mglab"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("spawn mglab")
}

fn ok(args: &[&str]) -> String {
    let out = mglab(args);
    assert!(
        out.status.success(),
        "mglab {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Small slice of the bundled corpus so each training run is quick.
fn small_corpus(dir: &Path) -> PathBuf {
    let text = fs::read_to_string(data("corpus.txt")).unwrap();
    let head: String = text.lines().take(3000).flat_map(|l| [l, "\n"]).collect();
    let path = dir.join("small.txt");
    fs::write(&path, head).unwrap();
    path
}

fn train(dir: &Path, kind: &str, seed: &str) -> PathBuf {
    let corpus = small_corpus(dir);
    let out = dir.join(format!("{kind}-{seed}.bin"));
    let lexicon = data("lexicon.tsv");
    let mut args = vec![
        "train",
        "--model",
        kind,
        "--corpus",
        s(&corpus),
        "--dim",
        "16",
        "--epochs",
        "1",
        "--seed",
        seed,
        "--buckets",
        "5000",
        "--table-len",
        "100000",
        "--out",
        s(&out),
    ];
    if kind == "morph" {
        args.extend(["--lexicon", s(&lexicon)]);
    }
    ok(&args);
    out
}

fn kv(report: &str, key: &str) -> String {
    report
        .lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('\t')))
        .unwrap_or_else(|| panic!("no `{key}` in report:\n{report}"))
        .to_owned()
}

#[test]
fn train_writes_loadable_checkpoint_and_vectors() {
    let dir = TempDir::new().unwrap();
    let corpus = small_corpus(dir.path());
    let (bin, vec, vocab, report) = (
        dir.path().join("m.bin"),
        dir.path().join("m.vec"),
        dir.path().join("vocab.tsv"),
        dir.path().join("report.json"),
    );
    let stdout = ok(&[
        "train",
        "--model",
        "sg",
        "--corpus",
        s(&corpus),
        "--dim",
        "16",
        "--epochs",
        "1",
        "--table-len",
        "100000",
        "--out",
        s(&bin),
        "--vectors",
        s(&vec),
        "--vocab-out",
        s(&vocab),
        "--report",
        s(&report),
    ]);
    assert_eq!(kv(&stdout, "model"), "sg");
    let model = mglab_core::EmbeddingModel::<f32>::load_checkpoint(&bin).unwrap();
    assert_eq!(model.dim(), 16);
    let header = fs::read_to_string(&vec).unwrap();
    assert_eq!(header.lines().next().unwrap(), format!("{} 16", model.vocab().len()));
    assert_eq!(fs::read_to_string(&vocab).unwrap().lines().count(), model.vocab().len());
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert!(json["final_loss_ema"].as_f64().unwrap() < json["initial_loss_ema"].as_f64().unwrap());
    assert_eq!(json["config"]["dim"], 16);
}

#[test]
fn rerunning_train_is_idempotent() {
    let dir = TempDir::new().unwrap();
    let first = fs::read(train(dir.path(), "ft", "3")).unwrap();
    let second = fs::read(train(dir.path(), "ft", "3")).unwrap();
    assert_eq!(first, second);
}

#[test]
fn morph_without_lexicon_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let corpus = small_corpus(dir.path());
    let out = mglab(&[
        "train",
        "--model",
        "morph",
        "--corpus",
        s(&corpus),
        "--out",
        s(&dir.path().join("m.bin")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--lexicon"));
}

#[test]
fn missing_input_file_exits_2() {
    let dir = TempDir::new().unwrap();
    let out = mglab(&[
        "eval-sim",
        "--model",
        s(&dir.path().join("nope.bin")),
        "--dataset",
        s(&data("similarity.tsv")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--model"));
}

#[test]
fn eval_reports_account_for_every_item() {
    let dir = TempDir::new().unwrap();
    let model = train(dir.path(), "morph", "1");
    let report_path = dir.path().join("sim.tsv");
    let sim = ok(&[
        "eval-sim",
        "--model",
        s(&model),
        "--dataset",
        s(&data("similarity.tsv")),
        "--report",
        s(&report_path),
    ]);
    assert_eq!(fs::read_to_string(&report_path).unwrap().trim_end(), sim.trim_end());
    let rho: f64 = kv(&sim, "rho").parse().unwrap();
    assert!((-1.0..=1.0).contains(&rho));
    let used: usize = kv(&sim, "used").parse().unwrap();
    let oov: usize = kv(&sim, "oov").parse().unwrap();
    assert_eq!(used + oov, 30);

    let ana = ok(&[
        "eval-analogy",
        "--model",
        s(&model),
        "--dataset",
        s(&data("analogy.txt")),
    ]);
    assert!(ana.starts_with("category\taccuracy\tattempted\toov\n"), "{ana}");
    let micro: Vec<&str> = ana
        .lines()
        .find(|l| l.starts_with("micro"))
        .unwrap()
        .split('\t')
        .collect();
    let attempted: usize = micro[2].parse().unwrap();
    let oov: usize = micro[3].parse().unwrap();
    assert_eq!(attempted + oov, 20);
}

#[test]
fn eval_accepts_word2vec_text() {
    let dir = TempDir::new().unwrap();
    let bin = train(dir.path(), "sg", "1");
    let vec = dir.path().join("m.vec");
    mglab_core::EmbeddingModel::<f32>::load_checkpoint(&bin)
        .unwrap()
        .save_text(&vec)
        .unwrap();
    let a = ok(&["eval-sim", "--model", s(&bin), "--dataset", s(&data("similarity.tsv"))]);
    let b = ok(&["eval-sim", "--model", s(&vec), "--dataset", s(&data("similarity.tsv"))]);
    assert_eq!(kv(&a, "used"), kv(&b, "used"));
    let (ra, rb): (f64, f64) = (kv(&a, "rho").parse().unwrap(), kv(&b, "rho").parse().unwrap());
    assert!((ra - rb).abs() < 1e-3);
}

#[test]
fn compare_prints_one_row_per_model() {
    let dir = TempDir::new().unwrap();
    let sg = train(dir.path(), "sg", "1");
    let ft = train(dir.path(), "ft", "1");
    let table = ok(&[
        "compare",
        "--models",
        s(&sg),
        s(&ft),
        "--similarity",
        s(&data("similarity.tsv")),
        "--analogy",
        s(&data("analogy.txt")),
    ]);
    let rows: Vec<&str> = table.lines().collect();
    assert_eq!(
        rows[0],
        "model\tkind\trho\tsim_used\tsim_oov\tanalogy_micro\tanalogy_attempted\tanalogy_oov"
    );
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[1].split('\t').nth(1), Some("sg"));
    assert_eq!(rows[2].split('\t').nth(1), Some("ft"));

    let out = mglab(&["compare", "--models", s(&sg)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn map_reports_precision_at_each_k() {
    let dir = TempDir::new().unwrap();
    let a = train(dir.path(), "sg", "1");
    let b = train(dir.path(), "sg", "2");
    let words: Vec<String> = mglab_core::EmbeddingModel::<f32>::load_checkpoint(&a)
        .unwrap()
        .vocab()
        .words()
        .to_vec();
    let dict = |range: std::ops::Range<usize>| words[range].iter().map(|w| format!("{w}\t{w}\n")).collect::<String>();
    let (train_dict, test_dict) = (dir.path().join("train.dict"), dir.path().join("test.dict"));
    fs::write(&train_dict, dict(0..100)).unwrap();
    fs::write(&test_dict, dict(100..140)).unwrap();
    let out = ok(&[
        "map",
        "--source",
        s(&a),
        "--target",
        s(&b),
        "--train-dict",
        s(&train_dict),
        "--test-dict",
        s(&test_dict),
        "--k",
        "1,5,10",
    ]);
    let p: Vec<f64> = ["p@1", "p@5", "p@10"]
        .iter()
        .map(|k| kv(&out, k).parse().unwrap())
        .collect();
    assert!(p.windows(2).all(|w| w[0] <= w[1]), "{out}");
}

#[test]
fn tagger_train_then_eval_round_trip() {
    let dir = TempDir::new().unwrap();
    let model = train(dir.path(), "sg", "1");
    // crude suffix tagging over corpus words, so the task is learnable
    let text = fs::read_to_string(small_corpus(dir.path())).unwrap();
    let mut conll = String::new();
    for line in text.lines().take(400) {
        for w in line.split_whitespace() {
            let tag = if w.ends_with('s') {
                "PL"
            } else if w.ends_with("ed") {
                "PAST"
            } else {
                "O"
            };
            conll.push_str(&format!("{w} {tag} O\n"));
        }
        conll.push('\n');
    }
    let data_path = dir.path().join("train.conll");
    fs::write(&data_path, conll).unwrap();
    let params = dir.path().join("tagger.json");
    let train_out = ok(&[
        "tag-train",
        "--embeddings",
        s(&model),
        "--train",
        s(&data_path),
        "--hidden",
        "16",
        "--epochs",
        "3",
        "--lr",
        "0.05",
        "--out",
        s(&params),
    ]);
    assert_eq!(kv(&train_out, "labels"), "3");
    let eval_out = ok(&[
        "tag-eval",
        "--embeddings",
        s(&model),
        "--params",
        s(&params),
        "--data",
        s(&data_path),
    ]);
    assert_eq!(kv(&eval_out, "accuracy"), kv(&train_out, "train_accuracy"));
    let accuracy: f64 = kv(&eval_out, "accuracy").parse().unwrap();
    assert!(accuracy > 0.5, "{eval_out}");
}
