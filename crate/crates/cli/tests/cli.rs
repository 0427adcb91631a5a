use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures").join(name)
}

fn csg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_csg"))
        .args(args)
        .env_remove("CSG_DATA_DIR")
        .output()
        .expect("spawn csg")
}

fn ok(args: &[&str]) -> String {
    let out = csg(args);
    assert!(
        out.status.success(),
        "csg {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    csg(args).status.code().expect("exit code")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn small_train(dir: &TempDir, output: &str, extra: &[&str]) -> PathBuf {
    let out = dir.path().join(output);
    let corpus = fixture("sentences100.txt");
    let mut args = vec![
        "train", "--corpus", s(&corpus), "--output", s(&out), "--dim", "20", "--epochs", "2",
        "--min-count", "1", "--threads", "1",
    ];
    args.extend_from_slice(extra);
    ok(&args);
    out
}

fn manifest_value(path: &Path, key: &str) -> Option<String> {
    let text = fs::read_to_string(path).unwrap();
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")).map(str::to_owned))
}

#[test]
fn preprocess_matches_golden_counts() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("corpus.txt");
    ok(&[
        "preprocess", "--input", s(&fixture("corpus30.txt")), "--output", s(&out), "--sample-rate", "1",
    ]);
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 25);
    assert_eq!(text.split_whitespace().count(), 425);
    let manifest = dir.path().join("corpus.txt.manifest");
    assert_eq!(manifest_value(&manifest, "stats.sentences_dropped").as_deref(), Some("12"));
    assert_eq!(manifest_value(&manifest, "output.tokens").as_deref(), Some("425"));
    assert!(manifest_value(&manifest, "input.sha256").is_some());
}

#[test]
fn preprocess_unstructured_chunks() {
    let dir = TempDir::new().unwrap();
    let raw = dir.path().join("stream.txt");
    fs::write(&raw, "a b c d e f g").unwrap();
    let out = dir.path().join("chunks.txt");
    ok(&[
        "preprocess", "--input", s(&raw), "--output", s(&out), "--unstructured", "--chunk-len", "3",
        "--sample-rate", "1",
    ]);
    assert_eq!(fs::read_to_string(&out).unwrap(), "a b c\nd e f\ng\n");
}

#[test]
fn usage_errors_exit_2() {
    let corpus = fixture("sentences100.txt");
    let c = s(&corpus);
    assert_eq!(code(&["train", "--corpus", c, "--output", "/tmp/x.bin", "--arch", "csg", "--fusion", "lf", "--gamma", "1"]), 2);
    assert_eq!(code(&["train", "--corpus", c, "--output", "/tmp/x.bin", "--fusion", "ef"]), 2);
    assert_eq!(code(&["train", "--corpus", c, "--output", "/tmp/x.bin", "--arch", "cbow", "--gamma", "0.5"]), 2);
    assert_eq!(code(&["train", "--corpus", c, "--output", "/tmp/x.bin", "--bogus"]), 2);
    assert_eq!(code(&["train", "--corpus", "/no/such/corpus", "--output", "/tmp/x.bin"]), 2);
    assert_eq!(code(&["train", "--output", "/tmp/x.bin"]), 2);
    assert_eq!(code(&["eval-sim", "--vectors", "/no/such.bin", "--dataset", "simlex"]), 2);
    assert_eq!(code(&["frobnicate"]), 2);
}

#[test]
fn config_file_and_conflicts() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# lf at one is not allowed\narch=csg\nfusion=lf\ngamma=1\n").unwrap();
    let corpus = fixture("sentences100.txt");
    assert_eq!(code(&["train", "--config", s(&cfg), "--corpus", s(&corpus), "--output", "/tmp/x.bin"]), 2);

    // A flag overrides the file and makes the combination legal.
    fs::write(&cfg, "arch=csg\nfusion=lf\ngamma=1\ndim=50\n").unwrap();
    let out = small_train(&dir, "v.bin", &["--config", s(&cfg), "--gamma", "0.5"]);
    let manifest = dir.path().join("v.bin.manifest");
    assert_eq!(manifest_value(&manifest, "config.fusion").as_deref(), Some("lf"));
    assert_eq!(manifest_value(&manifest, "config.gamma").as_deref(), Some("0.5"));
    assert_eq!(manifest_value(&manifest, "config.dim").as_deref(), Some("20"));
    assert!(out.is_file());
}

#[test]
fn nan_exits_4() {
    let dir = TempDir::new().unwrap();
    let corpus = fixture("sentences100.txt");
    let out = dir.path().join("v.bin");
    let result = csg(&[
        "train", "--corpus", s(&corpus), "--output", s(&out), "--dim", "20", "--epochs", "2", "--min-count",
        "1", "--threads", "1", "--lr", "1e30",
    ]);
    assert_eq!(result.status.code(), Some(4), "{}", String::from_utf8_lossy(&result.stderr));
    assert!(!out.exists());
}

#[test]
fn train_writes_vectors_manifest_and_vocab() {
    let dir = TempDir::new().unwrap();
    let vocab = dir.path().join("vocab.tsv");
    let out = small_train(&dir, "v.bin", &["--arch", "csg", "--save-text", "--save-vocab", s(&vocab)]);
    let manifest = dir.path().join("v.bin.manifest");
    for key in [
        "corpus.sha256",
        "vocab.size",
        "epoch.1.gamma",
        "epoch.2.lr",
        "wall_seconds",
        "output.vectors",
        "output.vectors_text",
    ] {
        assert!(manifest_value(&manifest, key).is_some(), "missing {key}");
    }
    assert_eq!(manifest_value(&manifest, "config.gamma").as_deref(), Some("linear"));
    assert_eq!(manifest_value(&manifest, "epoch.1.gamma").as_deref(), Some("0"));
    assert_eq!(manifest_value(&manifest, "epoch.2.gamma").as_deref(), Some("1"));
    let size: usize = manifest_value(&manifest, "vocab.size").unwrap().parse().unwrap();
    assert_eq!(fs::read_to_string(&vocab).unwrap().lines().count(), size);
    assert!(fs::read(&out).unwrap().starts_with(format!("{size} 20\n").as_bytes()));
    assert!(dir.path().join("v.txt").is_file());

    // Reusing the saved vocabulary gives the same model.
    let again = small_train(&dir, "w.bin", &["--arch", "csg", "--read-vocab", s(&vocab)]);
    assert_eq!(fs::read(&out).unwrap(), fs::read(&again).unwrap());
}

fn parse_text(path: &Path) -> Vec<(String, Vec<f32>)> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            let mut f = l.split(' ');
            let w = f.next().unwrap().to_owned();
            (w, f.map(|x| x.parse().unwrap()).collect())
        })
        .collect()
}

#[test]
fn convert_round_trips() {
    let dir = TempDir::new().unwrap();
    let bin = small_train(&dir, "v.bin", &[]);
    let txt = dir.path().join("v.txt");
    let back = dir.path().join("back.bin");
    let txt2 = dir.path().join("again.vec");
    ok(&["convert", "--input", s(&bin), "--output", s(&txt)]);
    ok(&["convert", "--input", s(&txt), "--output", s(&back)]);
    ok(&["convert", "--input", s(&back), "--output", s(&txt2), "--from", "binary", "--to", "text"]);
    assert!(dir.path().join("back.bin.manifest").is_file());

    // The text writer is shortest-round-trip, so text -> binary is exact too.
    assert_eq!(fs::read(&bin).unwrap(), fs::read(&back).unwrap());
    let (a, b) = (parse_text(&txt), parse_text(&txt2));
    assert_eq!(a.len(), b.len());
    for ((wa, va), (wb, vb)) in a.iter().zip(&b) {
        assert_eq!(wa, wb);
        assert!(va.iter().zip(vb).all(|(x, y)| (x - y).abs() <= 1e-4));
    }
    assert_eq!(code(&["convert", "--input", s(&bin), "--output", s(&txt), "--to", "yaml"]), 2);
}

#[test]
fn corrupt_vectors_exit_3() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "3 2\nan 0.1 0.2\nover 0.3\n").unwrap();
    let ds = dir.path().join("pairs.txt");
    fs::write(&ds, "an over 1\n").unwrap();
    assert_eq!(code(&["eval-sim", "--vectors", s(&bad), "--dataset", s(&ds)]), 3);
}

const PAIRS: &str = "an\tover\t3.5\nnear\tunder\t8.0\nbright\twhite\t7.1\ncold\tfrozen\t9.0\n\
                     snow\tfrost\t8.2\nbridge\troad\t6.0\nwind\tthe\t1.0\nunknownword\tan\t2.0\n";

#[test]
fn eval_sim_summary_and_replay() {
    let dir = TempDir::new().unwrap();
    let ds = dir.path().join("pairs.txt");
    fs::write(&ds, PAIRS).unwrap();
    let first = small_train(&dir, "a.bin", &["--arch", "csg", "--fusion", "lf", "--gamma", "random"]);
    let stdout = ok(&["eval-sim", "--vectors", s(&first), "--dataset", s(&ds)]);
    assert!(stdout.contains("sim.pairs.pairs_used=7\n"), "{stdout}");
    assert!(stdout.contains("sim.pairs.pairs_skipped=1\n"));
    let summary_a = fs::read_to_string(dir.path().join("a.bin.pairs.summary")).unwrap();
    assert_eq!(summary_a, stdout);
    assert!(dir.path().join("a.bin.pairs.summary.manifest").is_file());

    // Replaying the manifest into a new output reproduces the evaluation.
    let second = dir.path().join("b.bin");
    let manifest = dir.path().join("a.bin.manifest");
    ok(&["train", "--config", s(&manifest), "--output", s(&second)]);
    let summary_b = dir.path().join("b.summary");
    ok(&["eval-sim", "--vectors", s(&second), "--dataset", s(&ds), "--summary", s(&summary_b)]);
    assert_eq!(fs::read_to_string(summary_b).unwrap(), summary_a);
}

#[test]
fn named_datasets_resolve_through_data_dir() {
    let dir = TempDir::new().unwrap();
    let vectors = small_train(&dir, "v.txt", &[]);
    fs::write(dir.path().join("ws353.txt"), format!("Word 1,Word 2,Human (mean)\n{}", PAIRS.replace('\t', ","))).unwrap();
    fs::write(
        dir.path().join("questions-words.txt"),
        ": nature\nsnow cold wind cold\n: gram-x\nan a over near\nzzz a b c\n",
    )
    .unwrap();
    let run = |args: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_csg"))
            .args(args)
            .env("CSG_DATA_DIR", dir.path())
            .output()
            .unwrap()
    };
    let out = run(&["eval-sim", "--vectors", s(&vectors), "--dataset", "ws353"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("sim.ws353.rho="));

    let out = run(&["eval-analogy", "--vectors", s(&vectors), "--dataset", "google"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("analogy.google.overall.answerable=2\n"), "{text}");
    assert!(text.contains("analogy.google.overall.unanswerable=1\n"));
    assert!(text.contains("analogy.google.semantic.answerable=1\n"));

    assert_eq!(run(&["eval-sim", "--vectors", s(&vectors), "--dataset", "google"]).status.code(), Some(2));
    assert_eq!(run(&["eval-sim", "--vectors", s(&vectors), "--dataset", "men"]).status.code(), Some(2));
}

#[test]
fn probe_csv_and_report() {
    let dir = TempDir::new().unwrap();
    let corpus = fixture("sentences100.txt");
    let sg_out = dir.path().join("sg.bin");
    let unknown = [
        "train", "--corpus", s(&corpus), "--output", s(&sg_out), "--min-count", "1",
        "--probe-center", "absentword", "--probe-words", "the",
    ];
    assert_eq!(code(&unknown), 2);
    assert!(!dir.path().join("sg.bin").exists());
    let words = ["--probe-center", "snow", "--probe-words", "the,cold"];
    small_train(&dir, "sg.bin", &words);
    small_train(&dir, "csg.bin", &[&["--arch", "csg", "--gamma", "0.5"][..], &words].concat());
    let sg = dir.path().join("sg.bin.probe.csv");
    let csv = fs::read_to_string(&sg).unwrap();
    assert!(csv.starts_with("epoch,word,mean_x100,n\n1,the,"), "{csv}");
    assert_eq!(csv.lines().count(), 5);

    let summary = dir.path().join("probe.summary");
    let table = ok(&[
        "probe-report",
        s(&sg),
        s(&dir.path().join("csg.bin.probe.csv")),
        "--summary",
        s(&summary),
    ]);
    let lines: Vec<&str> = table.lines().collect();
    assert!(lines[0].starts_with("run"), "{table}");
    assert!(lines[0].ends_with("epoch1   epoch2"));
    assert_eq!(lines.len(), 5);
    assert!(lines[3].starts_with("csg  the"));
    let summary = fs::read_to_string(summary).unwrap();
    assert!(summary.contains("probe.sg.cold.epoch2.n="));

    assert_eq!(code(&["train", "--corpus", "x", "--output", "y", "--probe-center", "snow"]), 2);
}

#[test]
fn bench_reports_every_architecture() {
    let dir = TempDir::new().unwrap();
    let summary = dir.path().join("bench.summary");
    let out = ok(&["bench", "--tokens", "3000", "--dim", "16", "--summary", s(&summary)]);
    for arch in ["sg", "cbow", "csg_ef_0.5", "csg_lf_0.5", "csg_ef_random"] {
        assert!(out.contains(&format!("bench.{arch}.tokens_per_sec=")), "{out}");
    }
    assert!(out.contains("bench.sg.cost_vs_sg=1.000"));
    assert_eq!(fs::read_to_string(&summary).unwrap(), out);

    let corpus = fixture("sentences100.txt");
    let out = ok(&["bench", "--corpus", s(&corpus), "--dim", "16"]);
    assert!(out.contains("bench.cbow.tokens_per_sec="));
}
