//! End-to-end runs of the `rampforge` binary against golden files.
//!
//! Set `UPDATE_GOLDEN=1` to rewrite the files in `tests/golden`.

mod common;

use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use common::{rampforge, stderr, stdout};
use tempfile::TempDir;

const COLOR: &str = "#336699";

fn golden(name: &str, actual: &str) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let want = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("{}: {e} (run with UPDATE_GOLDEN=1)", path.display()));
    assert!(want == actual, "{name} differs from its golden\n--- want\n{want}\n--- got\n{actual}");
}

struct Trained {
    dir: TempDir,
    stdout: String,
}

impl Trained {
    fn book(&self) -> PathBuf {
        self.dir.path().join("book.json")
    }

    fn path(&self, name: &str) -> String {
        self.dir.path().join(name).to_str().unwrap().to_string()
    }
}

fn train_into(dir: &Path) -> String {
    let corpus = common::sample_corpus_path();
    let o = rampforge(&[
        "train",
        "--corpus",
        corpus.to_str().unwrap(),
        "--models",
        dir.join("book.json").to_str().unwrap(),
        "--seed",
        "42",
        "--jobs",
        "4",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    stdout(&o)
}

fn trained() -> &'static Trained {
    static T: OnceLock<Trained> = OnceLock::new();
    T.get_or_init(|| {
        let dir = TempDir::new().unwrap();
        let stdout = train_into(dir.path());
        Trained { dir, stdout }
    })
}

fn run_ok(args: &[&str]) -> String {
    let o = rampforge(args);
    assert!(o.status.success(), "{args:?}: {}", stderr(&o));
    stdout(&o)
}

#[test]
fn train_output_and_book_are_stable() {
    let t = trained();
    let book = std::fs::read_to_string(t.book()).unwrap();
    golden("train.txt", &t.stdout);
    golden("book.json", &book);

    let again = TempDir::new().unwrap();
    assert_eq!(train_into(again.path()), t.stdout);
    assert_eq!(std::fs::read_to_string(again.path().join("book.json")).unwrap(), book);
}

#[test]
fn cli_book_matches_the_library() {
    let book = rampforge::book::load_modelbook(&trained().book()).unwrap();
    assert_eq!(&book, common::sample_book());
}

#[test]
fn stats_golden() {
    let corpus = common::sample_corpus_path();
    let out = run_ok(&["stats", "--corpus", corpus.to_str().unwrap()]);
    golden("stats.txt", &out);
}

#[test]
fn seed_contains_the_seed_color() {
    let t = trained();
    let book = t.book();
    let out = run_ok(&[
        "seed", "--models", book.to_str().unwrap(), "--model", "kmeans-0", "--color", COLOR, "--gamut", "clip",
    ]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 9);
    assert!(lines.contains(&COLOR), "{out}");
}

#[test]
fn generation_goldens() {
    let t = trained();
    let book = t.book();
    let book = book.to_str().unwrap();
    let model = common::model_accepting(COLOR);
    let state = t.path("seed.json");
    let edited = t.path("edited.json");

    let mut all = String::new();
    let mut record = |title: &str, text: String| {
        all.push_str(&format!("== {title}\n{text}"));
    };
    let seed_args = ["seed", "--models", book, "--model", &model, "--color", COLOR, "--gamut", "clip"];
    record("seed hex", run_ok(&[&seed_args[..], &["--out", &state]].concat()));
    for format in ["lab", "css"] {
        record(&format!("seed {format}"), run_ok(&[&seed_args[..], &["--format", format]].concat()));
    }
    record("seed n=5", run_ok(&[&seed_args[..], &["--n", "5"]].concat()));
    record(
        "diverge",
        run_ok(&["diverge", "--models", book, "--model", &model, "--color", COLOR, "--gamut", "clip"]),
    );
    record(
        "diverge rotate 30 lab",
        run_ok(&[
            "diverge", "--models", book, "--model", &model, "--color", COLOR, "--gamut", "clip", "--rotate", "30",
            "--format", "lab",
        ]),
    );
    record(
        "transform scale 0.9",
        run_ok(&["transform", "--models", book, "--state", &state, "--scale", "0.9", "--out", &edited]),
    );
    record("export edited lab", run_ok(&["export", "--models", book, "--state", &edited, "--format", "lab"]));
    record("export edited css", run_ok(&["export", "--models", book, "--state", &edited, "--format", "css"]));

    // The state files themselves are part of the contract.
    record("seed state", std::fs::read_to_string(&state).unwrap() + "\n");
    record("edited state", std::fs::read_to_string(&edited).unwrap() + "\n");
    golden("generate.txt", &all);
}

#[test]
fn reverted_transform_warns_and_keeps_the_ramp() {
    let t = trained();
    let book = t.book();
    let book = book.to_str().unwrap();
    let model = common::model_accepting(COLOR);
    let state = t.path("revert.json");
    let before = run_ok(&[
        "seed", "--models", book, "--model", &model, "--color", COLOR, "--gamut", "clip", "--out", &state,
    ]);
    let o = rampforge(&["transform", "--models", book, "--state", &state, "--scale", "40"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), before);
    assert!(stderr(&o).contains("kept the previous ramp"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_1() {
    let book = trained().book();
    let book = book.to_str().unwrap();
    for args in [
        &["seed", "--models", book, "--model", "kmeans-0", "--color", "not-a-color"][..],
        &["frobnicate"][..],
        &["seed", "--models", book][..],
        &["seed", "--models", book, "--model", "kmeans-0", "--color", COLOR, "--format", "png"][..],
        &["seed", "--models", book, "--model", "kmeans-0", "--color", COLOR, "--n", "1"][..],
    ] {
        let o = rampforge(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(!stderr(&o).is_empty());
        assert!(stdout(&o).is_empty());
    }
    let o = rampforge(&["seed", "--models", book, "--model", "kmeans-0", "--color", "not-a-color"]);
    assert!(stderr(&o).contains("not-a-color"), "{}", stderr(&o));
}

#[test]
fn data_errors_exit_2() {
    let t = trained();
    let book = t.book();
    let book = book.to_str().unwrap();
    let missing = t.path("nope.json");
    let garbage = t.path("garbage.txt");
    std::fs::write(&garbage, "this is not a corpus\n").unwrap();
    for args in [
        &["seed", "--models", book, "--model", "no-such-model", "--color", COLOR][..],
        &["seed", "--models", &missing, "--model", "kmeans-0", "--color", COLOR][..],
        &["stats", "--corpus", &missing][..],
        &["stats", "--corpus", &garbage][..],
        &["export", "--models", book, "--state", &missing][..],
        &["diverge", "--models", book, "--model", "kmeans-0", "--color", COLOR, "--gamut", "clip", "--rotate", "75"][..],
    ] {
        let o = rampforge(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
        assert!(stderr(&o).starts_with("error: "), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn rotation_clamp_flag() {
    let book = trained().book();
    let book = book.to_str().unwrap();
    let model = common::model_accepting(COLOR);
    let base = ["diverge", "--models", book, "--model", &model, "--color", COLOR, "--gamut", "clip"];
    let clamped = rampforge(&[&base[..], &["--rotate", "75", "--clamp"]].concat());
    assert!(clamped.status.success());
    assert!(stderr(&clamped).contains("clamped to 60"), "{}", stderr(&clamped));
    let at_limit = run_ok(&[&base[..], &["--rotate", "60"]].concat());
    assert_eq!(stdout(&clamped), at_limit);
}

#[test]
fn help_exits_0() {
    let o = rampforge(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    for cmd in ["train", "seed", "diverge", "transform", "stats", "export", "serve"] {
        assert!(stdout(&o).contains(cmd), "{cmd}");
    }
}
