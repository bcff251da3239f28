#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

use rampforge::corpus::Corpus;
use rampforge::train::train_parallel;
use rampforge_core::modelbook::{ModelBook, TrainConfig};

pub fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

pub fn sample_corpus_path() -> PathBuf {
    data("sample_corpus.txt")
}

pub fn sample_corpus() -> Corpus {
    Corpus::load(&sample_corpus_path()).expect("sample corpus parses")
}

/// The model book trained on the sample corpus with default settings.
pub fn sample_book() -> &'static ModelBook {
    static BOOK: OnceLock<ModelBook> = OnceLock::new();
    BOOK.get_or_init(|| {
        let c = sample_corpus();
        train_parallel(&c.ramps, &c.fingerprint, &TrainConfig::default(), 4)
            .expect("sample corpus trains")
            .book
    })
}

pub fn rampforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rampforge"))
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 output")
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).expect("utf-8 output")
}

/// Path of the published corpus, if the environment names one.
pub fn real_corpus() -> Option<PathBuf> {
    std::env::var_os("RAMPFORGE_CORPUS").map(PathBuf::from)
}

/// First model id (in id order) that seeds `hex` without error, in clip mode.
pub fn model_accepting(hex: &str) -> String {
    use rampforge_core::colorspace::{parse_hex, srgb_to_lab};
    use rampforge_core::generator::{gamut_fit, seed_sequential, GamutMode};
    let seed = srgb_to_lab(parse_hex(hex).unwrap());
    let book = sample_book();
    let mut ids: Vec<&str> = book.models.iter().map(|m| m.id.as_str()).collect();
    ids.sort();
    ids.into_iter()
        .find(|id| {
            seed_sequential(book.model(id).unwrap(), seed)
                .and_then(|r| gamut_fit(&r, GamutMode::Clip))
                .is_ok()
        })
        .expect("some model accepts the seed")
        .to_string()
}
