use std::path::PathBuf;

use kielo::gold::{load_gold, project, score};
use kielo::{load_pack, process_story};

fn pack_dir(lang: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../packs")
        .join(lang)
}

fn check(lang: &str) {
    let pack = load_pack(pack_dir(lang)).unwrap_or_else(|e| panic!("{lang}: {e}"));
    let (text, gold) = load_gold(&pack).unwrap();
    let story = process_story("gold", &text, &pack).unwrap();
    let detected = project(&story);
    for d in detected.iter().filter(|d| !gold.contains(d)) {
        eprintln!("{lang} spurious: {d:?}");
    }
    for g in gold.iter().filter(|g| !detected.contains(g)) {
        eprintln!("{lang} missed: {g:?}");
    }
    let (p, r) = score(&detected, &gold);
    assert!(
        p == 1.0 && r == 1.0,
        "{lang}: precision {p:.3} recall {r:.3}"
    );
}

#[test]
fn finnish_gold() {
    check("fi");
}

#[test]
fn russian_gold() {
    check("ru");
}

#[test]
fn german_gold() {
    check("de");
}
