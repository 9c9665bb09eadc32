//! Paradigm analysis and generation.
//!
//! cargo run -p kielo --example morphology -- [pack-dir] [word | lemma pos features]

use std::path::PathBuf;

use kielo::{analyze, generate, load_pack, FeatureBundle};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let dir = args
        .first()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../packs/fi"));
    let pack = load_pack(&dir)?;
    match &args.get(1..).unwrap_or_default() {
        [lemma, pos, features] => {
            let f = FeatureBundle::parse(features)?;
            println!(
                "{lemma} {pos} {f} -> {}",
                generate(lemma, pos, &f, &pack)?.join(", ")
            );
        }
        words => {
            let words: Vec<&str> = if words.is_empty() {
                vec!["aurinkopaneeleja", "otettava", "suolaa", "asuvan"]
            } else {
                words.iter().map(String::as_str).collect()
            };
            for w in words {
                println!("{w}");
                for a in analyze(w, &pack)? {
                    println!("    {} {} {}", a.lemma, a.pos, a.features);
                }
            }
        }
    }
    Ok(())
}
