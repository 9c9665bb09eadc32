//! Cloze and multiple-choice exercises with their hint sequences.
//!
//! cargo run -p kielo --example exercises -- [pack-dir] [text]

use std::path::PathBuf;

use kielo::{build_mc, cloze_exercises, load_pack, process_story};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let dir = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../packs/fi"));
    let text = args.next().unwrap_or_else(|| {
        "Taloihin lisätään aurinkopaneeleja. Maija kertoi vanhempien asuvan kaupungissa.".into()
    });
    let pack = load_pack(&dir)?;
    let story = process_story("demo", &text, &pack)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for ex in cloze_exercises(&story, &pack) {
        let c = &ex.candidate;
        println!(
            "[{}] {} (lemma: {}) links: {}",
            ex.id,
            c.answer,
            c.lemma,
            c.links.join(", ")
        );
        for h in &ex.hints {
            println!("    hint {}: {}", h.level, h.text);
        }
        for construct in &c.links {
            match build_mc(c, construct, &story, &pack, &mut rng) {
                Ok(mc) => println!("    choice ({construct}): {}", mc.options.join(" | ")),
                Err(e) => println!("    choice ({construct}): {e}"),
            }
        }
    }
    Ok(())
}
