//! Tokens, chosen analyses, chunks and construct instances for a text.
//!
//! cargo run -p kielo --example annotate -- [pack-dir] [text]

use std::path::PathBuf;

use kielo::{constructs_for_token, load_pack, process_story};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let dir = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../packs/fi"));
    let text = args
        .next()
        .unwrap_or_else(|| "Energiakriisin lähestyessä kaikki keinot on otettava käyntiin.".into());
    let pack = load_pack(&dir)?;
    let story = process_story("demo", &text, &pack)?;
    for (i, t) in story.tokens.iter().enumerate() {
        let analysis = t.chosen.as_ref().map_or("?".to_string(), |a| {
            format!("{} {} {}", a.lemma, a.pos, a.features)
        });
        let links = constructs_for_token(&story, i, &pack)?;
        println!(
            "{i:3} {:<16} {analysis:<50} {}",
            t.surface,
            links.join(", ")
        );
    }
    for ch in &story.chunks {
        println!(
            "chunk {:?} {}..={} head {}: {}",
            ch.kind,
            ch.start,
            ch.end,
            ch.head,
            story.span_text(ch.start, ch.end)
        );
    }
    for inst in &story.constructs {
        println!("construct {} at {:?}", inst.construct, inst.matched);
    }
    Ok(())
}
