//! Diagnosing wrong answers and walking the hint sequence.
//!
//! cargo run -p kielo --example feedback -- [pack-dir] [text] [answer] [wrong answers...]

use std::path::PathBuf;

use kielo::feedback::{AttemptHistory, MAX_ATTEMPTS};
use kielo::{cloze_exercises, diagnose_answer, load_pack, next_hint, process_story};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let dir = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../packs/fi"));
    let text = args
        .next()
        .unwrap_or_else(|| "Taloihin lisätään aurinkopaneeleja.".into());
    let answer = args.next().unwrap_or_else(|| "aurinkopaneeleja".into());
    let mut wrong: Vec<String> = args.collect();
    if wrong.is_empty() {
        wrong = vec!["aurinkopaneelit".into(), "aurinkopaneelia".into()];
    }
    let pack = load_pack(&dir)?;
    let story = process_story("demo", &text, &pack)?;
    let ex = cloze_exercises(&story, &pack)
        .into_iter()
        .find(|e| e.candidate.answer == answer)
        .ok_or("no exercise for that answer")?;
    println!(
        "blank: {} (lemma {})",
        ex.candidate.answer, ex.candidate.lemma
    );
    let mut history = AttemptHistory::default();
    let mut hearts = MAX_ATTEMPTS;
    for given in wrong {
        let diff = diagnose_answer(&given, &ex, &pack);
        let cats: Vec<&str> = diff
            .mismatches
            .iter()
            .map(|m| m.category.as_str())
            .collect();
        println!("answer {given:?}: wrong in {}", cats.join(", "));
        history.last_wrong = Some(diff);
        hearts -= 1;
        match next_hint(&ex, &history) {
            Ok(h) => {
                println!("    hint {}: {}  (hearts {hearts})", h.level, h.text);
                history.consume(&h);
            }
            Err(e) => println!("    {e}; answer was {}", ex.candidate.answer),
        }
    }
    Ok(())
}
