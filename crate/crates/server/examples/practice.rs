//! A practice session driven through the service layer, in memory.
//!
//! cargo run -p kielo-server --example practice -- [seed]

use std::path::PathBuf;

use kielo_server::model::Role;
use kielo_server::{Tutor, TutorConfig};

const STORY: &str =
    "Lisäsin keittoon suolaa. Energiakriisin lähestyessä kaikki keinot on otettava käyntiin.\n\n\
Maija kertoi vanhempien asuvan kaupungissa. Voisitko sammuttaa valon?";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(1);
    let packs = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../packs");
    let mut tutor = Tutor::open(&packs, None, TutorConfig::default())?;

    let learner = tutor.register("Aino", Role::Learner)?.id;
    let story = tutor.upload_story(&learner, "fi", "Arkea", STORY)?;
    let session = tutor.start_session(&learner, &story, Some(2), Some(seed))?;
    println!(
        "session {} with {} exercises",
        session.id,
        session.exercises.len()
    );

    for ex in &session.exercises {
        let (start, end) = (ex.payload.char_start, ex.payload.char_end);
        let blanked: String = STORY
            .chars()
            .enumerate()
            .map(|(i, c)| if (start..end).contains(&i) { '_' } else { c })
            .collect();
        let sentence = blanked
            .split_inclusive(['.', '?'])
            .find(|s| s.contains('_'))
            .unwrap_or("")
            .trim();
        println!(
            "\n#{} {:?} ({}) {sentence}",
            ex.index, ex.payload.kind, ex.payload.lemma
        );
        if !ex.payload.options.is_empty() {
            println!("   options: {}", ex.payload.options.join(" / "));
        }

        // answer with the lemma first, then ask for a hint, then try the options
        let mut tries = vec![ex.payload.lemma.clone()];
        tries.extend(ex.payload.options.iter().cloned());
        let first = tutor.submit_answer(&learner, &session.id, ex.index, &tries[0])?;
        report(&tries[0], &first);
        if first.correct || first.answer.is_some() {
            continue;
        }
        match tutor.request_hint(&learner, &session.id, ex.index) {
            Ok(r) => println!(
                "   hint requested: {}",
                r.hint.map(|h| h.text).unwrap_or_default()
            ),
            Err(e) => println!("   hint refused: {e}"),
        }
        for t in &tries[1..] {
            match tutor.submit_answer(&learner, &session.id, ex.index, t) {
                Ok(r) => {
                    report(t, &r);
                    if r.correct || r.answer.is_some() {
                        break;
                    }
                }
                Err(e) => println!("   {t:?}: {e}"),
            }
        }
    }

    let progress = tutor.progress(&learner, &learner)?;
    println!("\nθ = {:.2}", progress.theta);
    for c in progress.constructs {
        println!(
            "  {:40} {}/{} weighted {:.2}",
            c.construct, c.correct, c.observations, c.weighted_rate
        );
    }
    Ok(())
}

fn report(given: &str, r: &kielo_server::tutor::AttemptResult) {
    let verdict = if r.correct { "correct" } else { "wrong" };
    println!("   {given:?}: {verdict}, hearts {}", r.hearts);
    if let Some(d) = &r.diff {
        println!("   differs in: {}", d.categories.join(", "));
    }
    if let Some(h) = &r.hint {
        println!("   hint: {}", h.text);
    }
    if let Some(a) = &r.answer {
        println!("   answer: {a}");
    }
}
