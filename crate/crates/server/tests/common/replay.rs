//! Journal replay: a restarted service reproduces every view.

use std::path::PathBuf;

use kielo::learner::{estimate, EventLog};
use kielo_server::model::Role;
use kielo_server::{Tutor, TutorConfig};

use super::tutor;

fn journal_path(tag: &str) -> PathBuf {
    let nanos = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .unwrap()
        .as_nanos();
    std::env::temp_dir().join(format!(
        "kielo-journal-{tag}-{}-{nanos}.ndjson",
        std::process::id()
    ))
}

fn views(
    t: &mut Tutor,
    learners: &[String],
    teacher: &str,
    group: &str,
    sessions: &[(String, String)],
) -> String {
    let mut out = Vec::new();
    for l in learners {
        out.push(serde_json::to_string(&t.progress(l, l).unwrap()).unwrap());
    }
    out.push(serde_json::to_string(&t.group_progress(teacher, group).unwrap()).unwrap());
    for (l, s) in sessions {
        out.push(serde_json::to_string(&t.session(l, s).unwrap()).unwrap());
    }
    out.push(t.attempt_log());
    out.join("\n")
}

/// Drives several learners through sessions, then reopens the service from
/// its journal and compares progress, sessions, the attempt log and the fit.
pub fn replay_reconstructs_views() -> Result<usize, String> {
    let path = journal_path("replay");
    let config = TutorConfig::default();
    let texts = [
        ("fi", "Taloihin lisätään aurinkopaneeleja. Lisäsin keittoon suolaa.\n\nMaija tutustui kaupunkiin. Hän muuttui vanhaksi."),
        ("ru", "Мы говорили о новой книге. Я занимаюсь спортом."),
        ("de", "Ich fahre mit dem Zug. Wir spielen mit dem Hund."),
    ];
    let (before, log_before, learners, teacher, group, sessions) = {
        let mut t = tutor(Some(&path), config);
        let teacher = t
            .register("teacher", Role::Teacher)
            .map_err(|e| e.to_string())?
            .id;
        let group = t
            .create_group(&teacher, "class")
            .map_err(|e| e.to_string())?
            .id;
        let mut learners = Vec::new();
        let mut sessions = Vec::new();
        for k in 0..4usize {
            let l = t
                .register(&format!("l{k}"), Role::Learner)
                .map_err(|e| e.to_string())?
                .id;
            t.invite(&teacher, &group, &l).map_err(|e| e.to_string())?;
            t.accept(&l, &group).map_err(|e| e.to_string())?;
            for (lang, text) in texts {
                let story = t
                    .upload_story(&l, lang, "s", text)
                    .map_err(|e| e.to_string())?;
                let s = t
                    .start_session(&l, &story, Some(2), Some(k as u64))
                    .map_err(|e| e.to_string())?;
                for i in 0..s.exercises.len() {
                    // a mix of hints, wrong and right answers
                    match (k + i) % 4 {
                        0 => {
                            let _ = t.submit_answer(&l, &s.id, i, "väärin");
                        }
                        1 => {
                            let _ = t.request_hint(&l, &s.id, i);
                            let _ = t.request_hint(&l, &s.id, i);
                        }
                        2 => {
                            for _ in 0..5 {
                                let _ = t.submit_answer(&l, &s.id, i, "x");
                            }
                        }
                        _ => {}
                    }
                }
                sessions.push((l.clone(), s.id));
            }
            learners.push(l);
        }
        // the lemma shown in the box is right only for citation forms
        for (l, s) in &sessions {
            let view = t.session(l, s).map_err(|e| e.to_string())?;
            for e in view.exercises.iter().filter(|e| e.answer.is_none()).take(1) {
                let _ = t.submit_answer(l, s, e.index, &e.payload.lemma);
            }
        }
        let v = views(&mut t, &learners, &teacher, &group, &sessions);
        (v, t.attempt_log(), learners, teacher, group, sessions)
    };
    let mut reopened = tutor(Some(&path), config);
    let after = views(&mut reopened, &learners, &teacher, &group, &sessions);
    let log = EventLog::from_ndjson(&reopened.attempt_log()).map_err(|e| e.to_string())?;
    let _ = std::fs::remove_file(&path);
    if before != after {
        return Err("views differ after replay".into());
    }
    let original = EventLog::from_ndjson(&log_before).map_err(|e| e.to_string())?;
    let a = estimate(log.observations()).map_err(|e| e.to_string())?;
    let b = estimate(original.observations()).map_err(|e| e.to_string())?;
    if a != b {
        return Err("skill state differs after replay".into());
    }
    Ok(log.observations().len())
}
