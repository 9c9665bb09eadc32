//! Attempt log, credit assignment, NDJSON replay and a progress report.
//!
//! cargo run -p kielo --example progress

use kielo::learner::{estimate, progress_report, AttemptEvent, AttemptKind, EventLog};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut log = EventLog::new();
    log.register_exercise("ex-1", &["plural-partitive".into()]);
    log.register_exercise(
        "ex-2",
        &[
            "present-passive-participle".into(),
            "necessive-construction".into(),
        ],
    );
    let script = [
        ("ex-1", AttemptKind::Answer, Some(false), 1),
        ("ex-1", AttemptKind::HintRequest, None, 2),
        ("ex-1", AttemptKind::Answer, Some(true), 2),
        ("ex-2", AttemptKind::Answer, Some(true), 0),
    ];
    for (t, (ex, kind, correct, hints)) in script.into_iter().enumerate() {
        let event = AttemptEvent {
            learner: "maija".into(),
            exercise: ex.into(),
            constructs: Vec::new(),
            ordinal: t as u32 + 1,
            kind,
            given: correct.map(|_| "…".into()),
            correct,
            hints,
            timestamp: t as u64,
        };
        for o in log.record_attempt(event)? {
            println!(
                "{ex}: {} {} weight {:.1}",
                o.construct,
                if o.outcome { "credit" } else { "penalty" },
                o.weight
            );
        }
    }
    let ndjson = log.to_ndjson();
    print!("{ndjson}");
    let replayed = EventLog::from_ndjson(&ndjson)?;
    let state = estimate(replayed.observations())?;
    for p in progress_report("maija", Some(&state), replayed.observations(), |_| None) {
        println!(
            "{:<28} n={} rate {:.3} trend {:+.3} p {:.3}",
            p.construct,
            p.observations,
            p.weighted_rate,
            p.trend,
            p.p_correct.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
