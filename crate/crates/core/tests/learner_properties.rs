//! Properties of feature bundles, the attempt log and the Rasch fit.

use kielo::learner::{
    credit_weight, estimate, p_correct, progress_report, AttemptEvent, AttemptKind,
    ConstructObservation, EventLog,
};
use kielo::FeatureBundle;
use proptest::prelude::*;

fn bundle() -> impl Strategy<Value = FeatureBundle> {
    prop::collection::btree_map("[A-Z][a-z]{1,6}", "[A-Z][a-z0-9]{0,5}", 0..6).prop_map(|m| {
        let mut b = FeatureBundle::new();
        for (c, v) in m {
            b.set(c, v);
        }
        b
    })
}

/// One scripted attempt: learner, exercise, answer or hint, correctness.
type Step = (usize, usize, bool, bool);

/// Replays the steps into a fresh log, skipping events the log rejects.
fn build_log(steps: &[Step]) -> EventLog {
    let mut log = EventLog::new();
    for e in 0..4 {
        let constructs: Vec<String> = (0..=e % 3).map(|c| format!("c{}", (e + c) % 5)).collect();
        log.register_exercise(&format!("e{e}"), &constructs);
    }
    let mut ordinal = std::collections::BTreeMap::new();
    let mut hints = std::collections::BTreeMap::new();
    for (t, &(l, e, answer, correct)) in steps.iter().enumerate() {
        let (learner, exercise) = (format!("u{l}"), format!("e{e}"));
        if log.is_closed(&learner, &exercise) {
            continue;
        }
        let key = (l, e);
        let n = ordinal.entry(key).or_insert(0u32);
        *n += 1;
        let h = hints.entry(key).or_insert(0u32);
        if !answer || !correct {
            *h = (*h + 1).min(5);
        }
        let event = AttemptEvent {
            learner,
            exercise: exercise.clone(),
            constructs: log_constructs(&log, &exercise),
            ordinal: *n,
            kind: if answer {
                AttemptKind::Answer
            } else {
                AttemptKind::HintRequest
            },
            given: answer.then(|| "x".to_string()),
            correct: answer.then_some(correct),
            hints: *h,
            timestamp: t as u64,
        };
        log.record_attempt(event).unwrap();
    }
    log
}

fn log_constructs(log: &EventLog, exercise: &str) -> Vec<String> {
    log.records()
        .iter()
        .find_map(|r| match r {
            kielo::learner::LogRecord::Exercise { id, constructs } if id == exercise => {
                Some(constructs.clone())
            }
            _ => None,
        })
        .unwrap()
}

fn steps() -> impl Strategy<Value = Vec<Step>> {
    prop::collection::vec((0..3usize, 0..4usize, any::<bool>(), any::<bool>()), 1..60)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn features_display_parse_round_trip(b in bundle()) {
        let text = b.to_string();
        prop_assert_eq!(FeatureBundle::parse(&text).unwrap(), b.clone());
        prop_assert!(b.contains(&FeatureBundle::new()));
        prop_assert!(b.merged(&b) == b);
    }

    #[test]
    fn merge_overrides_win(a in bundle(), o in bundle()) {
        let m = a.merged(&o);
        prop_assert!(m.contains(&o));
        for (c, v) in a.iter() {
            prop_assert_eq!(m.get(c), Some(o.get(c).unwrap_or(v)));
        }
    }

    #[test]
    fn credit_weight_is_bounded_and_non_increasing(h in 0u32..10) {
        let w = credit_weight(h);
        prop_assert!((0.2..=1.0).contains(&w));
        prop_assert!(credit_weight(h + 1) <= w);
    }

    #[test]
    fn p_correct_rises_with_ability(t in -5.0f64..5.0, d in 0.01f64..3.0, bs in prop::collection::vec(-3.0f64..3.0, 1..4)) {
        prop_assert!(p_correct(t + d, &bs) > p_correct(t, &bs));
        let hardest = bs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!((p_correct(t, &bs) - p_correct(t, &[hardest])).abs() < 1e-15);
    }

    /// Hearts never go negative and a closed exercise rejects further events.
    #[test]
    fn hearts_stay_within_budget(s in steps()) {
        let log = build_log(&s);
        for l in 0..3 {
            for e in 0..4 {
                let (learner, exercise) = (format!("u{l}"), format!("e{e}"));
                prop_assert!(log.hearts(&learner, &exercise) <= 5);
            }
        }
        for o in log.observations() {
            prop_assert!(o.weight > 0.0 && o.weight <= 1.0);
        }
    }

    /// Serializing the log and replaying it reproduces observations, the fit
    /// and every progress report exactly.
    #[test]
    fn replay_is_deterministic(s in steps()) {
        let log = build_log(&s);
        let replayed = EventLog::from_ndjson(&log.to_ndjson()).unwrap();
        prop_assert_eq!(replayed.records(), log.records());
        prop_assert_eq!(replayed.observations(), log.observations());
        prop_assert_eq!(replayed.to_ndjson(), log.to_ndjson());
        if log.observations().is_empty() {
            return Ok(());
        }
        let a = estimate(log.observations()).unwrap();
        let b = estimate(replayed.observations()).unwrap();
        prop_assert_eq!(&a, &b);
        let mean = a.difficulties.values().sum::<f64>() / a.difficulties.len() as f64;
        prop_assert!(mean.abs() < 1e-9);
        for l in 0..3 {
            let id = format!("u{l}");
            let none = |_: &str| None;
            prop_assert_eq!(
                progress_report(&id, Some(&a), log.observations(), none),
                progress_report(&id, Some(&b), replayed.observations(), none)
            );
        }
    }
}

#[test]
fn estimate_orders_constructs_by_failure_rate() {
    let mut obs = Vec::new();
    for l in 0..10 {
        for (c, rate) in [("easy", 9), ("hard", 2)] {
            for k in 0..10 {
                obs.push(ConstructObservation {
                    learner: format!("u{l}"),
                    construct: c.into(),
                    outcome: k < rate,
                    weight: 1.0,
                });
            }
        }
    }
    let s = estimate(&obs).unwrap();
    assert!(s.difficulties["hard"] > 1.0 && s.difficulties["easy"] < -1.0);
    assert!((s.difficulties["hard"] + s.difficulties["easy"]).abs() < 1e-9);
}
