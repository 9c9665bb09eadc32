//! End-to-end API behavior: uploads, preview, practice, placement and the
//! privacy contract.

mod common;

use axum::http::StatusCode;
use common::Client;
use kielo_server::TutorConfig;
use serde_json::{json, Value};

const NECESSIVE: &str = "Energiakriisin lähestyessä kaikki keinot on otettava käyntiin.";
const PARTITIVE: &str = "Lisäsin keittoon suolaa.";

fn cloze_only() -> TutorConfig {
    TutorConfig {
        multiple_choice_share: 0.0,
        ..TutorConfig::default()
    }
}

fn exercise_index(session: &Value, lemma: &str) -> usize {
    session["exercises"]
        .as_array()
        .unwrap()
        .iter()
        .position(|e| e["lemma"] == lemma)
        .unwrap_or_else(|| panic!("no {lemma} exercise in {session}"))
}

#[test]
fn requests_without_a_token_are_unauthorized() {
    Client::blocking(async {
        let c = Client::new(cloze_only());
        let (s, v) = c.call("GET", "/stories", None, None).await;
        assert_eq!(s, StatusCode::UNAUTHORIZED);
        assert_eq!(v["error"], "Unauthorized");
        let (s, _) = c.call("GET", "/me", Some("nope"), None).await;
        assert_eq!(s, StatusCode::UNAUTHORIZED);
    });
}

#[test]
fn upload_validates_language_and_text() {
    Client::blocking(async {
        let c = Client::new(cloze_only());
        let (_, tok) = c.user("maija", "learner").await;
        let (s, v) = c
            .call(
                "POST",
                "/stories",
                Some(&tok),
                Some(json!({"language": "xx", "title": "t", "text": "a"})),
            )
            .await;
        assert_eq!(
            (s, v["error"].as_str()),
            (StatusCode::BAD_REQUEST, Some("UnsupportedLanguage"))
        );
        let (s, v) = c
            .call(
                "POST",
                "/stories",
                Some(&tok),
                Some(json!({"language": "fi", "title": "t", "text": "  "})),
            )
            .await;
        assert_eq!(
            (s, v["error"].as_str()),
            (StatusCode::BAD_REQUEST, Some("EmptyText"))
        );
    });
}

#[test]
fn preview_lists_constructs_and_candidates() {
    Client::blocking(async {
        let c = Client::new(cloze_only());
        let (_, tok) = c.user("maija", "learner").await;
        let id = c.story(&tok, "fi", NECESSIVE).await;
        let (s, v) = c
            .call("GET", &format!("/stories/{id}/preview"), Some(&tok), None)
            .await;
        assert_eq!(s, StatusCode::OK);
        let ids: Vec<&str> = v["constructs"]
            .as_array()
            .unwrap()
            .iter()
            .map(|c| c["id"].as_str().unwrap())
            .collect();
        assert!(ids.contains(&"necessive-construction"), "{ids:?}");
        let otettava = &v["tokens"][5];
        assert_eq!(otettava["surface"], "otettava");
        assert_eq!(otettava["candidate"], true);
        assert_eq!(
            otettava["constructs"],
            json!(["present-passive-participle", "necessive-construction"])
        );
        assert!(v["chunks"]
            .as_array()
            .unwrap()
            .iter()
            .any(|ch| ch["kind"] == "AnalyticVerb"));
        let (s, g) = c
            .call(
                "GET",
                &format!("/stories/{id}/tokens/5/gloss"),
                Some(&tok),
                None,
            )
            .await;
        assert_eq!(s, StatusCode::OK);
        assert_eq!(g["lemma"], "ottaa");
    });
}

#[test]
fn practice_flow_hints_hearts_and_reveal() {
    Client::blocking(async {
        let c = Client::new(cloze_only());
        let (_, tok) = c.user("maija", "learner").await;
        let id = c.story(&tok, "fi", PARTITIVE).await;
        let (s, session) = c
            .call(
                "POST",
                &format!("/stories/{id}/sessions?density=3&seed=4"),
                Some(&tok),
                None,
            )
            .await;
        assert_eq!(s, StatusCode::CREATED, "{session}");
        assert!(
            !session.to_string().contains("suolaa"),
            "answer leaked: {session}"
        );
        let sid = session["id"].as_str().unwrap();
        let n = exercise_index(&session, "suola");
        let uri = format!("/sessions/{sid}/exercises/{n}/answer");

        // wrong in case: the case hint
        let (_, r) = c
            .call("POST", &uri, Some(&tok), Some(json!({"answer": "suola"})))
            .await;
        assert_eq!(r["correct"], false);
        assert_eq!(r["hearts"], 4);
        assert_eq!(r["diff"]["categories"], json!(["Case"]));
        assert_eq!(r["hint"]["text"], "Use another case.");
        assert_eq!(r["answer"], Value::Null);

        let (_, r) = c
            .call(
                "POST",
                &format!("/sessions/{sid}/exercises/{n}/hint"),
                Some(&tok),
                None,
            )
            .await;
        assert_eq!(r["hint"]["text"], "Use partitive case.");
        assert_eq!(r["hearts"], 3);
        let (s, r) = c
            .call(
                "POST",
                &format!("/sessions/{sid}/exercises/{n}/hint"),
                Some(&tok),
                None,
            )
            .await;
        assert_eq!(
            (s, r["error"].as_str()),
            (StatusCode::CONFLICT, Some("NoMoreHints"))
        );

        for (k, wrong) in ["suolassa", "suolalla", "suolat"].iter().enumerate() {
            let (_, r) = c
                .call("POST", &uri, Some(&tok), Some(json!({"answer": wrong})))
                .await;
            assert_eq!(r["hearts"], 2 - k);
        }
        let (_, r) = c
            .call("GET", &format!("/sessions/{sid}"), Some(&tok), None)
            .await;
        assert_eq!(r["exercises"][n]["status"], "exhausted");
        assert_eq!(r["exercises"][n]["answer"], "suolaa");
        let (s, r) = c
            .call("POST", &uri, Some(&tok), Some(json!({"answer": "suolaa"})))
            .await;
        assert_eq!(
            (s, r["error"].as_str()),
            (StatusCode::CONFLICT, Some("ExhaustedAttempts"))
        );
    });
}

#[test]
fn correct_first_answer_keeps_all_hearts() {
    Client::blocking(async {
        let c = Client::new(cloze_only());
        let (uid, tok) = c.user("maija", "learner").await;
        let id = c.story(&tok, "fi", PARTITIVE).await;
        let (_, session) = c
            .call(
                "POST",
                &format!("/stories/{id}/sessions?seed=1"),
                Some(&tok),
                None,
            )
            .await;
        let sid = session["id"].as_str().unwrap();
        let n = exercise_index(&session, "suola");
        let (_, r) = c
            .call(
                "POST",
                &format!("/sessions/{sid}/exercises/{n}/answer"),
                Some(&tok),
                Some(json!({"answer": "suolaa"})),
            )
            .await;
        assert_eq!(
            (r["correct"].as_bool(), r["hearts"].as_u64()),
            (Some(true), Some(5))
        );
        let (s, p) = c
            .call(
                "GET",
                &format!("/learners/{uid}/progress"),
                Some(&tok),
                None,
            )
            .await;
        assert_eq!(s, StatusCode::OK);
        let rows = p["constructs"].as_array().unwrap();
        assert!(
            rows.iter()
                .any(|r| r["construct"] == "fi:verb-government-partitive"
                    && r["weighted_rate"] == 1.0),
            "{p}"
        );
    });
}

#[test]
fn same_seed_same_exercises() {
    Client::blocking(async {
        let c = Client::new(TutorConfig::default());
        let (_, a) = c.user("a", "learner").await;
        let (_, b) = c.user("b", "learner").await;
        let text = "Taloihin lisätään aurinkopaneeleja. Lisäsin keittoon suolaa.\n\nEnergiakriisin lähestyessä kaikki keinot on otettava käyntiin.";
        let sa = c.story(&a, "fi", text).await;
        let sb = c.story(&b, "fi", text).await;
        let (_, x) = c
            .call(
                "POST",
                &format!("/stories/{sa}/sessions?density=2&seed=9"),
                Some(&a),
                None,
            )
            .await;
        let (_, y) = c
            .call(
                "POST",
                &format!("/stories/{sb}/sessions?density=2&seed=9"),
                Some(&b),
                None,
            )
            .await;
        let strip = |v: &Value| {
            v["exercises"]
                .as_array()
                .unwrap()
                .iter()
                .map(|e| {
                    (
                        e["lemma"].clone(),
                        e["kind"].clone(),
                        e["options"].clone(),
                        e["char_start"].clone(),
                    )
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(strip(&x), strip(&y));
        assert!(strip(&x).len() <= 4);
    });
}

#[test]
fn story_without_candidates_cannot_be_practised() {
    Client::blocking(async {
        let c = Client::new(cloze_only());
        let (_, tok) = c.user("maija", "learner").await;
        let id = c.story(&tok, "fi", "Hei hei.").await;
        let (s, v) = c
            .call("POST", &format!("/stories/{id}/sessions"), Some(&tok), None)
            .await;
        assert_eq!(
            (s, v["error"].as_str()),
            (StatusCode::UNPROCESSABLE_ENTITY, Some("NoCandidates"))
        );
    });
}

#[test]
fn active_session_is_resumed() {
    Client::blocking(async {
        let c = Client::new(cloze_only());
        let (_, tok) = c.user("maija", "learner").await;
        let id = c.story(&tok, "fi", PARTITIVE).await;
        let (_, first) = c
            .call(
                "POST",
                &format!("/stories/{id}/sessions?seed=1"),
                Some(&tok),
                None,
            )
            .await;
        let (_, again) = c
            .call(
                "POST",
                &format!("/stories/{id}/sessions?seed=2"),
                Some(&tok),
                None,
            )
            .await;
        assert_eq!(first["id"], again["id"]);
    });
}

#[test]
fn cefr_self_assessment_is_stored() {
    Client::blocking(async {
        let c = Client::new(cloze_only());
        let (_, tok) = c.user("maija", "learner").await;
        let (s, v) = c
            .call("PUT", "/me/cefr", Some(&tok), Some(json!({"level": "B2"})))
            .await;
        assert_eq!((s, v["cefr"].as_str()), (StatusCode::OK, Some("B2")));
        let (_, p) = c
            .call(
                "GET",
                &format!("/learners/{}/progress", v["id"].as_str().unwrap()),
                Some(&tok),
                None,
            )
            .await;
        assert_eq!(p["theta"], 0.5);
    });
}

#[test]
fn placement_moves_with_the_answers() {
    Client::blocking(async {
        let c = Client::new(cloze_only());
        let mut thetas = Vec::new();
        for (name, right) in [("strong", true), ("weak", false)] {
            let (uid, tok) = c.user(name, "learner").await;
            let (s, mut v) = c
                .call(
                    "POST",
                    "/placements",
                    Some(&tok),
                    Some(json!({"language": "fi"})),
                )
                .await;
            assert_eq!(s, StatusCode::CREATED, "{v}");
            let pid = v["id"].as_str().unwrap().to_string();
            let bank = kielo::load_pack(common::packs_dir().join("fi")).unwrap();
            let (corpus, _) = kielo::gold::load_gold(&bank).unwrap();
            let story = kielo::process_story("placement-fi", &corpus, &bank).unwrap();
            let answers: Vec<_> = kielo::generate_candidates(&story, &story.constructs, &bank);
            while !v["finished"].as_bool().unwrap() {
                let item = &v["item"];
                let cand = answers
                    .iter()
                    .find(|c| c.char_start as u64 == item["char_start"].as_u64().unwrap())
                    .unwrap();
                let given = if right {
                    cand.answer.clone()
                } else {
                    "xyz".to_string()
                };
                let (s, next) = c
                    .call(
                        "POST",
                        &format!("/placements/{pid}/answer"),
                        Some(&tok),
                        Some(json!({"answer": given})),
                    )
                    .await;
                assert_eq!(s, StatusCode::OK, "{next}");
                v = next;
            }
            assert!(v["answered"].as_u64().unwrap() <= 20);
            let (s, _) = c
                .call(
                    "POST",
                    &format!("/placements/{pid}/answer"),
                    Some(&tok),
                    Some(json!({"answer": "x"})),
                )
                .await;
            assert_eq!(s, StatusCode::CONFLICT);
            let (_, me) = c.call("GET", "/me", Some(&tok), None).await;
            assert_eq!(me["id"], uid);
            thetas.push(me["placement_theta"].as_f64().unwrap());
        }
        assert!(thetas[0] > 0.5 && thetas[1] < -0.5, "{thetas:?}");
    });
}
