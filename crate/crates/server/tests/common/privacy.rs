//! Every cross-visibility access path, checked through the HTTP API.

use axum::http::StatusCode;
use serde_json::json;

use super::Client;

/// Runs the scenario; returns the number of paths checked or the first
/// path that did not answer as expected.
pub async fn privacy_contract(c: &Client) -> Result<usize, String> {
    let (owner, o) = c.user("owner", "learner").await;
    let (member, m) = c.user("member", "learner").await;
    let (invitee, i) = c.user("invitee", "learner").await;
    let (_, x) = c.user("outsider", "learner").await;
    let (_, t) = c.user("teacher", "teacher").await;
    let (_, t2) = c.user("other-teacher", "teacher").await;

    let private = c.story(&o, "fi", "Lisäsin keittoon suolaa.").await;
    let shared = c
        .story(&o, "fi", "Taloihin lisätään aurinkopaneeleja.")
        .await;
    let (_, g) = c
        .call("POST", "/groups", Some(&t), Some(json!({"name": "class"})))
        .await;
    let gid = g["id"].as_str().ok_or("group not created")?.to_string();
    for l in [&owner, &member, &invitee] {
        c.call(
            "POST",
            &format!("/groups/{gid}/invitations"),
            Some(&t),
            Some(json!({"learner": l})),
        )
        .await;
    }
    c.call("POST", &format!("/groups/{gid}/accept"), Some(&o), None)
        .await;
    c.call("POST", &format!("/groups/{gid}/accept"), Some(&m), None)
        .await;
    let (s, _) = c
        .call(
            "POST",
            &format!("/groups/{gid}/stories"),
            Some(&o),
            Some(json!({"story": shared})),
        )
        .await;
    if s != StatusCode::OK {
        return Err(format!("owner could not share: {s}"));
    }
    let (_, session) = c
        .call(
            "POST",
            &format!("/stories/{private}/sessions?seed=1"),
            Some(&o),
            None,
        )
        .await;
    let sid = session["id"].as_str().ok_or("no session")?.to_string();
    let (_, placement) = c
        .call(
            "POST",
            "/placements",
            Some(&o),
            Some(json!({"language": "fi"})),
        )
        .await;
    let pid = placement["id"].as_str().ok_or("no placement")?.to_string();

    let forbidden: Vec<(&str, String, &str, Option<serde_json::Value>)> = vec![
        // private story
        ("GET", format!("/stories/{private}/preview"), &x, None),
        ("GET", format!("/stories/{private}/preview"), &m, None),
        ("GET", format!("/stories/{private}/preview"), &t, None),
        (
            "GET",
            format!("/stories/{private}/tokens/0/gloss"),
            &x,
            None,
        ),
        ("POST", format!("/stories/{private}/sessions"), &x, None),
        (
            "PUT",
            format!("/stories/{private}/visibility"),
            &x,
            Some(json!({"type": "public"})),
        ),
        (
            "POST",
            format!("/groups/{gid}/stories"),
            &t,
            Some(json!({"story": private})),
        ),
        // group story
        ("GET", format!("/stories/{shared}/preview"), &x, None),
        ("GET", format!("/stories/{shared}/preview"), &i, None),
        ("GET", format!("/stories/{shared}/preview"), &t2, None),
        ("POST", format!("/stories/{shared}/sessions"), &i, None),
        // sessions and placements belong to their learner
        ("GET", format!("/sessions/{sid}"), &x, None),
        ("GET", format!("/sessions/{sid}"), &t, None),
        (
            "POST",
            format!("/sessions/{sid}/exercises/0/answer"),
            &x,
            Some(json!({"answer": "a"})),
        ),
        (
            "POST",
            format!("/sessions/{sid}/exercises/0/hint"),
            &m,
            None,
        ),
        ("GET", format!("/placements/{pid}"), &x, None),
        (
            "POST",
            format!("/placements/{pid}/answer"),
            &t,
            Some(json!({"answer": "a"})),
        ),
        // progress
        ("GET", format!("/learners/{invitee}/progress"), &t, None),
        ("GET", format!("/learners/{owner}/progress"), &t2, None),
        ("GET", format!("/learners/{owner}/progress"), &m, None),
        (
            "GET",
            format!("/groups/{gid}/members/{invitee}/progress"),
            &t,
            None,
        ),
        (
            "GET",
            format!("/groups/{gid}/members/{owner}/progress"),
            &t2,
            None,
        ),
        ("GET", format!("/groups/{gid}/progress"), &t2, None),
        ("GET", format!("/groups/{gid}/progress"), &m, None),
        // group administration
        ("GET", format!("/groups/{gid}"), &x, None),
        (
            "POST",
            format!("/groups/{gid}/invitations"),
            &m,
            Some(json!({"learner": member})),
        ),
        ("POST", format!("/groups/{gid}/accept"), &x, None),
        (
            "POST",
            "/groups".to_string(),
            &m,
            Some(json!({"name": "mine"})),
        ),
    ];
    for (method, uri, token, body) in &forbidden {
        let (s, v) = c.call(method, uri, Some(token), body.clone()).await;
        if s != StatusCode::FORBIDDEN || v["error"] != "Forbidden" {
            return Err(format!(
                "{method} {uri}: expected 403 Forbidden, got {s} {v}"
            ));
        }
    }

    let allowed: Vec<(&str, String, &str)> = vec![
        ("GET", format!("/stories/{private}/preview"), &o),
        ("GET", format!("/stories/{shared}/preview"), &m),
        ("GET", format!("/stories/{shared}/preview"), &t),
        ("GET", format!("/learners/{member}/progress"), &t),
        ("GET", format!("/learners/{member}/progress"), &m),
        (
            "GET",
            format!("/groups/{gid}/members/{member}/progress"),
            &t,
        ),
    ];
    for (method, uri, token) in &allowed {
        let (s, v) = c.call(method, uri, Some(token), None).await;
        if s != StatusCode::OK {
            return Err(format!("{method} {uri}: expected 200, got {s} {v}"));
        }
    }

    let (_, gp) = c
        .call("GET", &format!("/groups/{gid}/progress"), Some(&t), None)
        .await;
    let listed: Vec<&String> = gp["members"]
        .as_object()
        .ok_or("no members")?
        .keys()
        .collect();
    if listed.contains(&&invitee) || !listed.contains(&&member) {
        return Err(format!("group progress lists {listed:?}"));
    }
    let (_, stories) = c.call("GET", "/stories", Some(&x), None).await;
    if !stories.as_array().is_some_and(|a| a.is_empty()) {
        return Err(format!("outsider lists {stories}"));
    }
    let (s, _) = c
        .call("GET", "/learners/nobody/progress", Some(&t), None)
        .await;
    if s != StatusCode::NOT_FOUND {
        return Err(format!("unknown learner gave {s}"));
    }

    // going public opens the story to everyone
    c.call(
        "PUT",
        &format!("/stories/{private}/visibility"),
        Some(&o),
        Some(json!({"type": "public"})),
    )
    .await;
    let (s, _) = c
        .call(
            "GET",
            &format!("/stories/{private}/preview"),
            Some(&x),
            None,
        )
        .await;
    if s != StatusCode::OK {
        return Err(format!("public story gave {s}"));
    }
    Ok(forbidden.len() + allowed.len() + 4)
}
