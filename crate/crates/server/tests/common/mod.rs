#![allow(dead_code)]

pub mod privacy;
pub mod replay;

use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use kielo_server::api::router;
use kielo_server::{Tutor, TutorConfig};
use serde_json::{json, Value};
use tower::ServiceExt;

pub fn packs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../packs")
}

pub fn tutor(journal: Option<&Path>, config: TutorConfig) -> Tutor {
    Tutor::open(&packs_dir(), journal, config).unwrap()
}

pub struct Client {
    pub app: Router,
}

impl Client {
    pub fn new(config: TutorConfig) -> Self {
        Client {
            app: router(Arc::new(Mutex::new(tutor(None, config)))),
        }
    }

    pub fn blocking<F: std::future::Future>(f: F) -> F::Output {
        tokio::runtime::Builder::new_current_thread()
            .enable_all()
            .build()
            .unwrap()
            .block_on(f)
    }

    pub async fn call(
        &self,
        method: &str,
        uri: &str,
        token: Option<&str>,
        body: Option<Value>,
    ) -> (StatusCode, Value) {
        let mut req = Request::builder()
            .method(method)
            .uri(format!("/api/v1{uri}"));
        if let Some(t) = token {
            req = req.header("authorization", format!("Bearer {t}"));
        }
        let req = match body {
            Some(b) => req
                .header("content-type", "application/json")
                .body(Body::from(b.to_string())),
            None => req.body(Body::empty()),
        }
        .unwrap();
        let res = self.app.clone().oneshot(req).await.unwrap();
        let status = res.status();
        let bytes = res.into_body().collect().await.unwrap().to_bytes();
        let value = if bytes.is_empty() {
            Value::Null
        } else {
            serde_json::from_slice(&bytes).unwrap_or(Value::Null)
        };
        (status, value)
    }

    /// Registers a user and returns (id, token).
    pub async fn user(&self, name: &str, role: &str) -> (String, String) {
        let (s, v) = self
            .call(
                "POST",
                "/users",
                None,
                Some(json!({"name": name, "role": role})),
            )
            .await;
        assert_eq!(s, StatusCode::CREATED, "{v}");
        (
            v["id"].as_str().unwrap().into(),
            v["token"].as_str().unwrap().into(),
        )
    }

    pub async fn story(&self, token: &str, language: &str, text: &str) -> String {
        let body = json!({"language": language, "title": "t", "text": text});
        let (s, v) = self.call("POST", "/stories", Some(token), Some(body)).await;
        assert_eq!(s, StatusCode::CREATED, "{v}");
        v["id"].as_str().unwrap().into()
    }
}
