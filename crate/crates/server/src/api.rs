//! Routes under `/api/v1`. Requests authenticate with
//! `Authorization: Bearer <token>`; only registration is open.

use std::sync::{Arc, Mutex, MutexGuard};

use axum::extract::{Path, Query, State};
use axum::http::{HeaderMap, StatusCode};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use kielo::constructs::CefrLevel;
use serde::{Deserialize, Serialize};

use crate::error::ServiceError;
use crate::model::{Group, Role, Visibility};
use crate::tutor::{
    AttemptResult, GlossView, GroupProgressView, PlacementView, PreviewView, ProgressView,
    Registered, SessionView, StorySummary, Tutor, UserView,
};

pub type Shared = Arc<Mutex<Tutor>>;
type Reply<T> = Result<Json<T>, ServiceError>;

fn lock(state: &Shared) -> Result<MutexGuard<'_, Tutor>, ServiceError> {
    state
        .lock()
        .map_err(|_| ServiceError::Internal("state lock poisoned".into()))
}

fn caller(tutor: &Tutor, headers: &HeaderMap) -> Result<String, ServiceError> {
    let token = headers
        .get("authorization")
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "))
        .ok_or(ServiceError::Unauthorized)?;
    tutor.authenticate(token.trim())
}

#[derive(Debug, Deserialize)]
pub struct RegisterRequest {
    pub name: String,
    pub role: Role,
}

#[derive(Debug, Deserialize)]
pub struct CefrRequest {
    pub level: CefrLevel,
}

#[derive(Debug, Deserialize)]
pub struct UploadRequest {
    pub language: String,
    pub title: String,
    pub text: String,
}

#[derive(Debug, Serialize)]
pub struct Created {
    pub id: String,
}

#[derive(Debug, Deserialize)]
pub struct SessionQuery {
    pub density: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
pub struct AnswerRequest {
    pub answer: String,
}

#[derive(Debug, Deserialize)]
pub struct PlacementRequest {
    pub language: String,
}

#[derive(Debug, Deserialize)]
pub struct GroupRequest {
    pub name: String,
}

#[derive(Debug, Deserialize)]
pub struct InviteRequest {
    pub learner: String,
}

#[derive(Debug, Deserialize)]
pub struct ShareRequest {
    pub story: String,
}

#[derive(Debug, Serialize)]
pub struct Language {
    pub code: String,
    pub name: String,
}

pub fn router(state: Shared) -> Router {
    let v1 = Router::new()
        .route("/users", post(register))
        .route("/me", get(me))
        .route("/me/cefr", put(set_cefr))
        .route("/languages", get(languages))
        .route("/stories", get(list_stories).post(upload_story))
        .route("/stories/{id}/preview", get(preview))
        .route("/stories/{id}/visibility", put(set_visibility))
        .route("/stories/{id}/tokens/{index}/gloss", get(gloss))
        .route("/stories/{id}/sessions", post(start_session))
        .route("/sessions/{id}", get(session))
        .route("/sessions/{id}/exercises/{index}/answer", post(answer))
        .route("/sessions/{id}/exercises/{index}/hint", post(hint))
        .route("/placements", post(start_placement))
        .route("/placements/{id}", get(placement))
        .route("/placements/{id}/answer", post(answer_placement))
        .route("/learners/{id}/progress", get(progress))
        .route("/groups", post(create_group))
        .route("/groups/{id}", get(group))
        .route("/groups/{id}/invitations", post(invite))
        .route("/groups/{id}/accept", post(accept))
        .route("/groups/{id}/stories", post(share))
        .route("/groups/{id}/progress", get(group_progress))
        .route(
            "/groups/{id}/members/{learner}/progress",
            get(member_progress),
        );
    Router::new().nest("/api/v1", v1).with_state(state)
}

async fn register(
    State(s): State<Shared>,
    Json(r): Json<RegisterRequest>,
) -> Result<(StatusCode, Json<Registered>), ServiceError> {
    Ok((
        StatusCode::CREATED,
        Json(lock(&s)?.register(&r.name, r.role)?),
    ))
}

async fn me(State(s): State<Shared>, h: HeaderMap) -> Reply<UserView> {
    let t = lock(&s)?;
    let u = caller(&t, &h)?;
    Ok(Json(t.user(&u)?))
}

async fn set_cefr(
    State(s): State<Shared>,
    h: HeaderMap,
    Json(r): Json<CefrRequest>,
) -> Reply<UserView> {
    let mut t = lock(&s)?;
    let u = caller(&t, &h)?;
    Ok(Json(t.set_cefr(&u, r.level)?))
}

async fn languages(State(s): State<Shared>) -> Reply<Vec<Language>> {
    let t = lock(&s)?;
    Ok(Json(
        t.languages()
            .into_iter()
            .map(|(code, name)| Language { code, name })
            .collect(),
    ))
}

async fn list_stories(State(s): State<Shared>, h: HeaderMap) -> Reply<Vec<StorySummary>> {
    let t = lock(&s)?;
    let u = caller(&t, &h)?;
    Ok(Json(t.list_stories(&u)))
}

async fn upload_story(
    State(s): State<Shared>,
    h: HeaderMap,
    Json(r): Json<UploadRequest>,
) -> Result<(StatusCode, Json<Created>), ServiceError> {
    let mut t = lock(&s)?;
    let u = caller(&t, &h)?;
    let id = t.upload_story(&u, &r.language, &r.title, &r.text)?;
    Ok((StatusCode::CREATED, Json(Created { id })))
}

async fn preview(
    State(s): State<Shared>,
    h: HeaderMap,
    Path(id): Path<String>,
) -> Reply<PreviewView> {
    let t = lock(&s)?;
    let u = caller(&t, &h)?;
    Ok(Json(t.preview(&u, &id)?))
}

async fn set_visibility(
    State(s): State<Shared>,
    h: HeaderMap,
    Path(id): Path<String>,
    Json(v): Json<Visibility>,
) -> Reply<StorySummary> {
    let mut t = lock(&s)?;
    let u = caller(&t, &h)?;
    Ok(Json(t.set_visibility(&u, &id, v)?))
}

async fn gloss(
    State(s): State<Shared>,
    h: HeaderMap,
    Path((id, index)): Path<(String, usize)>,
) -> Reply<GlossView> {
    let t = lock(&s)?;
    let u = caller(&t, &h)?;
    Ok(Json(t.gloss(&u, &id, index)?))
}

async fn start_session(
    State(s): State<Shared>,
    h: HeaderMap,
    Path(id): Path<String>,
    Query(q): Query<SessionQuery>,
) -> Result<(StatusCode, Json<SessionView>), ServiceError> {
    let mut t = lock(&s)?;
    let u = caller(&t, &h)?;
    Ok((
        StatusCode::CREATED,
        Json(t.start_session(&u, &id, q.density, q.seed)?),
    ))
}

async fn session(
    State(s): State<Shared>,
    h: HeaderMap,
    Path(id): Path<String>,
) -> Reply<SessionView> {
    let t = lock(&s)?;
    let u = caller(&t, &h)?;
    Ok(Json(t.session(&u, &id)?))
}

async fn answer(
    State(s): State<Shared>,
    h: HeaderMap,
    Path((id, index)): Path<(String, usize)>,
    Json(r): Json<AnswerRequest>,
) -> Reply<AttemptResult> {
    let mut t = lock(&s)?;
    let u = caller(&t, &h)?;
    Ok(Json(t.submit_answer(&u, &id, index, &r.answer)?))
}

async fn hint(
    State(s): State<Shared>,
    h: HeaderMap,
    Path((id, index)): Path<(String, usize)>,
) -> Reply<AttemptResult> {
    let mut t = lock(&s)?;
    let u = caller(&t, &h)?;
    Ok(Json(t.request_hint(&u, &id, index)?))
}

async fn start_placement(
    State(s): State<Shared>,
    h: HeaderMap,
    Json(r): Json<PlacementRequest>,
) -> Result<(StatusCode, Json<PlacementView>), ServiceError> {
    let mut t = lock(&s)?;
    let u = caller(&t, &h)?;
    Ok((
        StatusCode::CREATED,
        Json(t.start_placement(&u, &r.language)?),
    ))
}

async fn placement(
    State(s): State<Shared>,
    h: HeaderMap,
    Path(id): Path<String>,
) -> Reply<PlacementView> {
    let t = lock(&s)?;
    let u = caller(&t, &h)?;
    Ok(Json(t.placement(&u, &id)?))
}

async fn answer_placement(
    State(s): State<Shared>,
    h: HeaderMap,
    Path(id): Path<String>,
    Json(r): Json<AnswerRequest>,
) -> Reply<PlacementView> {
    let mut t = lock(&s)?;
    let u = caller(&t, &h)?;
    Ok(Json(t.answer_placement(&u, &id, &r.answer)?))
}

async fn progress(
    State(s): State<Shared>,
    h: HeaderMap,
    Path(id): Path<String>,
) -> Reply<ProgressView> {
    let mut t = lock(&s)?;
    let u = caller(&t, &h)?;
    Ok(Json(t.progress(&u, &id)?))
}

async fn create_group(
    State(s): State<Shared>,
    h: HeaderMap,
    Json(r): Json<GroupRequest>,
) -> Result<(StatusCode, Json<Group>), ServiceError> {
    let mut t = lock(&s)?;
    let u = caller(&t, &h)?;
    Ok((StatusCode::CREATED, Json(t.create_group(&u, &r.name)?)))
}

async fn group(State(s): State<Shared>, h: HeaderMap, Path(id): Path<String>) -> Reply<Group> {
    let t = lock(&s)?;
    let u = caller(&t, &h)?;
    Ok(Json(t.group(&u, &id)?))
}

async fn invite(
    State(s): State<Shared>,
    h: HeaderMap,
    Path(id): Path<String>,
    Json(r): Json<InviteRequest>,
) -> Reply<Group> {
    let mut t = lock(&s)?;
    let u = caller(&t, &h)?;
    Ok(Json(t.invite(&u, &id, &r.learner)?))
}

async fn accept(State(s): State<Shared>, h: HeaderMap, Path(id): Path<String>) -> Reply<Group> {
    let mut t = lock(&s)?;
    let u = caller(&t, &h)?;
    Ok(Json(t.accept(&u, &id)?))
}

async fn share(
    State(s): State<Shared>,
    h: HeaderMap,
    Path(id): Path<String>,
    Json(r): Json<ShareRequest>,
) -> Reply<StorySummary> {
    let mut t = lock(&s)?;
    let u = caller(&t, &h)?;
    Ok(Json(t.share_story(&u, &id, &r.story)?))
}

async fn group_progress(
    State(s): State<Shared>,
    h: HeaderMap,
    Path(id): Path<String>,
) -> Reply<GroupProgressView> {
    let mut t = lock(&s)?;
    let u = caller(&t, &h)?;
    Ok(Json(t.group_progress(&u, &id)?))
}

async fn member_progress(
    State(s): State<Shared>,
    h: HeaderMap,
    Path((id, learner)): Path<(String, String)>,
) -> Reply<ProgressView> {
    let mut t = lock(&s)?;
    let u = caller(&t, &h)?;
    Ok(Json(t.member_progress(&u, &id, &learner)?))
}
