use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ServiceError {
    #[error("missing or unknown token")]
    Unauthorized,
    #[error("forbidden")]
    Forbidden,
    #[error("{0} not found")]
    NotFound(String),
    #[error("no language pack for `{0}`")]
    UnsupportedLanguage(String),
    #[error("story text is empty")]
    EmptyText,
    #[error("the story has no exercisable words")]
    NoCandidates,
    #[error("no attempts left on this exercise")]
    ExhaustedAttempts,
    #[error("exercise is already answered")]
    ExerciseClosed,
    #[error("all hints have been shown")]
    NoMoreHints,
    #[error("unknown exercise `{0}`")]
    UnknownExercise(String),
    #[error("unknown learner `{0}`")]
    UnknownLearner(String),
    #[error("placement test is finished")]
    PlacementFinished,
    #[error("bad request: {0}")]
    BadRequest(String),
    #[error("journal: {0}")]
    Journal(String),
    #[error("internal: {0}")]
    Internal(String),
}

impl ServiceError {
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::Unauthorized => "Unauthorized",
            ServiceError::Forbidden => "Forbidden",
            ServiceError::NotFound(_) => "NotFound",
            ServiceError::UnsupportedLanguage(_) => "UnsupportedLanguage",
            ServiceError::EmptyText => "EmptyText",
            ServiceError::NoCandidates => "NoCandidates",
            ServiceError::ExhaustedAttempts => "ExhaustedAttempts",
            ServiceError::ExerciseClosed => "ExerciseClosed",
            ServiceError::NoMoreHints => "NoMoreHints",
            ServiceError::UnknownExercise(_) => "UnknownExercise",
            ServiceError::UnknownLearner(_) => "UnknownLearner",
            ServiceError::PlacementFinished => "PlacementFinished",
            ServiceError::BadRequest(_) => "BadRequest",
            ServiceError::Journal(_) => "Journal",
            ServiceError::Internal(_) => "Internal",
        }
    }

    pub fn status(&self) -> StatusCode {
        match self {
            ServiceError::Unauthorized => StatusCode::UNAUTHORIZED,
            ServiceError::Forbidden => StatusCode::FORBIDDEN,
            ServiceError::NotFound(_)
            | ServiceError::UnknownExercise(_)
            | ServiceError::UnknownLearner(_) => StatusCode::NOT_FOUND,
            ServiceError::UnsupportedLanguage(_)
            | ServiceError::EmptyText
            | ServiceError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ServiceError::NoCandidates => StatusCode::UNPROCESSABLE_ENTITY,
            ServiceError::ExhaustedAttempts
            | ServiceError::ExerciseClosed
            | ServiceError::NoMoreHints
            | ServiceError::PlacementFinished => StatusCode::CONFLICT,
            ServiceError::Journal(_) | ServiceError::Internal(_) => {
                StatusCode::INTERNAL_SERVER_ERROR
            }
        }
    }
}

#[derive(Serialize)]
struct ErrorBody {
    error: &'static str,
    message: String,
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            error: self.code(),
            message: self.to_string(),
        };
        (self.status(), Json(body)).into_response()
    }
}
