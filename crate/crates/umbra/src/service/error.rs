use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;
use umbra_core::UmbraError;

/// JSON error body: `{"error": {"code", "message", "conflicts"?}}`.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    pub conflicts: Option<Vec<(u32, u32)>>,
}

#[derive(Serialize)]
struct Body<'a> {
    error: Detail<'a>,
}

#[derive(Serialize)]
struct Detail<'a> {
    code: &'a str,
    message: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    conflicts: Option<&'a [(u32, u32)]>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            code,
            message: message.into(),
            conflicts: None,
        }
    }

    pub fn not_found(what: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", what)
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }
}

impl From<UmbraError> for ApiError {
    fn from(e: UmbraError) -> Self {
        let message = e.to_string();
        let (status, code) = match &e {
            UmbraError::ConflictingStrokes { pixels } => {
                return Self {
                    status: StatusCode::CONFLICT,
                    code: "conflicting_strokes",
                    message,
                    conflicts: Some(pixels.clone()),
                }
            }
            UmbraError::InvalidInput(_) | UmbraError::Json(_) => {
                (StatusCode::BAD_REQUEST, "invalid_input")
            }
            UmbraError::InvalidParameter(_) => (StatusCode::BAD_REQUEST, "invalid_parameter"),
            UmbraError::InsufficientStrokes(_) => (StatusCode::BAD_REQUEST, "insufficient_strokes"),
            UmbraError::Codec(_) => (StatusCode::BAD_REQUEST, "unreadable_image"),
            UmbraError::NoShadow(_) => (StatusCode::UNPROCESSABLE_ENTITY, "no_shadow"),
            UmbraError::DegenerateFusion => (StatusCode::UNPROCESSABLE_ENTITY, "degenerate_fusion"),
            UmbraError::DegenerateSample { .. }
            | UmbraError::NoValidSamples(_)
            | UmbraError::NoScales => (StatusCode::UNPROCESSABLE_ENTITY, "no_valid_samples"),
            UmbraError::InvalidPair(_) | UmbraError::ShadowFree | UmbraError::EmptyDataset(_) => {
                (StatusCode::UNPROCESSABLE_ENTITY, "invalid_data")
            }
            UmbraError::Io(_) => (StatusCode::INTERNAL_SERVER_ERROR, "io"),
        };
        Self::new(status, code, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = Body {
            error: Detail {
                code: self.code,
                message: &self.message,
                conflicts: self.conflicts.as_deref(),
            },
        };
        (self.status, Json(body)).into_response()
    }
}
