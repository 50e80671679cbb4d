use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::{Deserialize, Serialize};

/// Every error code the API can return.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    /// Unknown route, session or reminder.
    NotFound,
    /// Body is not the expected JSON document.
    InvalidBody,
    /// Query string could not be read.
    InvalidQuery,
    EmptyText,
    /// The session is done or abandoned.
    SessionClosed,
    /// Another message for the same session is being handled.
    SessionBusy,
    UnknownSensor,
    UnknownActivity,
    InvalidValue,
    /// POST /ticks on a wall-clock server.
    WrongClockMode,
    /// Storage or engine failure.
    Internal,
}

impl ErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::NotFound => "not_found",
            ErrorCode::InvalidBody => "invalid_body",
            ErrorCode::InvalidQuery => "invalid_query",
            ErrorCode::EmptyText => "empty_text",
            ErrorCode::SessionClosed => "session_closed",
            ErrorCode::SessionBusy => "session_busy",
            ErrorCode::UnknownSensor => "unknown_sensor",
            ErrorCode::UnknownActivity => "unknown_activity",
            ErrorCode::InvalidValue => "invalid_value",
            ErrorCode::WrongClockMode => "wrong_clock_mode",
            ErrorCode::Internal => "internal",
        }
    }

    pub fn http_status(self) -> u16 {
        match self {
            ErrorCode::NotFound => 404,
            ErrorCode::InvalidBody | ErrorCode::InvalidQuery => 400,
            ErrorCode::SessionClosed | ErrorCode::SessionBusy | ErrorCode::WrongClockMode => 409,
            ErrorCode::EmptyText
            | ErrorCode::UnknownSensor
            | ErrorCode::UnknownActivity
            | ErrorCode::InvalidValue => 422,
            ErrorCode::Internal => 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[error("{code:?}: {message}")]
pub struct ApiError {
    pub code: ErrorCode,
    pub message: String,
    pub http_status: u16,
}

impl ApiError {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        ApiError {
            code,
            message: message.into(),
            http_status: code.http_status(),
        }
    }

    pub fn internal(e: impl std::fmt::Display) -> Self {
        ApiError::new(ErrorCode::Internal, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status =
            StatusCode::from_u16(self.http_status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self)).into_response()
    }
}
