use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use serde::de::DeserializeOwned;

use crate::schema::{ErrorDetail, ErrorResponse, SCHEMA};

/// A rejected request: 400 when the body does not fit the schema, 422 when it
/// does but the model refuses the values.
#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: StatusCode,
    pub kind: String,
    pub field: Option<String>,
    pub message: String,
}

impl ApiError {
    pub fn bad_request(kind: &str, field: Option<String>, message: impl Into<String>) -> Self {
        Self {
            status: StatusCode::BAD_REQUEST,
            kind: kind.into(),
            field,
            message: message.into(),
        }
    }

    pub fn unprocessable(kind: &str, field: Option<String>, message: impl Into<String>) -> Self {
        Self {
            status: StatusCode::UNPROCESSABLE_ENTITY,
            kind: kind.into(),
            field,
            message: message.into(),
        }
    }

    pub fn body(&self) -> ErrorResponse {
        ErrorResponse {
            schema: SCHEMA.into(),
            error: ErrorDetail {
                kind: self.kind.clone(),
                field: self.field.clone(),
                message: self.message.clone(),
            },
        }
    }
}

impl std::fmt::Display for ApiError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.field {
            Some(field) => write!(f, "{} ({field}): {}", self.kind, self.message),
            None => write!(f, "{}: {}", self.kind, self.message),
        }
    }
}

impl std::error::Error for ApiError {}

impl From<lifecover::Error> for ApiError {
    fn from(e: lifecover::Error) -> Self {
        use lifecover::Error as E;
        let kind = match &e {
            E::InvalidParameter { .. } => "invalid_parameter",
            E::PremiumNotViable { .. } => "premium_not_viable",
            E::LossProbabilityTooHigh { .. } => "loss_probability_too_high",
            E::NoSolution { .. } => "no_solution",
            E::InteriorOptimumRequired => "interior_optimum_required",
            E::SingularParameter(_) => "singular_parameter",
            E::VerificationFailed { .. } => "verification_failed",
            E::ConfigInvalid(_) => "config_invalid",
            E::Document(_) => return ApiError::bad_request("malformed_document", None, e.to_string()),
        };
        ApiError::unprocessable(kind, e.field().map(str::to_string), e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = serde_json::to_vec(&self.body()).expect("error body serializes");
        (
            self.status,
            [(axum::http::header::CONTENT_TYPE, "application/json")],
            body,
        )
            .into_response()
    }
}

fn backticked(message: &str) -> Option<&str> {
    let start = message.find('`')? + 1;
    let len = message[start..].find('`')?;
    Some(&message[start..start + len])
}

fn join(path: &str, name: &str) -> String {
    if path.is_empty() || path == "." {
        name.to_string()
    } else {
        format!("{path}.{name}")
    }
}

/// Parse a JSON body, naming the offending field on failure.
pub fn parse_body<T: DeserializeOwned>(body: &[u8]) -> Result<T, ApiError> {
    let mut de = serde_json::Deserializer::from_slice(body);
    let value = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let text = inner.to_string();
        if !inner.is_data() {
            return ApiError::bad_request("malformed_json", None, text);
        }
        if text.starts_with("missing field") {
            let field = backticked(&text).map(|n| join(&path, n));
            ApiError::bad_request("missing_field", field, text)
        } else if text.starts_with("unknown field") {
            // the path already ends at the unknown key
            let field = backticked(&text).map(|n| {
                if path.ends_with(n) {
                    path.clone()
                } else {
                    join(&path, n)
                }
            });
            ApiError::bad_request("unknown_field", field, text)
        } else {
            let field = (!path.is_empty() && path != ".").then_some(path);
            ApiError::bad_request("invalid_value", field, text)
        }
    })?;
    de.end()
        .map_err(|e| ApiError::bad_request("malformed_json", None, e.to_string()))?;
    Ok(value)
}
