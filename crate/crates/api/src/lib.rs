//! JSON-over-HTTP front end to the solver.
//!
//! `POST /v1/solve`, `/v1/elicit`, `/v1/ruin` and `/v1/sweep` each take a JSON
//! body and answer with a body tagged `"schema": "v1"`. Handlers hold no state,
//! so identical requests produce identical bytes.

pub mod build;
pub mod error;
pub mod schema;

use axum::body::Bytes;
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::post;
use axum::Router;
use serde::de::DeserializeOwned;
use serde::Serialize;
use tower_http::cors::{AllowOrigin, CorsLayer};

pub use build::{build_elicit_response, build_ruin_response, build_solve_response, build_sweep_response};
pub use error::{parse_body, ApiError};
pub use schema::SCHEMA;

/// Encode a response body. The CLI uses this too, so both emit the same bytes.
pub fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    serde_json::to_vec(value).expect("response types serialize")
}

fn respond<Req, Resp>(body: &[u8], build: impl FnOnce(&Req) -> Result<Resp, ApiError>) -> Response
where
    Req: DeserializeOwned,
    Resp: Serialize,
{
    match parse_body::<Req>(body).and_then(|req| build(&req)) {
        Ok(resp) => (
            StatusCode::OK,
            [(header::CONTENT_TYPE, "application/json")],
            to_json(&resp),
        )
            .into_response(),
        Err(e) => e.into_response(),
    }
}

async fn solve(body: Bytes) -> Response {
    respond(&body, build_solve_response)
}

async fn elicit(body: Bytes) -> Response {
    respond(&body, build_elicit_response)
}

async fn ruin(body: Bytes) -> Response {
    respond(&body, build_ruin_response)
}

async fn sweep(body: Bytes) -> Response {
    respond(&body, build_sweep_response)
}

/// Accepts browser origins on the local machine, on any port.
fn is_local_origin(origin: &HeaderValue) -> bool {
    let Ok(origin) = origin.to_str() else {
        return false;
    };
    let rest = origin
        .strip_prefix("http://")
        .or_else(|| origin.strip_prefix("https://"));
    let Some(rest) = rest else {
        return false;
    };
    let host = match rest.strip_prefix('[') {
        Some(v6) => v6.split(']').next().map(|h| format!("[{h}]")),
        None => rest.split(':').next().map(str::to_string),
    };
    matches!(host.as_deref(), Some("localhost" | "127.0.0.1" | "[::1]"))
}

pub fn router() -> Router {
    let cors = CorsLayer::new()
        .allow_origin(AllowOrigin::predicate(|origin, _| is_local_origin(origin)))
        .allow_methods([Method::POST, Method::OPTIONS])
        .allow_headers([header::CONTENT_TYPE]);
    Router::new()
        .route("/v1/solve", post(solve))
        .route("/v1/elicit", post(elicit))
        .route("/v1/ruin", post(ruin))
        .route("/v1/sweep", post(sweep))
        .layer(cors)
}
