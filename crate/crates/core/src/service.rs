//! Stateless HTTP/JSON front end.
//!
//! Every `POST` body is `{"text": .., "scheme": .., "params": {..}}` and
//! every response carries the text it annotates, so annotation offsets
//! always index `response.text` in Unicode scalars.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Serialize;
use serde_json::{json, Map, Value};
use tower_http::cors::CorsLayer;

use crate::registry::{format_codepoint, parse_codepoint, Registry};
use crate::scheme::{scheme_catalog, Annotation, Scheme, SchemeParams, SchemeVerdict};
use crate::stego::{
    parse_payload, CodepointAlphabet, EccCodec, Extracted, StegoError, StegoProfile,
};

pub const DEFAULT_MAX_TEXT_BYTES: usize = 1 << 20;
pub const DEFAULT_PORT: u16 = 8787;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    /// Largest accepted `text`, in UTF-8 bytes.
    pub max_text_bytes: usize,
    pub registry: Arc<Registry>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            max_text_bytes: DEFAULT_MAX_TEXT_BYTES,
            registry: Arc::new(Registry::builtin().clone()),
        }
    }
}

#[derive(Debug, Serialize, Default)]
pub struct ApiResponse {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Value>,
    pub annotations: Vec<Annotation>,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    error: String,
    field: &'static str,
}

impl ApiError {
    fn bad(field: &'static str, error: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            error: error.into(),
            field,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (
            self.status,
            Json(json!({"error": self.error, "field": self.field})),
        )
            .into_response()
    }
}

impl From<StegoError> for ApiError {
    fn from(e: StegoError) -> Self {
        let status = match e {
            StegoError::MessageTooLong { .. } => StatusCode::UNPROCESSABLE_ENTITY,
            _ => StatusCode::BAD_REQUEST,
        };
        let field = match e {
            StegoError::Alphabet(_) | StegoError::RadixMismatch { .. } => "params.alphabet",
            StegoError::InsufficientPositions { .. } | StegoError::DecodeFailure(_) => "text",
            _ => "params.payload",
        };
        ApiError {
            status,
            error: e.to_string(),
            field,
        }
    }
}

type ApiResult = Result<Json<ApiResponse>, ApiError>;

struct Request {
    text: String,
    scheme: Option<String>,
    params: Map<String, Value>,
}

fn parse_request(body: &[u8], config: &ServiceConfig) -> Result<Request, ApiError> {
    let value: Value = serde_json::from_slice(body)
        .map_err(|e| ApiError::bad("body", format!("invalid JSON: {e}")))?;
    let Value::Object(mut obj) = value else {
        return Err(ApiError::bad("body", "expected a JSON object"));
    };
    let text = match obj.remove("text") {
        Some(Value::String(s)) => s,
        Some(_) => return Err(ApiError::bad("text", "must be a string")),
        None => return Err(ApiError::bad("text", "missing")),
    };
    if text.len() > config.max_text_bytes {
        return Err(ApiError {
            status: StatusCode::PAYLOAD_TOO_LARGE,
            error: format!(
                "text is {} bytes; the limit is {}",
                text.len(),
                config.max_text_bytes
            ),
            field: "text",
        });
    }
    let scheme = match obj.remove("scheme") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(s),
        Some(_) => return Err(ApiError::bad("scheme", "must be a string")),
    };
    let params = match obj.remove("params") {
        None | Some(Value::Null) => Map::new(),
        Some(Value::Object(m)) => m,
        Some(_) => return Err(ApiError::bad("params", "must be an object")),
    };
    if let Some(key) = obj.keys().next() {
        return Err(ApiError::bad("body", format!("unknown field {key:?}")));
    }
    Ok(Request {
        text,
        scheme,
        params,
    })
}

fn watermark_scheme(req: &Request, registry: &Registry) -> Result<Scheme, ApiError> {
    let params: SchemeParams = serde_json::from_value(Value::Object(req.params.clone()))
        .map_err(|e| ApiError::bad("params", e.to_string()))?;
    let name = req.scheme.as_deref().unwrap_or("whitemark");
    Scheme::from_name(name, &params, registry).map_err(|e| {
        let field = match e.field() {
            "scheme" => "scheme",
            "base" => "params.base",
            "mark" => "params.mark",
            "min_eligible" => "params.min_eligible",
            _ => "params.min_ratio",
        };
        ApiError::bad(field, e.to_string())
    })
}

fn take_str<'a>(
    params: &'a Map<String, Value>,
    key: &'static str,
    field: &'static str,
) -> Result<Option<&'a str>, ApiError> {
    match params.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) => Ok(Some(s)),
        Some(_) => Err(ApiError::bad(field, "must be a string")),
    }
}

/// `scheme` is `"alphabet"` (default) or `"positional"`.
fn stego_profile(req: &Request, registry: &Registry) -> Result<StegoProfile, ApiError> {
    const KNOWN: [&str; 5] = ["alphabet", "mark", "codec", "payload", "bits"];
    if let Some(k) = req.params.keys().find(|k| !KNOWN.contains(&k.as_str())) {
        return Err(ApiError::bad("params", format!("unknown parameter {k:?}")));
    }
    let codec = match take_str(&req.params, "codec", "params.codec")? {
        None | Some("none") => None,
        Some(name) => Some(
            name.parse::<EccCodec>()
                .map_err(|e| ApiError::bad("params.codec", e))?,
        ),
    };
    match req.scheme.as_deref().unwrap_or("alphabet") {
        "alphabet" => {
            let alphabet = match take_str(&req.params, "alphabet", "params.alphabet")? {
                None => CodepointAlphabet::with_registry(vec!['\u{2000}', '\u{2004}'], registry)?,
                Some(list) => {
                    let cps = list
                        .split(',')
                        .map(|s| {
                            parse_codepoint(s.trim()).ok_or_else(|| {
                                ApiError::bad("params.alphabet", format!("not a codepoint: {s:?}"))
                            })
                        })
                        .collect::<Result<Vec<char>, _>>()?;
                    CodepointAlphabet::with_registry(cps, registry)?
                }
            };
            Ok(StegoProfile::alphabet(alphabet, codec)?)
        }
        "positional" => {
            let mark = match take_str(&req.params, "mark", "params.mark")? {
                None => '\u{2004}',
                Some(s) => parse_codepoint(s).ok_or_else(|| {
                    ApiError::bad("params.mark", format!("not a codepoint: {s:?}"))
                })?,
            };
            if !registry.is_whitespace(mark) {
                return Err(ApiError::bad(
                    "params.mark",
                    format!("{} is not a registered whitespace", format_codepoint(mark)),
                ));
            }
            Ok(StegoProfile::positional(mark, codec)?)
        }
        other => Err(ApiError::bad(
            "scheme",
            format!("unknown stego profile {other:?}; use alphabet or positional"),
        )),
    }
}

fn verdict_value(v: SchemeVerdict) -> Value {
    serde_json::to_value(v).expect("verdict serializes")
}

async fn mark(State(config): State<Arc<ServiceConfig>>, body: Bytes) -> ApiResult {
    let req = parse_request(&body, &config)?;
    let scheme = watermark_scheme(&req, &config.registry)?;
    let text = scheme.apply(&req.text, &config.registry);
    Ok(Json(ApiResponse {
        annotations: scheme.annotate(&text, &config.registry),
        text: Some(text),
        verdict: None,
    }))
}

async fn detect(State(config): State<Arc<ServiceConfig>>, body: Bytes) -> ApiResult {
    let req = parse_request(&body, &config)?;
    let scheme = watermark_scheme(&req, &config.registry)?;
    let verdict = scheme.detect(&req.text, &config.registry);
    Ok(Json(ApiResponse {
        annotations: scheme.annotate(&req.text, &config.registry),
        text: Some(req.text),
        verdict: Some(verdict_value(verdict)),
    }))
}

async fn strip(State(config): State<Arc<ServiceConfig>>, body: Bytes) -> ApiResult {
    let req = parse_request(&body, &config)?;
    let scheme = watermark_scheme(&req, &config.registry)?;
    Ok(Json(ApiResponse {
        text: Some(scheme.strip(&req.text, &config.registry)),
        verdict: None,
        annotations: Vec::new(),
    }))
}

async fn embed(State(config): State<Arc<ServiceConfig>>, body: Bytes) -> ApiResult {
    let req = parse_request(&body, &config)?;
    let profile = stego_profile(&req, &config.registry)?;
    let payload = take_str(&req.params, "payload", "params.payload")?
        .ok_or_else(|| ApiError::bad("params.payload", "missing"))?;
    let bits = parse_payload(payload)?;
    let text = profile.embed(&req.text, &bits)?;
    Ok(Json(ApiResponse {
        annotations: profile.annotate(&text),
        text: Some(text),
        verdict: None,
    }))
}

async fn extract(State(config): State<Arc<ServiceConfig>>, body: Bytes) -> ApiResult {
    let req = parse_request(&body, &config)?;
    let profile = stego_profile(&req, &config.registry)?;
    let n_bits = match req.params.get("bits") {
        None | Some(Value::Null) => None,
        Some(v) => Some(
            v.as_u64()
                .ok_or_else(|| ApiError::bad("params.bits", "must be a non-negative integer"))?
                as usize,
        ),
    };
    let out: Extracted = profile.extract(&req.text, n_bits)?;
    Ok(Json(ApiResponse {
        annotations: profile.annotate(&req.text),
        text: Some(req.text),
        verdict: Some(serde_json::to_value(out).expect("serializes")),
    }))
}

/// Scheme catalog plus the registry tables.
pub fn schemes_document(registry: &Registry) -> Value {
    json!({
        "schemes": scheme_catalog(),
        "whitespace": registry.whitespace_codepoints().iter().map(|e| json!({
            "codepoint": format_codepoint(e.codepoint),
            "name": e.name,
            "no_break": e.no_break,
        })).collect::<Vec<_>>(),
        "ligatures": registry.ligature_map().iter().map(|e| json!({
            "plain": e.plain,
            "ligature": format_codepoint(e.ligature),
        })).collect::<Vec<_>>(),
        "variant_bases": registry.variant_bases().map(|b| json!({
            "base": format_codepoint(b),
            "same_glyph_selector": registry.same_glyph_selector(b).map(format_codepoint),
            "alternate_glyph_selector": registry.alternate_glyph_selector(b).map(format_codepoint),
        })).collect::<Vec<_>>(),
    })
}

async fn schemes(State(config): State<Arc<ServiceConfig>>) -> Json<Value> {
    Json(schemes_document(&config.registry))
}

pub fn router(config: ServiceConfig) -> Router {
    // JSON escaping can grow a text up to sixfold
    let body_limit = config
        .max_text_bytes
        .saturating_mul(6)
        .saturating_add(64 * 1024);
    Router::new()
        .route("/v1/mark", post(mark))
        .route("/v1/detect", post(detect))
        .route("/v1/strip", post(strip))
        .route("/v1/embed", post(embed))
        .route("/v1/extract", post(extract))
        .route("/v1/schemes", get(schemes))
        .layer(DefaultBodyLimit::max(body_limit))
        .layer(CorsLayer::permissive())
        .with_state(Arc::new(config))
}

pub async fn serve(addr: SocketAddr, config: ServiceConfig) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!(
        "{}",
        json!({"listening": listener.local_addr()?.to_string()})
    );
    axum::serve(listener, router(config)).await
}

#[cfg(test)]
mod tests {
    use super::*;
    use axum::body::Body;
    use axum::http::Request as HttpRequest;
    use http_body_util::BodyExt;
    use tower::ServiceExt;

    async fn call(app: &Router, method: &str, path: &str, body: Value) -> (StatusCode, Value) {
        let req = HttpRequest::builder()
            .method(method)
            .uri(path)
            .header("content-type", "application/json")
            .body(if method == "GET" {
                Body::empty()
            } else {
                Body::from(body.to_string())
            })
            .unwrap();
        let res = app.clone().oneshot(req).await.unwrap();
        let status = res.status();
        let bytes = res.into_body().collect().await.unwrap().to_bytes();
        (status, serde_json::from_slice(&bytes).unwrap())
    }

    fn app() -> Router {
        router(ServiceConfig::default())
    }

    #[tokio::test]
    async fn mark_annotates() {
        let (s, v) = call(
            &app(),
            "POST",
            "/v1/mark",
            json!({"text": "a b", "scheme": "whitemark"}),
        )
        .await;
        assert_eq!(s, StatusCode::OK);
        assert_eq!(v["text"], "a\u{2004}b");
        assert_eq!(
            v["annotations"],
            json!([{"offset": 1, "length": 1, "codepoint": "U+2004", "kind": "mark"}])
        );
    }

    #[tokio::test]
    async fn detect_unmarked() {
        let (s, v) = call(&app(), "POST", "/v1/detect", json!({"text": "plain text"})).await;
        assert_eq!(s, StatusCode::OK);
        assert_eq!(v["verdict"]["detected"], false);
        assert_eq!(v["verdict"]["base_count"], 1);
    }

    #[tokio::test]
    async fn bad_inputs() {
        let a = app();
        let (s, v) = call(&a, "POST", "/v1/mark", json!({"scheme": "whitemark"})).await;
        assert_eq!(
            (s, v["field"].as_str()),
            (StatusCode::BAD_REQUEST, Some("text"))
        );
        let (s, v) = call(
            &a,
            "POST",
            "/v1/mark",
            json!({"text": "x", "scheme": "nope"}),
        )
        .await;
        assert_eq!(
            (s, v["field"].as_str()),
            (StatusCode::BAD_REQUEST, Some("scheme"))
        );
        let (s, v) = call(
            &a,
            "POST",
            "/v1/mark",
            json!({"text": "x", "params": {"mark": "U+0041"}}),
        )
        .await;
        assert_eq!(
            (s, v["field"].as_str()),
            (StatusCode::BAD_REQUEST, Some("params.mark"))
        );
        let (s, v) = call(
            &a,
            "POST",
            "/v1/embed",
            json!({"text": "a b", "params": {"payload": "1111"}}),
        )
        .await;
        assert_eq!(
            (s, v["field"].as_str()),
            (StatusCode::UNPROCESSABLE_ENTITY, Some("params.payload"))
        );
    }

    #[tokio::test]
    async fn size_limit() {
        let small = router(ServiceConfig {
            max_text_bytes: 8,
            ..ServiceConfig::default()
        });
        let (s, _) = call(&small, "POST", "/v1/mark", json!({"text": "123456789"})).await;
        assert_eq!(s, StatusCode::PAYLOAD_TOO_LARGE);
        let (s, _) = call(&small, "POST", "/v1/mark", json!({"text": "12345678"})).await;
        assert_eq!(s, StatusCode::OK);
    }

    #[tokio::test]
    async fn embed_extract_roundtrip() {
        let a = app();
        let text = "one two three four five six seven eight";
        for (scheme, params) in [
            ("alphabet", json!({"payload": "1101001"})),
            ("positional", json!({"payload": "1101001"})),
        ] {
            let (s, v) = call(
                &a,
                "POST",
                "/v1/embed",
                json!({"text": text, "scheme": scheme, "params": params}),
            )
            .await;
            assert_eq!(s, StatusCode::OK, "{v}");
            let (s, out) = call(
                &a,
                "POST",
                "/v1/extract",
                json!({"text": v["text"], "scheme": scheme, "params": {"bits": 7}}),
            )
            .await;
            assert_eq!(s, StatusCode::OK);
            assert_eq!(out["verdict"]["bits"], "1101001");
        }
    }

    #[tokio::test]
    async fn schemes_listed() {
        let (s, v) = call(&app(), "GET", "/v1/schemes", Value::Null).await;
        assert_eq!(s, StatusCode::OK);
        assert_eq!(v["schemes"].as_array().unwrap().len(), 5);
    }
}
