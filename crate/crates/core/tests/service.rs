use std::io::{Read, Write};
use std::net::TcpStream;
use std::sync::Arc;

use unimark::registry::Registry;
use unimark::service::{router, ServiceConfig};

fn request(
    addr: std::net::SocketAddr,
    method: &str,
    path: &str,
    body: &str,
) -> (u16, serde_json::Value) {
    let mut stream = TcpStream::connect(addr).unwrap();
    write!(
        stream,
        "{method} {path} HTTP/1.1\r\nHost: localhost\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    )
    .unwrap();
    let mut raw = String::new();
    stream.read_to_string(&mut raw).unwrap();
    let status = raw[9..12].parse().unwrap();
    let (_, payload) = raw.split_once("\r\n\r\n").unwrap();
    (
        status,
        serde_json::from_str(payload).unwrap_or(serde_json::Value::Null),
    )
}

#[tokio::test(flavor = "multi_thread")]
async fn over_tcp() {
    let config = ServiceConfig {
        max_text_bytes: 1024,
        registry: Arc::new(Registry::builtin().clone()),
    };
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move { axum::serve(listener, router(config)).await.unwrap() });

    tokio::task::spawn_blocking(move || {
        let (status, marked) = request(addr, "POST", "/v1/mark", r#"{"text":"a b c"}"#);
        assert_eq!(status, 200);
        assert_eq!(marked["text"], "a\u{2004}b\u{2004}c");
        assert_eq!(marked["annotations"].as_array().unwrap().len(), 2);

        let body = serde_json::json!({"text": marked["text"]}).to_string();
        let (status, detected) = request(addr, "POST", "/v1/detect", &body);
        assert_eq!(status, 200);
        assert_eq!(detected["verdict"]["detected"], true);

        let big = serde_json::json!({"text": "x ".repeat(600)}).to_string();
        assert_eq!(request(addr, "POST", "/v1/mark", &big).0, 413);
        assert_eq!(request(addr, "POST", "/v1/mark", "not json").0, 400);

        let (status, schemes) = request(addr, "GET", "/v1/schemes", "");
        assert_eq!(status, 200);
        assert!(schemes.is_object());
    })
    .await
    .unwrap();
}
