//! Start the API on an ephemeral port and call it once.

use std::io::{Read, Write};
use std::sync::Arc;

use unimark::registry::Registry;
use unimark::service::{router, ServiceConfig};

#[tokio::main]
async fn main() {
    let config = ServiceConfig {
        max_text_bytes: 1 << 20,
        registry: Arc::new(Registry::builtin().clone()),
    };
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    println!("listening on {addr}");
    tokio::spawn(async move { axum::serve(listener, router(config)).await.unwrap() });

    let body = r#"{"text":"hello there world"}"#;
    let response = tokio::task::spawn_blocking(move || {
        let mut s = std::net::TcpStream::connect(addr).unwrap();
        write!(
            s,
            "POST /v1/mark HTTP/1.1\r\nHost: x\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
            body.len()
        )
        .unwrap();
        let mut out = String::new();
        s.read_to_string(&mut out).unwrap();
        out
    })
    .await
    .unwrap();
    println!(
        "POST /v1/mark -> {}",
        response.split_once("\r\n\r\n").unwrap().1
    );
}
