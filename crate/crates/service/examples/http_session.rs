//! Starts the service on a free port, opens a session and sends two
//! commands over plain HTTP/1.1, printing the responses.
//!
//! `cargo run -p v2a-service --example http_session`

use std::sync::Arc;
use tokio::io::{AsyncReadExt, AsyncWriteExt};
use tokio::net::{TcpListener, TcpStream};
use v2a_service::server::{router, AppState};
use v2a_service::ServiceConfig;

async fn request(addr: std::net::SocketAddr, method: &str, path: &str, body: &str) -> anyhow::Result<String> {
    let mut stream = TcpStream::connect(addr).await?;
    let head = format!(
        "{method} {path} HTTP/1.1\r\nHost: {addr}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n",
        body.len()
    );
    stream.write_all(head.as_bytes()).await?;
    stream.write_all(body.as_bytes()).await?;
    let mut response = String::new();
    stream.read_to_string(&mut response).await?;
    let (_, payload) = response.split_once("\r\n\r\n").unwrap_or(("", &response));
    Ok(payload.to_string())
}

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    let state = Arc::new(AppState::new(ServiceConfig::default())?);
    let listener = TcpListener::bind("127.0.0.1:0").await?;
    let addr = listener.local_addr()?;
    tokio::spawn(async move { axum::serve(listener, router(state)).await });

    println!("GET /healthz -> {}", request(addr, "GET", "/healthz", "").await?);
    let created: serde_json::Value = serde_json::from_str(&request(addr, "POST", "/sessions", "{}").await?)?;
    let id = created["id"].as_str().unwrap_or_default().to_string();
    println!("session {id}");

    for (text, corrupt) in [("select the highest building on main street", true), ("make it 2 times taller", false)] {
        let body = serde_json::json!({ "text": text, "corrupt": corrupt }).to_string();
        let trace: serde_json::Value = serde_json::from_str(&request(addr, "POST", &format!("/sessions/{id}/command"), &body).await?)?;
        println!("\n> {text}{}", if corrupt { "  (misheard)" } else { "" });
        println!("  T  {}", trace["raw"]);
        println!("  T0 {}", trace["t0"]);
        println!("  pass {} | n_token {} | selection {}", trace["feedback"]["status"], trace["n_token"], trace["selection"]);
    }
    let metrics = request(addr, "GET", &format!("/sessions/{id}/metrics"), "").await?;
    let rows: Vec<serde_json::Value> = serde_json::from_str(&metrics)?;
    println!("\n{} ledger rows", rows.len());
    Ok(())
}
