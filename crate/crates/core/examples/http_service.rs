//! Start the HTTP API on an ephemeral port, create an assessment and read
//! back its applicable questions.
//!
//! ```text
//! cargo run --example http_service
//! ```

use std::io::{Read, Write};
use std::net::TcpStream;
use std::sync::Arc;

use fria::catalog::parse_catalog;
use fria::fixture;
use fria::store::{AssessmentStore, MemoryStore};

fn request(addr: &str, method: &str, path: &str, if_match: Option<u64>, body: &str) -> std::io::Result<String> {
    let mut conn = TcpStream::connect(addr)?;
    let precondition = if_match.map(|r| format!("If-Match: \"{r}\"\r\n")).unwrap_or_default();
    write!(
        conn,
        "{method} {path} HTTP/1.1\r\nHost: {addr}\r\nConnection: close\r\n{precondition}\
         Content-Type: application/json\r\nContent-Length: {}\r\n\r\n{body}",
        body.len()
    )?;
    let mut response = String::new();
    conn.read_to_string(&mut response)?;
    Ok(response)
}

fn status_and_body(response: &str) -> (&str, &str) {
    let status = response.lines().next().unwrap_or_default();
    (status, response.split("\r\n\r\n").nth(1).unwrap_or_default())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let catalog = parse_catalog(fixture::TRIAGE_CATALOG.as_bytes())?;
    let store: Arc<dyn AssessmentStore> = Arc::new(MemoryStore::new());
    let runtime = tokio::runtime::Runtime::new()?;
    let listener = runtime.block_on(tokio::net::TcpListener::bind("127.0.0.1:0"))?;
    let addr = listener.local_addr()?.to_string();
    runtime.spawn(fria::service::serve(listener, fria::service::router(catalog, store)));
    println!("listening on http://{addr}");

    let actor = serde_json::to_value(fixture::coordinator())?;
    let create = serde_json::json!({"actor": actor, "id": "triage", "profile": fixture::triage_profile_delta()});
    let r = request(&addr, "POST", "/assessments", None, &create.to_string())?;
    println!("POST /assessments -> {}", status_and_body(&r).0);

    let complete = serde_json::json!({"actor": actor}).to_string();
    let r = request(&addr, "POST", "/assessments/triage/phase0/complete", Some(1), &complete)?;
    println!("POST phase0/complete -> {}", status_and_body(&r).0);

    let r = request(&addr, "POST", "/assessments/triage/phase0/complete", Some(1), &complete)?;
    let (status, body) = status_and_body(&r);
    println!("repeat with stale If-Match -> {status}\n  {body}");

    let r = request(&addr, "GET", "/assessments/triage/questions", None, "")?;
    let questions: serde_json::Value = serde_json::from_str(status_and_body(&r).1)?;
    for q in questions.as_array().into_iter().flatten() {
        println!(
            "  {} {}",
            q["id"].as_str().unwrap_or(""),
            q["text"].as_str().unwrap_or("")
        );
    }
    Ok(())
}
