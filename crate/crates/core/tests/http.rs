use std::collections::VecDeque;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use coalition_core::text::{
    Embedder, HttpConfig, HttpEmbedder, HttpLlm, LlmProvider, LlmRequest, PromptBindings, RequestOptions, TemplateId,
};
use coalition_core::ProviderError;
use serde_json::{json, Value};

#[derive(Debug, Clone)]
struct Seen {
    path: String,
    authorization: Option<String>,
    body: Value,
}

/// Serves canned `(status, body)` replies in order, one per connection.
fn serve(replies: Vec<(u16, String)>) -> (String, Arc<Mutex<Vec<Seen>>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = format!("http://{}", listener.local_addr().unwrap());
    let seen = Arc::new(Mutex::new(Vec::new()));
    let log = seen.clone();
    std::thread::spawn(move || {
        let mut replies: VecDeque<_> = replies.into();
        for stream in listener.incoming() {
            let Some((status, body)) = replies.pop_front() else { break };
            let mut stream = stream.unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut line = String::new();
            reader.read_line(&mut line).unwrap();
            let path = line.split_whitespace().nth(1).unwrap_or("").to_string();
            let (mut length, mut authorization) = (0, None);
            loop {
                let mut h = String::new();
                reader.read_line(&mut h).unwrap();
                let h = h.trim_end();
                if h.is_empty() {
                    break;
                }
                let (name, value) = h.split_once(':').unwrap();
                match name.to_ascii_lowercase().as_str() {
                    "content-length" => length = value.trim().parse().unwrap(),
                    "authorization" => authorization = Some(value.trim().to_string()),
                    _ => {}
                }
            }
            let mut raw = vec![0; length];
            reader.read_exact(&mut raw).unwrap();
            log.lock().unwrap().push(Seen {
                path,
                authorization,
                body: serde_json::from_slice(&raw).unwrap_or(Value::Null),
            });
            let reply = format!(
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            );
            stream.write_all(reply.as_bytes()).unwrap();
        }
    });
    (addr, seen)
}

fn config(base: &str, dimension: usize) -> HttpConfig {
    let mut c = HttpConfig::from_lookup(|k| match k {
        "MEDIATOR_LLM_ENDPOINT" => Some(format!("{base}/v1/chat/completions")),
        "MEDIATOR_EMBED_ENDPOINT" => Some(format!("{base}/embed")),
        "MEDIATOR_LLM_API_KEY" => Some("sk-test".into()),
        "MEDIATOR_EMBED_DIM" => Some(dimension.to_string()),
        _ => None,
    })
    .unwrap();
    c.timeout = Duration::from_secs(5);
    c
}

fn request() -> LlmRequest {
    let bindings = PromptBindings {
        count: Some(2),
        topic: Some("global warming".into()),
        ..Default::default()
    };
    let mut r = LlmRequest::render(TemplateId::IdealGen, bindings, &RequestOptions::default()).unwrap();
    r.seed = Some(99);
    r
}

#[test]
fn chat_completion_round_trip() {
    let reply = json!({"choices": [{"message": {"role": "assistant", "content": "1. Plant trees now."}}]});
    let (base, seen) = serve(vec![(200, reply.to_string())]);
    let llm = HttpLlm::new(config(&base, 3)).unwrap();
    assert_eq!(llm.complete(&request()).unwrap(), "1. Plant trees now.");
    let seen = seen.lock().unwrap();
    assert_eq!(seen[0].path, "/v1/chat/completions");
    assert_eq!(seen[0].authorization.as_deref(), Some("Bearer sk-test"));
    let body = &seen[0].body;
    assert_eq!(body["model"], "gpt-3.5-turbo-1106");
    assert_eq!(body["temperature"], 0.75);
    assert_eq!(body["seed"], 99);
    assert_eq!(body["messages"][0]["role"], "system");
    assert_eq!(body["messages"][1]["role"], "user");
}

#[test]
fn chat_errors_are_classified() {
    let empty = json!({"choices": [{"message": {"content": "  "}}]}).to_string();
    let (base, _) = serve(vec![(429, "slow down".into()), (400, "bad".into()), (200, empty), (200, "{".into())]);
    let llm = HttpLlm::new(config(&base, 3)).unwrap();
    let first = llm.complete(&request()).unwrap_err();
    assert!(matches!(first, ProviderError::Status { status: 429, .. }) && first.is_transient());
    let second = llm.complete(&request()).unwrap_err();
    assert!(matches!(second, ProviderError::Status { status: 400, .. }) && !second.is_transient());
    assert_eq!(llm.complete(&request()).unwrap_err(), ProviderError::EmptyReply);
    assert!(matches!(llm.complete(&request()).unwrap_err(), ProviderError::Malformed(_)));
    assert!(llm.backoff(2) > llm.backoff(1));
}

#[test]
fn embedding_retries_transient_failures() {
    let ok = json!({"data": [{"embedding": [0.5, -1.0, 2.0]}]}).to_string();
    let (base, seen) = serve(vec![(503, "busy".into()), (200, ok)]);
    let embedder = HttpEmbedder::new(config(&base, 3)).unwrap();
    assert_eq!(embedder.dimension(), 3);
    assert_eq!(embedder.embed_raw("hello").unwrap(), vec![0.5, -1.0, 2.0]);
    let seen = seen.lock().unwrap();
    assert_eq!(seen.len(), 2);
    assert_eq!(seen[1].path, "/embed");
    assert_eq!(seen[1].body["input"], "hello");
}
