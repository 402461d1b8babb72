//! Chat-completion client behavior against a local HTTP stub: echo replies,
//! retry/backoff on transient errors, terminal failure as a value, and
//! credential configuration errors.

mod common;

use std::sync::atomic::{AtomicU32, Ordering};
use std::sync::Arc;

use common::stub;
use routebench::gateway::{GatewayError, ModelClient, ModelEndpoint};
use routebench::prompts::{PromptKind, RenderedPrompt};

fn prompt() -> RenderedPrompt {
    RenderedPrompt {
        kind: PromptKind::Vanilla,
        text: "plan something".into(),
        case_id: "c0".into(),
    }
}

fn endpoint(base_url: &str) -> ModelEndpoint {
    let mut ep = ModelEndpoint::new(base_url, "stub-model");
    ep.max_retries = 2;
    ep.backoff_ms = 1;
    ep.timeout_s = 5.0;
    ep
}

#[test]
fn echo_fixture() {
    let server = stub::serve(Arc::new(|_: &str| (200, "[(0, 0), (0, 1)]".to_string())));
    let client = ModelClient::connect(&endpoint(&server.base_url)).unwrap();
    let reply = client.complete(&prompt());
    assert!(!reply.failed);
    assert_eq!(reply.text, "[(0, 0), (0, 1)]");
    assert_eq!(reply.attempt_count, 1);
    assert!(reply.latency_s >= 0.0);
}

#[test]
fn two_transient_429s_then_success() {
    let calls = Arc::new(AtomicU32::new(0));
    let calls_seen = Arc::clone(&calls);
    let server = stub::serve(Arc::new(move |_: &str| {
        if calls_seen.fetch_add(1, Ordering::SeqCst) < 2 {
            (429, "slow down".to_string())
        } else {
            (200, "[]".to_string())
        }
    }));
    let client = ModelClient::connect(&endpoint(&server.base_url)).unwrap();
    let reply = client.complete(&prompt());
    assert!(!reply.failed);
    assert_eq!(reply.attempt_count, 3);
    assert_eq!(calls.load(Ordering::SeqCst), 3);
}

#[test]
fn timeout_every_attempt_is_terminal() {
    let server = stub::serve(Arc::new(|_: &str| {
        std::thread::sleep(std::time::Duration::from_secs(2));
        (200, "late".to_string())
    }));
    let mut ep = endpoint(&server.base_url);
    ep.timeout_s = 0.1;
    let client = ModelClient::connect(&ep).unwrap();
    let reply = client.complete(&prompt());
    assert!(reply.failed);
    assert!(reply.text.is_empty());
    assert_eq!(reply.attempt_count, ep.max_retries + 1);
}

#[test]
fn non_transient_status_fails_without_retry() {
    let calls = Arc::new(AtomicU32::new(0));
    let calls_seen = Arc::clone(&calls);
    let server = stub::serve(Arc::new(move |_: &str| {
        calls_seen.fetch_add(1, Ordering::SeqCst);
        (401, "bad key".to_string())
    }));
    let client = ModelClient::connect(&endpoint(&server.base_url)).unwrap();
    let reply = client.complete(&prompt());
    assert!(reply.failed);
    assert_eq!(reply.attempt_count, 1);
    assert_eq!(calls.load(Ordering::SeqCst), 1);
}

#[test]
fn missing_credential_is_config_error() {
    let mut ep = endpoint("http://127.0.0.1:9");
    ep.credential_ref = Some("ROUTEBENCH_TEST_KEY_THAT_DOES_NOT_EXIST".into());
    match ModelClient::connect(&ep) {
        Err(GatewayError::Config(msg)) => assert!(msg.contains("ROUTEBENCH_TEST_KEY")),
        other => panic!("expected config error, got {other:?}"),
    }
}

#[test]
fn credential_never_serialized() {
    let mut ep = endpoint("http://127.0.0.1:9");
    ep.credential_ref = Some("SOME_VAR".into());
    let json = serde_json::to_string(&ep).unwrap();
    assert!(json.contains("SOME_VAR")); // the variable *name* is config
    assert!(!json.contains("secret")); // and there is no value field at all
}
