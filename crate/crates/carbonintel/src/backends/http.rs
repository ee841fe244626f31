//! Live HTTP chat backend.
//!
//! Wire protocol: POST {model, messages, max_tokens, temperature} as
//! JSON, bearer token from the environment variable named in the
//! binding, response {content, usage{prompt_tokens, completion_tokens}}.
//! Any endpoint speaking this shape works. The token is read per call
//! and never stored, logged, or echoed into errors.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::backends::chat::{
    BackendError, ChatBackend, ChatMessage, ChatRequest, ChatResponse, Usage,
};
use crate::backends::meter::ModelBinding;
use crate::core::Stage;

pub const DEFAULT_HTTP_TIMEOUT: Duration = Duration::from_secs(60);

#[derive(Serialize)]
struct WireRequest<'a> {
    model: &'a str,
    messages: &'a [ChatMessage],
    max_tokens: u32,
    temperature: f64,
}

#[derive(Deserialize, Default)]
struct WireUsage {
    #[serde(default)]
    prompt_tokens: u64,
    #[serde(default)]
    completion_tokens: u64,
}

#[derive(Deserialize)]
struct WireResponse {
    content: String,
    #[serde(default)]
    usage: WireUsage,
}

pub struct HttpBackend {
    agent: ureq::Agent,
    endpoint: String,
    api_key_env: String,
}

impl HttpBackend {
    pub fn new(binding: &ModelBinding, timeout: Duration) -> Self {
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .build();
        Self {
            agent: ureq::Agent::new_with_config(config),
            endpoint: binding.endpoint.clone(),
            api_key_env: binding.api_key_env.clone(),
        }
    }
}

fn classify(err: ureq::Error, endpoint: &str) -> BackendError {
    match err {
        ureq::Error::StatusCode(code @ (401 | 403)) => BackendError::Auth {
            endpoint: endpoint.to_owned(),
            detail: format!("http status {code}"),
        },
        ureq::Error::StatusCode(code) => BackendError::Provider {
            detail: format!("http status {code} from {endpoint}"),
        },
        other => BackendError::Transport {
            endpoint: endpoint.to_owned(),
            detail: other.to_string(),
        },
    }
}

impl ChatBackend for HttpBackend {
    fn complete(
        &self,
        _role: &str,
        _stage: Stage,
        request: &ChatRequest,
    ) -> Result<ChatResponse, BackendError> {
        request.validate()?;
        let token = std::env::var(&self.api_key_env).map_err(|_| BackendError::Auth {
            endpoint: self.endpoint.clone(),
            detail: format!("environment variable {} is not set", self.api_key_env),
        })?;
        let wire = WireRequest {
            model: &request.model_id,
            messages: &request.messages,
            max_tokens: request.max_tokens,
            temperature: request.temperature,
        };
        let mut response = self
            .agent
            .post(&self.endpoint)
            .header("authorization", format!("Bearer {token}"))
            .send_json(&wire)
            .map_err(|e| classify(e, &self.endpoint))?;
        let parsed: WireResponse =
            response
                .body_mut()
                .read_json()
                .map_err(|e| BackendError::Provider {
                    detail: format!("malformed response body: {e}"),
                })?;
        if parsed.content.is_empty() {
            return Err(BackendError::Provider {
                detail: "response content is empty".into(),
            });
        }
        Ok(ChatResponse {
            content: parsed.content,
            usage: Usage {
                prompt_tokens: parsed.usage.prompt_tokens,
                completion_tokens: parsed.usage.completion_tokens,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::{Read, Write};
    use std::net::TcpListener;
    use std::sync::mpsc;

    fn binding(endpoint: &str, api_key_env: &str) -> ModelBinding {
        ModelBinding {
            role: Stage::Research,
            model_id: "model-a".into(),
            endpoint: endpoint.into(),
            api_key_env: api_key_env.into(),
            prompt_price_micro_per_1k: 0,
            completion_price_micro_per_1k: 0,
        }
    }

    fn request() -> ChatRequest {
        ChatRequest {
            model_id: "model-a".into(),
            messages: vec![ChatMessage::user("ping")],
            max_tokens: 16,
            temperature: 0.0,
        }
    }

    /// One-shot HTTP stub: answers a single request with the given
    /// status line and body, and hands the raw request back for asserts.
    fn stub_server(status: &'static str, body: &'static str) -> (String, mpsc::Receiver<String>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let (tx, rx) = mpsc::channel();
        std::thread::spawn(move || {
            let Ok((mut stream, _)) = listener.accept() else {
                return;
            };
            let mut raw = Vec::new();
            let mut chunk = [0u8; 1024];
            let header_end = loop {
                let n = stream.read(&mut chunk).unwrap();
                raw.extend_from_slice(&chunk[..n]);
                if let Some(pos) = raw.windows(4).position(|w| w == b"\r\n\r\n") {
                    break pos + 4;
                }
                if n == 0 {
                    return;
                }
            };
            let headers = String::from_utf8_lossy(&raw[..header_end]).to_lowercase();
            let content_length: Option<usize> = headers
                .lines()
                .find_map(|l| l.strip_prefix("content-length:"))
                .and_then(|v| v.trim().parse().ok());
            let body_done = |raw: &[u8]| match content_length {
                Some(len) => raw.len() >= header_end + len,
                // Chunked transfer ends with a zero-size chunk.
                None => raw.ends_with(b"0\r\n\r\n"),
            };
            while !body_done(&raw) {
                let n = stream.read(&mut chunk).unwrap();
                if n == 0 {
                    break;
                }
                raw.extend_from_slice(&chunk[..n]);
            }
            let _ = tx.send(String::from_utf8_lossy(&raw).into_owned());
            let response = format!(
                "HTTP/1.1 {status}\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
                body.len()
            );
            stream.write_all(response.as_bytes()).unwrap();
            let _ = stream.flush();
        });
        (format!("http://{addr}/v1/chat"), rx)
    }

    #[test]
    fn parses_fixture_body_from_stub_server() {
        let (endpoint, seen) = stub_server(
            "200 OK",
            r#"{"content":"hello from stub","usage":{"prompt_tokens":12,"completion_tokens":7}}"#,
        );
        unsafe { std::env::set_var("CARBONINTEL_TEST_KEY_OK", "test-key-123") };
        let backend = HttpBackend::new(
            &binding(&endpoint, "CARBONINTEL_TEST_KEY_OK"),
            Duration::from_secs(5),
        );
        let resp = backend.complete("researcher", Stage::Research, &request()).unwrap();
        assert_eq!(resp.content, "hello from stub");
        assert_eq!(resp.usage.prompt_tokens, 12);
        assert_eq!(resp.usage.completion_tokens, 7);
        let raw = seen.recv().unwrap();
        assert!(raw.to_lowercase().contains("authorization: bearer test-key-123"));
        let body = raw.split_once("\r\n\r\n").unwrap().1;
        let sent: serde_json::Value = serde_json::from_str(body).unwrap();
        assert_eq!(sent["model"], "model-a");
        assert_eq!(sent["messages"][0]["role"], "user");
        assert_eq!(sent["messages"][0]["content"], "ping");
        assert_eq!(sent["max_tokens"], 16);
    }

    #[test]
    fn unauthorized_status_is_fatal_auth_error() {
        let (endpoint, _seen) = stub_server("401 Unauthorized", "{}");
        unsafe { std::env::set_var("CARBONINTEL_TEST_KEY_401", "k") };
        let backend = HttpBackend::new(
            &binding(&endpoint, "CARBONINTEL_TEST_KEY_401"),
            Duration::from_secs(5),
        );
        let err = backend
            .complete("researcher", Stage::Research, &request())
            .unwrap_err();
        assert!(matches!(err, BackendError::Auth { .. }), "{err}");
        assert!(!err.is_transient());
    }

    #[test]
    fn server_error_status_is_fatal_provider_error() {
        let (endpoint, _seen) = stub_server("500 Internal Server Error", "{}");
        unsafe { std::env::set_var("CARBONINTEL_TEST_KEY_500", "k") };
        let backend = HttpBackend::new(
            &binding(&endpoint, "CARBONINTEL_TEST_KEY_500"),
            Duration::from_secs(5),
        );
        let err = backend
            .complete("researcher", Stage::Research, &request())
            .unwrap_err();
        assert!(matches!(err, BackendError::Provider { .. }), "{err}");
    }

    #[test]
    fn malformed_body_is_provider_error() {
        let (endpoint, _seen) = stub_server("200 OK", "not json");
        unsafe { std::env::set_var("CARBONINTEL_TEST_KEY_BAD", "k") };
        let backend = HttpBackend::new(
            &binding(&endpoint, "CARBONINTEL_TEST_KEY_BAD"),
            Duration::from_secs(5),
        );
        let err = backend
            .complete("researcher", Stage::Research, &request())
            .unwrap_err();
        assert!(matches!(err, BackendError::Provider { .. }), "{err}");
    }

    #[test]
    fn connection_refused_is_transient_transport_error() {
        // Bind then drop to get a port nothing listens on.
        let port = {
            let l = TcpListener::bind("127.0.0.1:0").unwrap();
            l.local_addr().unwrap().port()
        };
        unsafe { std::env::set_var("CARBONINTEL_TEST_KEY_DOWN", "k") };
        let backend = HttpBackend::new(
            &binding(
                &format!("http://127.0.0.1:{port}/v1/chat"),
                "CARBONINTEL_TEST_KEY_DOWN",
            ),
            Duration::from_secs(2),
        );
        let err = backend
            .complete("researcher", Stage::Research, &request())
            .unwrap_err();
        assert!(err.is_transient(), "{err}");
    }

    #[test]
    fn missing_key_env_fails_before_any_network_io() {
        let backend = HttpBackend::new(
            &binding("http://127.0.0.1:1/unreachable", "CARBONINTEL_TEST_KEY_UNSET"),
            Duration::from_secs(2),
        );
        let err = backend
            .complete("researcher", Stage::Research, &request())
            .unwrap_err();
        match err {
            BackendError::Auth { detail, .. } => {
                assert!(detail.contains("CARBONINTEL_TEST_KEY_UNSET"));
                // The error names the variable, never a token value.
                assert!(!detail.contains("Bearer"));
            }
            other => panic!("expected Auth, got {other:?}"),
        }
    }
}
