//! Replays recorded HTTP exchanges instead of touching the network.
//!
//! A transcript file looks like
//!
//! ```json
//! {"exchanges": [
//!   {"request": {"method": "GET", "path": "/v1/tracks", "query": {"ids": "a,b"}},
//!    "response": {"status": 200, "headers": {}, "body": {"tracks": []}},
//!    "repeat": false}
//! ]}
//! ```
//!
//! Requests match on method, path and the full set of query parameters; the
//! host is ignored. Each exchange is served once unless `repeat` is true,
//! and the first unused match wins, so a 429 followed by a 200 for the same
//! request replays in order. A `body` that is a JSON string is sent verbatim.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use url::Url;

use crate::error::{IngestError, Result};
use crate::transport::{HttpRequest, HttpResponse, Transport, TransportError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordedRequest {
    pub method: String,
    pub path: String,
    #[serde(default)]
    pub query: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordedResponse {
    pub status: u16,
    #[serde(default)]
    pub headers: BTreeMap<String, String>,
    #[serde(default)]
    pub body: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exchange {
    pub request: RecordedRequest,
    pub response: RecordedResponse,
    #[serde(default)]
    pub repeat: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub exchanges: Vec<Exchange>,
}

impl Transcript {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| IngestError::Config(format!("cannot read fixture {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| IngestError::parse(None, format!("fixture {}: {e}", path.display())))
    }

    /// Every `*.json` file in `dir`, concatenated in file-name order.
    pub fn load_dir(dir: &Path) -> Result<Self> {
        let entries = std::fs::read_dir(dir)
            .map_err(|e| IngestError::Config(format!("cannot read {}: {e}", dir.display())))?;
        let mut paths: Vec<_> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        let mut out = Transcript::default();
        for p in paths {
            out.exchanges.extend(Transcript::load(&p)?.exchanges);
        }
        Ok(out)
    }

    pub fn merge(mut self, other: Transcript) -> Self {
        self.exchanges.extend(other.exchanges);
        self
    }
}

/// A request as observed by [`FixtureTransport`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeenRequest {
    pub method: String,
    pub path: String,
    pub query: BTreeMap<String, String>,
    pub headers: Vec<(String, String)>,
}

impl SeenRequest {
    pub fn header(&self, name: &str) -> Option<&str> {
        self.headers
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case(name))
            .map(|(_, v)| v.as_str())
    }
}

#[derive(Debug)]
pub struct FixtureTransport {
    exchanges: Vec<Exchange>,
    state: Mutex<FixtureState>,
}

#[derive(Debug, Default)]
struct FixtureState {
    used: Vec<bool>,
    seen: Vec<SeenRequest>,
}

impl FixtureTransport {
    pub fn new(transcript: Transcript) -> Self {
        let n = transcript.exchanges.len();
        FixtureTransport {
            exchanges: transcript.exchanges,
            state: Mutex::new(FixtureState {
                used: vec![false; n],
                seen: Vec::new(),
            }),
        }
    }

    /// Every request received so far, in arrival order.
    pub fn requests(&self) -> Vec<SeenRequest> {
        self.state.lock().expect("fixture lock").seen.clone()
    }

    pub fn requests_to(&self, path_prefix: &str) -> Vec<SeenRequest> {
        self.requests()
            .into_iter()
            .filter(|r| r.path.starts_with(path_prefix))
            .collect()
    }
}

fn split_url(raw: &str) -> std::result::Result<(String, BTreeMap<String, String>), TransportError> {
    let url = Url::parse(raw).map_err(|e| TransportError::Refused(format!("bad url {raw}: {e}")))?;
    let query = url.query_pairs().map(|(k, v)| (k.into_owned(), v.into_owned())).collect();
    Ok((url.path().to_owned(), query))
}

impl Transport for FixtureTransport {
    fn send(&self, request: &HttpRequest) -> std::result::Result<HttpResponse, TransportError> {
        let (path, query) = split_url(&request.url)?;
        let mut state = self.state.lock().expect("fixture lock");
        state.seen.push(SeenRequest {
            method: request.method.clone(),
            path: path.clone(),
            query: query.clone(),
            headers: request.headers.clone(),
        });
        let hit = self.exchanges.iter().enumerate().position(|(i, ex)| {
            (ex.repeat || !state.used[i])
                && ex.request.method.eq_ignore_ascii_case(&request.method)
                && ex.request.path == path
                && ex.request.query == query
        });
        let Some(i) = hit else {
            return Err(TransportError::Refused(format!(
                "no recorded exchange for {} {path} {query:?}",
                request.method
            )));
        };
        state.used[i] = true;
        let recorded = &self.exchanges[i].response;
        let body = match &recorded.body {
            serde_json::Value::String(s) => s.clone(),
            serde_json::Value::Null => String::new(),
            other => other.to_string(),
        };
        Ok(HttpResponse {
            status: recorded.status,
            headers: recorded
                .headers
                .iter()
                .map(|(k, v)| (k.to_ascii_lowercase(), v.clone()))
                .collect(),
            body,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn transcript() -> Transcript {
        serde_json::from_str(
            r#"{"exchanges":[
                {"request":{"method":"GET","path":"/v1/x","query":{"a":"1"}},
                 "response":{"status":429,"headers":{"Retry-After":"2"}}},
                {"request":{"method":"GET","path":"/v1/x","query":{"a":"1"}},
                 "response":{"status":200,"body":{"ok":true}}},
                {"request":{"method":"POST","path":"/api/token"},
                 "response":{"status":200,"body":"raw"},"repeat":true}
            ]}"#,
        )
        .unwrap()
    }

    #[test]
    fn replays_in_order_and_records() {
        let t = FixtureTransport::new(transcript());
        let r = HttpRequest::get("https://h.example/v1/x?a=1");
        assert_eq!(t.send(&r).unwrap().status, 429);
        let second = t.send(&r).unwrap();
        assert_eq!((second.status, second.body.as_str()), (200, r#"{"ok":true}"#));
        assert!(t.send(&r).is_err());
        assert!(t.send(&HttpRequest::get("https://h.example/v1/x?a=2")).is_err());
        for _ in 0..3 {
            assert_eq!(t.send(&HttpRequest::post("http://other/api/token", "")).unwrap().body, "raw");
        }
        assert_eq!(t.requests().len(), 7);
        assert_eq!(t.requests_to("/v1/x").len(), 4);
    }

    #[test]
    fn header_names_lower_cased() {
        let t = FixtureTransport::new(transcript());
        let r = t.send(&HttpRequest::get("https://h/v1/x?a=1")).unwrap();
        assert_eq!(r.header("Retry-After"), Some("2"));
    }
}
