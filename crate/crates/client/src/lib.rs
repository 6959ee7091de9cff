//! Thin async client for the binpack3d HTTP service.

use reqwest::{Method, StatusCode};
use serde::de::DeserializeOwned;
use serde::Serialize;

use binpack3d_core::api::{
    BenchRequest, BenchResponse, CollectionResponse, EpisodeRequest, ErrorBody, IndustrialRequest,
    MilpExportResponse, SessionCreated, SessionRequest, SessionState, StepRequest, StepResponse, SyntheticRequest,
};
use binpack3d_core::sim::{EpisodeMetrics, SyntheticCollection, Trace, ValidationReport};
use binpack3d_core::BoxDims;

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    #[error("request to {url} failed: {source}")]
    Transport {
        url: String,
        #[source]
        source: reqwest::Error,
    },
    /// The service answered with an error status.
    #[error("server returned {status}: {message}")]
    Api { status: StatusCode, message: String },
}

impl ClientError {
    /// True when the server rejected the request as malformed.
    pub fn is_bad_request(&self) -> bool {
        matches!(self, ClientError::Api { status, .. } if *status == StatusCode::BAD_REQUEST)
    }
}

pub type Result<T> = std::result::Result<T, ClientError>;

#[derive(Clone, Debug)]
pub struct Client {
    base: String,
    http: reqwest::Client,
}

impl Client {
    /// `base` is the server root, e.g. `http://127.0.0.1:8080`.
    pub fn new(base: impl Into<String>) -> Self {
        let base = base.into().trim_end_matches('/').to_string();
        Self { base, http: reqwest::Client::new() }
    }

    pub fn base_url(&self) -> &str {
        &self.base
    }

    async fn call<B: Serialize + ?Sized, T: DeserializeOwned>(&self, method: Method, path: &str, body: Option<&B>) -> Result<T> {
        let url = format!("{}{}", self.base, path);
        let mut req = self.http.request(method, &url);
        if let Some(b) = body {
            req = req.json(b);
        }
        let transport = |source| ClientError::Transport { url: url.clone(), source };
        let resp = req.send().await.map_err(transport)?;
        let status = resp.status();
        if !status.is_success() {
            let text = resp.text().await.unwrap_or_default();
            let message = serde_json::from_str::<ErrorBody>(&text).map(|b| b.error).unwrap_or(text);
            return Err(ClientError::Api { status, message });
        }
        resp.json().await.map_err(transport)
    }

    pub async fn health(&self) -> Result<()> {
        let url = format!("{}/health", self.base);
        let resp = self.http.get(&url).send().await.map_err(|source| ClientError::Transport { url, source })?;
        let status = resp.status();
        if status.is_success() {
            Ok(())
        } else {
            Err(ClientError::Api { status, message: "health check failed".into() })
        }
    }

    pub async fn synthetic(&self, req: &SyntheticRequest) -> Result<SyntheticCollection> {
        self.call(Method::POST, "/v1/collections/synthetic", Some(req)).await
    }

    pub async fn industrial(&self, req: &IndustrialRequest) -> Result<Vec<BoxDims>> {
        let r: CollectionResponse = self.call(Method::POST, "/v1/collections/industrial", Some(req)).await?;
        Ok(r.boxes)
    }

    pub async fn episode(&self, req: &EpisodeRequest) -> Result<EpisodeMetrics> {
        self.call(Method::POST, "/v1/episodes", Some(req)).await
    }

    pub async fn bench(&self, req: &BenchRequest) -> Result<BenchResponse> {
        self.call(Method::POST, "/v1/bench", Some(req)).await
    }

    pub async fn validate(&self, trace: &Trace) -> Result<ValidationReport> {
        self.call(Method::POST, "/v1/validate", Some(trace)).await
    }

    pub async fn export_milp(&self, req: &EpisodeRequest) -> Result<MilpExportResponse> {
        self.call(Method::POST, "/v1/milp", Some(req)).await
    }

    pub async fn open_session(&self, req: &SessionRequest) -> Result<String> {
        let r: SessionCreated = self.call(Method::POST, "/v1/sessions", Some(req)).await?;
        Ok(r.id)
    }

    pub async fn step(&self, id: &str, arrivals: Vec<BoxDims>) -> Result<StepResponse> {
        self.call(Method::POST, &format!("/v1/sessions/{id}/step"), Some(&StepRequest { arrivals })).await
    }

    pub async fn session(&self, id: &str) -> Result<SessionState> {
        self.call::<(), _>(Method::GET, &format!("/v1/sessions/{id}"), None).await
    }

    pub async fn close_session(&self, id: &str) -> Result<SessionState> {
        self.call::<(), _>(Method::DELETE, &format!("/v1/sessions/{id}"), None).await
    }
}
