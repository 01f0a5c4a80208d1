//! HTTP fetch abstraction shared by the crawler, liveness sampler, and
//! archiver. The trait keeps the sampling and capture paths testable with
//! canned responses; [`HttpFetcher`] is the reqwest-backed implementation
//! used everywhere else.

use std::io;
use std::pin::Pin;
use std::time::Duration;

use async_trait::async_trait;
use bytes::Bytes;
use futures::{Stream, StreamExt};
use url::Url;

use crate::error::{Error, Result};

pub const DEFAULT_USER_AGENT: &str = concat!("camscout/", env!("CARGO_PKG_VERSION"));
/// Per-page body cap. Keeps stream URLs fetched as "pages" from hanging
/// the crawler indefinitely.
pub const DEFAULT_MAX_BODY_BYTES: usize = 8 * 1024 * 1024;
pub const DEFAULT_REQUEST_TIMEOUT: Duration = Duration::from_secs(10);

#[derive(Debug, Clone)]
pub struct FetchConfig {
    pub user_agent: String,
    pub request_timeout: Duration,
    pub max_body_bytes: usize,
}

impl Default for FetchConfig {
    fn default() -> Self {
        FetchConfig {
            user_agent: DEFAULT_USER_AGENT.to_string(),
            request_timeout: DEFAULT_REQUEST_TIMEOUT,
            max_body_bytes: DEFAULT_MAX_BODY_BYTES,
        }
    }
}

/// A fully buffered response. `body` is capped at the fetcher's configured
/// maximum; exceeding the cap is an error, not a truncation.
#[derive(Debug, Clone)]
pub struct FetchResponse {
    pub status: u16,
    pub content_type: Option<String>,
    pub body: Vec<u8>,
    pub final_url: Url,
}

impl FetchResponse {
    pub fn is_success(&self) -> bool {
        (200..300).contains(&self.status)
    }

    /// Body of a 2xx response, or an `HttpStatus` error.
    pub fn into_ok_body(self) -> Result<Vec<u8>> {
        if self.is_success() {
            Ok(self.body)
        } else {
            Err(Error::HttpStatus {
                status: self.status,
                url: self.final_url.to_string(),
            })
        }
    }
}

pub type ByteStream = Pin<Box<dyn Stream<Item = io::Result<Bytes>> + Send>>;

/// An open streaming response; the connection closes when dropped.
pub struct StreamResponse {
    pub status: u16,
    pub content_type: Option<String>,
    pub stream: ByteStream,
}

#[async_trait]
pub trait Fetcher: Send + Sync {
    /// GET a URL and buffer the whole body (subject to the body cap).
    async fn get(&self, url: &Url) -> Result<FetchResponse>;

    /// GET a URL and hand back the raw byte stream, for endpoints that never
    /// terminate (MJPEG). No total deadline is applied; callers enforce their
    /// own frame-level timeouts.
    async fn get_stream(&self, url: &Url) -> Result<StreamResponse>;

    fn config(&self) -> &FetchConfig;
}

pub struct HttpFetcher {
    client: reqwest::Client,
    config: FetchConfig,
}

impl HttpFetcher {
    pub fn new(config: FetchConfig) -> Result<Self> {
        let client = reqwest::Client::builder()
            .user_agent(config.user_agent.clone())
            .connect_timeout(config.request_timeout)
            .no_proxy()
            .build()?;
        Ok(HttpFetcher { client, config })
    }

    pub fn with_defaults() -> Result<Self> {
        Self::new(FetchConfig::default())
    }
}

fn content_type_of(resp: &reqwest::Response) -> Option<String> {
    resp.headers()
        .get(reqwest::header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .map(|s| s.to_string())
}

#[async_trait]
impl Fetcher for HttpFetcher {
    async fn get(&self, url: &Url) -> Result<FetchResponse> {
        let resp = self
            .client
            .get(url.clone())
            .timeout(self.config.request_timeout)
            .send()
            .await?;
        let status = resp.status().as_u16();
        let content_type = content_type_of(&resp);
        let final_url = resp.url().clone();

        let mut body = Vec::new();
        let mut stream = resp.bytes_stream();
        while let Some(chunk) = stream.next().await {
            let chunk = chunk?;
            if body.len() + chunk.len() > self.config.max_body_bytes {
                return Err(Error::BodyTooLarge {
                    limit: self.config.max_body_bytes,
                });
            }
            body.extend_from_slice(&chunk);
        }
        Ok(FetchResponse {
            status,
            content_type,
            body,
            final_url,
        })
    }

    async fn get_stream(&self, url: &Url) -> Result<StreamResponse> {
        // Connect within the configured timeout, then leave the body open.
        let resp = self
            .client
            .get(url.clone())
            .timeout(Duration::from_secs(24 * 3600))
            .send()
            .await?;
        let status = resp.status().as_u16();
        let content_type = content_type_of(&resp);
        let stream = resp
            .bytes_stream()
            .map(|r| r.map_err(|e| io::Error::new(io::ErrorKind::Other, e)))
            .boxed();
        Ok(StreamResponse {
            status,
            content_type,
            stream,
        })
    }

    fn config(&self) -> &FetchConfig {
        &self.config
    }
}
