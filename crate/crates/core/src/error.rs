use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by discovery, identification, and archival operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed url {input:?}: {source}")]
    MalformedUrl {
        input: String,
        #[source]
        source: url::ParseError,
    },

    #[error("unsupported scheme {scheme:?} in {url}")]
    UnsupportedScheme { scheme: String, url: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("request failed: {0}")]
    Http(#[from] reqwest::Error),

    #[error("unexpected HTTP status {status} from {url}")]
    HttpStatus { status: u16, url: String },

    #[error("response body exceeds {limit} bytes")]
    BodyTooLarge { limit: usize },

    #[error("empty response body from {0}")]
    EmptyBody(String),

    #[error("request timed out after {0:?}")]
    Timeout(std::time::Duration),

    #[error("expected multipart/x-mixed-replace, got {content_type:?}")]
    NotMultipart { content_type: Option<String> },

    #[error("multipart boundary not found in content type {content_type:?}")]
    BoundaryNotFound { content_type: Option<String> },

    #[error("no complete frame received within {0:?}")]
    FrameTimeout(std::time::Duration),

    #[error("stream ended before a complete frame was read")]
    StreamEnded,

    #[error("raster dimensions differ: {a:?} vs {b:?}")]
    DimensionMismatch { a: (u32, u32), b: (u32, u32) },

    #[error("raster pixel buffer length {len} does not match {width}x{height}")]
    BadRasterSize { len: usize, width: u32, height: u32 },

    #[error("playlist parse error: {0}")]
    PlaylistParse(String),

    #[error("multipart parse error: {0}")]
    MultipartParse(String),

    #[error("{path}: corrupt record on line {line}: {message}")]
    CorruptLog {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("unknown fleet path {0:?}")]
    UnknownFleetPath(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    /// Short machine-readable tag used in manifest `error_kind` fields.
    pub fn kind_tag(&self) -> &'static str {
        match self {
            Error::MalformedUrl { .. } => "malformed_url",
            Error::UnsupportedScheme { .. } => "unsupported_scheme",
            Error::InvalidConfig(_) => "invalid_config",
            Error::Http(e) => {
                if e.is_connect() {
                    "connect"
                } else if e.is_timeout() {
                    "timeout"
                } else {
                    "http"
                }
            }
            Error::HttpStatus { .. } => "http_status",
            Error::BodyTooLarge { .. } => "body_too_large",
            Error::EmptyBody(_) => "empty_body",
            Error::Timeout(_) => "timeout",
            Error::NotMultipart { .. } => "not_multipart",
            Error::BoundaryNotFound { .. } => "boundary_not_found",
            Error::FrameTimeout(_) => "frame_timeout",
            Error::StreamEnded => "stream_ended",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::BadRasterSize { .. } => "bad_raster",
            Error::PlaylistParse(_) => "playlist_parse",
            Error::MultipartParse(_) => "multipart_parse",
            Error::CorruptLog { .. } => "corrupt_log",
            Error::UnknownFleetPath(_) => "unknown_path",
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
