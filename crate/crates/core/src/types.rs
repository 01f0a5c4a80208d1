use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use url::Url;

/// The kind of media an endpoint serves, inferred from its URL pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MediaKind {
    StillImage,
    MjpegStream,
    HlsStream,
    RtspLink,
    RtmpLink,
}

impl MediaKind {
    /// True for kinds the archiver can capture over HTTP.
    /// RTSP/RTMP links are recognized and registered but never captured.
    pub fn is_capturable(self) -> bool {
        matches!(
            self,
            MediaKind::StillImage | MediaKind::MjpegStream | MediaKind::HlsStream
        )
    }

    pub fn all() -> [MediaKind; 5] {
        [
            MediaKind::StillImage,
            MediaKind::MjpegStream,
            MediaKind::HlsStream,
            MediaKind::RtspLink,
            MediaKind::RtmpLink,
        ]
    }
}

impl fmt::Display for MediaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            MediaKind::StillImage => "StillImage",
            MediaKind::MjpegStream => "MjpegStream",
            MediaKind::HlsStream => "HlsStream",
            MediaKind::RtspLink => "RtspLink",
            MediaKind::RtmpLink => "RtmpLink",
        };
        f.write_str(s)
    }
}

/// Stable camera identity: a 128-bit digest of the normalized endpoint URL,
/// rendered as 32 lowercase hex characters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CameraId(String);

impl CameraId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for CameraId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Deterministic id for a normalized endpoint: same endpoint, same id, always.
pub fn derive_camera_id(endpoint: &Url) -> CameraId {
    let digest = Sha256::digest(endpoint.as_str().as_bytes());
    CameraId(hex::encode(&digest[..16]))
}

/// Hex-encoded SHA-256 of arbitrary bytes, used for content digests.
pub fn content_digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn camera_id_is_deterministic() {
        let u = Url::parse("http://a.example/cam.jpg").unwrap();
        assert_eq!(derive_camera_id(&u), derive_camera_id(&u));
    }

    #[test]
    fn camera_id_is_32_lowercase_hex() {
        let u = Url::parse("http://a.example/cam.jpg").unwrap();
        let id = derive_camera_id(&u);
        assert_eq!(id.as_str().len(), 32);
        assert!(id
            .as_str()
            .chars()
            .all(|c| c.is_ascii_hexdigit() && !c.is_ascii_uppercase()));
    }

    #[test]
    fn near_duplicate_urls_get_distinct_ids() {
        // 10,000 URLs differing in one path character must never collide.
        let mut seen = std::collections::HashSet::new();
        for i in 0..10_000u32 {
            let u = Url::parse(&format!("http://a.example/cams/cam{i}.jpg")).unwrap();
            assert!(seen.insert(derive_camera_id(&u)), "collision at {i}");
        }
    }

    #[test]
    fn rtsp_and_rtmp_are_not_capturable() {
        assert!(!MediaKind::RtspLink.is_capturable());
        assert!(!MediaKind::RtmpLink.is_capturable());
        assert!(MediaKind::StillImage.is_capturable());
        assert!(MediaKind::MjpegStream.is_capturable());
        assert!(MediaKind::HlsStream.is_capturable());
    }
}
