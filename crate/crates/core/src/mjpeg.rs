//! MJPEG (multipart/x-mixed-replace) frame extraction.
//!
//! An MJPEG endpoint serves an unbounded multipart response whose parts are
//! successive JPEG frames. Snapshotting reads the stream only until the first
//! complete, well-formed frame and then drops the connection. Parts carrying
//! a `Content-Length` header are read exactly; parts without one are scanned
//! to the next boundary delimiter.

use bytes::{Buf, Bytes, BytesMut};
use futures::{Stream, StreamExt};
use url::Url;

use crate::error::{Error, Result};
use crate::fetch::Fetcher;

const JPEG_SOI: [u8; 2] = [0xFF, 0xD8];
const JPEG_EOI: [u8; 2] = [0xFF, 0xD9];
/// Upper bound on malformed parts skipped before giving up on a stream.
const MAX_SKIPPED_PARTS: usize = 64;
const MAX_HEADER_BYTES: usize = 16 * 1024;

/// JPEG framing check: starts with SOI, ends with EOI.
pub fn is_jpeg_framed(bytes: &[u8]) -> bool {
    bytes.len() >= 4 && bytes[..2] == JPEG_SOI && bytes[bytes.len() - 2..] == JPEG_EOI
}

/// Extract the `boundary` parameter from a multipart content type.
pub fn boundary_from_content_type(content_type: &str) -> Option<String> {
    for param in content_type.split(';').skip(1) {
        let param = param.trim();
        if param.len() > "boundary=".len()
            && param[.."boundary=".len()].eq_ignore_ascii_case("boundary=")
        {
            let value = param["boundary=".len()..].trim_matches('"');
            if !value.is_empty() {
                return Some(value.to_string());
            }
        }
    }
    None
}

/// One multipart part: its headers' content type and the raw body bytes.
#[derive(Debug, Clone)]
pub struct Part {
    pub content_type: Option<String>,
    pub body: Vec<u8>,
}

/// Incremental multipart parser over an async byte stream.
pub struct MultipartReader<S> {
    stream: S,
    buf: BytesMut,
    delimiter: Vec<u8>,
}

impl<S> MultipartReader<S>
where
    S: Stream<Item = std::io::Result<Bytes>> + Unpin,
{
    pub fn new(stream: S, boundary: &str) -> Self {
        MultipartReader {
            stream,
            buf: BytesMut::new(),
            delimiter: format!("--{boundary}").into_bytes(),
        }
    }

    async fn fill(&mut self) -> Result<bool> {
        match self.stream.next().await {
            Some(Ok(chunk)) => {
                self.buf.extend_from_slice(&chunk);
                Ok(true)
            }
            Some(Err(e)) => Err(Error::io("reading mjpeg stream", e)),
            None => Ok(false),
        }
    }

    /// Find `pattern` in the buffer, filling from the stream as needed.
    /// Returns None when the stream ends first.
    async fn find(&mut self, pattern: &[u8]) -> Result<Option<usize>> {
        loop {
            if self.buf.len() >= pattern.len() {
                if let Some(i) = find_subsequence(&self.buf, pattern) {
                    return Ok(Some(i));
                }
            }
            if !self.fill().await? {
                return Ok(None);
            }
        }
    }

    async fn ensure(&mut self, n: usize) -> Result<bool> {
        while self.buf.len() < n {
            if !self.fill().await? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Read the next part, or None once the stream ends or the closing
    /// delimiter is seen.
    pub async fn next_part(&mut self) -> Result<Option<Part>> {
        let delimiter = self.delimiter.clone();
        let Some(at) = self.find(&delimiter).await? else {
            return Ok(None);
        };
        self.buf.advance(at + delimiter.len());

        if !self.ensure(2).await? {
            return Ok(None);
        }
        if &self.buf[..2] == b"--" {
            // Closing delimiter.
            return Ok(None);
        }
        // Discard the rest of the delimiter line.
        let Some(nl) = self.find(b"\n").await? else {
            return Ok(None);
        };
        self.buf.advance(nl + 1);

        // Headers until a blank line. Tolerates bare-LF line endings.
        let mut content_type = None;
        let mut content_length: Option<usize> = None;
        let mut header_bytes = 0usize;
        loop {
            let Some(nl) = self.find(b"\n").await? else {
                return Ok(None);
            };
            header_bytes += nl + 1;
            if header_bytes > MAX_HEADER_BYTES {
                return Err(Error::MultipartParse("header block too large".into()));
            }
            let line = self.buf.split_to(nl + 1);
            let line = trim_crlf(&line);
            if line.is_empty() {
                break;
            }
            if let Some((name, value)) = split_header(line) {
                match name.to_ascii_lowercase().as_str() {
                    "content-type" => content_type = Some(value.to_string()),
                    "content-length" => content_length = value.trim().parse().ok(),
                    _ => {}
                }
            }
        }

        let body = match content_length {
            Some(n) => {
                if !self.ensure(n).await? {
                    return Ok(None);
                }
                let body = self.buf.split_to(n).to_vec();
                // Optional CRLF before the next delimiter.
                if self.ensure(2).await? && &self.buf[..2] == b"\r\n" {
                    self.buf.advance(2);
                }
                body
            }
            None => {
                let Some(end) = self.find(&delimiter).await? else {
                    return Ok(None);
                };
                let mut body = self.buf.split_to(end).to_vec();
                while body.last() == Some(&b'\n') || body.last() == Some(&b'\r') {
                    body.pop();
                }
                body
            }
        };

        Ok(Some(Part { content_type, body }))
    }
}

fn find_subsequence(haystack: &[u8], needle: &[u8]) -> Option<usize> {
    haystack
        .windows(needle.len())
        .position(|window| window == needle)
}

fn trim_crlf(line: &[u8]) -> &[u8] {
    let mut line = line;
    while let Some((&last, rest)) = line.split_last() {
        if last == b'\n' || last == b'\r' {
            line = rest;
        } else {
            break;
        }
    }
    line
}

fn split_header(line: &[u8]) -> Option<(String, String)> {
    let text = std::str::from_utf8(line).ok()?;
    let (name, value) = text.split_once(':')?;
    Some((name.trim().to_string(), value.trim().to_string()))
}

fn part_is_jpeg(part: &Part) -> bool {
    let ct_ok = match &part.content_type {
        Some(ct) => ct.to_ascii_lowercase().contains("jpeg"),
        None => true,
    };
    ct_ok && is_jpeg_framed(&part.body)
}

/// Connect to an MJPEG endpoint and return the first complete JPEG frame.
///
/// Corrupt leading parts are skipped. The fetcher's request timeout bounds
/// the whole operation; the connection is dropped once a frame is returned.
pub async fn sample_mjpeg_frame(url: &Url, fetcher: &dyn Fetcher) -> Result<Vec<u8>> {
    let deadline = fetcher.config().request_timeout;
    let resp = fetcher.get_stream(url).await?;
    if !(200..300).contains(&resp.status) {
        return Err(Error::HttpStatus {
            status: resp.status,
            url: url.to_string(),
        });
    }
    let content_type = resp.content_type.clone();
    let is_multipart = content_type
        .as_deref()
        .map(|ct| ct.to_ascii_lowercase().starts_with("multipart/x-mixed-replace"))
        .unwrap_or(false);
    if !is_multipart {
        return Err(Error::NotMultipart { content_type });
    }
    let boundary = content_type
        .as_deref()
        .and_then(boundary_from_content_type)
        .ok_or(Error::BoundaryNotFound { content_type })?;

    let mut reader = MultipartReader::new(resp.stream, &boundary);
    let read_frame = async {
        for _ in 0..MAX_SKIPPED_PARTS {
            match reader.next_part().await? {
                Some(part) if part_is_jpeg(&part) => return Ok(part.body),
                Some(_) => continue,
                None => return Err(Error::StreamEnded),
            }
        }
        Err(Error::StreamEnded)
    };
    match tokio::time::timeout(deadline, read_frame).await {
        Ok(result) => result,
        Err(_) => Err(Error::FrameTimeout(deadline)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fetch::{ByteStream, FetchConfig, FetchResponse, StreamResponse};
    use async_trait::async_trait;

    fn jpeg_bytes(tag: u8) -> Vec<u8> {
        let mut v = vec![0xFF, 0xD8, tag, tag, tag];
        v.extend_from_slice(&[0xFF, 0xD9]);
        v
    }

    fn part_bytes(boundary: &str, content_type: &str, body: &[u8], with_len: bool) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(format!("--{boundary}\r\n").as_bytes());
        out.extend_from_slice(format!("Content-Type: {content_type}\r\n").as_bytes());
        if with_len {
            out.extend_from_slice(format!("Content-Length: {}\r\n", body.len()).as_bytes());
        }
        out.extend_from_slice(b"\r\n");
        out.extend_from_slice(body);
        out.extend_from_slice(b"\r\n");
        out
    }

    /// Chop a byte blob into tiny chunks to exercise incremental parsing.
    fn chunked_stream(bytes: Vec<u8>, chunk: usize) -> impl Stream<Item = std::io::Result<Bytes>> + Unpin {
        let chunks: Vec<std::io::Result<Bytes>> = bytes
            .chunks(chunk)
            .map(|c| Ok(Bytes::copy_from_slice(c)))
            .collect();
        futures::stream::iter(chunks)
    }

    #[tokio::test]
    async fn reads_part_with_content_length() {
        let frame = jpeg_bytes(1);
        let raw = part_bytes("b", "image/jpeg", &frame, true);
        let mut reader = MultipartReader::new(chunked_stream(raw, 3), "b");
        let part = reader.next_part().await.unwrap().unwrap();
        assert_eq!(part.content_type.as_deref(), Some("image/jpeg"));
        assert_eq!(part.body, frame);
    }

    #[tokio::test]
    async fn reads_part_without_content_length_by_boundary_scan() {
        let frame = jpeg_bytes(2);
        let mut raw = part_bytes("bnd", "image/jpeg", &frame, false);
        raw.extend_from_slice(b"--bnd--\r\n");
        let mut reader = MultipartReader::new(chunked_stream(raw, 5), "bnd");
        let part = reader.next_part().await.unwrap().unwrap();
        assert_eq!(part.body, frame);
        assert!(reader.next_part().await.unwrap().is_none());
    }

    #[tokio::test]
    async fn skips_corrupt_first_part() {
        let good = jpeg_bytes(3);
        let mut raw = part_bytes("b", "image/jpeg", b"garbage no SOI", true);
        raw.extend_from_slice(&part_bytes("b", "image/jpeg", &good, true));
        let mut reader = MultipartReader::new(chunked_stream(raw, 7), "b");
        let first = reader.next_part().await.unwrap().unwrap();
        assert!(!part_is_jpeg(&first));
        let second = reader.next_part().await.unwrap().unwrap();
        assert!(part_is_jpeg(&second));
        assert_eq!(second.body, good);
    }

    #[tokio::test]
    async fn closing_delimiter_ends_stream() {
        let raw = b"--b--\r\n".to_vec();
        let mut reader = MultipartReader::new(chunked_stream(raw, 2), "b");
        assert!(reader.next_part().await.unwrap().is_none());
    }

    #[test]
    fn boundary_parsing_handles_quotes_and_params() {
        assert_eq!(
            boundary_from_content_type("multipart/x-mixed-replace; boundary=frame"),
            Some("frame".to_string())
        );
        assert_eq!(
            boundary_from_content_type("multipart/x-mixed-replace; boundary=\"fr ame\""),
            Some("fr ame".to_string())
        );
        assert_eq!(boundary_from_content_type("multipart/x-mixed-replace"), None);
    }

    #[test]
    fn jpeg_framing_check() {
        assert!(is_jpeg_framed(&jpeg_bytes(0)));
        assert!(!is_jpeg_framed(b"\xFF\xD8no end"));
        assert!(!is_jpeg_framed(b""));
        assert!(!is_jpeg_framed(b"\xFF\xD9\xFF\xD8"));
    }

    struct CannedStreamFetcher {
        content_type: Option<String>,
        body: Vec<u8>,
        config: FetchConfig,
    }

    #[async_trait]
    impl Fetcher for CannedStreamFetcher {
        async fn get(&self, _url: &Url) -> crate::error::Result<FetchResponse> {
            unimplemented!("stream-only test fetcher")
        }

        async fn get_stream(&self, _url: &Url) -> crate::error::Result<StreamResponse> {
            let chunks: Vec<std::io::Result<Bytes>> = self
                .body
                .chunks(11)
                .map(|c| Ok(Bytes::copy_from_slice(c)))
                .collect();
            let stream: ByteStream = Box::pin(futures::stream::iter(chunks));
            Ok(StreamResponse {
                status: 200,
                content_type: self.content_type.clone(),
                stream,
            })
        }

        fn config(&self) -> &FetchConfig {
            &self.config
        }
    }

    fn url() -> Url {
        Url::parse("http://cam.example/stream.mjpg").unwrap()
    }

    #[tokio::test]
    async fn sample_frame_rejects_non_multipart() {
        let fetcher = CannedStreamFetcher {
            content_type: Some("image/jpeg".into()),
            body: jpeg_bytes(1),
            config: FetchConfig::default(),
        };
        let err = sample_mjpeg_frame(&url(), &fetcher).await.unwrap_err();
        assert!(matches!(err, Error::NotMultipart { .. }));
    }

    #[tokio::test]
    async fn sample_frame_requires_boundary_param() {
        let fetcher = CannedStreamFetcher {
            content_type: Some("multipart/x-mixed-replace".into()),
            body: Vec::new(),
            config: FetchConfig::default(),
        };
        let err = sample_mjpeg_frame(&url(), &fetcher).await.unwrap_err();
        assert!(matches!(err, Error::BoundaryNotFound { .. }));
    }

    #[tokio::test]
    async fn sample_frame_skips_corrupt_part_and_returns_valid() {
        let good = jpeg_bytes(9);
        let mut body = part_bytes("fb", "image/jpeg", b"not a jpeg", true);
        body.extend_from_slice(&part_bytes("fb", "image/jpeg", &good, true));
        let fetcher = CannedStreamFetcher {
            content_type: Some("multipart/x-mixed-replace; boundary=fb".into()),
            body,
            config: FetchConfig::default(),
        };
        let frame = sample_mjpeg_frame(&url(), &fetcher).await.unwrap();
        assert_eq!(frame, good);
        assert!(is_jpeg_framed(&frame));
    }

    #[tokio::test]
    async fn sample_frame_errors_when_stream_ends_without_frame() {
        let fetcher = CannedStreamFetcher {
            content_type: Some("multipart/x-mixed-replace; boundary=fb".into()),
            body: part_bytes("fb", "image/jpeg", b"junk", true),
            config: FetchConfig::default(),
        };
        let err = sample_mjpeg_frame(&url(), &fetcher).await.unwrap_err();
        assert!(matches!(err, Error::StreamEnded));
    }

    #[tokio::test]
    async fn sample_frame_times_out_on_silent_stream() {
        struct SilentFetcher {
            config: FetchConfig,
        }
        #[async_trait]
        impl Fetcher for SilentFetcher {
            async fn get(&self, _url: &Url) -> crate::error::Result<FetchResponse> {
                unimplemented!()
            }
            async fn get_stream(&self, _url: &Url) -> crate::error::Result<StreamResponse> {
                let stream: ByteStream = Box::pin(futures::stream::pending());
                Ok(StreamResponse {
                    status: 200,
                    content_type: Some("multipart/x-mixed-replace; boundary=x".into()),
                    stream,
                })
            }
            fn config(&self) -> &FetchConfig {
                &self.config
            }
        }
        let fetcher = SilentFetcher {
            config: FetchConfig {
                request_timeout: std::time::Duration::from_millis(50),
                ..FetchConfig::default()
            },
        };
        let err = sample_mjpeg_frame(&url(), &fetcher).await.unwrap_err();
        assert!(matches!(err, Error::FrameTimeout(_)));
    }
}
