//! HLS playlist handling.
//!
//! Liveness of an HLS endpoint is visible without decoding any video: a live
//! stream's media playlist advances its `#EXT-X-MEDIA-SEQUENCE` (or rotates
//! its segment list) as new segments are produced, while a frozen playlist
//! never changes. Only the tags needed for that check and for fetching the
//! latest segment are parsed.

use std::time::Duration;

use url::Url;

use crate::error::{Error, Result};
use crate::fetch::Fetcher;
use crate::liveness::{LivenessVerdict, PairEvidence, VerdictLabel};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MediaPlaylist {
    pub media_sequence: u64,
    pub segments: Vec<String>,
    pub has_end_list: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Playlist {
    /// Master playlist: URIs of variant media playlists.
    Master { variants: Vec<String> },
    Media(MediaPlaylist),
}

/// Parse an m3u8 document. Lenient about blank lines and unknown tags;
/// strict about the `#EXTM3U` magic.
pub fn parse_playlist(text: &str) -> Result<Playlist> {
    let mut lines = text.lines().map(str::trim);
    match lines.next() {
        Some(first) if first.trim_start_matches('\u{feff}') == "#EXTM3U" => {}
        _ => return Err(Error::PlaylistParse("missing #EXTM3U header".into())),
    }

    let mut media_sequence = 0u64;
    let mut has_end_list = false;
    let mut segments = Vec::new();
    let mut variants = Vec::new();
    let mut expect_segment = false;
    let mut expect_variant = false;

    for line in lines {
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("#EXT-X-MEDIA-SEQUENCE:") {
            media_sequence = rest
                .trim()
                .parse()
                .map_err(|_| Error::PlaylistParse(format!("bad media sequence {rest:?}")))?;
        } else if line.strip_prefix("#EXTINF:").is_some() {
            expect_segment = true;
        } else if line.strip_prefix("#EXT-X-STREAM-INF:").is_some() {
            expect_variant = true;
        } else if line == "#EXT-X-ENDLIST" {
            has_end_list = true;
        } else if line.starts_with('#') {
            // Unknown tag or comment.
        } else if expect_variant {
            variants.push(line.to_string());
            expect_variant = false;
        } else if expect_segment {
            segments.push(line.to_string());
            expect_segment = false;
        } else {
            // Bare URI line without a preceding tag; treat as a segment for
            // tolerance of sloppy generators.
            segments.push(line.to_string());
        }
    }

    if !variants.is_empty() {
        Ok(Playlist::Master { variants })
    } else {
        Ok(Playlist::Media(MediaPlaylist {
            media_sequence,
            segments,
            has_end_list,
        }))
    }
}

async fn fetch_playlist(url: &Url, fetcher: &dyn Fetcher) -> Result<Playlist> {
    let body = fetcher.get(url).await?.into_ok_body()?;
    let text = String::from_utf8_lossy(&body);
    parse_playlist(&text)
}

/// Fetch `url`, following a master playlist to its first variant when
/// necessary. Returns the resolved media playlist URL and its parse.
pub async fn fetch_media_playlist(
    url: &Url,
    fetcher: &dyn Fetcher,
) -> Result<(Url, MediaPlaylist)> {
    match fetch_playlist(url, fetcher).await? {
        Playlist::Media(media) => Ok((url.clone(), media)),
        Playlist::Master { variants } => {
            let first = variants
                .first()
                .ok_or_else(|| Error::PlaylistParse("master playlist with no variants".into()))?;
            let variant_url = url
                .join(first)
                .map_err(|source| Error::MalformedUrl {
                    input: first.clone(),
                    source,
                })?;
            match fetch_playlist(&variant_url, fetcher).await? {
                Playlist::Media(media) => Ok((variant_url, media)),
                Playlist::Master { .. } => Err(Error::PlaylistParse(
                    "nested master playlists are not supported".into(),
                )),
            }
        }
    }
}

/// Absolute URL of the newest segment in a media playlist.
pub fn latest_segment_url(playlist_url: &Url, playlist: &MediaPlaylist) -> Result<Url> {
    let last = playlist
        .segments
        .last()
        .ok_or_else(|| Error::PlaylistParse("playlist has no segments".into()))?;
    playlist_url.join(last).map_err(|source| Error::MalformedUrl {
        input: last.clone(),
        source,
    })
}

/// Decide liveness by fetching the media playlist twice, `interval` apart.
/// Live iff the media sequence advanced or the segment list changed; Static
/// iff both observations are identical; Indeterminate on fetch or parse
/// failure.
pub async fn check_hls_live(
    playlist_url: &Url,
    interval: Duration,
    fetcher: &dyn Fetcher,
) -> LivenessVerdict {
    let first = match fetch_media_playlist(playlist_url, fetcher).await {
        Ok(r) => r,
        Err(err) => return LivenessVerdict::indeterminate(format!("first fetch: {err}")),
    };
    tokio::time::sleep(interval).await;
    let (media_url, a) = first;
    let b = match fetch_media_playlist(&media_url, fetcher).await {
        Ok((_, media)) => media,
        Err(err) => return LivenessVerdict::indeterminate(format!("second fetch: {err}")),
    };

    let changed = a.media_sequence != b.media_sequence || a.segments != b.segments;
    let label = if changed {
        VerdictLabel::Live
    } else {
        VerdictLabel::Static
    };
    LivenessVerdict {
        label,
        evidence: vec![PairEvidence {
            checksum_equal: !changed,
            percent_changed: None,
            luminance_delta: None,
            dimension_mismatch: false,
            changed,
        }],
        policy_used: None,
        note: Some(format!(
            "media_sequence {} -> {}, {} -> {} segments",
            a.media_sequence,
            b.media_sequence,
            a.segments.len(),
            b.segments.len()
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fetch::{FetchConfig, FetchResponse, StreamResponse};
    use async_trait::async_trait;
    use std::collections::HashMap;
    use std::sync::Mutex;

    const MEDIA: &str = "#EXTM3U\n#EXT-X-VERSION:3\n#EXT-X-TARGETDURATION:4\n#EXT-X-MEDIA-SEQUENCE:17\n#EXTINF:4.0,\nseg17.ts\n#EXTINF:4.0,\nseg18.ts\n";

    #[test]
    fn parses_media_playlist() {
        let p = parse_playlist(MEDIA).unwrap();
        match p {
            Playlist::Media(m) => {
                assert_eq!(m.media_sequence, 17);
                assert_eq!(m.segments, vec!["seg17.ts", "seg18.ts"]);
                assert!(!m.has_end_list);
            }
            _ => panic!("expected media playlist"),
        }
    }

    #[test]
    fn parses_master_playlist() {
        let text = "#EXTM3U\n#EXT-X-STREAM-INF:BANDWIDTH=800000\nlow/playlist.m3u8\n";
        match parse_playlist(text).unwrap() {
            Playlist::Master { variants } => assert_eq!(variants, vec!["low/playlist.m3u8"]),
            _ => panic!("expected master playlist"),
        }
    }

    #[test]
    fn rejects_non_playlist_body() {
        assert!(parse_playlist("<html>not a playlist</html>").is_err());
        assert!(parse_playlist("").is_err());
    }

    #[test]
    fn latest_segment_resolves_relative_uri() {
        let url = Url::parse("http://h.example/hls/0/playlist.m3u8").unwrap();
        let m = MediaPlaylist {
            media_sequence: 5,
            segments: vec!["seg5.ts".into(), "seg6.ts".into()],
            has_end_list: false,
        };
        assert_eq!(
            latest_segment_url(&url, &m).unwrap().as_str(),
            "http://h.example/hls/0/seg6.ts"
        );
    }

    /// Serves canned bodies per URL; successive fetches of one URL walk the
    /// canned list and repeat its last element.
    struct ScriptedFetcher {
        bodies: HashMap<String, Vec<String>>,
        hits: Mutex<HashMap<String, usize>>,
        config: FetchConfig,
    }

    impl ScriptedFetcher {
        fn new(bodies: Vec<(&str, Vec<&str>)>) -> Self {
            ScriptedFetcher {
                bodies: bodies
                    .into_iter()
                    .map(|(k, v)| (k.to_string(), v.into_iter().map(String::from).collect()))
                    .collect(),
                hits: Mutex::new(HashMap::new()),
                config: FetchConfig::default(),
            }
        }
    }

    #[async_trait]
    impl Fetcher for ScriptedFetcher {
        async fn get(&self, url: &Url) -> crate::error::Result<FetchResponse> {
            let key = url.as_str().to_string();
            let mut hits = self.hits.lock().unwrap();
            let n = hits.entry(key.clone()).or_insert(0);
            let responses = self
                .bodies
                .get(&key)
                .unwrap_or_else(|| panic!("unexpected fetch of {key}"));
            let body = responses[(*n).min(responses.len() - 1)].clone();
            *n += 1;
            Ok(FetchResponse {
                status: 200,
                content_type: Some("application/vnd.apple.mpegurl".into()),
                body: body.into_bytes(),
                final_url: url.clone(),
            })
        }

        async fn get_stream(&self, _url: &Url) -> crate::error::Result<StreamResponse> {
            unimplemented!()
        }

        fn config(&self) -> &FetchConfig {
            &self.config
        }
    }

    fn media(seq: u64) -> String {
        format!(
            "#EXTM3U\n#EXT-X-MEDIA-SEQUENCE:{seq}\n#EXTINF:4.0,\nseg{seq}.ts\n#EXTINF:4.0,\nseg{}.ts\n",
            seq + 1
        )
    }

    #[tokio::test]
    async fn advancing_sequence_is_live() {
        let url = Url::parse("http://h.example/p.m3u8").unwrap();
        let fetcher = ScriptedFetcher::new(vec![(
            "http://h.example/p.m3u8",
            vec![&media(10), &media(12)],
        )]);
        let v = check_hls_live(&url, Duration::from_millis(1), &fetcher).await;
        assert_eq!(v.label, VerdictLabel::Live);
        assert!(v.evidence[0].changed);
    }

    #[tokio::test]
    async fn frozen_playlist_is_static() {
        let url = Url::parse("http://h.example/p.m3u8").unwrap();
        let fetcher =
            ScriptedFetcher::new(vec![("http://h.example/p.m3u8", vec![&media(10), &media(10)])]);
        let v = check_hls_live(&url, Duration::from_millis(1), &fetcher).await;
        assert_eq!(v.label, VerdictLabel::Static);
    }

    #[tokio::test]
    async fn master_playlist_is_followed_to_variant() {
        let url = Url::parse("http://h.example/hls/master.m3u8").unwrap();
        let master = "#EXTM3U\n#EXT-X-STREAM-INF:BANDWIDTH=800000\nvariant/playlist.m3u8\n";
        let fetcher = ScriptedFetcher::new(vec![
            ("http://h.example/hls/master.m3u8", vec![master]),
            (
                "http://h.example/hls/variant/playlist.m3u8",
                vec![&media(3), &media(4)],
            ),
        ]);
        let v = check_hls_live(&url, Duration::from_millis(1), &fetcher).await;
        assert_eq!(v.label, VerdictLabel::Live);
    }

    #[tokio::test]
    async fn non_playlist_body_is_indeterminate() {
        let url = Url::parse("http://h.example/p.m3u8").unwrap();
        let fetcher = ScriptedFetcher::new(vec![("http://h.example/p.m3u8", vec!["nope"])]);
        let v = check_hls_live(&url, Duration::from_millis(1), &fetcher).await;
        assert_eq!(v.label, VerdictLabel::Indeterminate);
        assert!(v.note.unwrap().contains("playlist parse error"));
    }
}
