//! Breadth-first web crawler that walks seed URLs within configured limits
//! and emits candidate links matching camera-like patterns.
//!
//! Pages are parsed leniently: image and anchor attributes are scanned with
//! tag-aware patterns, and the raw document text is additionally scanned for
//! stream URLs (rtsp/rtmp/mjpg/m3u8), which are often embedded in script
//! blocks rather than markup.

use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::Arc;
use std::sync::LazyLock;
use std::time::Duration;

use regex::Regex;
use serde::{Deserialize, Serialize};
use tokio::task::JoinSet;
use tokio::time::Instant;
use url::Url;

use crate::error::{Error, Result};
use crate::fetch::{Fetcher, FetchResponse, DEFAULT_USER_AGENT};
use crate::robots::{parse_robots, RobotsRules};
use crate::types::MediaKind;
use crate::urlnorm::normalize_url;

#[derive(Debug, Clone)]
pub struct CrawlConfig {
    pub seeds: Vec<Url>,
    pub max_depth: u32,
    pub max_pages: usize,
    pub same_host_only: bool,
    pub per_host_min_delay: Duration,
    pub request_timeout: Duration,
    pub user_agent: String,
    /// Maximum concurrent fetches across hosts. Within one host requests are
    /// always sequential.
    pub fan_out: usize,
    pub respect_robots: bool,
}

impl Default for CrawlConfig {
    fn default() -> Self {
        CrawlConfig {
            seeds: Vec::new(),
            max_depth: 1,
            max_pages: 100,
            same_host_only: false,
            per_host_min_delay: Duration::from_millis(500),
            request_timeout: Duration::from_secs(10),
            user_agent: DEFAULT_USER_AGENT.to_string(),
            fan_out: 8,
            respect_robots: true,
        }
    }
}

impl CrawlConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_pages < 1 {
            return Err(Error::InvalidConfig("max_pages must be >= 1".into()));
        }
        if self.fan_out < 1 {
            return Err(Error::InvalidConfig("fan_out must be >= 1".into()));
        }
        Ok(())
    }
}

/// A URL suspected to serve camera data. `depth` is the crawl depth of the
/// page it was found on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateLink {
    pub url: Url,
    pub media_kind: MediaKind,
    pub source_page: Url,
    pub depth: u32,
}

/// Per-page crawl report record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PageReport {
    pub url: String,
    pub depth: u32,
    pub status: Option<u16>,
    pub error: Option<String>,
    pub candidates_found: usize,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CrawlReport {
    pub pages: Vec<PageReport>,
}

impl CrawlReport {
    /// Number of fetch attempts excluding robots.txt overhead.
    pub fn page_fetches(&self) -> usize {
        self.pages
            .iter()
            .filter(|p| p.status.is_some() || p.error.is_some())
            .filter(|p| !p.url.ends_with("/robots.txt"))
            .count()
    }
}

#[derive(Debug, Clone)]
pub struct CrawlOutcome {
    pub candidates: Vec<CandidateLink>,
    pub report: CrawlReport,
}

static IMG_SRC_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r#"(?is)<img\b[^>]*?\bsrc\s*=\s*(?:"([^"]*)"|'([^']*)'|([^\s>]+))"#).unwrap()
});
static A_HREF_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r#"(?is)<a\b[^>]*?\bhref\s*=\s*(?:"([^"]*)"|'([^']*)'|([^\s>]+))"#).unwrap()
});
static ATTR_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r#"(?is)\b(?:src|href|data-src|data-url|content|value)\s*=\s*(?:"([^"]*)"|'([^']*)'|([^\s>]+))"#)
        .unwrap()
});
static TEXT_URL_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r#"(?i)\b(?:rtsp|rtmp|https?)://[^\s"'<>\\`]+"#).unwrap()
});

fn captured<'t>(caps: &regex::Captures<'t>) -> Option<&'t str> {
    caps.get(1).or_else(|| caps.get(2)).or_else(|| caps.get(3)).map(|m| m.as_str())
}

/// Stream-pattern classification, applied to URLs from any attribute or raw
/// text. Image extensions are deliberately not handled here; those count
/// only when they came from an img source or anchor target.
fn classify_stream(url: &Url) -> Option<MediaKind> {
    match url.scheme() {
        "rtsp" => Some(MediaKind::RtspLink),
        "rtmp" => Some(MediaKind::RtmpLink),
        "http" | "https" => {
            let path = url.path().to_ascii_lowercase();
            if path.ends_with(".m3u8") {
                Some(MediaKind::HlsStream)
            } else if path.ends_with(".mjpg")
                || path.ends_with(".mjpeg")
                || path.split('/').any(|seg| seg == "mjpg")
            {
                Some(MediaKind::MjpegStream)
            } else {
                None
            }
        }
        _ => None,
    }
}

fn is_image_path(url: &Url) -> bool {
    let path = url.path().to_ascii_lowercase();
    path.ends_with(".jpg") || path.ends_with(".jpeg") || path.ends_with(".png")
}

/// Scan a page for camera-like links. Unparseable fragments are skipped,
/// never fatal; the result is deduplicated by normalized URL.
pub fn extract_candidate_links(html: &str, base: &Url) -> Vec<CandidateLink> {
    let mut out: Vec<CandidateLink> = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    let mut push = |url: Url, kind: MediaKind, out: &mut Vec<CandidateLink>| {
        if seen.insert(url.as_str().to_string()) {
            out.push(CandidateLink {
                url,
                media_kind: kind,
                source_page: base.clone(),
                depth: 0,
            });
        }
    };

    // Image-specific visual links: img sources and anchor targets.
    for re in [&*IMG_SRC_RE, &*A_HREF_RE] {
        for caps in re.captures_iter(html) {
            let Some(raw) = captured(&caps) else { continue };
            let Ok(url) = normalize_url(raw, Some(base)) else { continue };
            if let Some(kind) = classify_stream(&url) {
                push(url, kind, &mut out);
            } else if matches!(url.scheme(), "http" | "https") && is_image_path(&url) {
                push(url, MediaKind::StillImage, &mut out);
            }
        }
    }

    // Stream links from any attribute and from raw text.
    for caps in ATTR_RE.captures_iter(html) {
        let Some(raw) = captured(&caps) else { continue };
        let Ok(url) = normalize_url(raw, Some(base)) else { continue };
        if let Some(kind) = classify_stream(&url) {
            push(url, kind, &mut out);
        }
    }
    for m in TEXT_URL_RE.find_iter(html) {
        let raw = m.as_str().trim_end_matches(&[')', ';', ',', '.'][..]);
        let Ok(url) = normalize_url(raw, Some(base)) else { continue };
        if let Some(kind) = classify_stream(&url) {
            push(url, kind, &mut out);
        }
    }
    out
}

/// Anchor targets for frontier expansion: normalized, http/https only,
/// optionally restricted to the seed host set.
pub fn extract_page_links(
    html: &str,
    base: &Url,
    allowed_hosts: Option<&HashSet<String>>,
) -> Vec<Url> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for caps in A_HREF_RE.captures_iter(html) {
        let Some(raw) = captured(&caps) else { continue };
        let Ok(url) = normalize_url(raw, Some(base)) else { continue };
        if !matches!(url.scheme(), "http" | "https") {
            continue;
        }
        if let Some(hosts) = allowed_hosts {
            match url.host_str() {
                Some(h) if hosts.contains(h) => {}
                _ => continue,
            }
        }
        if seen.insert(url.as_str().to_string()) {
            out.push(url);
        }
    }
    out
}

fn looks_like_text(content_type: Option<&str>, body: &[u8]) -> bool {
    if let Some(ct) = content_type {
        let ct = ct.to_ascii_lowercase();
        if ct.contains("html") || ct.contains("text") || ct.contains("xml") {
            return true;
        }
        if ct.starts_with("image/")
            || ct.starts_with("video/")
            || ct.starts_with("audio/")
            || ct.contains("octet-stream")
            || ct.contains("mpegurl")
        {
            return false;
        }
    }
    // No usable content type: sniff common binary magics.
    !(body.starts_with(&[0xFF, 0xD8])
        || body.starts_with(b"\x89PNG")
        || body.starts_with(b"GIF8"))
}

struct HostState {
    next_allowed: Instant,
    in_flight: bool,
    robots: Option<RobotsRules>,
}

impl HostState {
    fn new(respect_robots: bool) -> HostState {
        HostState {
            next_allowed: Instant::now(),
            in_flight: false,
            robots: if respect_robots {
                None
            } else {
                Some(RobotsRules::allow_all())
            },
        }
    }
}

enum TaskOutcome {
    Page {
        url: Url,
        host: String,
        depth: u32,
        result: Result<FetchResponse>,
    },
    Robots {
        host: String,
        rules: RobotsRules,
    },
}

/// Breadth-first crawl honoring max_depth, max_pages, visited-set dedup, and
/// per-host politeness. Per-page failures are recorded in the report and
/// skipped; only invalid configuration fails the crawl itself.
pub async fn crawl(config: &CrawlConfig, fetcher: Arc<dyn Fetcher>) -> Result<CrawlOutcome> {
    config.validate()?;

    let allowed_hosts: Option<HashSet<String>> = config.same_host_only.then(|| {
        config
            .seeds
            .iter()
            .filter_map(|s| s.host_str())
            .map(|h| h.to_string())
            .collect()
    });

    let mut report = CrawlReport::default();
    let mut queue: VecDeque<(Url, u32)> = VecDeque::new();
    let mut visited: HashSet<String> = HashSet::new();
    for seed in &config.seeds {
        let url = crate::urlnorm::normalize(seed.clone());
        if !matches!(url.scheme(), "http" | "https") {
            report.pages.push(PageReport {
                url: url.to_string(),
                depth: 0,
                status: None,
                error: Some("unsupported_scheme".into()),
                candidates_found: 0,
            });
            continue;
        }
        if visited.insert(url.as_str().to_string()) {
            queue.push_back((url, 0));
        }
    }

    let mut hosts: HashMap<String, HostState> = HashMap::new();
    let mut tasks: JoinSet<TaskOutcome> = JoinSet::new();
    let mut pages_fetched = 0usize;
    let mut candidates: Vec<CandidateLink> = Vec::new();
    let mut seen_candidates: HashSet<String> = HashSet::new();

    loop {
        // Dispatch pass: start as many fetches as politeness, robots, the
        // per-host serialization rule, and the budgets allow.
        let mut earliest_wake: Option<Instant> = None;
        let mut idx = 0;
        while idx < queue.len() && tasks.len() < config.fan_out && pages_fetched < config.max_pages
        {
            let now = Instant::now();
            let (url, depth) = queue[idx].clone();
            let host = url.host_str().unwrap_or("").to_string();
            let state = hosts
                .entry(host.clone())
                .or_insert_with(|| HostState::new(config.respect_robots));
            if state.in_flight {
                idx += 1;
                continue;
            }
            if now < state.next_allowed {
                earliest_wake = Some(match earliest_wake {
                    Some(e) => e.min(state.next_allowed),
                    None => state.next_allowed,
                });
                idx += 1;
                continue;
            }
            match &state.robots {
                None => {
                    state.in_flight = true;
                    let robots_url = url.join("/robots.txt").ok();
                    if let Some(ref ru) = robots_url {
                        visited.insert(ru.as_str().to_string());
                    }
                    let fetcher = Arc::clone(&fetcher);
                    let user_agent = config.user_agent.clone();
                    let timeout = config.request_timeout;
                    let host_for_task = host.clone();
                    tasks.spawn(async move {
                        let rules = match robots_url {
                            Some(ru) => fetch_robots(&ru, &*fetcher, &user_agent, timeout).await,
                            None => RobotsRules::allow_all(),
                        };
                        TaskOutcome::Robots {
                            host: host_for_task,
                            rules,
                        }
                    });
                    idx += 1;
                }
                Some(rules) if !rules.allows(url.path()) => {
                    queue.remove(idx);
                    report.pages.push(PageReport {
                        url: url.to_string(),
                        depth,
                        status: None,
                        error: Some("robots_disallowed".into()),
                        candidates_found: 0,
                    });
                }
                Some(_) => {
                    queue.remove(idx);
                    pages_fetched += 1;
                    state.in_flight = true;
                    let fetcher = Arc::clone(&fetcher);
                    let timeout = config.request_timeout;
                    tasks.spawn(async move {
                        let result = match tokio::time::timeout(timeout, fetcher.get(&url)).await {
                            Ok(r) => r,
                            Err(_) => Err(Error::Timeout(timeout)),
                        };
                        TaskOutcome::Page {
                            host: url.host_str().unwrap_or("").to_string(),
                            url,
                            depth,
                            result,
                        }
                    });
                }
            }
        }

        if tasks.is_empty() {
            if queue.is_empty() || pages_fetched >= config.max_pages {
                break;
            }
            match earliest_wake {
                Some(wake) => {
                    tokio::time::sleep_until(wake).await;
                    continue;
                }
                None => {
                    // Nothing dispatchable and nothing to wait for.
                    break;
                }
            }
        }

        let Some(joined) = tasks.join_next().await else {
            continue;
        };
        let outcome = match joined {
            Ok(o) => o,
            Err(e) => {
                tracing::warn!(error = %e, "crawl task failed");
                continue;
            }
        };
        match outcome {
            TaskOutcome::Robots { host, rules } => {
                if let Some(state) = hosts.get_mut(&host) {
                    state.in_flight = false;
                    state.next_allowed = Instant::now() + config.per_host_min_delay;
                    state.robots = Some(rules);
                }
            }
            TaskOutcome::Page {
                url,
                host,
                depth,
                result,
            } => {
                if let Some(state) = hosts.get_mut(&host) {
                    state.in_flight = false;
                    state.next_allowed = Instant::now() + config.per_host_min_delay;
                }
                match result {
                    Ok(resp) => {
                        let mut found = 0usize;
                        if resp.is_success()
                            && looks_like_text(resp.content_type.as_deref(), &resp.body)
                        {
                            let text = String::from_utf8_lossy(&resp.body);
                            for mut candidate in extract_candidate_links(&text, &resp.final_url) {
                                candidate.depth = depth;
                                if seen_candidates.insert(candidate.url.as_str().to_string()) {
                                    found += 1;
                                    candidates.push(candidate);
                                }
                            }
                            if depth < config.max_depth {
                                for link in
                                    extract_page_links(&text, &resp.final_url, allowed_hosts.as_ref())
                                {
                                    if visited.insert(link.as_str().to_string()) {
                                        queue.push_back((link, depth + 1));
                                    }
                                }
                            }
                        }
                        report.pages.push(PageReport {
                            url: url.to_string(),
                            depth,
                            status: Some(resp.status),
                            error: None,
                            candidates_found: found,
                        });
                    }
                    Err(err) => {
                        report.pages.push(PageReport {
                            url: url.to_string(),
                            depth,
                            status: None,
                            error: Some(err.kind_tag().to_string()),
                            candidates_found: 0,
                        });
                    }
                }
            }
        }
    }

    Ok(CrawlOutcome {
        candidates,
        report,
    })
}

async fn fetch_robots(
    url: &Url,
    fetcher: &dyn Fetcher,
    user_agent: &str,
    timeout: Duration,
) -> RobotsRules {
    let fetched = match tokio::time::timeout(timeout, fetcher.get(url)).await {
        Ok(Ok(resp)) if resp.is_success() => resp,
        _ => return RobotsRules::allow_all(),
    };
    let body = String::from_utf8_lossy(&fetched.body);
    parse_robots(&body, user_agent)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> Url {
        Url::parse("http://a.example/").unwrap()
    }

    #[test]
    fn img_src_becomes_still_image_candidate() {
        let got = extract_candidate_links(r#"<img src="/snap.jpg">"#, &base());
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].url.as_str(), "http://a.example/snap.jpg");
        assert_eq!(got[0].media_kind, MediaKind::StillImage);
        assert_eq!(got[0].source_page, base());
    }

    #[test]
    fn rtsp_in_raw_text_is_found() {
        let got = extract_candidate_links(
            "<script>var s = connect('rtsp://cam.example/live');</script>",
            &base(),
        );
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].url.as_str(), "rtsp://cam.example/live");
        assert_eq!(got[0].media_kind, MediaKind::RtspLink);
    }

    #[test]
    fn empty_document_yields_no_candidates() {
        assert!(extract_candidate_links("", &base()).is_empty());
    }

    #[test]
    fn stream_patterns_from_attributes_and_anchors() {
        let html = r#"
            <a href="feeds/cam1.MJPG">cam</a>
            <a href="/hls/live.m3u8">hls</a>
            <video src="/mjpg/video"></video>
            <a href="rtmp://s.example/app/stream">rtmp</a>
            <a href="pics/photo.JPEG">photo</a>
        "#;
        let got = extract_candidate_links(html, &base());
        let kinds: Vec<(String, MediaKind)> = got
            .iter()
            .map(|c| (c.url.to_string(), c.media_kind))
            .collect();
        assert!(kinds.contains(&("http://a.example/feeds/cam1.MJPG".into(), MediaKind::MjpegStream)));
        assert!(kinds.contains(&("http://a.example/hls/live.m3u8".into(), MediaKind::HlsStream)));
        assert!(kinds.contains(&("http://a.example/mjpg/video".into(), MediaKind::MjpegStream)));
        assert!(kinds.contains(&("rtmp://s.example/app/stream".into(), MediaKind::RtmpLink)));
        assert!(kinds.contains(&("http://a.example/pics/photo.JPEG".into(), MediaKind::StillImage)));
        assert_eq!(got.len(), 5);
    }

    #[test]
    fn duplicate_urls_are_deduplicated() {
        let html = r#"<img src="/c.jpg"><a href="/c.jpg">same</a><a href="c.jpg#frag">same</a>"#;
        let got = extract_candidate_links(html, &base());
        assert_eq!(got.len(), 1);
    }

    #[test]
    fn malformed_fragments_are_skipped_not_fatal() {
        let html = r##"<img src="http://[broken"><a href="/ok.jpg">x</a><a href="#">y"##;
        let got = extract_candidate_links(html, &base());
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].url.as_str(), "http://a.example/ok.jpg");
    }

    #[test]
    fn extraction_is_pure() {
        let html = r#"<img src="/a.jpg"><a href="/b.m3u8">b</a>"#;
        let a = extract_candidate_links(html, &base());
        let b = extract_candidate_links(html, &base());
        assert_eq!(a, b);
    }

    #[test]
    fn page_links_resolve_and_filter_schemes() {
        let html = r#"<a href="/page2">two</a><a href="mailto:x@y.example">mail</a><a href="javascript:void(0)">js</a>"#;
        let got = extract_page_links(html, &base(), None);
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].as_str(), "http://a.example/page2");
    }

    #[test]
    fn page_links_honor_same_host_filter() {
        let html = r#"<a href="http://a.example/in">in</a><a href="http://b.example/out">out</a>"#;
        let hosts: HashSet<String> = ["a.example".to_string()].into();
        let got = extract_page_links(html, &base(), Some(&hosts));
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].host_str(), Some("a.example"));
    }

    #[test]
    fn invalid_config_is_rejected() {
        let mut cfg = CrawlConfig::default();
        cfg.max_pages = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = CrawlConfig::default();
        cfg.fan_out = 0;
        assert!(cfg.validate().is_err());
    }
}
