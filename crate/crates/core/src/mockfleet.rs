//! Mock camera fleet: an HTTP server simulating camera-like endpoints with
//! known ground truth, for desk-scale verification of discovery,
//! identification, and archival.
//!
//! Endpoint content is a pure function of (seed, endpoint path, time bucket),
//! so repeated runs produce identical bytes per frame index. The server keeps
//! a request log and per-endpoint concurrency gauges that tests use to assert
//! crawler politeness and archiver worker-pool invariants.

use std::collections::HashMap;
use std::convert::Infallible;
use std::net::SocketAddr;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::body::{Body, Bytes};
use axum::extract::{Path as AxPath, State};
use axum::http::{header, StatusCode, Uri};
use axum::response::Response;
use axum::routing::get;
use axum::Router;
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tokio::time::Instant;
use url::Url;

use crate::error::{Error, Result};
use crate::liveness::VerdictLabel;
use crate::types::content_digest;

pub const IMAGE_WIDTH: u32 = 160;
pub const IMAGE_HEIGHT: u32 = 120;
pub const MJPEG_BOUNDARY: &str = "camscoutframe";
/// Segments listed in each HLS media playlist (live window).
const HLS_WINDOW: u64 = 3;

#[derive(Debug, Clone)]
pub struct FleetSpec {
    pub static_images: usize,
    pub rotating_images: usize,
    pub rotation_period: Duration,
    pub mjpeg_streams: usize,
    pub frame_period: Duration,
    pub hls_streams: usize,
    pub segment_period: Duration,
    pub decoy_pages: usize,
    pub listen: SocketAddr,
    pub seed: u64,
    /// Injected latency on image endpoints, for scaling tests.
    pub still_delay: Duration,
    /// Image endpoints whose first request (and every `flaky_fail_every`-th
    /// after it) returns 500, for retry tests.
    pub flaky_images: usize,
    pub flaky_fail_every: u64,
    /// Body served at /robots.txt; None means 404 (allow-all).
    pub robots_body: Option<String>,
}

impl Default for FleetSpec {
    fn default() -> Self {
        FleetSpec {
            static_images: 0,
            rotating_images: 0,
            rotation_period: Duration::from_secs(5),
            mjpeg_streams: 0,
            frame_period: Duration::from_secs(1),
            hls_streams: 0,
            segment_period: Duration::from_secs(4),
            decoy_pages: 0,
            listen: "127.0.0.1:0".parse().expect("valid literal"),
            seed: 42,
            still_delay: Duration::ZERO,
            flaky_images: 0,
            flaky_fail_every: 2,
            robots_body: None,
        }
    }
}

impl FleetSpec {
    pub fn validate(&self) -> Result<()> {
        if self.rotation_period.is_zero()
            || self.frame_period.is_zero()
            || self.segment_period.is_zero()
        {
            return Err(Error::InvalidConfig("fleet periods must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EndpointKind {
    StaticImage,
    RotatingImage,
    FlakyImage,
    MjpegStream,
    HlsStream,
    DecoyPage,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EndpointInfo {
    pub path: String,
    pub kind: EndpointKind,
    /// Expected verdict for this endpoint; None for decoys.
    pub ground_truth: Option<VerdictLabel>,
    /// Digest of the bytes a GET right now would return (image endpoints).
    pub current_digest: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RequestLogEntry {
    pub seq: u64,
    pub at: DateTime<Utc>,
    pub elapsed_ms: u64,
    pub path: String,
    pub outcome: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FleetManifest {
    pub endpoints: Vec<EndpointInfo>,
    pub request_log: Vec<RequestLogEntry>,
    pub max_concurrency: HashMap<String, u32>,
    pub global_max_concurrency: u32,
    /// Digests of every MJPEG frame actually emitted, per endpoint path.
    pub emitted_frames: HashMap<String, Vec<String>>,
}

#[derive(Default)]
struct GaugeCell {
    current: u32,
    max: u32,
}

struct FleetState {
    spec: FleetSpec,
    started: Instant,
    endpoints: Vec<(String, EndpointKind)>,
    log: Mutex<Vec<RequestLogEntry>>,
    gauges: Mutex<HashMap<String, GaugeCell>>,
    global_gauge: Mutex<GaugeCell>,
    emitted: Mutex<HashMap<String, Vec<String>>>,
    flaky_counts: Mutex<HashMap<String, u64>>,
}

struct GaugeGuard {
    state: Arc<FleetState>,
    path: String,
}

impl Drop for GaugeGuard {
    fn drop(&mut self) {
        let mut gauges = self.state.gauges.lock().expect("gauge lock");
        if let Some(cell) = gauges.get_mut(&self.path) {
            cell.current = cell.current.saturating_sub(1);
        }
        let mut global = self.state.global_gauge.lock().expect("gauge lock");
        global.current = global.current.saturating_sub(1);
    }
}

impl FleetState {
    fn begin(self: &Arc<Self>, path: &str) -> (usize, GaugeGuard) {
        let idx = {
            let mut log = self.log.lock().expect("log lock");
            let idx = log.len();
            log.push(RequestLogEntry {
                seq: idx as u64,
                at: Utc::now(),
                elapsed_ms: self.started.elapsed().as_millis() as u64,
                path: path.to_string(),
                outcome: "pending".to_string(),
            });
            idx
        };
        {
            let mut gauges = self.gauges.lock().expect("gauge lock");
            let cell = gauges.entry(path.to_string()).or_default();
            cell.current += 1;
            cell.max = cell.max.max(cell.current);
            let mut global = self.global_gauge.lock().expect("gauge lock");
            global.current += 1;
            global.max = global.max.max(global.current);
        }
        (
            idx,
            GaugeGuard {
                state: Arc::clone(self),
                path: path.to_string(),
            },
        )
    }

    fn finish(&self, idx: usize, outcome: impl Into<String>) {
        let mut log = self.log.lock().expect("log lock");
        if let Some(entry) = log.get_mut(idx) {
            entry.outcome = outcome.into();
        }
    }

    fn bucket(&self, period: Duration) -> u64 {
        (self.started.elapsed().as_nanos() / period.as_nanos().max(1)) as u64
    }

    fn record_emitted(&self, path: &str, frame: &[u8]) {
        self.emitted
            .lock()
            .expect("emitted lock")
            .entry(path.to_string())
            .or_default()
            .push(content_digest(frame));
    }

    fn image_bucket(&self, kind: EndpointKind) -> u64 {
        match kind {
            EndpointKind::StaticImage => 0,
            EndpointKind::RotatingImage | EndpointKind::FlakyImage => {
                self.bucket(self.spec.rotation_period)
            }
            _ => 0,
        }
    }
}

/// Deterministic synthetic scene: hash-colored blocks in the top half and a
/// 16-cell binary frame counter strip in the bottom half. Any two distinct
/// frame indexes differ in whole cells by far more than the default
/// comparator thresholds, surviving JPEG re-encoding noise.
pub fn generate_image(seed: u64, endpoint_id: &str, frame_index: u64) -> Vec<u8> {
    let mut img = image::RgbImage::new(IMAGE_WIDTH, IMAGE_HEIGHT);
    let half = IMAGE_HEIGHT / 2;

    let block_w = IMAGE_WIDTH / 8;
    let block_h = half / 4;
    for by in 0..4u32 {
        for bx in 0..8u32 {
            let color = derive_color(seed, endpoint_id, frame_index, (by * 8 + bx) as u64);
            fill_rect(
                &mut img,
                bx * block_w,
                by * block_h,
                block_w,
                block_h,
                color,
            );
        }
    }

    let cell_w = IMAGE_WIDTH / 8;
    let cell_h = half / 2;
    for bit in 0..16u32 {
        let on = (frame_index >> bit) & 1 == 1;
        let color = if on { [230, 230, 230] } else { [25, 25, 25] };
        let col = bit % 8;
        let row = bit / 8;
        fill_rect(
            &mut img,
            col * cell_w,
            half + row * cell_h,
            cell_w,
            cell_h,
            color,
        );
    }

    let mut out = Vec::new();
    image::codecs::jpeg::JpegEncoder::new_with_quality(&mut out, 85)
        .encode_image(&img)
        .expect("in-memory jpeg encode");
    out
}

fn derive_color(seed: u64, endpoint_id: &str, frame_index: u64, block: u64) -> [u8; 3] {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(endpoint_id.as_bytes());
    hasher.update(frame_index.to_le_bytes());
    hasher.update(block.to_le_bytes());
    let digest = hasher.finalize();
    [digest[0], digest[1], digest[2]]
}

fn fill_rect(img: &mut image::RgbImage, x: u32, y: u32, w: u32, h: u32, color: [u8; 3]) {
    for yy in y..(y + h).min(img.height()) {
        for xx in x..(x + w).min(img.width()) {
            img.put_pixel(xx, yy, image::Rgb(color));
        }
    }
}

/// Deterministic MPEG-TS-shaped segment bytes (188-byte packets, sync byte
/// 0x47). Content is filler; the archiver stores segments verbatim.
pub fn generate_segment(seed: u64, endpoint_id: &str, segment_index: u64) -> Vec<u8> {
    let mut out = Vec::with_capacity(188 * 10);
    for packet in 0..10u64 {
        let mut hasher = Sha256::new();
        hasher.update(seed.to_le_bytes());
        hasher.update(endpoint_id.as_bytes());
        hasher.update(segment_index.to_le_bytes());
        hasher.update(packet.to_le_bytes());
        let digest = hasher.finalize();
        out.push(0x47);
        while out.len() % 188 != 0 {
            let i = out.len() % 32;
            out.push(digest[i]);
        }
    }
    out
}

fn endpoint_paths(spec: &FleetSpec) -> Vec<(String, EndpointKind)> {
    let mut out = Vec::new();
    for i in 0..spec.static_images {
        out.push((format!("/static/cam{i}.jpg"), EndpointKind::StaticImage));
    }
    for i in 0..spec.rotating_images {
        out.push((format!("/rotating/cam{i}.jpg"), EndpointKind::RotatingImage));
    }
    for i in 0..spec.flaky_images {
        out.push((format!("/flaky/cam{i}.jpg"), EndpointKind::FlakyImage));
    }
    for i in 0..spec.mjpeg_streams {
        out.push((format!("/mjpg/cam{i}.mjpg"), EndpointKind::MjpegStream));
    }
    for i in 0..spec.hls_streams {
        out.push((format!("/hls/{i}/master.m3u8"), EndpointKind::HlsStream));
    }
    for i in 0..spec.decoy_pages {
        out.push((format!("/decoy/page{i}.html"), EndpointKind::DecoyPage));
    }
    out
}

fn expected_verdict(kind: EndpointKind) -> Option<VerdictLabel> {
    match kind {
        EndpointKind::StaticImage => Some(VerdictLabel::Static),
        EndpointKind::RotatingImage | EndpointKind::FlakyImage => Some(VerdictLabel::Live),
        EndpointKind::MjpegStream | EndpointKind::HlsStream => Some(VerdictLabel::Live),
        EndpointKind::DecoyPage => None,
    }
}

/// Running fleet: the bound address, ground-truth access, and the live
/// manifest. Dropping the handle stops the server.
pub struct FleetHandle {
    pub addr: SocketAddr,
    state: Arc<FleetState>,
    task: tokio::task::JoinHandle<()>,
}

impl FleetHandle {
    pub fn index_url(&self) -> Url {
        self.url("/")
    }

    pub fn url(&self, path: &str) -> Url {
        Url::parse(&format!("http://{}{}", self.addr, path)).expect("fleet url")
    }

    pub fn endpoints(&self) -> Vec<EndpointInfo> {
        self.state
            .endpoints
            .iter()
            .map(|(path, kind)| EndpointInfo {
                path: path.clone(),
                kind: *kind,
                ground_truth: expected_verdict(*kind),
                current_digest: match kind {
                    EndpointKind::StaticImage
                    | EndpointKind::RotatingImage
                    | EndpointKind::FlakyImage => Some(content_digest(&generate_image(
                        self.state.spec.seed,
                        path,
                        self.state.image_bucket(*kind),
                    ))),
                    _ => None,
                },
            })
            .collect()
    }

    /// Expected verdict for a fleet path; error for paths the fleet does not
    /// serve.
    pub fn ground_truth(&self, path: &str) -> Result<Option<VerdictLabel>> {
        self.state
            .endpoints
            .iter()
            .find(|(p, _)| p == path)
            .map(|(_, kind)| expected_verdict(*kind))
            .ok_or_else(|| Error::UnknownFleetPath(path.to_string()))
    }

    pub fn manifest(&self) -> FleetManifest {
        let endpoints = self.endpoints();
        let request_log = self.state.log.lock().expect("log lock").clone();
        let max_concurrency = self
            .state
            .gauges
            .lock()
            .expect("gauge lock")
            .iter()
            .map(|(k, v)| (k.clone(), v.max))
            .collect();
        let global_max_concurrency = self.state.global_gauge.lock().expect("gauge lock").max;
        let emitted_frames = self.state.emitted.lock().expect("emitted lock").clone();
        FleetManifest {
            endpoints,
            request_log,
            max_concurrency,
            global_max_concurrency,
            emitted_frames,
        }
    }

    pub fn spec(&self) -> &FleetSpec {
        &self.state.spec
    }

    pub async fn shutdown(self) {
        self.task.abort();
    }
}

impl Drop for FleetHandle {
    fn drop(&mut self) {
        self.task.abort();
    }
}

/// Bind and serve the fleet described by `spec`.
pub async fn start_fleet(spec: FleetSpec) -> Result<FleetHandle> {
    spec.validate()?;
    let listener = tokio::net::TcpListener::bind(spec.listen)
        .await
        .map_err(|e| Error::io(format!("binding {}", spec.listen), e))?;
    let addr = listener.local_addr().map_err(|e| Error::io("local_addr", e))?;

    let endpoints = endpoint_paths(&spec);
    let state = Arc::new(FleetState {
        spec,
        started: Instant::now(),
        endpoints,
        log: Mutex::new(Vec::new()),
        gauges: Mutex::new(HashMap::new()),
        global_gauge: Mutex::new(GaugeCell::default()),
        emitted: Mutex::new(HashMap::new()),
        flaky_counts: Mutex::new(HashMap::new()),
    });

    let app = Router::new()
        .route("/", get(index_handler))
        .route("/robots.txt", get(robots_handler))
        .route("/__manifest", get(manifest_handler))
        .route("/static/{name}", get(static_handler))
        .route("/rotating/{name}", get(rotating_handler))
        .route("/flaky/{name}", get(flaky_handler))
        .route("/mjpg/{name}", get(mjpeg_handler))
        .route("/hls/{idx}/{file}", get(hls_handler))
        .route("/decoy/{name}", get(decoy_handler))
        .fallback(fallback_handler)
        .with_state(Arc::clone(&state));

    let task = tokio::spawn(async move {
        if let Err(e) = axum::serve(listener, app).await {
            tracing::error!(error = %e, "fleet server stopped");
        }
    });

    Ok(FleetHandle { addr, state, task })
}

fn guarded_response(
    guard: GaugeGuard,
    status: StatusCode,
    content_type: &str,
    bytes: Vec<u8>,
) -> Response {
    // The gauge guard rides inside the body stream so the per-endpoint
    // concurrency window covers body delivery, not just handler execution.
    let stream = futures::stream::once(async move {
        let _guard = guard;
        Ok::<Bytes, Infallible>(Bytes::from(bytes))
    });
    Response::builder()
        .status(status)
        .header(header::CONTENT_TYPE, content_type)
        .body(Body::from_stream(stream))
        .expect("static response")
}

fn not_found(state: &Arc<FleetState>, idx: usize, guard: GaugeGuard) -> Response {
    state.finish(idx, "404");
    guarded_response(
        guard,
        StatusCode::NOT_FOUND,
        "text/plain",
        b"not found".to_vec(),
    )
}

fn parse_indexed(name: &str, prefix: &str, suffix: &str) -> Option<usize> {
    name.strip_prefix(prefix)?
        .strip_suffix(suffix)?
        .parse()
        .ok()
}

async fn index_handler(State(state): State<Arc<FleetState>>, uri: Uri) -> Response {
    let (idx, guard) = state.begin(uri.path());
    let mut body = String::from("<html><head><title>camera index</title></head><body>\n<h1>Network cameras</h1>\n<ul>\n");
    for (path, kind) in &state.endpoints {
        let label = match kind {
            EndpointKind::StaticImage => "image",
            EndpointKind::RotatingImage => "camera",
            EndpointKind::FlakyImage => "camera (flaky)",
            EndpointKind::MjpegStream => "mjpeg stream",
            EndpointKind::HlsStream => "hls stream",
            EndpointKind::DecoyPage => "notes",
        };
        body.push_str(&format!("<li><a href=\"{path}\">{label} {path}</a></li>\n"));
    }
    body.push_str("</ul>\n");
    if let Some((path, _)) = state
        .endpoints
        .iter()
        .find(|(_, k)| matches!(k, EndpointKind::StaticImage | EndpointKind::RotatingImage))
    {
        body.push_str(&format!("<img src=\"{path}\" alt=\"preview\">\n"));
    }
    body.push_str("</body></html>\n");
    state.finish(idx, "200");
    guarded_response(guard, StatusCode::OK, "text/html; charset=utf-8", body.into_bytes())
}

async fn robots_handler(State(state): State<Arc<FleetState>>, uri: Uri) -> Response {
    let (idx, guard) = state.begin(uri.path());
    match &state.spec.robots_body {
        Some(body) => {
            state.finish(idx, "200");
            guarded_response(guard, StatusCode::OK, "text/plain", body.clone().into_bytes())
        }
        None => not_found(&state, idx, guard),
    }
}

async fn manifest_handler(State(state): State<Arc<FleetState>>, uri: Uri) -> Response {
    let (idx, guard) = state.begin(uri.path());
    // Same view as FleetHandle::manifest, served over HTTP for out-of-process
    // consumers.
    let endpoints: Vec<EndpointInfo> = state
        .endpoints
        .iter()
        .map(|(path, kind)| EndpointInfo {
            path: path.clone(),
            kind: *kind,
            ground_truth: expected_verdict(*kind),
            current_digest: match kind {
                EndpointKind::StaticImage
                | EndpointKind::RotatingImage
                | EndpointKind::FlakyImage => Some(content_digest(&generate_image(
                    state.spec.seed,
                    path,
                    state.image_bucket(*kind),
                ))),
                _ => None,
            },
        })
        .collect();
    let manifest = FleetManifest {
        endpoints,
        request_log: state.log.lock().expect("log lock").clone(),
        max_concurrency: state
            .gauges
            .lock()
            .expect("gauge lock")
            .iter()
            .map(|(k, v)| (k.clone(), v.max))
            .collect(),
        global_max_concurrency: state.global_gauge.lock().expect("gauge lock").max,
        emitted_frames: state.emitted.lock().expect("emitted lock").clone(),
    };
    let body = serde_json::to_vec_pretty(&manifest).unwrap_or_default();
    state.finish(idx, "200");
    guarded_response(guard, StatusCode::OK, "application/json", body)
}

async fn image_response(
    state: Arc<FleetState>,
    uri: Uri,
    kind: EndpointKind,
    count: usize,
    name: &str,
) -> Response {
    let (idx, guard) = state.begin(uri.path());
    let cam = parse_indexed(name, "cam", ".jpg");
    match cam {
        Some(i) if i < count => {}
        _ => return not_found(&state, idx, guard),
    }
    if !state.spec.still_delay.is_zero() {
        tokio::time::sleep(state.spec.still_delay).await;
    }
    if kind == EndpointKind::FlakyImage {
        let fail = {
            let mut counts = state.flaky_counts.lock().expect("flaky lock");
            let count = counts.entry(uri.path().to_string()).or_insert(0);
            *count += 1;
            state.spec.flaky_fail_every > 0 && (*count - 1) % state.spec.flaky_fail_every == 0
        };
        if fail {
            state.finish(idx, "500");
            return guarded_response(
                guard,
                StatusCode::INTERNAL_SERVER_ERROR,
                "text/plain",
                b"synthetic failure".to_vec(),
            );
        }
    }
    let bucket = state.image_bucket(kind);
    let bytes = generate_image(state.spec.seed, uri.path(), bucket);
    state.finish(idx, "200");
    guarded_response(guard, StatusCode::OK, "image/jpeg", bytes)
}

async fn static_handler(
    State(state): State<Arc<FleetState>>,
    AxPath(name): AxPath<String>,
    uri: Uri,
) -> Response {
    let count = state.spec.static_images;
    image_response(state, uri, EndpointKind::StaticImage, count, &name).await
}

async fn rotating_handler(
    State(state): State<Arc<FleetState>>,
    AxPath(name): AxPath<String>,
    uri: Uri,
) -> Response {
    let count = state.spec.rotating_images;
    image_response(state, uri, EndpointKind::RotatingImage, count, &name).await
}

async fn flaky_handler(
    State(state): State<Arc<FleetState>>,
    AxPath(name): AxPath<String>,
    uri: Uri,
) -> Response {
    let count = state.spec.flaky_images;
    image_response(state, uri, EndpointKind::FlakyImage, count, &name).await
}

async fn mjpeg_handler(
    State(state): State<Arc<FleetState>>,
    AxPath(name): AxPath<String>,
    uri: Uri,
) -> Response {
    let (idx, guard) = state.begin(uri.path());
    match parse_indexed(&name, "cam", ".mjpg") {
        Some(i) if i < state.spec.mjpeg_streams => {}
        _ => return not_found(&state, idx, guard),
    }
    state.finish(idx, "200 stream");

    struct StreamState {
        fleet: Arc<FleetState>,
        path: String,
        last: Option<u64>,
        _guard: GaugeGuard,
    }
    let stream_state = StreamState {
        fleet: Arc::clone(&state),
        path: uri.path().to_string(),
        last: None,
        _guard: guard,
    };
    let stream = futures::stream::unfold(stream_state, |mut st| async move {
        let period = st.fleet.spec.frame_period;
        let mut bucket = st.fleet.bucket(period);
        if let Some(last) = st.last {
            let next_boundary = st.fleet.started + period.mul_f64((last + 1) as f64);
            tokio::time::sleep_until(next_boundary).await;
            bucket = st.fleet.bucket(period).max(last + 1);
        }
        st.last = Some(bucket);
        let frame = generate_image(st.fleet.spec.seed, &st.path, bucket);
        st.fleet.record_emitted(&st.path, &frame);
        let mut part = Vec::with_capacity(frame.len() + 128);
        part.extend_from_slice(
            format!(
                "--{MJPEG_BOUNDARY}\r\nContent-Type: image/jpeg\r\nContent-Length: {}\r\nX-Frame-Index: {bucket}\r\n\r\n",
                frame.len()
            )
            .as_bytes(),
        );
        part.extend_from_slice(&frame);
        part.extend_from_slice(b"\r\n");
        Some((Ok::<Bytes, Infallible>(Bytes::from(part)), st))
    });

    Response::builder()
        .status(StatusCode::OK)
        .header(
            header::CONTENT_TYPE,
            format!("multipart/x-mixed-replace; boundary={MJPEG_BOUNDARY}"),
        )
        .body(Body::from_stream(stream))
        .expect("mjpeg response")
}

async fn hls_handler(
    State(state): State<Arc<FleetState>>,
    AxPath((stream_idx, file)): AxPath<(usize, String)>,
    uri: Uri,
) -> Response {
    let (idx, guard) = state.begin(uri.path());
    if stream_idx >= state.spec.hls_streams {
        return not_found(&state, idx, guard);
    }
    let endpoint_id = format!("/hls/{stream_idx}");
    let seq = state.bucket(state.spec.segment_period);
    let target = state.spec.segment_period.as_secs_f64();

    if file == "master.m3u8" {
        let body = format!(
            "#EXTM3U\n#EXT-X-VERSION:3\n#EXT-X-STREAM-INF:BANDWIDTH=800000,RESOLUTION={IMAGE_WIDTH}x{IMAGE_HEIGHT}\nplaylist.m3u8\n"
        );
        state.finish(idx, "200");
        return guarded_response(
            guard,
            StatusCode::OK,
            "application/vnd.apple.mpegurl",
            body.into_bytes(),
        );
    }
    if file == "playlist.m3u8" {
        let mut body = format!(
            "#EXTM3U\n#EXT-X-VERSION:3\n#EXT-X-TARGETDURATION:{}\n#EXT-X-MEDIA-SEQUENCE:{seq}\n",
            target.ceil() as u64
        );
        for k in seq..seq + HLS_WINDOW {
            body.push_str(&format!("#EXTINF:{target:.3},\nseg{k}.ts\n"));
        }
        state.finish(idx, "200");
        return guarded_response(
            guard,
            StatusCode::OK,
            "application/vnd.apple.mpegurl",
            body.into_bytes(),
        );
    }
    if let Some(k) = parse_indexed(&file, "seg", ".ts") {
        let bytes = generate_segment(state.spec.seed, &endpoint_id, k as u64);
        state.finish(idx, "200");
        return guarded_response(guard, StatusCode::OK, "video/mp2t", bytes);
    }
    not_found(&state, idx, guard)
}

async fn decoy_handler(
    State(state): State<Arc<FleetState>>,
    AxPath(name): AxPath<String>,
    uri: Uri,
) -> Response {
    let (idx, guard) = state.begin(uri.path());
    let count = state.spec.decoy_pages;
    let page = match parse_indexed(&name, "page", ".html") {
        Some(i) if i < count => i,
        _ => return not_found(&state, idx, guard),
    };
    let mut body = format!(
        "<html><head><title>notes {page}</title></head><body>\n<h1>Operations notes, page {page}</h1>\n<p>Nothing to see here: maintenance schedules, contact addresses, and office hours.</p>\n"
    );
    // Decoys interlink so deeper crawls have somewhere to go.
    if count > 1 {
        for step in [1usize, 2] {
            let next = (page + step) % count;
            if next != page {
                body.push_str(&format!("<p><a href=\"/decoy/page{next}.html\">more notes</a></p>\n"));
            }
        }
    }
    body.push_str("</body></html>\n");
    state.finish(idx, "200");
    guarded_response(guard, StatusCode::OK, "text/html; charset=utf-8", body.into_bytes())
}

async fn fallback_handler(State(state): State<Arc<FleetState>>, uri: Uri) -> Response {
    let (idx, guard) = state.begin(uri.path());
    not_found(&state, idx, guard)
}
