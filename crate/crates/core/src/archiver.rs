//! Periodic snapshot archival with a bounded worker pool.
//!
//! Each cycle plans one capture job per enabled camera and runs them with at
//! most `workers` in flight; a camera whose previous capture is still running
//! at the next boundary has that cycle's job skipped rather than piled up.
//! Image files are written atomically (temp file, then rename) and every
//! attempt is recorded in an append-only manifest, so a killed run can always
//! be reconciled against the files on disk.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use tokio::sync::Semaphore;
use tokio::task::JoinSet;
use tokio::time::Instant;
use url::Url;

use crate::error::{Error, Result};
use crate::fetch::Fetcher;
use crate::hls;
use crate::jsonl::read_jsonl;
use crate::mjpeg;
use crate::registry::{CameraRecord, Registry};
use crate::types::{content_digest, CameraId, MediaKind};

pub const MANIFEST_FILE: &str = "manifest.jsonl";
const TEMP_DIR: &str = ".tmp";

#[derive(Debug, Clone)]
pub struct ArchiveConfig {
    pub interval: Duration,
    pub workers: usize,
    pub per_camera_timeout: Duration,
    pub retries: u32,
    pub output_root: PathBuf,
    /// Bounded run when set; otherwise runs until externally stopped.
    pub cycles: Option<u64>,
}

impl ArchiveConfig {
    pub fn new(output_root: impl Into<PathBuf>) -> ArchiveConfig {
        ArchiveConfig {
            interval: Duration::from_secs(600),
            workers: std::thread::available_parallelism().map_or(4, |n| n.get()),
            per_camera_timeout: Duration::from_secs(10),
            retries: 1,
            output_root: output_root.into(),
            cycles: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.workers < 1 {
            return Err(Error::InvalidConfig("workers must be >= 1".into()));
        }
        if self.interval.is_zero() {
            return Err(Error::InvalidConfig("interval must be > 0".into()));
        }
        Ok(())
    }
}

/// One capture unit: a camera and the cycle it was scheduled in.
#[derive(Debug, Clone)]
pub struct ArchiveJob {
    pub camera: CameraRecord,
    pub cycle_index: u64,
    pub scheduled_for: DateTime<Utc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaptureStatus {
    Ok,
    Error,
}

/// Durable index record for one capture attempt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub camera_id: CameraId,
    pub cycle_index: u64,
    pub scheduled_for: DateTime<Utc>,
    pub captured_at: DateTime<Utc>,
    pub status: CaptureStatus,
    pub error_kind: Option<String>,
    pub relative_path: Option<String>,
    pub bytes_written: u64,
    pub content_digest: Option<String>,
}

/// Date-partitioned relative path for a stored snapshot:
/// `<camera_id>/<YYYY>/<MM>/<DD>/<HHMMSS>.<ext>` in UTC.
pub fn storage_path(camera_id: &CameraId, captured_at: DateTime<Utc>, extension: &str) -> String {
    use chrono::{Datelike, Timelike};
    format!(
        "{}/{:04}/{:02}/{:02}/{:02}{:02}{:02}.{}",
        camera_id,
        captured_at.year(),
        captured_at.month(),
        captured_at.day(),
        captured_at.hour(),
        captured_at.minute(),
        captured_at.second(),
        extension
    )
}

/// One job per enabled camera of capturable kind, all sharing the cycle's
/// scheduled start time.
pub fn plan_cycle(
    registry: &Registry,
    cycle_index: u64,
    scheduled_for: DateTime<Utc>,
) -> Vec<ArchiveJob> {
    registry
        .list(None, true)
        .into_iter()
        .filter(|r| r.media_kind.is_capturable())
        .map(|camera| ArchiveJob {
            camera,
            cycle_index,
            scheduled_for,
        })
        .collect()
}

/// Serialized writer for the manifest plus the rename step of image writes.
/// Holding one lock across rename-and-append keeps the pair atomic with
/// respect to task cancellation.
pub struct ManifestSink {
    root: PathBuf,
    file: Mutex<File>,
}

impl ManifestSink {
    pub fn open(output_root: &Path) -> Result<ManifestSink> {
        std::fs::create_dir_all(output_root.join(TEMP_DIR))
            .map_err(|e| Error::io(format!("creating {}", output_root.display()), e))?;
        let path = output_root.join(MANIFEST_FILE);
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
        Ok(ManifestSink {
            root: output_root.to_path_buf(),
            file: Mutex::new(file),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn temp_path(&self, job: &ArchiveJob) -> PathBuf {
        self.root.join(TEMP_DIR).join(format!(
            "{}-{}.part",
            job.camera.camera_id, job.cycle_index
        ))
    }

    fn append_locked(file: &mut File, entry: &ManifestEntry) -> Result<()> {
        let mut line = serde_json::to_string(entry)?;
        line.push('\n');
        file.write_all(line.as_bytes())
            .and_then(|_| file.sync_data())
            .map_err(|e| Error::io("appending manifest entry", e))
    }

    pub fn append(&self, entry: &ManifestEntry) -> Result<()> {
        let mut file = self.file.lock().expect("manifest lock poisoned");
        Self::append_locked(&mut file, entry)
    }

    /// Move a staged temp file into its final location and append the Ok
    /// entry, resolving same-second path collisions with a `_N` suffix.
    fn promote(&self, temp: &Path, mut entry: ManifestEntry) -> Result<ManifestEntry> {
        let base_rel = entry
            .relative_path
            .clone()
            .expect("promote requires a relative path");
        let mut file = self.file.lock().expect("manifest lock poisoned");
        let mut rel = base_rel.clone();
        let mut n = 0;
        while self.root.join(&rel).exists() {
            n += 1;
            rel = match base_rel.rsplit_once('.') {
                Some((stem, ext)) => format!("{stem}_{n}.{ext}"),
                None => format!("{base_rel}_{n}"),
            };
        }
        let target = self.root.join(&rel);
        if let Some(parent) = target.parent() {
            std::fs::create_dir_all(parent)
                .map_err(|e| Error::io(format!("creating {}", parent.display()), e))?;
        }
        std::fs::rename(temp, &target)
            .map_err(|e| Error::io(format!("renaming into {}", target.display()), e))?;
        entry.relative_path = Some(rel);
        Self::append_locked(&mut file, &entry)?;
        Ok(entry)
    }
}

fn extension_for(camera: &CameraRecord) -> &'static str {
    match camera.media_kind {
        MediaKind::HlsStream => "ts",
        MediaKind::MjpegStream => "jpg",
        MediaKind::StillImage => {
            let path = camera.endpoint.path().to_ascii_lowercase();
            if path.ends_with(".png") {
                "png"
            } else if path.ends_with(".jpeg") {
                "jpeg"
            } else {
                "jpg"
            }
        }
        MediaKind::RtspLink | MediaKind::RtmpLink => "bin",
    }
}

async fn fetch_media(camera: &CameraRecord, fetcher: &dyn Fetcher) -> Result<Vec<u8>> {
    let url: &Url = &camera.endpoint;
    let body = match camera.media_kind {
        MediaKind::StillImage => fetcher.get(url).await?.into_ok_body()?,
        MediaKind::MjpegStream => mjpeg::sample_mjpeg_frame(url, fetcher).await?,
        MediaKind::HlsStream => {
            let (playlist_url, playlist) = hls::fetch_media_playlist(url, fetcher).await?;
            let segment = hls::latest_segment_url(&playlist_url, &playlist)?;
            fetcher.get(&segment).await?.into_ok_body()?
        }
        MediaKind::RtspLink | MediaKind::RtmpLink => {
            return Err(Error::InvalidConfig(format!(
                "{} endpoints are not capturable",
                camera.media_kind
            )))
        }
    };
    if body.is_empty() {
        return Err(Error::EmptyBody(url.to_string()));
    }
    Ok(body)
}

/// Capture one job: fetch with retries under the per-camera timeout, store
/// the bytes atomically, and append the manifest entry. Failures produce an
/// Error entry; they never abort the cycle.
pub async fn capture(
    job: &ArchiveJob,
    config: &ArchiveConfig,
    fetcher: &dyn Fetcher,
    sink: &ManifestSink,
) -> ManifestEntry {
    let attempts = 1 + config.retries;
    let mut last_err: Option<Error> = None;
    for attempt in 0..attempts {
        if attempt > 0 {
            tokio::time::sleep(Duration::from_millis(50)).await;
        }
        let fetched =
            match tokio::time::timeout(config.per_camera_timeout, fetch_media(&job.camera, fetcher))
                .await
            {
                Ok(Ok(body)) => body,
                Ok(Err(err)) => {
                    last_err = Some(err);
                    continue;
                }
                Err(_) => {
                    last_err = Some(Error::Timeout(config.per_camera_timeout));
                    continue;
                }
            };

        let captured_at = Utc::now();
        let rel = storage_path(&job.camera.camera_id, captured_at, extension_for(&job.camera));
        let temp = sink.temp_path(job);
        if let Err(err) = tokio::fs::write(&temp, &fetched).await {
            last_err = Some(Error::io(format!("writing {}", temp.display()), err));
            continue;
        }
        let entry = ManifestEntry {
            camera_id: job.camera.camera_id.clone(),
            cycle_index: job.cycle_index,
            scheduled_for: job.scheduled_for,
            captured_at,
            status: CaptureStatus::Ok,
            error_kind: None,
            relative_path: Some(rel),
            bytes_written: fetched.len() as u64,
            content_digest: Some(content_digest(&fetched)),
        };
        match sink.promote(&temp, entry) {
            Ok(entry) => return entry,
            Err(err) => {
                last_err = Some(err);
                continue;
            }
        }
    }

    let err = last_err.expect("at least one attempt ran");
    let entry = ManifestEntry {
        camera_id: job.camera.camera_id.clone(),
        cycle_index: job.cycle_index,
        scheduled_for: job.scheduled_for,
        captured_at: Utc::now(),
        status: CaptureStatus::Error,
        error_kind: Some(err.kind_tag().to_string()),
        relative_path: None,
        bytes_written: 0,
        content_digest: None,
    };
    if let Err(append_err) = sink.append(&entry) {
        tracing::error!(error = %append_err, "failed to append error entry");
    }
    entry
}

#[derive(Debug, Clone, Serialize)]
pub struct CycleStats {
    pub cycle_index: u64,
    pub planned: usize,
    pub skipped_stragglers: usize,
    pub ok: usize,
    pub error: usize,
    pub wall: Duration,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ArchiveReport {
    pub cycles_run: u64,
    pub total_ok: u64,
    pub total_error: u64,
    pub cycles: Vec<CycleStats>,
}

/// Run the capture schedule: cycle `k` starts at `t0 + k * interval`, each
/// cycle's jobs run with at most `workers` concurrent captures, and a camera
/// still busy from a previous cycle is skipped for the current one.
pub async fn run(
    registry_path: &Path,
    config: &ArchiveConfig,
    fetcher: Arc<dyn Fetcher>,
) -> Result<ArchiveReport> {
    config.validate()?;
    let temp_dir = config.output_root.join(TEMP_DIR);
    let _ = std::fs::remove_dir_all(&temp_dir);
    let sink = Arc::new(ManifestSink::open(&config.output_root)?);

    let semaphore = Arc::new(Semaphore::new(config.workers));
    let in_flight: Arc<Mutex<HashSet<CameraId>>> = Arc::new(Mutex::new(HashSet::new()));
    // Captures live in a JoinSet owned by this future, so cancelling the run
    // cancels its captures too. The rename-and-append section in the sink is
    // synchronous and therefore never torn by cancellation.
    let mut tasks: JoinSet<(u64, CaptureStatus)> = JoinSet::new();

    let t0 = Instant::now();
    let utc0 = Utc::now();
    let mut stats: BTreeMap<u64, CycleStats> = BTreeMap::new();
    let mut started: HashMap<u64, Instant> = HashMap::new();
    let mut pending: HashMap<u64, usize> = HashMap::new();
    let mut cycles_run = 0u64;

    fn settle(
        joined: std::result::Result<(u64, CaptureStatus), tokio::task::JoinError>,
        stats: &mut BTreeMap<u64, CycleStats>,
        pending: &mut HashMap<u64, usize>,
        started: &HashMap<u64, Instant>,
    ) {
        let (k, status) = match joined {
            Ok(pair) => pair,
            Err(e) => {
                tracing::warn!(error = %e, "capture task failed");
                return;
            }
        };
        if let Some(s) = stats.get_mut(&k) {
            match status {
                CaptureStatus::Ok => s.ok += 1,
                CaptureStatus::Error => s.error += 1,
            }
        }
        let left = pending.entry(k).or_insert(1);
        *left = left.saturating_sub(1);
        if *left == 0 {
            if let (Some(s), Some(at)) = (stats.get_mut(&k), started.get(&k)) {
                s.wall = at.elapsed();
            }
        }
    }

    let mut k = 0u64;
    loop {
        if let Some(limit) = config.cycles {
            if k >= limit {
                break;
            }
        }
        let target = t0 + config.interval.mul_f64(k as f64);
        // Absorb completions while waiting for the cycle boundary.
        loop {
            tokio::select! {
                _ = tokio::time::sleep_until(target) => break,
                joined = tasks.join_next(), if !tasks.is_empty() => {
                    if let Some(j) = joined {
                        settle(j, &mut stats, &mut pending, &started);
                    }
                }
            }
        }

        let scheduled_for = utc0
            + chrono::Duration::from_std(config.interval.mul_f64(k as f64))
                .unwrap_or_else(|_| chrono::Duration::zero());
        let registry = Registry::open(registry_path)?;
        let jobs = plan_cycle(&registry, k, scheduled_for);
        let planned = jobs.len();
        let mut skipped = 0usize;
        started.insert(k, Instant::now());
        stats.insert(
            k,
            CycleStats {
                cycle_index: k,
                planned,
                skipped_stragglers: 0,
                ok: 0,
                error: 0,
                wall: Duration::ZERO,
            },
        );

        for job in jobs {
            let id = job.camera.camera_id.clone();
            {
                let mut busy = in_flight.lock().expect("in_flight lock poisoned");
                if !busy.insert(id.clone()) {
                    skipped += 1;
                    continue;
                }
            }
            pending.entry(k).and_modify(|p| *p += 1).or_insert(1);
            let semaphore = Arc::clone(&semaphore);
            let in_flight = Arc::clone(&in_flight);
            let sink = Arc::clone(&sink);
            let fetcher = Arc::clone(&fetcher);
            let config = config.clone();
            tasks.spawn(async move {
                let _permit = semaphore.acquire_owned().await.expect("semaphore closed");
                let entry = capture(&job, &config, &*fetcher, &sink).await;
                in_flight
                    .lock()
                    .expect("in_flight lock poisoned")
                    .remove(&id);
                (job.cycle_index, entry.status)
            });
        }

        if let Some(s) = stats.get_mut(&k) {
            s.skipped_stragglers = skipped;
        }
        cycles_run += 1;
        k += 1;
    }

    while let Some(joined) = tasks.join_next().await {
        settle(joined, &mut stats, &mut pending, &started);
    }

    let mut report = ArchiveReport {
        cycles_run,
        ..ArchiveReport::default()
    };
    for (_, s) in stats {
        report.total_ok += s.ok as u64;
        report.total_error += s.error as u64;
        report.cycles.push(s);
    }
    Ok(report)
}

pub fn manifest_path(output_root: &Path) -> PathBuf {
    output_root.join(MANIFEST_FILE)
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestEntry>> {
    read_jsonl(path)
}

#[derive(Debug, Clone, Default)]
pub struct ReconcileReport {
    pub ok_entries: usize,
    pub error_entries: usize,
    pub missing_files: Vec<String>,
    pub digest_mismatches: Vec<String>,
    pub orphan_files: Vec<String>,
}

impl ReconcileReport {
    pub fn is_clean(&self) -> bool {
        self.missing_files.is_empty()
            && self.digest_mismatches.is_empty()
            && self.orphan_files.is_empty()
    }
}

fn walk_files(dir: &Path, root: &Path, out: &mut Vec<String>) -> Result<()> {
    let entries =
        std::fs::read_dir(dir).map_err(|e| Error::io(format!("reading {}", dir.display()), e))?;
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(format!("reading {}", dir.display()), e))?;
        let path = entry.path();
        let name = entry.file_name();
        let name = name.to_string_lossy();
        if path.is_dir() {
            if name == TEMP_DIR {
                continue;
            }
            walk_files(&path, root, out)?;
        } else {
            if name == MANIFEST_FILE && path.parent() == Some(root) {
                continue;
            }
            if let Ok(rel) = path.strip_prefix(root) {
                out.push(rel.to_string_lossy().replace('\\', "/"));
            }
        }
    }
    Ok(())
}

/// Check the manifest against the files on disk: every Ok entry's file must
/// exist with matching digest, and no unreferenced file may remain.
pub fn reconcile(output_root: &Path) -> Result<ReconcileReport> {
    let mut report = ReconcileReport::default();
    let manifest = manifest_path(output_root);
    let entries: Vec<ManifestEntry> = if manifest.exists() {
        read_manifest(&manifest)?
    } else {
        Vec::new()
    };

    let mut referenced: HashMap<String, Option<String>> = HashMap::new();
    for entry in &entries {
        match entry.status {
            CaptureStatus::Ok => {
                report.ok_entries += 1;
                if let Some(rel) = &entry.relative_path {
                    referenced.insert(rel.clone(), entry.content_digest.clone());
                    let path = output_root.join(rel);
                    match std::fs::read(&path) {
                        Ok(bytes) => {
                            let digest = content_digest(&bytes);
                            if entry.content_digest.as_deref() != Some(digest.as_str()) {
                                report.digest_mismatches.push(rel.clone());
                            }
                        }
                        Err(_) => report.missing_files.push(rel.clone()),
                    }
                } else {
                    report.missing_files.push(format!(
                        "(entry for {} cycle {} has no path)",
                        entry.camera_id, entry.cycle_index
                    ));
                }
            }
            CaptureStatus::Error => report.error_entries += 1,
        }
    }

    if output_root.exists() {
        let mut on_disk = Vec::new();
        walk_files(output_root, output_root, &mut on_disk)?;
        for rel in on_disk {
            if !referenced.contains_key(&rel) {
                report.orphan_files.push(rel);
            }
        }
    }
    Ok(report)
}
