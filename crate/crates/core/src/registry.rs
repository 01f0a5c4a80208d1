//! Durable store of discovered cameras.
//!
//! The registry is an append-only line-delimited log of record events; the
//! compacted view (latest record per camera id) is rebuilt by replaying the
//! log on open. Appends are line-atomic: a record is serialized to one line
//! and written with a single call, so a crash can at worst leave one torn
//! trailing line, which is skipped on the next load.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use url::Url;

use crate::crawler::CandidateLink;
use crate::error::{Error, Result};
use crate::liveness::{LivenessVerdict, VerdictLabel};
use crate::types::{derive_camera_id, CameraId, MediaKind};

/// A confirmed or suspected camera: identity, endpoint, and latest verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraRecord {
    pub camera_id: CameraId,
    pub endpoint: Url,
    pub media_kind: MediaKind,
    pub discovered_at: DateTime<Utc>,
    pub source_page: Url,
    pub verdict: LivenessVerdict,
    pub enabled: bool,
}

impl CameraRecord {
    /// Build a record for a freshly discovered candidate. The verdict starts
    /// pending and the record disabled until identification enables it.
    pub fn from_candidate(candidate: &CandidateLink, discovered_at: DateTime<Utc>) -> CameraRecord {
        CameraRecord {
            camera_id: derive_camera_id(&candidate.url),
            endpoint: candidate.url.clone(),
            media_kind: candidate.media_kind,
            discovered_at,
            source_page: candidate.source_page.clone(),
            verdict: LivenessVerdict::pending(),
            enabled: false,
        }
    }

    pub fn with_verdict(mut self, verdict: LivenessVerdict) -> CameraRecord {
        self.enabled =
            self.media_kind.is_capturable() && verdict.label == VerdictLabel::Live;
        self.verdict = verdict;
        self
    }

    pub fn validate(&self) -> Result<()> {
        match self.endpoint.scheme() {
            "http" | "https" | "rtsp" | "rtmp" => {}
            other => {
                return Err(Error::UnsupportedScheme {
                    scheme: other.to_string(),
                    url: self.endpoint.to_string(),
                })
            }
        }
        if self.camera_id != derive_camera_id(&self.endpoint) {
            return Err(Error::InvalidConfig(format!(
                "camera_id {} does not match endpoint {}",
                self.camera_id, self.endpoint
            )));
        }
        if !self.media_kind.is_capturable() && self.enabled {
            return Err(Error::InvalidConfig(format!(
                "{} records must stay disabled",
                self.media_kind
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Upsert,
    Disable,
}

/// One line of the registry log: a full record plus the event kind.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegistryEvent {
    pub event: EventKind,
    #[serde(flatten)]
    pub record: CameraRecord,
}

/// Apply events in order to produce the compacted view. Pure function of the
/// event sequence; [`Registry`] keeps its in-memory view consistent with it.
pub fn compact(events: impl IntoIterator<Item = RegistryEvent>) -> BTreeMap<CameraId, CameraRecord> {
    let mut view = BTreeMap::new();
    for ev in events {
        let mut record = ev.record;
        if ev.event == EventKind::Disable {
            record.enabled = false;
        }
        view.insert(record.camera_id.clone(), record);
    }
    view
}

/// Single-writer, multi-reader camera store backed by one append-only file.
pub struct Registry {
    path: PathBuf,
    file: File,
    view: BTreeMap<CameraId, CameraRecord>,
}

impl Registry {
    /// Open the registry at `path`, creating it if absent, and rebuild the
    /// compacted view from the log.
    pub fn open(path: impl AsRef<Path>) -> Result<Registry> {
        let path = path.as_ref().to_path_buf();
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)
                    .map_err(|e| Error::io(format!("creating {}", parent.display()), e))?;
            }
        }
        let events = if path.exists() {
            read_events(&path)?
        } else {
            Vec::new()
        };
        let view = compact(events);
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
        Ok(Registry { path, file, view })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    fn append(&mut self, event: &RegistryEvent) -> Result<()> {
        let mut line = serde_json::to_string(event)?;
        line.push('\n');
        self.file
            .write_all(line.as_bytes())
            .and_then(|_| self.file.sync_data())
            .map_err(|e| Error::io(format!("appending to {}", self.path.display()), e))
    }

    /// Insert or refresh a camera record. Last writer wins per camera id.
    pub fn upsert(&mut self, record: CameraRecord) -> Result<CameraId> {
        record.validate()?;
        let event = RegistryEvent {
            event: EventKind::Upsert,
            record,
        };
        self.append(&event)?;
        let id = event.record.camera_id.clone();
        self.view.insert(id.clone(), event.record);
        Ok(id)
    }

    /// Mark a camera ineligible for archival without dropping its record.
    pub fn disable(&mut self, id: &CameraId) -> Result<bool> {
        let Some(mut record) = self.view.get(id).cloned() else {
            return Ok(false);
        };
        record.enabled = false;
        let event = RegistryEvent {
            event: EventKind::Disable,
            record,
        };
        self.append(&event)?;
        self.view
            .insert(event.record.camera_id.clone(), event.record);
        Ok(true)
    }

    /// Compacted-view records matching the filter, ordered by camera id.
    pub fn list(&self, kinds: Option<&[MediaKind]>, enabled_only: bool) -> Vec<CameraRecord> {
        self.view
            .values()
            .filter(|r| kinds.map_or(true, |ks| ks.contains(&r.media_kind)))
            .filter(|r| !enabled_only || r.enabled)
            .cloned()
            .collect()
    }

    pub fn get(&self, id: &CameraId) -> Option<&CameraRecord> {
        self.view.get(id)
    }

    pub fn len(&self) -> usize {
        self.view.len()
    }

    pub fn is_empty(&self) -> bool {
        self.view.is_empty()
    }
}

/// Read and parse the event log; see [`crate::jsonl::read_jsonl`] for the
/// torn-tail handling.
pub fn read_events(path: impl AsRef<Path>) -> Result<Vec<RegistryEvent>> {
    crate::jsonl::read_jsonl(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::urlnorm::normalize_url;
    use std::io::Write as _;
    use tempfile::TempDir;

    fn record(url: &str) -> CameraRecord {
        let endpoint = normalize_url(url, None).unwrap();
        let candidate = CandidateLink {
            url: endpoint,
            media_kind: match url {
                u if u.starts_with("rtsp") => MediaKind::RtspLink,
                u if u.ends_with(".m3u8") => MediaKind::HlsStream,
                u if u.ends_with(".mjpg") => MediaKind::MjpegStream,
                _ => MediaKind::StillImage,
            },
            source_page: Url::parse("http://seed.example/").unwrap(),
            depth: 0,
        };
        CameraRecord::from_candidate(&candidate, Utc::now())
    }

    fn verdict(label: VerdictLabel) -> LivenessVerdict {
        LivenessVerdict {
            label,
            evidence: Vec::new(),
            policy_used: None,
            note: None,
        }
    }

    #[test]
    fn upsert_into_empty_store_then_list() {
        let dir = TempDir::new().unwrap();
        let mut reg = Registry::open(dir.path().join("reg.jsonl")).unwrap();
        let rec = record("http://a.example/cam1.jpg");
        let id = reg.upsert(rec.clone()).unwrap();
        let listed = reg.list(None, false);
        assert_eq!(listed.len(), 1);
        assert_eq!(listed[0].camera_id, id);
        assert_eq!(listed[0].endpoint, rec.endpoint);
    }

    #[test]
    fn second_upsert_wins() {
        let dir = TempDir::new().unwrap();
        let mut reg = Registry::open(dir.path().join("reg.jsonl")).unwrap();
        let rec = record("http://a.example/cam1.jpg");
        reg.upsert(rec.clone().with_verdict(verdict(VerdictLabel::Static)))
            .unwrap();
        reg.upsert(rec.clone().with_verdict(verdict(VerdictLabel::Live)))
            .unwrap();
        let listed = reg.list(None, false);
        assert_eq!(listed.len(), 1);
        assert_eq!(listed[0].verdict.label, VerdictLabel::Live);
        assert!(listed[0].enabled);
    }

    #[test]
    fn thousand_distinct_endpoints_get_distinct_ids() {
        let dir = TempDir::new().unwrap();
        let mut reg = Registry::open(dir.path().join("reg.jsonl")).unwrap();
        let mut ids = Vec::new();
        for i in 0..1000 {
            ids.push(
                reg.upsert(record(&format!("http://a.example/cam{i}.jpg")))
                    .unwrap(),
            );
        }
        // Exhaustive pairwise check.
        for i in 0..ids.len() {
            for j in (i + 1)..ids.len() {
                assert_ne!(ids[i], ids[j], "collision between {i} and {j}");
            }
        }
        assert_eq!(reg.len(), 1000);
    }

    #[test]
    fn list_filters_by_kind_and_enabled() {
        let dir = TempDir::new().unwrap();
        let mut reg = Registry::open(dir.path().join("reg.jsonl")).unwrap();
        for i in 0..3 {
            let rec = record(&format!("http://a.example/cam{i}.jpg"))
                .with_verdict(verdict(VerdictLabel::Live));
            reg.upsert(rec).unwrap();
        }
        for i in 0..2 {
            reg.upsert(record(&format!("rtsp://a.example/live{i}")))
                .unwrap();
        }
        assert_eq!(reg.list(Some(&[MediaKind::StillImage]), false).len(), 3);
        assert_eq!(reg.list(Some(&[MediaKind::RtspLink]), false).len(), 2);
        let enabled = reg.list(None, true);
        assert_eq!(enabled.len(), 3);
        assert!(enabled.iter().all(|r| r.media_kind == MediaKind::StillImage));
    }

    #[test]
    fn list_is_ordered_by_camera_id_and_side_effect_free() {
        let dir = TempDir::new().unwrap();
        let mut reg = Registry::open(dir.path().join("reg.jsonl")).unwrap();
        for i in 0..20 {
            reg.upsert(record(&format!("http://a.example/c{i}.jpg")))
                .unwrap();
        }
        let a = reg.list(None, false);
        let b = reg.list(None, false);
        assert_eq!(a, b);
        let mut sorted = a.clone();
        sorted.sort_by(|x, y| x.camera_id.cmp(&y.camera_id));
        assert_eq!(a, sorted);
    }

    #[test]
    fn rtsp_records_cannot_be_enabled() {
        let mut rec = record("rtsp://cam.example/live");
        rec.enabled = true;
        assert!(rec.validate().is_err());
        // with_verdict never enables a non-capturable kind
        let rec = record("rtsp://cam.example/live").with_verdict(verdict(VerdictLabel::Live));
        assert!(!rec.enabled);
        assert!(rec.validate().is_ok());
    }

    #[test]
    fn replay_reproduces_view_at_every_prefix() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("reg.jsonl");
        let urls = [
            "http://a.example/1.jpg",
            "http://a.example/2.jpg",
            "http://a.example/1.jpg",
            "http://b.example/x.mjpg",
            "http://a.example/2.jpg",
        ];
        let mut reg = Registry::open(&path).unwrap();
        for (i, u) in urls.iter().enumerate() {
            let label = if i % 2 == 0 {
                VerdictLabel::Live
            } else {
                VerdictLabel::Static
            };
            reg.upsert(record(u).with_verdict(verdict(label))).unwrap();
            // Replay the log so far and compare to the in-memory view.
            let replayed = compact(read_events(&path).unwrap());
            assert_eq!(replayed.len(), reg.len());
            for (id, rec) in &replayed {
                assert_eq!(reg.get(id).unwrap(), rec);
            }
        }
    }

    #[test]
    fn reopen_reproduces_view() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("reg.jsonl");
        {
            let mut reg = Registry::open(&path).unwrap();
            reg.upsert(record("http://a.example/1.jpg")).unwrap();
            reg.upsert(record("http://a.example/2.mjpg")).unwrap();
            reg.disable(&derive_camera_id(
                &Url::parse("http://a.example/1.jpg").unwrap(),
            ))
            .unwrap();
        }
        let reg = Registry::open(&path).unwrap();
        assert_eq!(reg.len(), 2);
        let one = reg
            .get(&derive_camera_id(
                &Url::parse("http://a.example/1.jpg").unwrap(),
            ))
            .unwrap();
        assert!(!one.enabled);
    }

    #[test]
    fn torn_trailing_line_is_skipped_on_load() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("reg.jsonl");
        {
            let mut reg = Registry::open(&path).unwrap();
            reg.upsert(record("http://a.example/1.jpg")).unwrap();
        }
        let mut f = OpenOptions::new().append(true).open(&path).unwrap();
        f.write_all(b"{\"event\":\"upsert\",\"camera_id\":\"trunc").unwrap();
        drop(f);
        let reg = Registry::open(&path).unwrap();
        assert_eq!(reg.len(), 1);
    }

    #[test]
    fn corruption_in_the_middle_is_an_error() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("reg.jsonl");
        {
            let mut reg = Registry::open(&path).unwrap();
            reg.upsert(record("http://a.example/1.jpg")).unwrap();
        }
        let good_line = std::fs::read_to_string(&path).unwrap();
        std::fs::write(&path, format!("not json\n{good_line}")).unwrap();
        assert!(matches!(
            Registry::open(&path),
            Err(Error::CorruptLog { line: 1, .. })
        ));
    }

    #[test]
    fn disable_unknown_id_is_a_noop() {
        let dir = TempDir::new().unwrap();
        let mut reg = Registry::open(dir.path().join("reg.jsonl")).unwrap();
        let missing = derive_camera_id(&Url::parse("http://no.example/x.jpg").unwrap());
        assert!(!reg.disable(&missing).unwrap());
    }

    #[test]
    fn registry_line_format_is_flat_json_with_event_field() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("reg.jsonl");
        let mut reg = Registry::open(&path).unwrap();
        reg.upsert(record("http://a.example/cam.jpg")).unwrap();
        let line = std::fs::read_to_string(&path).unwrap();
        let value: serde_json::Value = serde_json::from_str(line.trim()).unwrap();
        assert_eq!(value["event"], "upsert");
        assert!(value["camera_id"].is_string());
        assert_eq!(value["media_kind"], "StillImage");
        assert!(value["endpoint"].as_str().unwrap().starts_with("http://"));
        // RFC 3339 UTC timestamp
        let ts = value["discovered_at"].as_str().unwrap();
        assert!(ts.ends_with('Z') || ts.contains("+00:00"), "{ts}");
    }
}
