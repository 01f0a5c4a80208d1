//! Discovery, identification, and archival of live network cameras.
//!
//! The pipeline has three file-coupled stages: a crawler walks seed pages and
//! emits camera-like candidate links; an identification pass samples each
//! candidate over time and separates live cameras from static web assets by
//! checksum, pixel-change, and luminance comparison; an archiver then
//! captures snapshots from every confirmed camera at fixed intervals with a
//! bounded worker pool. A mock camera fleet with known ground truth makes the
//! whole pipeline testable at desk scale.

pub mod archiver;
pub mod crawler;
pub mod error;
pub mod fetch;
pub mod hls;
pub mod identify;
pub mod jsonl;
pub mod liveness;
pub mod mjpeg;
pub mod mockfleet;
pub mod registry;
pub mod robots;
pub mod types;
pub mod urlnorm;

pub use archiver::{
    capture, plan_cycle, reconcile, run as run_archiver, storage_path, ArchiveConfig, ArchiveJob,
    ArchiveReport, CaptureStatus, ManifestEntry, ManifestSink,
};
pub use crawler::{
    crawl, extract_candidate_links, extract_page_links, CandidateLink, CrawlConfig, CrawlOutcome,
    CrawlReport,
};
pub use error::{Error, Result};
pub use fetch::{FetchConfig, FetchResponse, Fetcher, HttpFetcher};
pub use hls::check_hls_live;
pub use identify::{identify_registry, IdentifyOptions, IdentifyOutcome};
pub use liveness::{
    checksum_compare, classify, luminance_diff, mean_luminance, percent_diff, sample_still,
    LivenessPolicy, LivenessVerdict, PairRule, Raster, Sample, SampleSet, VerdictLabel,
};
pub use mjpeg::sample_mjpeg_frame;
pub use mockfleet::{start_fleet, FleetHandle, FleetSpec};
pub use registry::{CameraRecord, Registry};
pub use types::{content_digest, derive_camera_id, CameraId, MediaKind};
pub use urlnorm::normalize_url;
