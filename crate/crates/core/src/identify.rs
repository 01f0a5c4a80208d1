//! Identification pass: sample every registered candidate endpoint over time
//! and write its liveness verdict back to the registry. Candidates are
//! sampled concurrently (each candidate's own samples stay sequential); all
//! registry writes go through the single caller-held writer.

use std::sync::Arc;

use tokio::task::JoinSet;

use crate::crawler::CandidateLink;
use crate::error::Result;
use crate::fetch::Fetcher;
use crate::hls;
use crate::liveness::{classify, sample_mjpeg, sample_still, LivenessPolicy, LivenessVerdict, VerdictLabel};
use crate::registry::{CameraRecord, Registry};
use crate::types::MediaKind;

#[derive(Debug, Clone)]
pub struct IdentifyOptions {
    pub policy: LivenessPolicy,
    /// Candidates sampled concurrently.
    pub concurrency: usize,
}

impl Default for IdentifyOptions {
    fn default() -> Self {
        IdentifyOptions {
            policy: LivenessPolicy::default(),
            concurrency: 16,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct IdentifyOutcome {
    pub examined: usize,
    pub live: usize,
    pub static_assets: usize,
    pub indeterminate: usize,
}

async fn verdict_for(
    record: &CameraRecord,
    policy: &LivenessPolicy,
    fetcher: &dyn Fetcher,
) -> LivenessVerdict {
    let candidate = CandidateLink {
        url: record.endpoint.clone(),
        media_kind: record.media_kind,
        source_page: record.source_page.clone(),
        depth: 0,
    };
    match record.media_kind {
        MediaKind::StillImage => {
            let samples = sample_still(candidate, policy, fetcher).await;
            classify(&samples, policy)
        }
        MediaKind::MjpegStream => {
            let samples = sample_mjpeg(candidate, policy, fetcher).await;
            classify(&samples, policy)
        }
        MediaKind::HlsStream => {
            hls::check_hls_live(&record.endpoint, policy.sample_interval, fetcher).await
        }
        MediaKind::RtspLink | MediaKind::RtmpLink => {
            // Recognized and registered, never probed.
            LivenessVerdict::indeterminate("rtsp/rtmp liveness probing not supported")
        }
    }
}

/// Sample every record in the registry and upsert refreshed verdicts.
/// A record becomes enabled for archival iff its verdict is Live.
pub async fn identify_registry(
    registry: &mut Registry,
    options: &IdentifyOptions,
    fetcher: Arc<dyn Fetcher>,
) -> Result<IdentifyOutcome> {
    options.policy.validate()?;
    let records = registry.list(None, false);
    let mut outcome = IdentifyOutcome {
        examined: records.len(),
        ..IdentifyOutcome::default()
    };

    let semaphore = Arc::new(tokio::sync::Semaphore::new(options.concurrency.max(1)));
    let mut tasks: JoinSet<(CameraRecord, LivenessVerdict)> = JoinSet::new();
    for record in records {
        let fetcher = Arc::clone(&fetcher);
        let policy = options.policy.clone();
        let semaphore = Arc::clone(&semaphore);
        tasks.spawn(async move {
            let _permit = semaphore.acquire_owned().await.expect("semaphore closed");
            let verdict = verdict_for(&record, &policy, &*fetcher).await;
            (record, verdict)
        });
    }

    let mut updated = Vec::new();
    while let Some(joined) = tasks.join_next().await {
        match joined {
            Ok((record, verdict)) => updated.push(record.with_verdict(verdict)),
            Err(e) => tracing::warn!(error = %e, "identify task failed"),
        }
    }
    // Deterministic write order regardless of completion order.
    updated.sort_by(|a, b| a.camera_id.cmp(&b.camera_id));
    for record in updated {
        match record.verdict.label {
            VerdictLabel::Live => outcome.live += 1,
            VerdictLabel::Static => outcome.static_assets += 1,
            VerdictLabel::Indeterminate => outcome.indeterminate += 1,
        }
        registry.upsert(record)?;
    }
    Ok(outcome)
}
