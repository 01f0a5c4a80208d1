//! Live-versus-static classification of candidate endpoints.
//!
//! A candidate is sampled several times at a fixed interval and adjacent
//! samples are compared three ways: file checksum, fraction of pixels whose
//! value moved more than a channel tolerance, and the change in mean pixel
//! luminance. An endpoint whose content keeps changing is a live camera; one
//! that never changes is a static web asset.

use std::time::Duration;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::crawler::CandidateLink;
use crate::error::{Error, Result};
use crate::fetch::Fetcher;
use crate::mjpeg;
use crate::types::content_digest;

/// Decoded RGB image, row-major, one `[r, g, b]` triple per pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster {
    width: u32,
    height: u32,
    pixels: Vec<[u8; 3]>,
}

impl Raster {
    pub fn new(width: u32, height: u32, pixels: Vec<[u8; 3]>) -> Result<Self> {
        if pixels.len() != (width as usize) * (height as usize) {
            return Err(Error::BadRasterSize {
                len: pixels.len(),
                width,
                height,
            });
        }
        Ok(Raster {
            width,
            height,
            pixels,
        })
    }

    /// Decode an image body (JPEG/PNG/...). Returns None when the bytes are
    /// not a decodable image; classification then degrades to checksum-only
    /// evidence for the affected pairs.
    pub fn decode(body: &[u8]) -> Option<Raster> {
        let img = image::load_from_memory(body).ok()?.into_rgb8();
        let (width, height) = img.dimensions();
        let pixels = img.pixels().map(|p| p.0).collect();
        Some(Raster {
            width,
            height,
            pixels,
        })
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }
}

/// True iff the two bodies hash identically (and therefore are byte-equal).
pub fn checksum_compare(a: &[u8], b: &[u8]) -> bool {
    content_digest(a) == content_digest(b)
}

/// Fraction of pixels in `[0, 1]` whose value moved by more than
/// `channel_tolerance` on any channel.
pub fn percent_diff(a: &Raster, b: &Raster, channel_tolerance: u8) -> Result<f64> {
    if a.dimensions() != b.dimensions() {
        return Err(Error::DimensionMismatch {
            a: a.dimensions(),
            b: b.dimensions(),
        });
    }
    let total = a.pixels.len();
    if total == 0 {
        return Ok(0.0);
    }
    let tol = channel_tolerance as i16;
    let changed = a
        .pixels
        .iter()
        .zip(&b.pixels)
        .filter(|(pa, pb)| {
            (0..3).any(|c| (pa[c] as i16 - pb[c] as i16).abs() > tol)
        })
        .count();
    Ok(changed as f64 / total as f64)
}

/// Mean pixel luminance with Rec. 601 weights: L = 0.299 R + 0.587 G + 0.114 B.
pub fn mean_luminance(a: &Raster) -> f64 {
    if a.pixels.is_empty() {
        return 0.0;
    }
    let sum: f64 = a
        .pixels
        .iter()
        .map(|p| 0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64)
        .sum();
    sum / a.pixels.len() as f64
}

/// Absolute difference of mean luminance between two equal-sized rasters.
pub fn luminance_diff(a: &Raster, b: &Raster) -> Result<f64> {
    if a.dimensions() != b.dimensions() {
        return Err(Error::DimensionMismatch {
            a: a.dimensions(),
            b: b.dimensions(),
        });
    }
    Ok((mean_luminance(a) - mean_luminance(b)).abs())
}

/// How the three per-pair comparison signals combine into one "changed" bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairRule {
    /// Any single comparator reporting change marks the pair changed.
    AnyComparator,
    /// At least two of the three comparators must report change.
    Majority,
}

/// Thresholds and schedule for one identification pass. The paper names the
/// three comparison methods but no values; everything here is configurable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LivenessPolicy {
    pub n_samples: u32,
    pub sample_interval: Duration,
    pub channel_tolerance: u8,
    pub percent_threshold: f64,
    pub luminance_threshold: f64,
    pub pair_rule: PairRule,
    /// Fraction of adjacent pairs that must be changed for a Live verdict.
    pub set_rule: f64,
}

impl Default for LivenessPolicy {
    fn default() -> Self {
        LivenessPolicy {
            n_samples: 3,
            sample_interval: Duration::from_secs(20),
            channel_tolerance: 10,
            percent_threshold: 0.01,
            luminance_threshold: 1.0,
            pair_rule: PairRule::Majority,
            set_rule: 1.0,
        }
    }
}

impl LivenessPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples < 2 {
            return Err(Error::InvalidConfig("n_samples must be >= 2".into()));
        }
        if self.sample_interval.is_zero() {
            return Err(Error::InvalidConfig("sample_interval must be > 0".into()));
        }
        if !(0.0..=1.0).contains(&self.percent_threshold) {
            return Err(Error::InvalidConfig(
                "percent_threshold must be in [0, 1]".into(),
            ));
        }
        if self.luminance_threshold < 0.0 {
            return Err(Error::InvalidConfig(
                "luminance_threshold must be >= 0".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.set_rule) {
            return Err(Error::InvalidConfig("set_rule must be in (0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VerdictLabel {
    Live,
    Static,
    Indeterminate,
}

/// Comparator results for one adjacent sample pair. `percent_changed` and
/// `luminance_delta` are absent when either sample failed to decode or the
/// dimensions differ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairEvidence {
    pub checksum_equal: bool,
    pub percent_changed: Option<f64>,
    pub luminance_delta: Option<f64>,
    pub dimension_mismatch: bool,
    pub changed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LivenessVerdict {
    pub label: VerdictLabel,
    pub evidence: Vec<PairEvidence>,
    pub policy_used: Option<LivenessPolicy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl LivenessVerdict {
    /// Verdict for a candidate that has not been sampled yet.
    pub fn pending() -> Self {
        LivenessVerdict {
            label: VerdictLabel::Indeterminate,
            evidence: Vec::new(),
            policy_used: None,
            note: None,
        }
    }

    pub fn indeterminate(note: impl Into<String>) -> Self {
        LivenessVerdict {
            label: VerdictLabel::Indeterminate,
            evidence: Vec::new(),
            policy_used: None,
            note: Some(note.into()),
        }
    }
}

/// One timestamped capture from a candidate endpoint.
#[derive(Debug, Clone)]
pub struct Sample {
    pub captured_at: DateTime<Utc>,
    pub body: Vec<u8>,
    pub raster: Option<Raster>,
}

impl Sample {
    pub fn new(captured_at: DateTime<Utc>, body: Vec<u8>) -> Self {
        let raster = Raster::decode(&body);
        Sample {
            captured_at,
            body,
            raster,
        }
    }
}

/// Ordered captures from one candidate, the input to [`classify`].
#[derive(Debug, Clone)]
pub struct SampleSet {
    pub candidate: CandidateLink,
    pub samples: Vec<Sample>,
    pub interval: Duration,
}

impl SampleSet {
    pub fn new(candidate: CandidateLink, interval: Duration) -> Self {
        SampleSet {
            candidate,
            samples: Vec::new(),
            interval,
        }
    }

    /// Samples must be appended in strictly increasing capture order.
    pub fn push(&mut self, sample: Sample) -> Result<()> {
        if let Some(last) = self.samples.last() {
            if sample.captured_at <= last.captured_at {
                return Err(Error::InvalidConfig(
                    "samples must be strictly increasing in captured_at".into(),
                ));
            }
        }
        self.samples.push(sample);
        Ok(())
    }
}

fn compare_pair(a: &Sample, b: &Sample, policy: &LivenessPolicy) -> PairEvidence {
    let checksum_equal = checksum_compare(&a.body, &b.body);
    match (&a.raster, &b.raster) {
        (Some(ra), Some(rb)) if ra.dimensions() == rb.dimensions() => {
            // Unwraps cannot fail: dimensions were checked above.
            let percent = percent_diff(ra, rb, policy.channel_tolerance).unwrap();
            let luma = luminance_diff(ra, rb).unwrap();
            let signals = [
                !checksum_equal,
                percent > policy.percent_threshold,
                luma > policy.luminance_threshold,
            ];
            let votes = signals.iter().filter(|s| **s).count();
            let changed = match policy.pair_rule {
                PairRule::AnyComparator => votes >= 1,
                PairRule::Majority => votes >= 2,
            };
            PairEvidence {
                checksum_equal,
                percent_changed: Some(percent),
                luminance_delta: Some(luma),
                dimension_mismatch: false,
                changed,
            }
        }
        (Some(ra), Some(rb)) => {
            // A camera occasionally changes resolution; a static asset never
            // does. Dimension changes therefore count as changed.
            debug_assert_ne!(ra.dimensions(), rb.dimensions());
            PairEvidence {
                checksum_equal,
                percent_changed: None,
                luminance_delta: None,
                dimension_mismatch: true,
                changed: true,
            }
        }
        _ => PairEvidence {
            // Undecodable on at least one side: checksum-only evidence.
            checksum_equal,
            percent_changed: None,
            luminance_delta: None,
            dimension_mismatch: false,
            changed: !checksum_equal,
        },
    }
}

/// Apply the policy to a sample set. Fewer than two samples is always
/// Indeterminate; a set where no adjacent pair changed is Static; a set where
/// at least the `set_rule` fraction of pairs changed is Live.
pub fn classify(samples: &SampleSet, policy: &LivenessPolicy) -> LivenessVerdict {
    if samples.samples.len() < 2 {
        return LivenessVerdict {
            label: VerdictLabel::Indeterminate,
            evidence: Vec::new(),
            policy_used: Some(policy.clone()),
            note: Some(format!(
                "{} sample(s); need at least 2",
                samples.samples.len()
            )),
        };
    }
    let evidence: Vec<PairEvidence> = samples
        .samples
        .windows(2)
        .map(|w| compare_pair(&w[0], &w[1], policy))
        .collect();
    let changed = evidence.iter().filter(|e| e.changed).count();
    let total = evidence.len();
    let label = if changed == 0 {
        VerdictLabel::Static
    } else if (changed as f64) / (total as f64) >= policy.set_rule - 1e-12 {
        VerdictLabel::Live
    } else {
        VerdictLabel::Indeterminate
    };
    LivenessVerdict {
        label,
        evidence,
        policy_used: Some(policy.clone()),
        note: None,
    }
}

/// Fetch `n_samples` bodies from a still-image candidate, spaced by the
/// policy interval. Failed fetches become missing samples, never errors.
pub async fn sample_still(
    candidate: CandidateLink,
    policy: &LivenessPolicy,
    fetcher: &dyn Fetcher,
) -> SampleSet {
    let mut set = SampleSet::new(candidate, policy.sample_interval);
    for i in 0..policy.n_samples {
        if i > 0 {
            tokio::time::sleep(policy.sample_interval).await;
        }
        match fetcher.get(&set.candidate.url).await {
            Ok(resp) if resp.is_success() => {
                let sample = Sample::new(Utc::now(), resp.body);
                if set.push(sample).is_err() {
                    tracing::warn!(url = %set.candidate.url, "dropped out-of-order sample");
                }
            }
            Ok(resp) => {
                tracing::debug!(url = %set.candidate.url, status = resp.status, "sample fetch failed");
            }
            Err(err) => {
                tracing::debug!(url = %set.candidate.url, error = %err, "sample fetch failed");
            }
        }
    }
    set
}

/// Like [`sample_still`], but each sample is one frame pulled from an MJPEG
/// stream. A fresh connection is opened per sample.
pub async fn sample_mjpeg(
    candidate: CandidateLink,
    policy: &LivenessPolicy,
    fetcher: &dyn Fetcher,
) -> SampleSet {
    let mut set = SampleSet::new(candidate, policy.sample_interval);
    for i in 0..policy.n_samples {
        if i > 0 {
            tokio::time::sleep(policy.sample_interval).await;
        }
        match mjpeg::sample_mjpeg_frame(&set.candidate.url, fetcher).await {
            Ok(frame) => {
                let sample = Sample::new(Utc::now(), frame);
                if set.push(sample).is_err() {
                    tracing::warn!(url = %set.candidate.url, "dropped out-of-order sample");
                }
            }
            Err(err) => {
                tracing::debug!(url = %set.candidate.url, error = %err, "frame sample failed");
            }
        }
    }
    set
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::MediaKind;
    use proptest::prelude::*;
    use url::Url;

    fn flat(w: u32, h: u32, rgb: [u8; 3]) -> Raster {
        Raster::new(w, h, vec![rgb; (w * h) as usize]).unwrap()
    }

    fn candidate() -> CandidateLink {
        CandidateLink {
            url: Url::parse("http://a.example/cam.jpg").unwrap(),
            media_kind: MediaKind::StillImage,
            source_page: Url::parse("http://a.example/").unwrap(),
            depth: 0,
        }
    }

    fn set_of(bodies: Vec<Vec<u8>>) -> SampleSet {
        let mut set = SampleSet::new(candidate(), Duration::from_secs(1));
        for (i, body) in bodies.into_iter().enumerate() {
            let at = DateTime::<Utc>::from_timestamp(1_600_000_000 + i as i64, 0).unwrap();
            set.push(Sample::new(at, body)).unwrap();
        }
        set
    }

    fn jpeg_of(raster_seed: u8) -> Vec<u8> {
        // Tiny solid-color JPEG; distinct seeds give distinct pixel content.
        let img = image::RgbImage::from_pixel(16, 16, image::Rgb([raster_seed, 100, 50]));
        let mut out = Vec::new();
        image::codecs::jpeg::JpegEncoder::new_with_quality(&mut out, 90)
            .encode_image(&img)
            .unwrap();
        out
    }

    #[test]
    fn checksum_compare_matches_byte_equality() {
        assert!(checksum_compare(b"abc", b"abc"));
        assert!(!checksum_compare(b"abc", b"abd"));
        assert!(checksum_compare(b"", b""));
    }

    #[test]
    fn percent_diff_identical_is_zero() {
        let a = flat(4, 4, [10, 20, 30]);
        assert_eq!(percent_diff(&a, &a, 10).unwrap(), 0.0);
    }

    #[test]
    fn percent_diff_complement_is_one() {
        let a = flat(4, 4, [10, 20, 30]);
        let b = Raster::new(
            4,
            4,
            a.pixels().iter().map(|p| [255 - p[0], 255 - p[1], 255 - p[2]]).collect(),
        )
        .unwrap();
        assert_eq!(percent_diff(&a, &b, 100).unwrap(), 1.0);
    }

    #[test]
    fn percent_diff_counts_single_changed_pixel() {
        // 2x2 raster, one pixel moved +50 on one channel, tolerance 10.
        // Brute force over the 4 pixels: exactly 1 changed -> 0.25.
        let a = flat(2, 2, [100, 100, 100]);
        let mut px = a.pixels().to_vec();
        px[3][1] = px[3][1] + 50;
        let b = Raster::new(2, 2, px).unwrap();
        assert_eq!(percent_diff(&a, &b, 10).unwrap(), 0.25);
    }

    #[test]
    fn percent_diff_tolerance_is_exclusive() {
        // Delta exactly equal to the tolerance does not count as changed.
        let a = flat(1, 1, [100, 100, 100]);
        let b = flat(1, 1, [110, 100, 100]);
        assert_eq!(percent_diff(&a, &b, 10).unwrap(), 0.0);
        let c = flat(1, 1, [111, 100, 100]);
        assert_eq!(percent_diff(&a, &c, 10).unwrap(), 1.0);
    }

    #[test]
    fn percent_diff_rejects_dimension_mismatch() {
        let a = flat(2, 2, [0, 0, 0]);
        let b = flat(2, 3, [0, 0, 0]);
        assert!(matches!(
            percent_diff(&a, &b, 10),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn mean_luminance_black_and_white() {
        assert_eq!(mean_luminance(&flat(3, 3, [0, 0, 0])), 0.0);
        let white = mean_luminance(&flat(3, 3, [255, 255, 255]));
        assert!((white - 255.0).abs() < 1e-9);
    }

    #[test]
    fn mean_luminance_direct_evaluation() {
        // 0.299*100 + 0.587*50 + 0.114*200 = 82.05
        let l = mean_luminance(&flat(5, 4, [100, 50, 200]));
        assert!((l - 82.05).abs() < 1e-9);
    }

    #[test]
    fn luminance_diff_black_white_is_255() {
        let a = flat(2, 2, [0, 0, 0]);
        let b = flat(2, 2, [255, 255, 255]);
        assert!((luminance_diff(&a, &b).unwrap() - 255.0).abs() < 1e-9);
        assert_eq!(luminance_diff(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn classify_identical_samples_is_static() {
        let body = jpeg_of(42);
        let set = set_of(vec![body.clone(), body.clone(), body]);
        let verdict = classify(&set, &LivenessPolicy::default());
        assert_eq!(verdict.label, VerdictLabel::Static);
        assert_eq!(verdict.evidence.len(), 2);
        assert!(verdict.evidence.iter().all(|e| !e.changed));
    }

    #[test]
    fn classify_changing_samples_is_live() {
        let set = set_of(vec![jpeg_of(0), jpeg_of(120), jpeg_of(250)]);
        let verdict = classify(&set, &LivenessPolicy::default());
        assert_eq!(verdict.label, VerdictLabel::Live);
        for e in &verdict.evidence {
            assert!(!e.checksum_equal);
            assert!(e.percent_changed.unwrap() > 0.01);
        }
    }

    #[test]
    fn classify_single_sample_is_indeterminate() {
        let set = set_of(vec![jpeg_of(1)]);
        let verdict = classify(&set, &LivenessPolicy::default());
        assert_eq!(verdict.label, VerdictLabel::Indeterminate);
    }

    #[test]
    fn classify_empty_set_is_indeterminate() {
        let set = set_of(vec![]);
        assert_eq!(
            classify(&set, &LivenessPolicy::default()).label,
            VerdictLabel::Indeterminate
        );
    }

    #[test]
    fn classify_undecodable_bodies_fall_back_to_checksum() {
        let set = set_of(vec![b"not an image A".to_vec(), b"not an image B".to_vec()]);
        let verdict = classify(&set, &LivenessPolicy::default());
        assert_eq!(verdict.label, VerdictLabel::Live);
        let e = &verdict.evidence[0];
        assert!(!e.checksum_equal);
        assert!(e.percent_changed.is_none());
        assert!(e.luminance_delta.is_none());
    }

    #[test]
    fn classify_identical_undecodable_bodies_is_static() {
        let set = set_of(vec![b"blob".to_vec(), b"blob".to_vec()]);
        assert_eq!(
            classify(&set, &LivenessPolicy::default()).label,
            VerdictLabel::Static
        );
    }

    #[test]
    fn classify_dimension_change_counts_as_changed() {
        let mut small = Vec::new();
        image::codecs::jpeg::JpegEncoder::new_with_quality(&mut small, 90)
            .encode_image(&image::RgbImage::from_pixel(8, 8, image::Rgb([9, 9, 9])))
            .unwrap();
        let set = set_of(vec![jpeg_of(9), small]);
        let verdict = classify(&set, &LivenessPolicy::default());
        assert_eq!(verdict.label, VerdictLabel::Live);
        assert!(verdict.evidence[0].dimension_mismatch);
    }

    #[test]
    fn classify_partial_change_is_indeterminate_under_full_set_rule() {
        let a = jpeg_of(7);
        let set = set_of(vec![a.clone(), a, jpeg_of(200)]);
        let verdict = classify(&set, &LivenessPolicy::default());
        assert_eq!(verdict.label, VerdictLabel::Indeterminate);
    }

    #[test]
    fn classify_is_deterministic_including_evidence() {
        let set = set_of(vec![jpeg_of(3), jpeg_of(77), jpeg_of(160)]);
        let policy = LivenessPolicy::default();
        let a = serde_json::to_vec(&classify(&set, &policy)).unwrap();
        let b = serde_json::to_vec(&classify(&set, &policy)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sample_set_rejects_non_increasing_timestamps() {
        let mut set = SampleSet::new(candidate(), Duration::from_secs(1));
        let at = DateTime::<Utc>::from_timestamp(1_600_000_000, 0).unwrap();
        set.push(Sample::new(at, vec![1])).unwrap();
        assert!(set.push(Sample::new(at, vec![2])).is_err());
    }

    #[test]
    fn policy_validation_catches_bad_values() {
        let mut p = LivenessPolicy::default();
        p.n_samples = 1;
        assert!(p.validate().is_err());
        let mut p = LivenessPolicy::default();
        p.percent_threshold = 1.5;
        assert!(p.validate().is_err());
        assert!(LivenessPolicy::default().validate().is_ok());
    }

    fn arb_raster(w: u32, h: u32) -> impl Strategy<Value = Raster> {
        proptest::collection::vec(proptest::array::uniform3(any::<u8>()), (w * h) as usize)
            .prop_map(move |px| Raster::new(w, h, px).unwrap())
    }

    proptest! {
        #[test]
        fn percent_diff_matches_brute_force(
            a in arb_raster(8, 8),
            b in arb_raster(8, 8),
            tol in any::<u8>(),
        ) {
            // Independent oracle: plain nested loop over pixels and channels.
            let mut changed = 0usize;
            for (pa, pb) in a.pixels().iter().zip(b.pixels()) {
                let mut hit = false;
                for c in 0..3 {
                    let d = (pa[c] as i32 - pb[c] as i32).abs();
                    if d > tol as i32 {
                        hit = true;
                    }
                }
                if hit {
                    changed += 1;
                }
            }
            let expected = changed as f64 / 64.0;
            prop_assert_eq!(percent_diff(&a, &b, tol).unwrap(), expected);
        }

        #[test]
        fn percent_diff_is_symmetric_and_bounded(
            a in arb_raster(8, 8),
            b in arb_raster(8, 8),
            tol in any::<u8>(),
        ) {
            let ab = percent_diff(&a, &b, tol).unwrap();
            let ba = percent_diff(&b, &a, tol).unwrap();
            prop_assert_eq!(ab, ba);
            prop_assert!((0.0..=1.0).contains(&ab));
        }

        #[test]
        fn percent_diff_monotone_in_tolerance(
            a in arb_raster(8, 8),
            b in arb_raster(8, 8),
            t1 in 0u8..255,
        ) {
            let t2 = t1.saturating_add(20);
            let loose = percent_diff(&a, &b, t2).unwrap();
            let tight = percent_diff(&a, &b, t1).unwrap();
            prop_assert!(loose <= tight);
        }

        #[test]
        fn luminance_diff_is_symmetric_and_bounded(
            a in arb_raster(8, 8),
            b in arb_raster(8, 8),
        ) {
            let ab = luminance_diff(&a, &b).unwrap();
            let ba = luminance_diff(&b, &a).unwrap();
            prop_assert!((ab - ba).abs() < 1e-12);
            prop_assert!((0.0..=255.0).contains(&ab));
        }

        #[test]
        fn checksum_compare_equals_byte_equality(
            a in proptest::collection::vec(any::<u8>(), 0..64),
            b in proptest::collection::vec(any::<u8>(), 0..64),
        ) {
            prop_assert_eq!(checksum_compare(&a, &b), a == b);
        }

        #[test]
        fn identical_samples_never_live(
            body in proptest::collection::vec(any::<u8>(), 1..128),
            n in 2usize..5,
            pair_rule in prop_oneof![Just(PairRule::AnyComparator), Just(PairRule::Majority)],
            set_rule in 0.1f64..=1.0,
        ) {
            let set = set_of(vec![body; n]);
            let policy = LivenessPolicy { pair_rule, set_rule, ..LivenessPolicy::default() };
            prop_assert_eq!(classify(&set, &policy).label, VerdictLabel::Static);
        }
    }
}
