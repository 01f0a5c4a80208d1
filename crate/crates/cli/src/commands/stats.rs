use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::Result;
use camscout_core::archiver::{read_manifest, CaptureStatus, ManifestEntry};
use camscout_core::registry::{compact, read_events, CameraRecord};
use camscout_core::types::{CameraId, MediaKind};
use camscout_core::VerdictLabel;
use clap::Args;

use crate::config::resolve;
use crate::Global;

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Registry file to summarize [default: registry.jsonl]
    #[arg(long)]
    registry: Option<PathBuf>,

    /// Archive manifest to summarize [default: archive/manifest.jsonl]
    #[arg(long)]
    manifest: Option<PathBuf>,
}

/// Prints a summary of the registry and capture manifest to stdout. Missing
/// or unreadable inputs are reported per-file; partial output is still
/// produced and the command exits successfully.
pub async fn run(args: StatsArgs, global: &Global) -> Result<()> {
    let file = &global.file;
    let registry_path = resolve(
        args.registry,
        file.get_str("registry").map(PathBuf::from),
        PathBuf::from("registry.jsonl"),
    );
    let manifest_path = resolve(
        args.manifest,
        file.get_str("manifest").map(PathBuf::from),
        PathBuf::from("archive").join(camscout_core::archiver::MANIFEST_FILE),
    );

    let records: Vec<CameraRecord> = match read_events(&registry_path) {
        Ok(events) => compact(events).into_values().collect(),
        Err(e) => {
            println!("registry {}: unreadable ({e})", registry_path.display());
            Vec::new()
        }
    };
    let entries: Vec<ManifestEntry> = if manifest_path.exists() {
        match read_manifest(&manifest_path) {
            Ok(entries) => entries,
            Err(e) => {
                println!("manifest {}: unreadable ({e})", manifest_path.display());
                Vec::new()
            }
        }
    } else {
        println!("manifest {}: not found", manifest_path.display());
        Vec::new()
    };

    println!("cameras: {}", records.len());
    for kind in MediaKind::all() {
        let of_kind: Vec<&CameraRecord> =
            records.iter().filter(|r| r.media_kind == kind).collect();
        if of_kind.is_empty() {
            continue;
        }
        let count_label = |label: VerdictLabel| {
            of_kind.iter().filter(|r| r.verdict.label == label).count()
        };
        println!(
            "  {kind}: {} (Live {}, Static {}, Indeterminate {})",
            of_kind.len(),
            count_label(VerdictLabel::Live),
            count_label(VerdictLabel::Static),
            count_label(VerdictLabel::Indeterminate),
        );
    }
    println!(
        "enabled for archival: {}",
        records.iter().filter(|r| r.enabled).count()
    );

    let ok = entries
        .iter()
        .filter(|e| e.status == CaptureStatus::Ok)
        .count();
    let errors = entries.len() - ok;
    println!("captures: {} total, {ok} ok, {errors} error", entries.len());
    if !entries.is_empty() {
        println!(
            "success rate: {:.3}",
            ok as f64 / entries.len() as f64
        );
    }

    // Per-camera success rates.
    let mut per_camera: BTreeMap<&CameraId, (usize, usize)> = BTreeMap::new();
    for entry in &entries {
        let slot = per_camera.entry(&entry.camera_id).or_insert((0, 0));
        slot.1 += 1;
        if entry.status == CaptureStatus::Ok {
            slot.0 += 1;
        }
    }
    if !per_camera.is_empty() {
        println!("per-camera success:");
        let endpoints: BTreeMap<&CameraId, &CameraRecord> =
            records.iter().map(|r| (&r.camera_id, r)).collect();
        for (id, (ok, total)) in &per_camera {
            let endpoint = endpoints
                .get(id)
                .map(|r| r.endpoint.to_string())
                .unwrap_or_else(|| "(not in registry)".to_string());
            println!(
                "  {id}: {ok}/{total} ok ({:.3}) {endpoint}",
                *ok as f64 / (*total).max(1) as f64
            );
        }
    }

    let total_bytes: u64 = entries
        .iter()
        .filter(|e| e.status == CaptureStatus::Ok)
        .map(|e| e.bytes_written)
        .sum();
    println!("total bytes archived: {total_bytes}");

    // Rough extrapolation over the observed capture window.
    let span = match (
        entries.iter().map(|e| e.scheduled_for).min(),
        entries.iter().map(|e| e.captured_at).max(),
    ) {
        (Some(first), Some(last)) => (last - first).to_std().ok(),
        _ => None,
    };
    match span {
        Some(span) if span.as_secs_f64() >= 1.0 => {
            let per_week = total_bytes as f64 * (7.0 * 86_400.0) / span.as_secs_f64();
            println!(
                "capture rate: ~{:.0} bytes/week (observed over {:.0?})",
                per_week, span
            );
        }
        _ => println!("capture rate: n/a (no usable capture window)"),
    }
    Ok(())
}
