use std::path::PathBuf;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use camscout_core::ArchiveConfig;
use clap::Args;

use crate::config::resolve;
use crate::Global;

#[derive(Debug, Args)]
pub struct ArchiveArgs {
    /// Registry of cameras to capture from [default: registry.jsonl]
    #[arg(long)]
    registry: Option<PathBuf>,

    /// Output directory for images and the manifest [default: archive]
    #[arg(long)]
    out: Option<PathBuf>,

    /// Seconds between capture cycles [default: 600]
    #[arg(long)]
    interval_secs: Option<f64>,

    /// Maximum concurrent captures [default: available cores]
    #[arg(long)]
    workers: Option<usize>,

    /// Number of cycles to run; omit to run until stopped.
    #[arg(long)]
    cycles: Option<u64>,

    /// Per-camera capture timeout in seconds [default: 10]
    #[arg(long)]
    timeout_secs: Option<f64>,

    /// Retries per capture after the first attempt [default: 1]
    #[arg(long)]
    retries: Option<u32>,
}

pub async fn run(args: ArchiveArgs, global: &Global) -> Result<()> {
    let file = &global.file;
    let registry_path = resolve(
        args.registry,
        file.get_str("registry").map(PathBuf::from),
        PathBuf::from("registry.jsonl"),
    );
    if !registry_path.exists() {
        bail!(
            "registry {} does not exist; run discover and identify first",
            registry_path.display()
        );
    }

    let interval = resolve(args.interval_secs, file.get::<f64>("interval_secs")?, 600.0);
    let timeout = resolve(args.timeout_secs, file.get::<f64>("timeout_secs")?, 10.0);
    if interval <= 0.0 || timeout <= 0.0 {
        bail!("interval_secs and timeout_secs must be positive");
    }
    let per_camera_timeout = Duration::from_secs_f64(timeout);

    let defaults = ArchiveConfig::new("archive");
    let config = ArchiveConfig {
        interval: Duration::from_secs_f64(interval),
        workers: resolve(args.workers, file.get::<usize>("workers")?, defaults.workers),
        per_camera_timeout,
        retries: resolve(args.retries, file.get::<u32>("retries")?, defaults.retries),
        output_root: resolve(
            args.out,
            file.get_str("out").map(PathBuf::from),
            PathBuf::from("archive"),
        ),
        cycles: args.cycles.or(file.get::<u64>("cycles")?),
    };

    let fetcher = super::fetcher_for(global, per_camera_timeout)?;
    let report = camscout_core::run_archiver(&registry_path, &config, fetcher)
        .await
        .context("archiver run failed")?;

    for cycle in &report.cycles {
        tracing::debug!(
            cycle = cycle.cycle_index,
            planned = cycle.planned,
            skipped = cycle.skipped_stragglers,
            ok = cycle.ok,
            error = cycle.error,
            wall_ms = cycle.wall.as_millis() as u64,
            "cycle finished"
        );
    }
    tracing::info!(
        cycles = report.cycles_run,
        ok = report.total_ok,
        errors = report.total_error,
        out = %config.output_root.display(),
        "archive run finished"
    );
    Ok(())
}
